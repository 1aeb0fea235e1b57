#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lesstrees/matrix.hpp"

namespace lesstrees {

/// Feature matrix plus encoded labels. `classes[c]` is the original label
/// text of code c; codes follow the class ordering (numeric when every label
/// parses as a number, lexicographic otherwise). Unlabeled data has empty
/// `labels` and `classes`.
struct LabeledDataset {
    DataMatrix matrix;
    std::vector<int> labels;
    std::vector<std::string> classes;

    bool has_labels() const noexcept { return !labels.empty(); }
    std::size_t num_classes() const noexcept { return classes.size(); }
};

/// Encodes label strings into codes 0..C-1 under the class ordering.
std::pair<std::vector<int>, std::vector<std::string>> encode_labels(const std::vector<std::string>& raw);

struct CsvOptions {
    /// Column index (negative counts from the end, -1 is last) or header
    /// name. std::nullopt loads an unlabeled file.
    std::optional<std::string> label_column = std::string("-1");
    bool has_header = false;
    char delimiter = ',';
};

LabeledDataset load_csv(const std::string& path, const CsvOptions& options = {});

/// Writes features then a trailing "label" column; doubles are written in
/// shortest round-trip form.
void write_csv(const LabeledDataset& data, const std::string& path, bool header = true, char delimiter = ',');

/// "label idx:val ..." lines with 1-based, strictly increasing indices.
/// Absent entries are 0. d is the largest index seen, or `n_features` when
/// given (indices beyond it are an error).
LabeledDataset load_libsvm(const std::string& path, std::optional<std::size_t> n_features = std::nullopt);

void write_libsvm(const LabeledDataset& data, const std::string& path);

/// Seeded shuffle, then the first round(n * test_fraction) rows go to test.
std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& data, double test_fraction,
                                                           std::uint64_t seed);

/// Scales every column with nonzero variance to unit variance (no
/// centering). Changes norm and leverage distributions.
LabeledDataset standardize_columns(const LabeledDataset& data);

struct PlantedConfig {
    std::size_t n = 2000;
    std::size_t d = 500;
    std::size_t n_informative = 20;
    std::size_t class_count = 2;
    double noise_scale = 0.3;
    double amplification = 10.0;
    std::uint64_t seed = 1;
};

struct PlantedDataset {
    LabeledDataset data;
    std::vector<std::size_t> informative;  // sorted column indices
};

/// Synthetic data with a planted set of informative columns.
///
/// Each informative column j carries a hidden sign s_j = +-1 and is observed
/// as amplification * (s_j + noise_scale * z) / sqrt(1 + noise_scale^2), so
/// its mean square is amplification^2. Every other column is N(0, 1) noise.
/// Informative columns are paired in column order; each pair yields the bit
/// XOR(s_a > 0, s_b > 0) (an odd leftover contributes its own sign bit).
/// With G bits, count = number of set bits and b0 = first bit, the label is
/// floor(class_count * (count + b0/2) / (G + 1)), a majority vote over the
/// pair XORs for two classes and plain XOR for a single pair.
PlantedDataset make_planted_dataset(const PlantedConfig& config);

}  // namespace lesstrees

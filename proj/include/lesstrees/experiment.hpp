#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "lesstrees/data_io.hpp"
#include "lesstrees/tree.hpp"

namespace lesstrees {

inline constexpr int kExperimentSchemaVersion = 1;
inline constexpr const char* kCurvesCsvHeader = "scheme,k,rep,tree_index,cum_time_s,test_error,cum_nodes";

struct DatasetSource {
    enum class Kind { planted, csv, libsvm };
    Kind kind = Kind::planted;
    std::string path;
    CsvOptions csv;
    PlantedConfig planted;
    bool standardize = false;
};

LabeledDataset load_source(const DatasetSource& source);

struct ExperimentConfig {
    DatasetSource source;
    std::vector<std::string> schemes{"leverage", "uniform", "norm", "rf"};
    std::vector<std::size_t> k_values;  // empty: ceil(sqrt(d)) and 2 * ceil(sqrt(d))
    std::size_t trees = 100;
    std::size_t repetitions = 30;
    double epsilon_target = 0.3;
    double time_budget_secs = 3600.0;
    std::size_t epsilon_max_trees = 1000;
    std::uint64_t seed = 1;
    std::string output_dir = "bench_out";
    double test_fraction = 0.3;
    std::size_t max_rank = 50;
    TreeParams tree;
    int threads = 0;
    bool include_scores_time = false;
    bool run_curves = true;
    bool run_nodes = true;

    /// Throws InvalidArgument on out-of-range fields.
    void validate() const;
};

/// Parses the flat "key = value" format ('#' starts a comment) on top of
/// `base`. Unknown keys are an error.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});
/// Applies a single key/value (shared by the config file and CLI overrides).
void apply_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);

std::vector<std::size_t> default_k_values(std::size_t d);

/// One point on one repetition's curve.
struct ExperimentRecord {
    std::string scheme;
    std::size_t k = 0;
    std::size_t rep = 0;
    std::size_t tree_index = 0;  // 1-based ensemble size
    double cum_time_s = 0.0;     // sum of per-tree training durations (+ scoring time if configured)
    double test_error = 0.0;     // majority vote of the first tree_index trees
    std::size_t cum_nodes = 0;
    std::uint64_t seed = 0;      // ensemble seed of the repetition
};

/// Mean over repetitions at one (scheme, k, tree_index).
struct CurvePoint {
    std::string scheme;
    std::size_t k = 0;
    std::size_t tree_index = 0;
    double mean_error = 0.0;
    double std_error = 0.0;
    double mean_time_s = 0.0;
    double mean_nodes = 0.0;
    std::size_t repetitions = 0;
};

struct CurveResult {
    std::vector<ExperimentRecord> records;
    std::vector<CurvePoint> means;
};

std::vector<CurvePoint> mean_curves(const std::vector<ExperimentRecord>& records);

/// For every scheme, k and repetition: grow `trees` trees and record the
/// cumulative training time and prefix-vote test error after each one.
CurveResult run_error_vs_time(const ExperimentConfig& config, const LabeledDataset& data);
/// Same instrumentation as run_error_vs_time; the tree count is the x axis.
CurveResult run_error_vs_trees(const ExperimentConfig& config, const LabeledDataset& data);

enum class EpsilonStatus { reached, exceeded_budget, tree_limit };
std::string to_string(EpsilonStatus status);

struct NodesToEpsilon {
    std::string scheme;
    std::size_t k = 0;
    EpsilonStatus status = EpsilonStatus::exceeded_budget;
    std::size_t trees = 0;       // ensemble size at stop
    std::size_t nodes = 0;       // mean total node count at stop (rounded)
    double mean_error = 1.0;     // mean prefix error at stop
    double elapsed_s = 0.0;      // mean logical training time at stop
};

/// Grows every repetition's ensemble one tree at a time until the mean
/// prefix test error reaches epsilon_target. Before each tree the mean
/// elapsed training time is compared with time_budget_secs, so a zero budget
/// stops immediately; epsilon_max_trees caps the ensemble size.
std::vector<NodesToEpsilon> run_nodes_to_epsilon(const ExperimentConfig& config, const LabeledDataset& data);

/// Appends records under kCurvesCsvHeader. An existing file must carry the
/// same header; a new file gets one.
void write_curves_csv(const std::string& path, const std::vector<ExperimentRecord>& records);

nlohmann::json summary_json(const ExperimentConfig& config, const LabeledDataset& data, const CurveResult* curves,
                            const std::vector<NodesToEpsilon>* nodes);

}  // namespace lesstrees

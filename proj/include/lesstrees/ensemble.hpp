#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lesstrees/feature_scores.hpp"
#include "lesstrees/matrix.hpp"
#include "lesstrees/sampling.hpp"
#include "lesstrees/tree.hpp"

namespace lesstrees {

/// Which ensemble family produced a model.
enum class EnsembleKind { less, random_forest };

struct LessOptions {
    std::size_t trees = 100;
    std::size_t k = 50;
    Scheme scheme = Scheme::leverage;
    TreeParams tree;  // split_mode is forced to fixed_subset
    std::uint64_t seed = 1;
    std::size_t max_rank = 50;
    bool with_replacement = false;  // duplicates are dropped, so trees may see fewer than k features
    int threads = 0;                // 0: OpenMP default
};

struct RfOptions {
    std::size_t trees = 100;
    TreeParams tree;  // split_mode is forced to per_node_uniform with m = ceil(sqrt(d))
    std::uint64_t seed = 1;
    int threads = 0;
};

struct EnsembleModel {
    EnsembleKind kind = EnsembleKind::less;
    Scheme scheme = Scheme::uniform;  // LESS only
    std::size_t k = 0;                // features per tree (LESS) or per node (RF)
    std::uint64_t seed = 0;
    std::size_t n_features = 0;
    std::size_t num_classes = 0;
    std::size_t max_rank = 0;
    std::size_t effective_rank = 0;
    bool with_replacement = false;
    bool degenerate_fallback = false;  // scores fell back to uniform
    TreeParams params;
    std::vector<DecisionTree> trees;
    std::vector<std::string> classes;  // decoding table, optional

    // Timing metadata; not part of model identity or serialization.
    double scores_seconds = 0.0;
    std::vector<double> tree_seconds;

    std::string scheme_name() const;
};

/// ceil(sqrt(d)), the per-node candidate count of the forest baseline.
std::size_t rf_candidates(std::size_t d);

/// Trains tree `index` of a LESS ensemble given the precomputed distribution.
/// Uses the child generator `index` of `seed`, so trees are independent of
/// training order.
DecisionTree train_less_tree(const DataMatrix& a, std::span<const int> labels, std::size_t num_classes,
                             const FeatureDistribution& dist, const LessOptions& options, std::size_t index);

DecisionTree train_rf_tree(const DataMatrix& a, std::span<const int> labels, std::size_t num_classes,
                           const RfOptions& options, std::size_t index, TreeTrainStats* stats = nullptr);

/// Computes the feature distribution once on `a`, then grows `trees`
/// independent trees, each on k features drawn from it.
EnsembleModel train_less(const DataMatrix& a, std::span<const int> labels, std::size_t num_classes,
                         const LessOptions& options);

/// Forest baseline: no bagging, ceil(sqrt(d)) uniform candidates per node.
EnsembleModel train_rf(const DataMatrix& a, std::span<const int> labels, std::size_t num_classes,
                       const RfOptions& options);

/// Most frequent class among the first `prefix` trees (all when 0 or larger
/// than the ensemble). Ties go to the smallest class code.
int predict_majority(const EnsembleModel& model, std::span<const double> sample, std::size_t prefix = 0);

/// Class code chosen from per-class vote counts (smallest code wins ties).
int vote_winner(std::span<const std::size_t> votes);

/// predict_majority for every row of `a`.
std::vector<int> predict_all(const EnsembleModel& model, const DataMatrix& a, std::size_t prefix = 0,
                             int threads = 0);

/// Leaf code of `tree` for every row of `a`.
namespace serial {
std::vector<int> predict_rows(const DecisionTree& tree, const DataMatrix& a);
}
namespace parallel {
std::vector<int> predict_rows(const DecisionTree& tree, const DataMatrix& a, int threads = 0);
}

std::size_t total_node_count(const EnsembleModel& model);

/// Fraction of rows whose majority vote differs from `labels`.
double classification_error(const EnsembleModel& model, const DataMatrix& a, std::span<const int> labels,
                            std::size_t prefix = 0, int threads = 0);

}  // namespace lesstrees

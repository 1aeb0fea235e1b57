#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lesstrees/matrix.hpp"
#include "lesstrees/rng.hpp"
#include "lesstrees/sampling.hpp"

namespace lesstrees {

/// Samples with value <= threshold go left.
struct SplitRule {
    std::size_t feature = 0;  // index into the tree's own feature space
    double threshold = 0.0;

    friend bool operator==(const SplitRule&, const SplitRule&) = default;
};

struct SplitCandidate {
    SplitRule rule;
    double impurity_decrease = 0.0;
};

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t label = -1;  // class code, leaves only

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

enum class SplitMode {
    fixed_subset,      // every node searches all features the tree was given
    per_node_uniform,  // every node searches m uniformly drawn features
};

struct TreeParams {
    std::size_t min_samples_split = 2;
    std::optional<std::size_t> max_depth;  // root has depth 0; empty = unlimited
    SplitMode split_mode = SplitMode::fixed_subset;
    std::size_t candidates_per_node = 0;  // m, per_node_uniform only
};

/// Columns of a data matrix as seen by one tree. Column c of the view is
/// column `feature_map[c]` of the source (identity when the map is empty).
class FeatureView {
public:
    explicit FeatureView(const DataMatrix& source);
    FeatureView(const DataMatrix& source, std::span<const std::size_t> feature_map);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return columns_.size(); }
    std::span<const double> column(std::size_t c) const noexcept { return columns_[c]; }
    const std::vector<std::size_t>& feature_map() const noexcept { return feature_map_; }

private:
    std::size_t rows_;
    std::vector<std::span<const double>> columns_;
    std::vector<std::size_t> feature_map_;
};

/// Optional instrumentation filled during training.
struct TreeTrainStats {
    std::vector<std::size_t> candidates_per_split_search;
};

class DecisionTree {
public:
    DecisionTree() = default;
    /// Validates the node structure (binary, acyclic, every node reachable
    /// exactly once, labels in [0, num_classes)). `feature_map` translates
    /// node features to global columns; empty means identity.
    DecisionTree(std::vector<TreeNode> nodes, std::vector<std::size_t> feature_map, std::size_t num_classes);

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    const std::vector<std::size_t>& feature_map() const noexcept { return feature_map_; }
    std::size_t num_classes() const noexcept { return num_classes_; }
    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t internal_count() const noexcept;
    std::size_t leaf_count() const noexcept { return node_count() - internal_count(); }
    std::size_t depth() const;

    /// Global column referenced by a node feature.
    std::size_t global_feature(std::size_t local) const noexcept {
        return feature_map_.empty() ? local : feature_map_[local];
    }
    /// Minimum sample length that covers every referenced feature.
    std::size_t required_features() const noexcept { return required_features_; }

    /// Class code of the leaf reached by `sample` (global feature order).
    int predict(std::span<const double> sample) const;

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

private:
    std::vector<TreeNode> nodes_;
    std::vector<std::size_t> feature_map_;
    std::size_t num_classes_ = 0;
    std::size_t required_features_ = 0;
};

/// 1 - sum_c p_c^2. Throws InvalidArgument on an empty label set.
double gini_impurity(std::span<const int> labels);

/// Best (feature, midpoint) over `candidates` by weighted Gini decrease, on
/// the node holding `samples`. `labels` are class codes in [0, num_classes)
/// indexed by sample id. Returns nothing unless some split strictly lowers
/// impurity. Ties go to the lowest feature index, then the lowest threshold.
std::optional<SplitCandidate> best_split(const FeatureView& view, std::span<const int> labels,
                                         std::size_t num_classes, std::span<const std::size_t> samples,
                                         std::span<const std::size_t> candidates);

/// Convenience form over every row of `columns`; labels may be any integers.
std::optional<SplitCandidate> best_split(const DataMatrix& columns, std::span<const int> labels,
                                         std::span<const std::size_t> candidates);

/// Grows a CART tree on `view`. Stops at pure nodes, below
/// min_samples_split, at max_depth, or when no feature has two distinct
/// values. Impure nodes whose best split has zero gain are still split (on
/// the tie-break winner) so a fully grown tree fits conflict-free data
/// exactly. Leaves take the majority class, ties to the smallest code.
/// `rng` is only consumed in per_node_uniform mode.
DecisionTree train_tree(const FeatureView& view, std::span<const int> labels, std::size_t num_classes,
                        const TreeParams& params, SeededRng& rng, TreeTrainStats* stats = nullptr);

namespace reference {
/// Same contract as train_tree, but sorts each candidate feature at every
/// node instead of maintaining presorted orders. Kept to cross-check the
/// presorted path; both produce identical trees.
DecisionTree train_tree(const FeatureView& view, std::span<const int> labels, std::size_t num_classes,
                        const TreeParams& params, SeededRng& rng, TreeTrainStats* stats = nullptr);
}  // namespace reference

}  // namespace lesstrees

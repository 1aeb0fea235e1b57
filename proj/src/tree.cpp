#include "lesstrees/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "lesstrees/error.hpp"

namespace lesstrees {

namespace {

using i128 = __int128;

// Split quality as the exact fraction num/den = sum_c L_c^2/nL + sum_c R_c^2/nR.
// Maximizing it maximizes the Gini decrease; comparing by cross
// multiplication keeps tie-breaking exact.
struct ScoredSplit {
    bool valid = false;
    SplitRule rule;
    i128 num = 0;
    i128 den = 1;
};

struct SearchScratch {
    std::vector<std::pair<double, int>> pairs;
    std::vector<std::int64_t> left;
    std::vector<std::int64_t> right;
};

double midpoint(double lo, double hi) {
    const double mid = lo + (hi - lo) / 2.0;
    // Adjacent doubles: the midpoint rounds onto `hi`; fall back to `lo` so the
    // partition stays correct.
    return mid < hi ? mid : lo;
}

// Sweeps thresholds over one feature whose node samples are visited in
// ascending value order via value_at(i) / label_at(i).
template <class ValueAt, class LabelAt>
void sweep_sorted(std::size_t feature, std::size_t count, ValueAt value_at, LabelAt label_at,
                  std::span<const std::int64_t> parent_counts, std::int64_t parent_sq, SearchScratch& scratch,
                  ScoredSplit& best) {
    if (count < 2 || value_at(0) == value_at(count - 1)) return;

    const auto n = static_cast<std::int64_t>(count);
    scratch.left.assign(parent_counts.size(), 0);
    scratch.right.assign(parent_counts.begin(), parent_counts.end());
    std::int64_t left_sq = 0;
    std::int64_t right_sq = parent_sq;
    double hi = value_at(0);
    for (std::int64_t i = 0; i + 1 < n; ++i) {
        const auto c = static_cast<std::size_t>(label_at(static_cast<std::size_t>(i)));
        left_sq += 2 * scratch.left[c] + 1;
        ++scratch.left[c];
        right_sq -= 2 * scratch.right[c] - 1;
        --scratch.right[c];

        const double lo = hi;
        hi = value_at(static_cast<std::size_t>(i + 1));
        if (lo == hi) continue;

        const std::int64_t n_left = i + 1;
        const std::int64_t n_right = n - n_left;
        const i128 num = static_cast<i128>(n_right) * left_sq + static_cast<i128>(n_left) * right_sq;
        const i128 den = static_cast<i128>(n_left) * n_right;
        if (!best.valid || num * best.den > best.num * den) {
            best.valid = true;
            best.rule = {feature, midpoint(lo, hi)};
            best.num = num;
            best.den = den;
        }
    }
}

// Sorts the node's (value, label) pairs for one feature, then sweeps.
void scan_feature(const FeatureView& view, std::span<const int> labels, std::span<const std::size_t> samples,
                  std::size_t feature, std::span<const std::int64_t> parent_counts, std::int64_t parent_sq,
                  SearchScratch& scratch, ScoredSplit& best) {
    const auto column = view.column(feature);
    auto& pairs = scratch.pairs;
    pairs.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) pairs[i] = {column[samples[i]], labels[samples[i]]};
    std::sort(pairs.begin(), pairs.end());
    sweep_sorted(
        feature, pairs.size(), [&](std::size_t i) { return pairs[i].first; },
        [&](std::size_t i) { return pairs[i].second; }, parent_counts, parent_sq, scratch, best);
}

struct NodeCounts {
    std::vector<std::int64_t> counts;
    std::int64_t sum_sq = 0;
    std::size_t majority = 0;
    bool pure = false;
};

NodeCounts count_classes(std::span<const int> labels, std::size_t num_classes, std::span<const std::size_t> samples) {
    NodeCounts out;
    out.counts.assign(num_classes, 0);
    for (std::size_t s : samples) ++out.counts[static_cast<std::size_t>(labels[s])];
    std::size_t nonzero = 0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        out.sum_sq += out.counts[c] * out.counts[c];
        if (out.counts[c] > 0) ++nonzero;
        if (out.counts[c] > out.counts[out.majority]) out.majority = c;
    }
    out.pure = nonzero <= 1;
    return out;
}

bool positive_gain(const ScoredSplit& split, const NodeCounts& node, std::size_t n) {
    return split.num * static_cast<i128>(n) > static_cast<i128>(node.sum_sq) * split.den;
}

double decrease_of(const ScoredSplit& split, const NodeCounts& node, std::size_t n) {
    const i128 numerator = split.num * static_cast<i128>(n) - static_cast<i128>(node.sum_sq) * split.den;
    const long double denominator =
        static_cast<long double>(split.den) * static_cast<long double>(n) * static_cast<long double>(n);
    return static_cast<double>(static_cast<long double>(numerator) / denominator);
}

void validate_labels(std::span<const int> labels, std::size_t num_classes) {
    for (int y : labels)
        if (y < 0 || static_cast<std::size_t>(y) >= num_classes)
            throw InvalidArgument("label code " + std::to_string(y) + " outside [0, " + std::to_string(num_classes) +
                                  ")");
}

class Grower {
public:
    Grower(const FeatureView& view, std::span<const int> labels, std::size_t num_classes, const TreeParams& params,
           SeededRng& rng, TreeTrainStats* stats, bool presort)
        : view_(view),
          labels_(labels),
          num_classes_(num_classes),
          params_(params),
          rng_(rng),
          stats_(stats),
          presort_(presort && params.split_mode == SplitMode::fixed_subset) {
        const std::size_t n = view.rows();
        samples_.resize(n);
        std::iota(samples_.begin(), samples_.end(), 0);
        buffer_.resize(n);
        all_features_.resize(view.cols());
        std::iota(all_features_.begin(), all_features_.end(), 0);
        if (presort_) build_presorted();
    }

    std::vector<TreeNode> grow() {
        grow_node(0, samples_.size(), 0);
        return std::move(nodes_);
    }

private:
    // Row ids of every feature sorted by (value, id). Each node owns the same
    // [begin, end) window in every feature's list.
    void build_presorted() {
        const std::size_t n = view_.rows();
        sorted_.resize(view_.cols() * n);
        go_left_.assign(n, 0);
        for (std::size_t f = 0; f < view_.cols(); ++f) {
            auto first = sorted_.begin() + static_cast<std::ptrdiff_t>(f * n);
            std::iota(first, first + static_cast<std::ptrdiff_t>(n), std::uint32_t{0});
            const auto column = view_.column(f);
            std::sort(first, first + static_cast<std::ptrdiff_t>(n), [&](std::uint32_t a, std::uint32_t b) {
                return column[a] < column[b] || (column[a] == column[b] && a < b);
            });
        }
    }

    std::int32_t grow_node(std::size_t begin, std::size_t end, std::size_t depth) {
        const auto index = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();
        const std::span<const std::size_t> node_samples(samples_.data() + begin, end - begin);
        const NodeCounts counts = count_classes(labels_, num_classes_, node_samples);
        nodes_[static_cast<std::size_t>(index)].label = static_cast<std::int32_t>(counts.majority);

        const bool depth_capped = params_.max_depth && depth >= *params_.max_depth;
        if (counts.pure || node_samples.size() < params_.min_samples_split || depth_capped) return index;

        const ScoredSplit split = search(begin, end, counts);
        if (!split.valid) return index;

        const auto column = view_.column(split.rule.feature);
        std::size_t n_left = 0;
        std::size_t n_right = 0;
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t s = samples_[i];
            if (column[s] <= split.rule.threshold)
                samples_[begin + n_left++] = s;
            else
                buffer_[n_right++] = s;
        }
        std::copy_n(buffer_.begin(), n_right, samples_.begin() + static_cast<std::ptrdiff_t>(begin + n_left));
        if (presort_) partition_presorted(begin, end, n_left);

        const std::int32_t left = grow_node(begin, begin + n_left, depth + 1);
        const std::int32_t right = grow_node(begin + n_left, end, depth + 1);
        auto& node = nodes_[static_cast<std::size_t>(index)];
        node.feature = static_cast<std::int32_t>(split.rule.feature);
        node.threshold = split.rule.threshold;
        node.left = left;
        node.right = right;
        node.label = -1;
        return index;
    }

    // Stable partition of every feature's window, preserving sorted order.
    void partition_presorted(std::size_t begin, std::size_t end, std::size_t n_left) {
        for (std::size_t i = begin; i < end; ++i) go_left_[samples_[i]] = i < begin + n_left ? 1 : 0;
        const std::size_t n = view_.rows();
        for (std::size_t f = 0; f < view_.cols(); ++f) {
            std::uint32_t* window = sorted_.data() + f * n;
            std::size_t l = begin;
            std::size_t r = 0;
            for (std::size_t i = begin; i < end; ++i) {
                const std::uint32_t s = window[i];
                if (go_left_[s])
                    window[l++] = s;
                else
                    buffer_[r++] = s;
            }
            for (std::size_t i = 0; i < r; ++i) window[l + i] = static_cast<std::uint32_t>(buffer_[i]);
        }
    }

    ScoredSplit search(std::size_t begin, std::size_t end, const NodeCounts& counts) {
        const std::span<const std::size_t> node_samples(samples_.data() + begin, end - begin);
        ScoredSplit best;
        if (params_.split_mode == SplitMode::fixed_subset) {
            if (presort_) {
                const std::size_t n = view_.rows();
                for (std::size_t f : all_features_) {
                    const std::uint32_t* window = sorted_.data() + f * n + begin;
                    const auto column = view_.column(f);
                    sweep_sorted(
                        f, end - begin, [&](std::size_t i) { return column[window[i]]; },
                        [&](std::size_t i) { return labels_[window[i]]; }, counts.counts, counts.sum_sq, scratch_,
                        best);
                }
            } else {
                for (std::size_t f : all_features_)
                    scan_feature(view_, labels_, node_samples, f, counts.counts, counts.sum_sq, scratch_, best);
            }
            if (stats_) stats_->candidates_per_split_search.push_back(all_features_.size());
            return best;
        }

        const std::size_t d = view_.cols();
        const std::size_t m = params_.candidates_per_node;
        sample_uniform_subset(d, m, rng_, permutation_, candidates_);
        for (std::size_t f : candidates_)
            scan_feature(view_, labels_, node_samples, f, counts.counts, counts.sum_sq, scratch_, best);
        std::size_t searched = m;
        // Every drawn feature is constant on this node: keep drawing.
        for (std::size_t i = m; !best.valid && i < d; ++i) {
            const std::size_t j = i + rng_.below(d - i);
            std::swap(permutation_[i], permutation_[j]);
            scan_feature(view_, labels_, node_samples, permutation_[i], counts.counts, counts.sum_sq, scratch_,
                         best);
            ++searched;
        }
        if (stats_) stats_->candidates_per_split_search.push_back(searched);
        return best;
    }

    const FeatureView& view_;
    std::span<const int> labels_;
    std::size_t num_classes_;
    const TreeParams& params_;
    SeededRng& rng_;
    TreeTrainStats* stats_;
    bool presort_;

    std::vector<std::size_t> samples_;
    std::vector<std::size_t> buffer_;
    std::vector<std::size_t> all_features_;
    std::vector<std::size_t> permutation_;
    std::vector<std::size_t> candidates_;
    std::vector<std::uint32_t> sorted_;
    std::vector<char> go_left_;
    SearchScratch scratch_;
    std::vector<TreeNode> nodes_;
};

DecisionTree grow_tree(const FeatureView& view, std::span<const int> labels, std::size_t num_classes,
                       const TreeParams& params, SeededRng& rng, TreeTrainStats* stats, bool presort) {
    if (view.rows() == 0 || view.cols() == 0) throw InvalidArgument("train_tree: empty dataset");
    if (view.rows() > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("train_tree: too many rows");
    if (labels.size() != view.rows()) throw InvalidArgument("train_tree: label count mismatch");
    if (params.min_samples_split < 2) throw InvalidArgument("train_tree: min_samples_split must be >= 2");
    if (params.max_depth && *params.max_depth == 0) throw InvalidArgument("train_tree: max_depth must be positive");
    if (params.split_mode == SplitMode::per_node_uniform &&
        (params.candidates_per_node == 0 || params.candidates_per_node > view.cols()))
        throw InvalidArgument("train_tree: candidates_per_node must be in [1, d]");
    validate_labels(labels, num_classes);

    Grower grower(view, labels, num_classes, params, rng, stats, presort);
    return DecisionTree(grower.grow(), view.feature_map(), num_classes);
}

}  // namespace

FeatureView::FeatureView(const DataMatrix& source) : rows_(source.rows()) {
    columns_.reserve(source.cols());
    for (std::size_t j = 0; j < source.cols(); ++j) columns_.push_back(source.column(j));
}

FeatureView::FeatureView(const DataMatrix& source, std::span<const std::size_t> feature_map)
    : rows_(source.rows()), feature_map_(feature_map.begin(), feature_map.end()) {
    columns_.reserve(feature_map.size());
    for (std::size_t j : feature_map) {
        if (j >= source.cols()) throw InvalidArgument("FeatureView: column " + std::to_string(j) + " out of range");
        columns_.push_back(source.column(j));
    }
}

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, std::vector<std::size_t> feature_map,
                           std::size_t num_classes)
    : nodes_(std::move(nodes)), feature_map_(std::move(feature_map)), num_classes_(num_classes) {
    if (nodes_.empty()) throw InvalidArgument("DecisionTree: no nodes");
    if (num_classes_ == 0) throw InvalidArgument("DecisionTree: no classes");

    std::vector<char> seen(nodes_.size(), 0);
    std::vector<std::int32_t> stack{0};
    std::size_t visited = 0;
    while (!stack.empty()) {
        const auto i = static_cast<std::size_t>(stack.back());
        stack.pop_back();
        if (seen[i]) throw InvalidArgument("DecisionTree: node " + std::to_string(i) + " reached twice");
        seen[i] = 1;
        ++visited;
        const TreeNode& node = nodes_[i];
        if (node.is_leaf()) {
            if (node.label < 0 || static_cast<std::size_t>(node.label) >= num_classes_)
                throw InvalidArgument("DecisionTree: leaf " + std::to_string(i) + " has invalid label");
            continue;
        }
        if (!std::isfinite(node.threshold)) throw InvalidArgument("DecisionTree: non-finite threshold");
        if (!feature_map_.empty() && static_cast<std::size_t>(node.feature) >= feature_map_.size())
            throw InvalidArgument("DecisionTree: node feature outside the tree's feature set");
        for (std::int32_t child : {node.left, node.right}) {
            if (child <= 0 || static_cast<std::size_t>(child) >= nodes_.size())
                throw InvalidArgument("DecisionTree: node " + std::to_string(i) + " has an invalid child");
            stack.push_back(child);
        }
        required_features_ =
            std::max(required_features_, global_feature(static_cast<std::size_t>(node.feature)) + 1);
    }
    if (visited != nodes_.size()) throw InvalidArgument("DecisionTree: unreachable nodes");
}

std::size_t DecisionTree::internal_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return !n.is_leaf(); }));
}

std::size_t DecisionTree::depth() const {
    if (nodes_.empty()) return 0;
    std::size_t best = 0;
    std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [i, depth] = stack.back();
        stack.pop_back();
        best = std::max(best, depth);
        const TreeNode& node = nodes_[static_cast<std::size_t>(i)];
        if (!node.is_leaf()) {
            stack.emplace_back(node.left, depth + 1);
            stack.emplace_back(node.right, depth + 1);
        }
    }
    return best;
}

int DecisionTree::predict(std::span<const double> sample) const {
    if (nodes_.empty()) throw InvalidArgument("predict: empty tree");
    if (sample.size() < required_features_)
        throw InvalidArgument("predict: sample has " + std::to_string(sample.size()) + " features, tree needs " +
                              std::to_string(required_features_));
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const TreeNode& node = nodes_[i];
        const double value = sample[global_feature(static_cast<std::size_t>(node.feature))];
        i = static_cast<std::size_t>(value <= node.threshold ? node.left : node.right);
    }
    return nodes_[i].label;
}

double gini_impurity(std::span<const int> labels) {
    if (labels.empty()) throw InvalidArgument("gini_impurity: empty label set");
    std::map<int, std::size_t> counts;
    for (int y : labels) ++counts[y];
    const auto n = static_cast<double>(labels.size());
    double sum_sq = 0.0;
    for (const auto& [label, count] : counts) {
        const double p = static_cast<double>(count) / n;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

std::optional<SplitCandidate> best_split(const FeatureView& view, std::span<const int> labels,
                                         std::size_t num_classes, std::span<const std::size_t> samples,
                                         std::span<const std::size_t> candidates) {
    if (samples.empty()) throw InvalidArgument("best_split: no samples");
    if (candidates.empty()) throw InvalidArgument("best_split: no candidate features");
    validate_labels(labels, num_classes);
    std::vector<std::size_t> order(candidates.begin(), candidates.end());
    std::sort(order.begin(), order.end());
    for (std::size_t f : order)
        if (f >= view.cols()) throw InvalidArgument("best_split: candidate feature out of range");

    const NodeCounts counts = count_classes(labels, num_classes, samples);
    if (counts.pure) return std::nullopt;
    SearchScratch scratch;
    ScoredSplit best;
    for (std::size_t f : order) scan_feature(view, labels, samples, f, counts.counts, counts.sum_sq, scratch, best);
    if (!best.valid || !positive_gain(best, counts, samples.size())) return std::nullopt;
    return SplitCandidate{best.rule, decrease_of(best, counts, samples.size())};
}

std::optional<SplitCandidate> best_split(const DataMatrix& columns, std::span<const int> labels,
                                         std::span<const std::size_t> candidates) {
    if (labels.size() != columns.rows()) throw InvalidArgument("best_split: label count mismatch");
    std::vector<int> classes(labels.begin(), labels.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    std::vector<int> codes(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        codes[i] = static_cast<int>(std::lower_bound(classes.begin(), classes.end(), labels[i]) - classes.begin());
    std::vector<std::size_t> samples(columns.rows());
    std::iota(samples.begin(), samples.end(), 0);
    return best_split(FeatureView(columns), codes, classes.size(), samples, candidates);
}

DecisionTree train_tree(const FeatureView& view, std::span<const int> labels, std::size_t num_classes,
                        const TreeParams& params, SeededRng& rng, TreeTrainStats* stats) {
    return grow_tree(view, labels, num_classes, params, rng, stats, true);
}

namespace reference {
DecisionTree train_tree(const FeatureView& view, std::span<const int> labels, std::size_t num_classes,
                        const TreeParams& params, SeededRng& rng, TreeTrainStats* stats) {
    return grow_tree(view, labels, num_classes, params, rng, stats, false);
}
}  // namespace reference

}  // namespace lesstrees

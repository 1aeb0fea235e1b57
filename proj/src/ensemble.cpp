#include "lesstrees/ensemble.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <string>

#include "lesstrees/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lesstrees {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int thread_count(int requested) {
#ifdef _OPENMP
    return requested > 0 ? requested : omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

void check_training_inputs(const DataMatrix& a, std::span<const int> labels, std::size_t num_classes,
                           std::size_t trees) {
    if (labels.size() != a.rows())
        throw InvalidArgument("training: " + std::to_string(labels.size()) + " labels for " +
                              std::to_string(a.rows()) + " rows");
    if (num_classes == 0) throw InvalidArgument("training: no classes");
    if (trees == 0) throw InvalidArgument("training: tree count must be positive");
}

int leaf_label(const DecisionTree& tree, const DataMatrix& a, std::size_t row) {
    const auto& nodes = tree.nodes();
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const TreeNode& node = nodes[i];
        const double value = a(row, tree.global_feature(static_cast<std::size_t>(node.feature)));
        i = static_cast<std::size_t>(value <= node.threshold ? node.left : node.right);
    }
    return nodes[i].label;
}

void check_width(const DecisionTree& tree, const DataMatrix& a) {
    if (a.cols() < tree.required_features())
        throw InvalidArgument("predict: data has " + std::to_string(a.cols()) + " features, tree needs " +
                              std::to_string(tree.required_features()));
}

// Runs body(i) for i in [0, count) on `threads` workers and rethrows the
// first exception on the calling thread.
template <class Body>
void parallel_for(std::size_t count, int threads, Body body) {
    std::exception_ptr failure;
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count(threads))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(lesstrees_parallel_for)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::string EnsembleModel::scheme_name() const {
    return kind == EnsembleKind::random_forest ? "rf" : std::string(to_string(scheme));
}

std::size_t rf_candidates(std::size_t d) {
    auto m = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
    while (m * m < d) ++m;
    while (m > 1 && (m - 1) * (m - 1) >= d) --m;
    return m;
}

DecisionTree train_less_tree(const DataMatrix& a, std::span<const int> labels, std::size_t num_classes,
                             const FeatureDistribution& dist, const LessOptions& options, std::size_t index) {
    SeededRng rng = SeededRng(options.seed).child(index);
    std::vector<std::size_t> features;
    if (options.with_replacement) {
        features = sample_with_replacement(dist, options.k, rng);
        std::sort(features.begin(), features.end());
        features.erase(std::unique(features.begin(), features.end()), features.end());
    } else {
        features = sample_without_replacement(dist, options.k, rng).indices;
    }
    TreeParams params = options.tree;
    params.split_mode = SplitMode::fixed_subset;
    return train_tree(FeatureView(a, features), labels, num_classes, params, rng);
}

DecisionTree train_rf_tree(const DataMatrix& a, std::span<const int> labels, std::size_t num_classes,
                           const RfOptions& options, std::size_t index, TreeTrainStats* stats) {
    SeededRng rng = SeededRng(options.seed).child(index);
    TreeParams params = options.tree;
    params.split_mode = SplitMode::per_node_uniform;
    params.candidates_per_node = rf_candidates(a.cols());
    return train_tree(FeatureView(a), labels, num_classes, params, rng, stats);
}

EnsembleModel train_less(const DataMatrix& a, std::span<const int> labels, std::size_t num_classes,
                         const LessOptions& options) {
    check_training_inputs(a, labels, num_classes, options.trees);
    if (options.k == 0 || options.k > a.cols())
        throw InvalidArgument("train_less: k = " + std::to_string(options.k) + " must be in [1, " +
                              std::to_string(a.cols()) + "]");

    EnsembleModel model;
    model.kind = EnsembleKind::less;
    model.scheme = options.scheme;
    model.k = options.k;
    model.seed = options.seed;
    model.n_features = a.cols();
    model.num_classes = num_classes;
    model.max_rank = options.max_rank;
    model.with_replacement = options.with_replacement;
    model.params = options.tree;
    model.params.split_mode = SplitMode::fixed_subset;

    const auto start = Clock::now();
    const FeatureDistribution dist =
        compute_distribution(a, options.scheme, options.max_rank, true, &model.degenerate_fallback);
    model.scores_seconds = seconds_since(start);
    model.effective_rank = dist.effective_rank;

    model.trees.resize(options.trees);
    model.tree_seconds.resize(options.trees);
    parallel_for(options.trees, options.threads, [&](std::size_t i) {
        const auto tree_start = Clock::now();
        model.trees[i] = train_less_tree(a, labels, num_classes, dist, options, i);
        model.tree_seconds[i] = seconds_since(tree_start);
    });
    return model;
}

EnsembleModel train_rf(const DataMatrix& a, std::span<const int> labels, std::size_t num_classes,
                       const RfOptions& options) {
    check_training_inputs(a, labels, num_classes, options.trees);

    EnsembleModel model;
    model.kind = EnsembleKind::random_forest;
    model.k = rf_candidates(a.cols());
    model.seed = options.seed;
    model.n_features = a.cols();
    model.num_classes = num_classes;
    model.params = options.tree;
    model.params.split_mode = SplitMode::per_node_uniform;
    model.params.candidates_per_node = model.k;

    model.trees.resize(options.trees);
    model.tree_seconds.resize(options.trees);
    parallel_for(options.trees, options.threads, [&](std::size_t i) {
        const auto tree_start = Clock::now();
        model.trees[i] = train_rf_tree(a, labels, num_classes, options, i);
        model.tree_seconds[i] = seconds_since(tree_start);
    });
    return model;
}

int vote_winner(std::span<const std::size_t> votes) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c)
        if (votes[c] > votes[best]) best = c;
    return static_cast<int>(best);
}

int predict_majority(const EnsembleModel& model, std::span<const double> sample, std::size_t prefix) {
    if (model.trees.empty()) throw InvalidArgument("predict_majority: empty model");
    const std::size_t used = (prefix == 0 || prefix > model.trees.size()) ? model.trees.size() : prefix;
    std::vector<std::size_t> votes(model.num_classes, 0);
    for (std::size_t t = 0; t < used; ++t) ++votes[static_cast<std::size_t>(model.trees[t].predict(sample))];
    return vote_winner(votes);
}

namespace serial {
std::vector<int> predict_rows(const DecisionTree& tree, const DataMatrix& a) {
    check_width(tree, a);
    std::vector<int> out(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) out[i] = leaf_label(tree, a, i);
    return out;
}
}  // namespace serial

namespace parallel {
std::vector<int> predict_rows(const DecisionTree& tree, const DataMatrix& a, int threads) {
    check_width(tree, a);
    std::vector<int> out(a.rows());
    const auto n = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static) num_threads(thread_count(threads))
    for (std::ptrdiff_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = leaf_label(tree, a, static_cast<std::size_t>(i));
    return out;
}
}  // namespace parallel

std::vector<int> predict_all(const EnsembleModel& model, const DataMatrix& a, std::size_t prefix, int threads) {
    if (model.trees.empty()) throw InvalidArgument("predict_all: empty model");
    const std::size_t used = (prefix == 0 || prefix > model.trees.size()) ? model.trees.size() : prefix;
    for (std::size_t t = 0; t < used; ++t) check_width(model.trees[t], a);

    std::vector<int> out(a.rows());
    const auto n = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel num_threads(thread_count(threads))
    {
        std::vector<std::size_t> votes(model.num_classes);
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            std::fill(votes.begin(), votes.end(), 0);
            for (std::size_t t = 0; t < used; ++t)
                ++votes[static_cast<std::size_t>(leaf_label(model.trees[t], a, static_cast<std::size_t>(i)))];
            out[static_cast<std::size_t>(i)] = vote_winner(votes);
        }
    }
    return out;
}

std::size_t total_node_count(const EnsembleModel& model) {
    std::size_t total = 0;
    for (const auto& tree : model.trees) total += tree.node_count();
    return total;
}

double classification_error(const EnsembleModel& model, const DataMatrix& a, std::span<const int> labels,
                            std::size_t prefix, int threads) {
    if (a.rows() != labels.size()) throw InvalidArgument("classification_error: label count mismatch");
    const auto predicted = predict_all(model, a, prefix, threads);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (predicted[i] != labels[i]) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

}  // namespace lesstrees

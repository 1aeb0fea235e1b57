#include "lesstrees/feature_scores.hpp"

#include <algorithm>
#include <numeric>

#include "lesstrees/error.hpp"

namespace lesstrees {

namespace {

// Sum in sorted order, so the result does not depend on column order.
double sorted_sum(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return std::accumulate(values.begin(), values.end(), 0.0);
}

// Columns sorted by content (lexicographically). Scoring the reordered matrix
// makes the output exactly equivariant under column permutations.
std::vector<std::size_t> canonical_column_order(const DataMatrix& a) {
    std::vector<std::size_t> order(a.cols());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        const auto cx = a.column(x);
        const auto cy = a.column(y);
        return std::lexicographical_compare(cx.begin(), cx.end(), cy.begin(), cy.end());
    });
    return order;
}

}  // namespace

std::string_view to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::uniform: return "uniform";
        case Scheme::norm: return "norm";
        case Scheme::leverage: return "leverage";
    }
    return "unknown";
}

Scheme parse_scheme(std::string_view name) {
    if (name == "uniform") return Scheme::uniform;
    if (name == "norm") return Scheme::norm;
    if (name == "leverage") return Scheme::leverage;
    throw InvalidArgument("unknown scheme '" + std::string(name) + "'");
}

FeatureDistribution uniform_distribution(std::size_t d) {
    if (d == 0) throw InvalidArgument("uniform_distribution: d must be positive");
    return {std::vector<double>(d, 1.0 / static_cast<double>(d)), Scheme::uniform, 0};
}

FeatureDistribution norm_distribution(const DataMatrix& a) {
    auto norms = column_squared_norms(a);
    const double total = sorted_sum(norms);
    if (total == 0.0) throw DegenerateInput("norm_distribution: matrix is all zeros");
    for (double& v : norms) v /= total;
    return {std::move(norms), Scheme::norm, 0};
}

FeatureDistribution leverage_distribution(const DataMatrix& a, std::size_t max_rank, double rank_tol) {
    const auto order = canonical_column_order(a);
    const DataMatrix canonical = a.select_columns(order);
    const SvdFactors svd = truncated_svd(canonical, max_rank, rank_tol);
    const std::size_t d = a.cols();
    std::vector<double> scores(d, 0.0);
    for (std::size_t i = 0; i < svd.rank; ++i) {
        const auto v = svd.right_vector(i);
        for (std::size_t j = 0; j < d; ++j) scores[j] += v[j] * v[j];
    }
    // Identical columns share one score.
    for (std::size_t first = 0; first < d;) {
        std::size_t last = first + 1;
        while (last < d && std::ranges::equal(canonical.column(first), canonical.column(last))) ++last;
        if (last - first > 1) {
            const double mean = std::accumulate(scores.begin() + static_cast<std::ptrdiff_t>(first),
                                                scores.begin() + static_cast<std::ptrdiff_t>(last), 0.0) /
                                static_cast<double>(last - first);
            std::fill(scores.begin() + static_cast<std::ptrdiff_t>(first),
                      scores.begin() + static_cast<std::ptrdiff_t>(last), mean);
        }
        first = last;
    }
    // The raw total equals r up to rounding.
    const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
    std::vector<double> probs(d);
    for (std::size_t c = 0; c < d; ++c) probs[order[c]] = scores[c] / total;
    return {std::move(probs), Scheme::leverage, svd.rank};
}

FeatureDistribution compute_distribution(const DataMatrix& a, Scheme scheme, std::size_t max_rank,
                                         bool fallback_on_degenerate, bool* fell_back) {
    if (fell_back) *fell_back = false;
    try {
        switch (scheme) {
            case Scheme::uniform: return uniform_distribution(a.cols());
            case Scheme::norm: return norm_distribution(a);
            case Scheme::leverage: return leverage_distribution(a, max_rank);
        }
    } catch (const DegenerateInput&) {
        if (!fallback_on_degenerate) throw;
        if (fell_back) *fell_back = true;
        return uniform_distribution(a.cols());
    }
    throw InvalidArgument("compute_distribution: unknown scheme");
}

}  // namespace lesstrees

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lesstrees/matrix.hpp"

namespace lesstrees {

enum class Scheme { uniform, norm, leverage };

std::string_view to_string(Scheme scheme);
/// Throws InvalidArgument for unknown names.
Scheme parse_scheme(std::string_view name);

/// Probability vector over the d features.
struct FeatureDistribution {
    std::vector<double> probs;
    Scheme scheme = Scheme::uniform;
    /// Truncation rank actually used (leverage only, 0 otherwise).
    std::size_t effective_rank = 0;

    std::size_t size() const noexcept { return probs.size(); }
};

FeatureDistribution uniform_distribution(std::size_t d);

/// probs[j] proportional to the squared norm of column j.
/// Throws DegenerateInput for an all-zero matrix.
FeatureDistribution norm_distribution(const DataMatrix& a);

/// Normalized column leverage scores from the top right singular vectors:
/// probs[j] = (1/r) * sum_i v_i(j)^2, with r the effective truncation rank.
/// Throws DegenerateInput for an all-zero matrix.
FeatureDistribution leverage_distribution(const DataMatrix& a, std::size_t max_rank = 50,
                                          double rank_tol = 1e-10);

/// Dispatches on `scheme`. When `fallback_on_degenerate` is set, an all-zero
/// matrix yields the uniform distribution and `fell_back` is set.
FeatureDistribution compute_distribution(const DataMatrix& a, Scheme scheme, std::size_t max_rank = 50,
                                         bool fallback_on_degenerate = true, bool* fell_back = nullptr);

}  // namespace lesstrees

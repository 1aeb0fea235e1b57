#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lesstrees/feature_scores.hpp"
#include "lesstrees/rng.hpp"

namespace lesstrees {

/// k distinct feature indices in strictly increasing order.
struct FeatureSubset {
    std::vector<std::size_t> indices;

    std::size_t size() const noexcept { return indices.size(); }
    friend bool operator==(const FeatureSubset&, const FeatureSubset&) = default;
};

/// Weighted draw of k distinct features by successive renormalization: pick
/// proportionally to the remaining mass, remove, repeat. Zero-probability
/// features are drawn (uniformly) only once every positive-mass feature has
/// been taken. Throws InvalidArgument when k > d.
FeatureSubset sample_without_replacement(const FeatureDistribution& dist, std::size_t k, SeededRng& rng);

/// k independent categorical draws, in draw order; duplicates allowed.
std::vector<std::size_t> sample_with_replacement(const FeatureDistribution& dist, std::size_t k,
                                                 SeededRng& rng);

/// m of d indices uniformly without replacement (partial Fisher-Yates).
/// `scratch` is reused across calls; the result is written sorted into `out`.
void sample_uniform_subset(std::size_t d, std::size_t m, SeededRng& rng, std::vector<std::size_t>& scratch,
                           std::vector<std::size_t>& out);

}  // namespace lesstrees

#include "lesstrees/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lesstrees/error.hpp"

namespace lesstrees {

namespace {

void validate(const FeatureDistribution& dist) {
    if (dist.probs.empty()) throw InvalidArgument("sampling: empty distribution");
    for (double p : dist.probs)
        if (!std::isfinite(p) || p < 0.0) throw InvalidArgument("sampling: probabilities must be finite and >= 0");
}

}  // namespace

FeatureSubset sample_without_replacement(const FeatureDistribution& dist, std::size_t k, SeededRng& rng) {
    validate(dist);
    const std::size_t d = dist.size();
    if (k == 0) throw InvalidArgument("sample_without_replacement: k must be positive");
    if (k > d)
        throw InvalidArgument("sample_without_replacement: k = " + std::to_string(k) + " exceeds d = " +
                              std::to_string(d));

    std::vector<double> weight(dist.probs);
    std::vector<char> taken(d, 0);
    FeatureSubset out;
    out.indices.reserve(k);

    for (std::size_t draw = 0; draw < k; ++draw) {
        double total = 0.0;
        std::size_t last_positive = d;
        for (std::size_t j = 0; j < d; ++j) {
            if (!taken[j] && weight[j] > 0.0) {
                total += weight[j];
                last_positive = j;
            }
        }

        std::size_t pick = d;
        if (last_positive < d) {
            const double u = rng.uniform() * total;
            double cumulative = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                if (taken[j] || weight[j] <= 0.0) continue;
                cumulative += weight[j];
                if (u < cumulative) {
                    pick = j;
                    break;
                }
            }
            if (pick == d) pick = last_positive;  // u landed on the rounding slack
        } else {
            // Positive support exhausted: pad uniformly from what is left.
            const std::size_t remaining = d - draw;
            std::size_t nth = rng.below(remaining);
            for (std::size_t j = 0; j < d; ++j) {
                if (taken[j]) continue;
                if (nth-- == 0) {
                    pick = j;
                    break;
                }
            }
        }
        taken[pick] = 1;
        out.indices.push_back(pick);
    }
    std::sort(out.indices.begin(), out.indices.end());
    return out;
}

std::vector<std::size_t> sample_with_replacement(const FeatureDistribution& dist, std::size_t k, SeededRng& rng) {
    validate(dist);
    if (k == 0) throw InvalidArgument("sample_with_replacement: k must be positive");
    std::vector<double> cdf(dist.size());
    std::partial_sum(dist.probs.begin(), dist.probs.end(), cdf.begin());
    const double total = cdf.back();
    if (!(total > 0.0)) throw InvalidArgument("sample_with_replacement: distribution has no mass");

    std::vector<std::size_t> out(k);
    for (auto& idx : out) {
        const double u = rng.uniform() * total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) it = std::lower_bound(cdf.begin(), cdf.end(), total);
        idx = static_cast<std::size_t>(it - cdf.begin());
    }
    return out;
}

void sample_uniform_subset(std::size_t d, std::size_t m, SeededRng& rng, std::vector<std::size_t>& scratch,
                           std::vector<std::size_t>& out) {
    if (m > d) throw InvalidArgument("sample_uniform_subset: m exceeds d");
    if (scratch.size() != d) {
        scratch.resize(d);
        std::iota(scratch.begin(), scratch.end(), 0);
    }
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + rng.below(d - i);
        std::swap(scratch[i], scratch[j]);
    }
    out.assign(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(out.begin(), out.end());
}

}  // namespace lesstrees

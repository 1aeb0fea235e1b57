#pragma once

// Brute-force references for split search and node accounting.

#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

#include "lesstrees/ensemble.hpp"
#include "lesstrees/tree.hpp"

namespace oracle {

/// Exact non-negative fraction num / den.
struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Fraction(std::int64_t n, std::int64_t d) : num(n), den(d) {
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }
    friend Fraction operator+(Fraction a, Fraction b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
    friend Fraction operator-(Fraction a, Fraction b) { return {a.num * b.den - b.num * a.den, a.den * b.den}; }
    friend Fraction operator*(Fraction a, Fraction b) { return {a.num * b.num, a.den * b.den}; }
    friend bool operator<(Fraction a, Fraction b) { return a.num * b.den < b.num * a.den; }
    friend bool operator==(Fraction a, Fraction b) { return a.num == b.num && a.den == b.den; }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Gini impurity of a binary label multiset, exactly.
inline Fraction gini(std::int64_t ones, std::int64_t total) {
    const std::int64_t zeros = total - ones;
    return {total * total - ones * ones - zeros * zeros, total * total};
}

struct ExhaustiveSplit {
    double threshold = 0;
    Fraction decrease{0, 1};
};

/// Tries every midpoint between consecutive distinct values of a single
/// feature with 0/1 labels; keeps the first strictly best positive decrease.
inline std::optional<ExhaustiveSplit> exhaustive_split(const std::vector<double>& x, const std::vector<int>& y) {
    const auto n = static_cast<std::int64_t>(x.size());
    std::int64_t ones = 0;
    for (int v : y) ones += v;
    const Fraction parent = gini(ones, n);
    const std::set<double> distinct(x.begin(), x.end());
    std::optional<ExhaustiveSplit> best;
    for (auto it = distinct.begin(); std::next(it) != distinct.end(); ++it) {
        const double threshold = (*it + *std::next(it)) / 2;
        std::int64_t n_left = 0, ones_left = 0;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] <= threshold) {
                ++n_left;
                ones_left += y[i];
            }
        const std::int64_t n_right = n - n_left;
        const Fraction weighted = Fraction(n_left, n) * gini(ones_left, n_left) +
                                  Fraction(n_right, n) * gini(ones - ones_left, n_right);
        const Fraction decrease = parent - weighted;
        if (!(Fraction(0, 1) < decrease)) continue;
        if (!best || best->decrease < decrease) best = ExhaustiveSplit{threshold, decrease};
    }
    return best;
}

/// Counts nodes reachable from the root by walking child links.
inline std::size_t walk_count(const lesstrees::DecisionTree& tree, std::int32_t node = 0) {
    const auto& n = tree.nodes()[static_cast<std::size_t>(node)];
    if (n.is_leaf()) return 1;
    return 1 + walk_count(tree, n.left) + walk_count(tree, n.right);
}

inline std::size_t walk_internal(const lesstrees::DecisionTree& tree, std::int32_t node = 0) {
    const auto& n = tree.nodes()[static_cast<std::size_t>(node)];
    if (n.is_leaf()) return 0;
    return 1 + walk_internal(tree, n.left) + walk_internal(tree, n.right);
}

}  // namespace oracle

#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "lesstrees/error.hpp"
#include "lesstrees/sampling.hpp"

using namespace lesstrees;

namespace {

FeatureDistribution dist_of(std::vector<double> probs) {
    FeatureDistribution d;
    d.probs = std::move(probs);
    return d;
}

}  // namespace

TEST_CASE("SeededRng is reproducible and children are independent streams") {
    SeededRng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    // std::mt19937_64's 10000th output for the default seed is fixed by the standard.
    std::mt19937_64 reference;
    reference.discard(9999);
    SeededRng standard(5489);
    for (int i = 0; i < 9999; ++i) standard.next_u64();
    CHECK(standard.next_u64() == reference());

    const SeededRng master(7);
    CHECK(master.child(0).seed() != master.child(1).seed());
    CHECK(master.child(3).seed() == SeededRng(7).child(3).seed());
    CHECK(master.child(0).seed() == mix_seed(mix_seed(7) ^ mix_seed(1)));

    SeededRng r(1);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(r.below(7) < 7);
    }
}

TEST_CASE("sample_without_replacement examples") {
    SeededRng rng(1);
    for (int i = 0; i < 50; ++i) {
        CHECK(sample_without_replacement(dist_of({1, 0, 0}), 1, rng).indices == std::vector<std::size_t>{0});
        CHECK(sample_without_replacement(dist_of({0.5, 0.5, 0, 0}), 2, rng).indices == std::vector<std::size_t>{0, 1});
    }
    CHECK_THROWS_AS(sample_without_replacement(dist_of({0.5, 0.5}), 3, rng), InvalidArgument);
}

TEST_CASE("sample_without_replacement pads with zero-mass features only when needed") {
    SeededRng rng(3);
    std::set<std::size_t> padded;
    for (int i = 0; i < 200; ++i) {
        const auto s = sample_without_replacement(dist_of({0.0, 0.6, 0.0, 0.4, 0.0}), 3, rng).indices;
        REQUIRE(s.size() == 3);
        CHECK(std::is_sorted(s.begin(), s.end()));
        CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
        CHECK(std::count(s.begin(), s.end(), 1) == 1);
        CHECK(std::count(s.begin(), s.end(), 3) == 1);
        for (std::size_t j : s)
            if (j != 1 && j != 3) padded.insert(j);
    }
    CHECK(padded == std::set<std::size_t>{0, 2, 4});
}

TEST_CASE("sample_without_replacement first-draw frequencies") {
    SeededRng rng(11);
    const auto dist = dist_of({0.7, 0.2, 0.1});
    std::size_t hits = 0;
    const std::size_t trials = 100000;
    for (std::size_t i = 0; i < trials; ++i)
        if (sample_without_replacement(dist, 1, rng).indices[0] == 0) ++hits;
    CHECK(std::abs(static_cast<double>(hits) / trials - 0.7) < 0.01);
}

TEST_CASE("sample_without_replacement pair frequencies follow successive renormalization") {
    // P({0,1}) = 0.7*0.2/0.3 + 0.2*0.7/0.8, P({0,2}) = 0.7*0.1/0.3 + 0.1*0.7/0.9.
    SeededRng rng(12);
    const auto dist = dist_of({0.7, 0.2, 0.1});
    std::map<std::vector<std::size_t>, std::size_t> counts;
    const std::size_t trials = 100000;
    for (std::size_t i = 0; i < trials; ++i) ++counts[sample_without_replacement(dist, 2, rng).indices];
    const double p01 = 0.7 * 0.2 / 0.3 + 0.2 * 0.7 / 0.8;
    const double p02 = 0.7 * 0.1 / 0.3 + 0.1 * 0.7 / 0.9;
    CHECK(std::abs(static_cast<double>(counts[{0, 1}]) / trials - p01) < 0.01);
    CHECK(std::abs(static_cast<double>(counts[{0, 2}]) / trials - p02) < 0.01);
    CHECK(std::abs(static_cast<double>(counts[{1, 2}]) / trials - (1 - p01 - p02)) < 0.01);
}

TEST_CASE("sample_with_replacement") {
    SeededRng rng(5);
    CHECK(sample_with_replacement(dist_of({1, 0}), 3, rng) == std::vector<std::size_t>{0, 0, 0});

    SeededRng a(9), b(9);
    CHECK(sample_with_replacement(dist_of({0.5, 0.5}), 1, a) == sample_with_replacement(dist_of({0.5, 0.5}), 1, b));

    std::size_t same = 0;
    const std::size_t trials = 100000;
    for (std::size_t i = 0; i < trials; ++i) {
        const auto s = sample_with_replacement(dist_of({0.5, 0.5}), 2, rng);
        if (s[0] == s[1]) ++same;
    }
    CHECK(std::abs(static_cast<double>(same) / trials - 0.5) < 0.01);
}

TEST_CASE("sample_uniform_subset") {
    SeededRng rng(2);
    std::vector<std::size_t> scratch, out;
    std::vector<std::size_t> seen(10, 0);
    for (int i = 0; i < 20000; ++i) {
        sample_uniform_subset(10, 3, rng, scratch, out);
        REQUIRE(out.size() == 3);
        CHECK(std::is_sorted(out.begin(), out.end()));
        CHECK(std::adjacent_find(out.begin(), out.end()) == out.end());
        for (std::size_t j : out) ++seen[j];
    }
    for (std::size_t c : seen) CHECK(std::abs(static_cast<double>(c) / 20000 - 0.3) < 0.015);
    sample_uniform_subset(4, 4, rng, scratch, out);
    CHECK(out == std::vector<std::size_t>{0, 1, 2, 3});
}

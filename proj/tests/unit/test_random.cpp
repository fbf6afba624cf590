#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "emtree/random.hpp"

using namespace emtree;

TEST(Hashing, Fnv1aReferenceVectors) {
    EXPECT_EQ(hash64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(hash64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(hash64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Hashing, Splitmix64ReferenceVectors) {
    EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
    EXPECT_EQ(splitmix64(1), 0x910a2dec89025cc1ULL);
}

TEST(UniformBelow, StaysInRangeAndCoversIt) {
    Rng rng(7);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 7000; ++i) {
        const auto v = uniform_below(rng, 7);
        ASSERT_LT(v, 7u);
        ++hits[v];
    }
    // Chi-square with 6 degrees of freedom; 22.46 is the 0.999 quantile.
    double chi2 = 0.0;
    for (const int h : hits) {
        chi2 += (h - 1000.0) * (h - 1000.0) / 1000.0;
    }
    EXPECT_LT(chi2, 22.46);
}

TEST(UniformBelow, RejectsTheBiasedTail) {
    // bound = 2^63 + 1: the rejection threshold is 2^63 - 1, so small outputs are discarded.
    std::vector<std::uint64_t> script{5, 1ULL << 63, 42};
    std::size_t next = 0;
    const auto v = uniform_below([&] { return script[next++]; }, (1ULL << 63) + 1);
    EXPECT_EQ(v, (1ULL << 63));
    EXPECT_EQ(next, 2u);
}

TEST(Reservoir, KeepsEverythingBelowCapacity) {
    Rng rng(1);
    Reservoir<int> r(10, rng);
    for (int i = 0; i < 4; ++i) {
        r.offer(i);
    }
    EXPECT_EQ(r.items(), (std::vector<int>{0, 1, 2, 3}));
    EXPECT_EQ(r.seen(), 4u);
}

TEST(Reservoir, InclusionIsUniform) {
    // Each of 10 items should be kept with probability 3/10.
    const int trials = 20000;
    std::vector<int> kept(10, 0);
    for (int t = 0; t < trials; ++t) {
        Rng rng(static_cast<std::uint64_t>(t));
        Reservoir<int> r(3, rng);
        for (int i = 0; i < 10; ++i) {
            r.offer(i);
        }
        ASSERT_EQ(r.items().size(), 3u);
        for (const int i : r.items()) {
            ++kept[i];
        }
    }
    const double p = 0.3;
    const double sigma = std::sqrt(trials * p * (1 - p));
    for (const int k : kept) {
        EXPECT_NEAR(k, trials * p, 5 * sigma);
    }
}

TEST(Shuffle, IsAPermutationAndSeedDeterministic) {
    std::vector<int> a{0, 1, 2, 3, 4, 5, 6, 7};
    std::vector<int> b = a;
    Rng r1(9);
    Rng r2(9);
    shuffle(a, r1);
    shuffle(b, r2);
    EXPECT_EQ(a, b);
    std::sort(a.begin(), a.end());
    EXPECT_EQ(a, (std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7}));
}

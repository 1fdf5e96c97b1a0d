#include <doctest.h>

#include <cmath>

#include "ron/rng.hpp"

using ron::SplitMix64;

TEST_CASE("identical seeds give identical streams") {
    SplitMix64 a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("child streams are stable and differ by tag") {
    const SplitMix64 parent(7);
    SplitMix64 c1 = parent.child(1);
    SplitMix64 c1_again = parent.child(1);
    SplitMix64 c2 = parent.child(2);
    CHECK(c1.next_u64() == c1_again.next_u64());
    CHECK(c1.state() != c2.state());
}

TEST_CASE("uniform doubles live in [0, 1)") {
    SplitMix64 rng(99);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
}

TEST_CASE("gaussian moments are roughly standard") {
    SplitMix64 rng(1234);
    const int n = 200000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.next_gaussian();
        sum += z;
        sum_sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sum_sq / n - 1.0) < 0.02);
}

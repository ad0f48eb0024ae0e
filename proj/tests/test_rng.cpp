#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "tpplab/rng.hpp"

using namespace tpplab;

TEST_CASE("rng: same seed reproduces the stream bit for bit") {
    CounterRng a(12345);
    CounterRng b(12345);
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    CHECK(a.counter() == 1000);
}

TEST_CASE("rng: different seeds and different substreams disagree") {
    CounterRng a(1);
    CounterRng b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i) {
        if (a.next_u64() == b.next_u64()) ++same;
    }
    CHECK(same == 0);

    // substreams of one seed are mutually distinct and none equals the base stream
    std::set<std::uint64_t> firsts;
    CounterRng base(99);
    firsts.insert(base.next_u64());
    for (std::uint64_t s = 0; s < 32; ++s) {
        CounterRng sub = CounterRng::substream(99, s);
        firsts.insert(sub.next_u64());
    }
    CHECK(firsts.size() == 33);
}

TEST_CASE("rng: substream is a pure function of (seed, stream)") {
    CounterRng a = CounterRng::substream(7, 3);
    CounterRng b = CounterRng::substream(7, 3);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: uniform01 stays inside the open interval") {
    CounterRng r(2024);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 200000; ++i) {
        const double u = r.uniform01();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    // the stream actually explores the interval
    CHECK(lo < 1e-4);
    CHECK(hi > 1.0 - 1e-4);
}

TEST_CASE("rng: moments of the standard draws") {
    CounterRng r(5);
    const int n = 200000;

    SUBCASE("uniform01 mean 1/2, variance 1/12") {
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double u = r.uniform01();
            s += u;
            s2 += u * u;
        }
        const double m = s / n;
        const double v = s2 / n - m * m;
        CHECK(m == doctest::Approx(0.5).epsilon(0.01));
        CHECK(v == doctest::Approx(1.0 / 12.0).epsilon(0.02));
    }

    SUBCASE("exponential(rate) mean 1/rate") {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += r.exponential(2.5);
        CHECK(s / n == doctest::Approx(1.0 / 2.5).epsilon(0.02));
    }

    SUBCASE("normal mean 0, variance 1") {
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double z = r.normal();
            s += z;
            s2 += z * z;
        }
        CHECK(std::abs(s / n) < 0.01);
        CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
    }
}

TEST_CASE("rng: uniform(lo,hi) respects its bounds") {
    CounterRng r(77);
    for (int i = 0; i < 10000; ++i) {
        const double x = r.uniform(-3.0, 5.0);
        CHECK(x > -3.0);
        CHECK(x < 5.0);
    }
}

#include "doctest.h"

#include <cmath>
#include <vector>

#include "tpplab/bounds.hpp"
#include "tpplab/errors.hpp"
#include "tpplab/rng.hpp"
#include "tpplab/train.hpp"

using namespace tpplab;

namespace {

// direct binomial-sum transcription of s_poly, kept deliberately naive
double s_poly_oracle(int i, int l, double beta) {
    if (i < 0) return 0.0;
    double sum = 0.0;
    for (int j = 0; j <= i; ++j) {
        // C(j + l, l) computed as a product
        double binom = 1.0;
        for (int r = 1; r <= l; ++r) {
            binom *= static_cast<double>(j + r) / static_cast<double>(r);
        }
        sum += binom * std::pow(beta, j);
    }
    return sum;
}

TppModelSpec hom_poisson(double rate, double T) {
    TppModelSpec s;
    s.family = TppFamily::HomPoisson;
    s.T = T;
    s.lambda = rate;
    return s;
}

} // namespace

TEST_CASE("bounds: polynomial-geometric sums against the naive oracle") {
    for (int i : {-1, 0, 1, 3, 7, 15}) {
        for (int l : {0, 1, 2, 4}) {
            for (double beta : {0.0, 0.3, 1.0, 1.7}) {
                INFO("i=", i, " l=", l, " beta=", beta);
                CHECK(s_poly(i, l, beta) ==
                      doctest::Approx(s_poly_oracle(i, l, beta)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("bounds: the sums satisfy their defining recurrences") {
    // S_i^r = beta S_{i-1}^r + S_i^{r-1} and S_i^0 = 1 + beta S_{i-1}^0
    for (double beta : {0.4, 1.0, 1.3}) {
        for (int i = 0; i <= 12; ++i) {
            CHECK(s_poly(i, 0, beta) ==
                  doctest::Approx(1.0 + beta * s_poly(i - 1, 0, beta)).epsilon(1e-13));
            for (int r = 1; r <= 4; ++r) {
                CHECK(s_poly(i, r, beta) ==
                      doctest::Approx(beta * s_poly(i - 1, r, beta) + s_poly(i, r - 1, beta))
                          .epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("bounds: stable log geometric sum across its three regimes") {
    auto direct = [](double beta, int m) {
        double s = 0.0;
        for (int j = 0; j < m; ++j) s += std::pow(beta, j);
        return std::log(s);
    };
    for (double beta : {0.0, 0.2, 0.9999999999, 1.0, 1.0000000001, 1.5, 3.0}) {
        for (int m : {1, 2, 5, 20}) {
            INFO("beta=", beta, " m=", m);
            CHECK(log_geom_sum(beta, m) ==
                  doctest::Approx(direct(beta, m)).epsilon(1e-9));
        }
    }
    // large arguments that would overflow the direct sum stay finite
    CHECK(std::isfinite(log_geom_sum(1.4, 5000.0)));
    CHECK(log_geom_sum(1.4, 5000.0) ==
          doctest::Approx(5000.0 * std::log(1.4) - std::log(0.4)).epsilon(1e-9));
    CHECK_THROWS_AS(log_geom_sum(-0.1, 3.0), ConfigError);
    CHECK_THROWS_AS(log_geom_sum(0.5, 0.5), ConfigError);
}

TEST_CASE("bounds: parameter deltas measure per-block distances") {
    RnnConfig cfg;
    cfg.widths = {2};
    RnnParams a = zeros_params(cfg);
    RnnParams b = zeros_params(cfg);
    b.layers[0].Wx(0, 0) = 3.0; // operator norm of the difference: 3
    b.layers[0].b << 0.6, 0.8;  // 2-norm: 1
    b.Wout << 0.0, 2.0;
    b.bout = -0.4;
    const LayerDeltas d = param_deltas(a, b, cfg);
    REQUIRE(d.dx.size() == 3);
    REQUIRE(d.dh.size() == 2);
    REQUIRE(d.db.size() == 3);
    CHECK(d.dx[1] == doctest::Approx(3.0));
    CHECK(d.dh[1] == doctest::Approx(0.0));
    CHECK(d.db[1] == doctest::Approx(1.0));
    CHECK(d.dx[2] == doctest::Approx(2.0));
    CHECK(d.db[2] == doctest::Approx(0.4));
}

TEST_CASE("bounds: one-layer perturbation bound by hand") {
    // for L = 1 the bound reduces to
    //   gamma [ S_i^0 db_1 + sqrt(D) S_{i-1}^0 dh_1 + B_in S_i^0 dx_1 ]
    //   + db_2 + sqrt(D) dx_2
    const int D = 3;
    const double T = 1.7, B_m = 0.8;
    LayerDeltas d;
    d.dx = {0.0, 0.11, 0.23};
    d.dh = {0.0, 0.07};
    d.db = {0.0, 0.05, 0.13};
    for (int i : {0, 2, 5}) {
        const double S_i = s_poly(i, 0, B_m);
        const double S_im1 = s_poly(i - 1, 0, B_m);
        const double want = B_m * (S_i * d.db[1] + std::sqrt(3.0) * S_im1 * d.dh[1] +
                                   std::sqrt(2.0) * T * S_i * d.dx[1]) +
                            d.db[2] + std::sqrt(3.0) * d.dx[2];
        CHECK(lipschitz_bound(1, D, T, B_m, i, d) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("bounds: perturbation bound is monotone and vanishes at zero delta") {
    LayerDeltas zero;
    zero.dx = {0.0, 0.0, 0.0, 0.0};
    zero.dh = {0.0, 0.0, 0.0};
    zero.db = {0.0, 0.0, 0.0, 0.0};
    CHECK(lipschitz_bound(2, 4, 1.0, 0.9, 3, zero) == 0.0);

    LayerDeltas d = zero;
    d.dx[1] = 0.1;
    const double b1 = lipschitz_bound(2, 4, 1.0, 0.9, 3, d);
    CHECK(b1 > 0.0);
    d.db[3] += 0.2;
    const double b2 = lipschitz_bound(2, 4, 1.0, 0.9, 3, d);
    CHECK(b2 > b1);
    // more observed events can only loosen the bound
    CHECK(lipschitz_bound(2, 4, 1.0, 0.9, 5, d) >= b2);

    // delta lists must cover layers 1..L+1
    CHECK_THROWS_AS(lipschitz_bound(3, 4, 1.0, 0.9, 3, d), ConfigError);
}

TEST_CASE("bounds: covering exponent moves the right way in every knob") {
    const double base = covering_log(0.1, 2, 8, 1.2, 10, 1.0);
    CHECK(base > 0.0);
    CHECK(covering_log(0.01, 2, 8, 1.2, 10, 1.0) > base);  // finer scale
    CHECK(covering_log(1.0, 2, 8, 1.2, 10, 1.0) < base);   // coarser scale
    CHECK(covering_log(0.1, 3, 8, 1.2, 10, 1.0) > base);   // deeper
    CHECK(covering_log(0.1, 2, 16, 1.2, 10, 1.0) > base);  // wider
    CHECK(covering_log(0.1, 2, 8, 2.0, 10, 1.0) > base);   // bigger radius
    CHECK(covering_log(0.1, 2, 8, 1.2, 30, 1.0) > base);   // more events
    CHECK_THROWS_AS(covering_log(0.0, 2, 8, 1.2, 10, 1.0), ConfigError);
}

TEST_CASE("bounds: covering exponent matches its dimension-times-log shape") {
    // log N <= D^2 (3L+2) log(1 + C (3L+2) B_m sqrt(D) / eps) where the
    // magnitude constant C comes from log_class_magnitude; transcribe the
    // assembly independently in plain arithmetic (safe at these sizes)
    const int L = 2, D = 5, n0 = 7;
    const double B_m = 1.1, T = 1.3, eps = 0.05;
    const double logM = log_class_magnitude(n0, L, D, B_m, T);
    const double C = std::exp(logM) / (B_m * std::sqrt(static_cast<double>(D)));
    const double inner =
        1.0 + C * (3.0 * L + 2.0) * B_m * std::sqrt(static_cast<double>(D)) / eps;
    const double want = static_cast<double>(D) * D * (3.0 * L + 2.0) * std::log(inner);
    CHECK(covering_log(eps, L, D, B_m, n0, T) == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("bounds: class magnitude in closed form for one layer") {
    // L = 1: M(s) = B_m sqrt(D) max(sqrt(D), B_in, 1) max(B_m, 1) *
    //        sum_{j<=s} B_m^j   (the (L-1) log(s+1) factor drops out)
    const int D = 4, s = 6;
    const double B_m = 1.2, T = 0.9;
    const double B_in = std::sqrt(2.0) * T;
    const double front = std::max({std::sqrt(4.0), B_in, 1.0});
    double geom = 0.0;
    for (int j = 0; j <= s; ++j) geom += std::pow(B_m, j);
    const double want = std::log(B_m * 2.0 * front * std::max(B_m, 1.0) * geom);
    CHECK(log_class_magnitude(s, 1, D, B_m, T) == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("bounds: deviation bound against an independent transcription") {
    RnnConfig cfg;
    cfg.widths = {6, 4};
    cfg.l_f = 0.5;
    cfg.u_f = 8.0;
    const TppModelSpec process = hom_poisson(1.0, 1.0);
    const double B_m = 1.1, delta = 0.05;
    const std::size_t n = 500;

    const BoundReport rep = stochastic_error_bound(process, cfg, B_m, n, delta);

    // tail constants have their own closed form (checked elsewhere); the cut
    // s0 is the smallest integer with n a_N exp(-c_N s0) <= delta/2
    const TailConstants tc = tail_constants(process);
    CHECK(rep.a_N == doctest::Approx(tc.a_N).epsilon(1e-14));
    CHECK(rep.c_N == doctest::Approx(tc.c_N).epsilon(1e-14));
    CHECK(static_cast<double>(n) * tc.a_N * std::exp(-tc.c_N * rep.s0) <= 0.5 * delta);
    if (rep.s0 > 0) {
        CHECK(static_cast<double>(n) * tc.a_N * std::exp(-tc.c_N * (rep.s0 - 1)) >
              0.5 * delta);
    }

    // full assembly, re-derived: (192/sqrt(n)) (T + 1/l_f) (s0+1) u_f *
    // [ sqrt(log(4/delta)) + D sqrt(3L+2)(sqrt(log(1+M(s0)))+1) + (1-e^{-c_N})^{-2} ]
    const int L = 2, D = 6;
    const double conf = std::sqrt(std::log(4.0 / delta));
    const double logM = log_class_magnitude(rep.s0, L, D, B_m, process.T);
    const double comp = static_cast<double>(D) * std::sqrt(3.0 * L + 2.0) *
                        (std::sqrt(std::log1p(std::exp(logM))) + 1.0);
    const double tail = std::pow(1.0 - std::exp(-tc.c_N), -2.0);
    const double want = (192.0 / std::sqrt(static_cast<double>(n))) *
                        (process.T + 1.0 / cfg.l_f) * (rep.s0 + 1.0) * cfg.u_f *
                        (conf + comp + tail);
    CHECK(rep.term_confidence == doctest::Approx(conf).epsilon(1e-12));
    CHECK(rep.term_complexity == doctest::Approx(comp).epsilon(1e-10));
    CHECK(rep.term_tail == doctest::Approx(tail).epsilon(1e-12));
    CHECK(rep.value == doctest::Approx(want).epsilon(1e-10));

    // more data tightens the bound; smaller confidence loosens it
    CHECK(stochastic_error_bound(process, cfg, B_m, 4 * n, delta).value < rep.value);
    CHECK(stochastic_error_bound(process, cfg, B_m, n, delta / 10.0).value > rep.value);

    CHECK_THROWS_AS(stochastic_error_bound(process, cfg, 0.0, n, delta), ConfigError);
    CHECK_THROWS_AS(stochastic_error_bound(process, cfg, B_m, 0, delta), ConfigError);
    CHECK_THROWS_AS(stochastic_error_bound(process, cfg, B_m, n, 1.5), ConfigError);
}

TEST_CASE("bounds: predicted excess-risk exponents per family") {
    CHECK(excess_risk_rate(hom_poisson(2.0, 1.0)) == doctest::Approx(-0.5));
    {
        TppModelSpec s;
        s.family = TppFamily::NonHomPoisson;
        s.T = 1.0;
        s.lambda0 = Lambda0Spec::make(
            "sinusoid", {{"base", 2.0}, {"amp", 1.0}, {"cycles", 1.0}, {"horizon", 1.0},
                         {"s", 3.0}});
        CHECK(excess_risk_rate(s) == doctest::Approx(-3.0 / 8.0));
    }
    {
        TppModelSpec s;
        s.family = TppFamily::LinearHawkesGeneral;
        s.T = 1.0;
        s.lambda0 = Lambda0Spec::make(
            "sinusoid", {{"base", 2.0}, {"amp", 1.0}, {"cycles", 1.0}, {"horizon", 1.0},
                         {"s", 2.0}});
        s.kernel = KernelSpec::make(
            "smooth_periodic", {{"mass", 0.5}, {"cycles", 1.0}, {"period", 2.0}, {"k", 3.0}});
        // min(s/(s+1), (k-1)/(k+4)) / 2 = min(2/3, 2/7) / 2 = 1/7
        CHECK(excess_risk_rate(s) == doctest::Approx(-1.0 / 7.0).epsilon(1e-12));
    }
    {
        TppModelSpec s;
        s.family = TppFamily::NonlinearHawkesExp;
        s.T = 1.0;
        s.lambda0 = Lambda0Spec::make("constant", {{"value", 1.0}});
        s.alpha = 0.5;
        s.beta = 1.0;
        s.link = LinkSpec::make(
            "scaled_sigmoid", {{"lo", 0.5}, {"hi", 4.0}, {"rate", 1.0}, {"center", 1.0}});
        CHECK(excess_risk_rate(s) == doctest::Approx(-0.25));
    }
    {
        TppModelSpec s;
        s.family = TppFamily::SelfCorrecting;
        s.T = 1.0;
        s.mu_sc = 1.0;
        s.alpha_sc = 0.2;
        s.link = LinkSpec::make("identity_clamp", {{"lo", 0.1}, {"hi", 3.0}});
        CHECK_THROWS_AS(excess_risk_rate(s), ConfigError);
    }
}

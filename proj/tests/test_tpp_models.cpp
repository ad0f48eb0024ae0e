#include "doctest.h"

#include <cmath>
#include <vector>

#include "tpplab/errors.hpp"
#include "tpplab/quadrature.hpp"
#include "tpplab/stats.hpp"
#include "tpplab/tpp_models.hpp"

using namespace tpplab;

namespace {

Lambda0Spec const_baseline(double v) {
    return Lambda0Spec::make("constant", {{"value", v}});
}

TppModelSpec hawkes_exp(double lam0, double alpha, double beta, double T) {
    TppModelSpec s;
    s.family = TppFamily::LinearHawkesExp;
    s.T = T;
    s.lambda0 = const_baseline(lam0);
    s.alpha = alpha;
    s.beta = beta;
    return s;
}

// independent compensator route: integrate the intensity interval by
// interval with adaptive quadrature (the intensity is smooth between events)
double compensator_by_quadrature(const TppModelSpec& spec, const EventSequence& seq,
                                 double t) {
    QuadratureConfig cfg;
    cfg.tol = 1e-12;
    std::vector<double> cuts{0.0};
    for (double ti : seq.t) {
        if (ti < t) cuts.push_back(ti);
    }
    cuts.push_back(t);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        acc += adaptive_integrate(
            [&](double u) { return intensity_at(spec, seq, u); }, cuts[i], cuts[i + 1], cfg);
    }
    return acc;
}

} // namespace

TEST_CASE("models: family names round-trip") {
    const TppFamily fams[] = {TppFamily::HomPoisson,        TppFamily::NonHomPoisson,
                              TppFamily::LinearHawkesExp,   TppFamily::LinearHawkesGeneral,
                              TppFamily::NonlinearHawkesExp, TppFamily::SelfCorrecting};
    for (TppFamily f : fams) CHECK(family_from_name(family_name(f)) == f);
    CHECK_THROWS_AS(family_from_name("nope"), ConfigError);
}

TEST_CASE("models: exponential-kernel intensity by hand") {
    const TppModelSpec spec = hawkes_exp(1.0, 2.0, 3.0, 3.0);
    EventSequence seq;
    seq.T = 3.0;
    seq.t = {1.0, 2.0};

    // strict past: the event at t = 1 does not feed the intensity at t = 1
    CHECK(intensity_at(spec, seq, 0.5) == doctest::Approx(1.0));
    CHECK(intensity_at(spec, seq, 1.0) == doctest::Approx(1.0));
    CHECK(intensity_at(spec, seq, 1.5) == doctest::Approx(1.0 + 2.0 * std::exp(-1.5)));
    CHECK(intensity_at(spec, seq, 2.5) ==
          doctest::Approx(1.0 + 2.0 * std::exp(-4.5) + 2.0 * std::exp(-1.5)));
}

TEST_CASE("models: closed-form compensators match direct quadrature") {
    EventSequence seq;
    seq.T = 2.0;
    seq.t = {0.4, 0.9, 1.7};

    std::vector<TppModelSpec> specs;

    {
        TppModelSpec s;
        s.family = TppFamily::HomPoisson;
        s.T = 2.0;
        s.lambda = 1.7;
        specs.push_back(s);
    }
    {
        TppModelSpec s;
        s.family = TppFamily::NonHomPoisson;
        s.T = 2.0;
        s.lambda0 = Lambda0Spec::make(
            "sinusoid", {{"base", 2.0}, {"amp", 1.0}, {"cycles", 2.0}, {"horizon", 2.0}});
        specs.push_back(s);
    }
    specs.push_back(hawkes_exp(1.0, 0.8, 1.3, 2.0));
    {
        TppModelSpec s;
        s.family = TppFamily::LinearHawkesGeneral;
        s.T = 2.0;
        s.lambda0 = const_baseline(1.0);
        s.kernel = KernelSpec::make(
            "smooth_periodic", {{"mass", 0.5}, {"cycles", 1.0}, {"period", 4.0}});
        specs.push_back(s);
    }
    {
        TppModelSpec s;
        s.family = TppFamily::NonlinearHawkesExp;
        s.T = 2.0;
        s.lambda0 = const_baseline(1.0);
        s.alpha = 0.7;
        s.beta = 1.1;
        s.link = LinkSpec::make(
            "scaled_sigmoid", {{"lo", 0.2}, {"hi", 5.0}, {"rate", 1.0}, {"center", 1.5}});
        specs.push_back(s);
    }
    {
        TppModelSpec s;
        s.family = TppFamily::SelfCorrecting;
        s.T = 2.0;
        s.mu_sc = 1.5;
        s.alpha_sc = 0.6;
        s.link = LinkSpec::make(
            "scaled_sigmoid", {{"lo", 0.1}, {"hi", 4.0}, {"rate", 1.2}, {"center", 1.0}});
        specs.push_back(s);
    }

    QuadratureConfig tight;
    tight.tol = 1e-12;
    for (const auto& spec : specs) {
        INFO("family ", family_name(spec.family));
        validate_model(spec);
        for (double t : {0.3, 0.9, 1.2, 2.0}) {
            const double lib = compensator(spec, seq, t, tight);
            const double ind = compensator_by_quadrature(spec, seq, t);
            CHECK(lib == doctest::Approx(ind).epsilon(1e-8));
        }
    }
}

TEST_CASE("models: log-likelihood hand values") {
    // homogeneous rate 2 on [0, 1.5] with two events:
    // loglik = 2 log 2 - 2 * 1.5
    {
        TppModelSpec s;
        s.family = TppFamily::HomPoisson;
        s.T = 1.5;
        s.lambda = 2.0;
        EventSequence seq;
        seq.T = 1.5;
        seq.t = {0.3, 1.0};
        CHECK(loglik(s, seq) == doctest::Approx(2.0 * std::log(2.0) - 3.0).epsilon(1e-12));
    }
    // unit-baseline exponential excitation, one event at 1/2 on [0, 1]:
    // lambda(t) = 1 + e^{-(t - 1/2)} after the event, so
    // loglik = log 1 - [1 + (1 - e^{-1/2})] = e^{-1/2} - 2
    {
        const TppModelSpec s = hawkes_exp(1.0, 1.0, 1.0, 1.0);
        EventSequence seq;
        seq.T = 1.0;
        seq.t = {0.5};
        CHECK(loglik(s, seq) == doctest::Approx(std::exp(-0.5) - 2.0).epsilon(1e-12));
    }
}

TEST_CASE("models: rescaled interarrivals telescope to the compensator") {
    const TppModelSpec spec = hawkes_exp(1.2, 0.5, 1.0, 2.0);
    EventSequence seq;
    seq.T = 2.0;
    seq.t = {0.2, 0.5, 1.4};
    const std::vector<double> gaps = transformed_interarrivals(spec, seq);
    REQUIRE(gaps.size() == 3);
    double acc = 0.0;
    for (double g : gaps) {
        CHECK(g > 0.0);
        acc += g;
    }
    CHECK(acc == doctest::Approx(compensator(spec, seq, 1.4)).epsilon(1e-10));
}

TEST_CASE("models: simulation is deterministic with per-sequence substreams") {
    const TppModelSpec spec = hawkes_exp(1.0, 0.8, 2.0, 4.0);
    const auto a = simulate(spec, 5, 99);
    const auto b = simulate(spec, 5, 99);
    REQUIRE(a.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        REQUIRE(a[i].t.size() == b[i].t.size());
        for (std::size_t j = 0; j < a[i].t.size(); ++j) CHECK(a[i].t[j] == b[i].t[j]);
    }
    // sequence i depends only on (seed, i), not on the batch size
    const auto c = simulate(spec, 3, 99);
    REQUIRE(c[2].t.size() == a[2].t.size());
    for (std::size_t j = 0; j < c[2].t.size(); ++j) CHECK(c[2].t[j] == a[2].t[j]);
}

TEST_CASE("models: thinning hits the known mean counts") {
    // homogeneous rate 2 on [0, 1]: E N = 2
    {
        TppModelSpec s;
        s.family = TppFamily::HomPoisson;
        s.T = 1.0;
        s.lambda = 2.0;
        const auto seqs = simulate(s, 4000, 7);
        double m = 0.0;
        for (const auto& q : seqs) m += static_cast<double>(q.size());
        m /= 4000.0;
        // sd of the mean is sqrt(2/4000) ~ 0.022; allow 4.5 sigma
        CHECK(m == doctest::Approx(2.0).epsilon(0.05));
    }
    // exponential excitation with branching 1/2: the mean intensity solves
    // m(t) = 1 + int_0^t e^{-2(t-u)} m(u) du = 2 - e^{-t}, so
    // E N(10) = int_0^10 m = 19 + e^{-10}
    {
        const TppModelSpec s = hawkes_exp(1.0, 1.0, 2.0, 10.0);
        const auto seqs = simulate(s, 1000, 21);
        double m = 0.0;
        for (const auto& q : seqs) m += static_cast<double>(q.size());
        m /= 1000.0;
        CHECK(std::abs(m - (19.0 + std::exp(-10.0))) < 1.2);
    }
}

TEST_CASE("models: horizon-corrected rescaled gaps are exactly unit exponential") {
    // pooled raw rescaled gaps are biased small on short windows (gaps that
    // would overrun T are never recorded); the corrected transform must not be
    TppModelSpec s;
    s.family = TppFamily::HomPoisson;
    s.T = 1.0;
    s.lambda = 1.0;
    const auto seqs = simulate(s, 4000, 3);

    std::vector<double> raw, fixed;
    for (const auto& q : seqs) {
        for (double g : transformed_interarrivals(s, q)) raw.push_back(g);
        for (double g : rescaled_exp1_samples(s, q)) fixed.push_back(g);
    }
    REQUIRE(raw.size() == fixed.size());
    REQUIRE(raw.size() > 2000);

    CHECK(mean(raw) < 0.9);                  // the truncation bias is real
    CHECK(ks_test_exp1(raw).p_value < 1e-4); // and the raw pool fails
    CHECK(mean(fixed) == doctest::Approx(1.0).epsilon(0.08));
    CHECK(ks_test_exp1(fixed).p_value > 0.01);
}

TEST_CASE("models: rescaled gaps pass the fit test for excitation models too") {
    const TppModelSpec s = hawkes_exp(1.0, 1.0, 2.0, 10.0);
    const auto seqs = simulate(s, 100, 5);
    std::vector<double> pool;
    for (const auto& q : seqs) {
        for (double g : rescaled_exp1_samples(s, q)) pool.push_back(g);
    }
    REQUIRE(pool.size() > 500);
    CHECK(ks_test_exp1(pool).p_value > 0.01);
}

TEST_CASE("models: event-count tail constants") {
    // homogeneous unit rate on [0, 1]: default eta0 = e, so
    // c_N = log(e)/2 = 1/2 and a_N = 2 sqrt(1) e^{e/2}
    {
        TppModelSpec s;
        s.family = TppFamily::HomPoisson;
        s.T = 1.0;
        s.lambda = 1.0;
        const TailConstants tc = tail_constants(s);
        CHECK(tc.eta0 == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
        CHECK(tc.c_N == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(tc.a_N == doctest::Approx(2.0 * std::exp(0.5 * std::exp(1.0))).epsilon(1e-12));
    }
    // branching 1/2 >= 1/e: default eta0 = (1 + 1/c_mu)/2 = 3/2, and the
    // closed forms scale with the branching correction
    {
        const TppModelSpec s = hawkes_exp(2.0, 1.0, 2.0, 3.0);
        const TailConstants tc = tail_constants(s);
        CHECK(tc.c_mu == doctest::Approx(0.5));
        CHECK(tc.eta0 == doctest::Approx(1.5));
        const double want_cN = 0.5 * std::log(1.5) * (1.0 - 0.5 * 1.5);
        const double want_aN = 2.0 * std::sqrt(2.0 * 3.0) *
                               std::exp(0.5 * std::log(1.5) * 1.5 * 2.0 * 3.0) / 0.5;
        CHECK(tc.c_N == doctest::Approx(want_cN).epsilon(1e-12));
        CHECK(tc.a_N == doctest::Approx(want_aN).epsilon(1e-12));
    }
    // small branching < 1/e keeps the default eta0 = e
    {
        const TppModelSpec s = hawkes_exp(1.0, 0.2, 1.0, 1.0);
        CHECK(tail_constants(s).eta0 == doctest::Approx(std::exp(1.0)));
        // explicit eta0 outside (1, 1/c_mu) is rejected
        CHECK_THROWS_AS(tail_constants(s, 6.0), ConfigError);
        CHECK_THROWS_AS(tail_constants(s, 1.0), ConfigError);
    }
    // bounded-link models take the Poisson route at the link ceiling
    {
        TppModelSpec s;
        s.family = TppFamily::NonlinearHawkesExp;
        s.T = 2.0;
        s.lambda0 = const_baseline(1.0);
        s.alpha = 0.5;
        s.beta = 1.0;
        s.link = LinkSpec::make(
            "scaled_sigmoid", {{"lo", 0.2}, {"hi", 5.0}, {"rate", 1.0}, {"center", 1.0}});
        const TailConstants tc = tail_constants(s);
        CHECK(tc.B0 == doctest::Approx(5.0));
        CHECK(tc.c_mu == 0.0);
    }
    // the self-correcting family has no tail-constant route
    {
        TppModelSpec s;
        s.family = TppFamily::SelfCorrecting;
        s.T = 1.0;
        s.mu_sc = 1.0;
        s.alpha_sc = 0.5;
        s.link = LinkSpec::make("identity_clamp", {{"lo", 0.1}, {"hi", 3.0}});
        CHECK_THROWS_AS(tail_constants(s), ConfigError);
    }
}

TEST_CASE("models: validation rejects broken specifications") {
    {
        TppModelSpec s = hawkes_exp(1.0, 2.0, 1.0, 1.0); // branching 2 >= 1
        CHECK_THROWS_AS(validate_model(s), ConfigError);
    }
    {
        TppModelSpec s = hawkes_exp(1.0, -0.5, 1.0, 1.0);
        CHECK_THROWS_AS(validate_model(s), ConfigError);
    }
    {
        TppModelSpec s;
        s.family = TppFamily::LinearHawkesGeneral;
        s.T = 8.0;
        s.lambda0 = const_baseline(1.0);
        // periodic kernel must cover the horizon
        s.kernel = KernelSpec::make(
            "smooth_periodic", {{"mass", 0.5}, {"cycles", 1.0}, {"period", 4.0}});
        CHECK_THROWS_AS(validate_model(s), ConfigError);
    }
    {
        TppModelSpec s;
        s.family = TppFamily::NonHomPoisson;
        s.T = -1.0;
        s.lambda0 = const_baseline(1.0);
        CHECK_THROWS_AS(validate_model(s), ConfigError);
    }
}

TEST_CASE("models: JSON round-trip") {
    TppModelSpec s;
    s.family = TppFamily::NonlinearHawkesExp;
    s.T = 2.5;
    s.lambda0 = Lambda0Spec::make(
        "sinusoid", {{"base", 2.0}, {"amp", 0.5}, {"cycles", 1.0}, {"horizon", 2.5}});
    s.alpha = 0.4;
    s.beta = 0.9;
    s.link = LinkSpec::make(
        "scaled_sigmoid", {{"lo", 0.2}, {"hi", 6.0}, {"rate", 1.0}, {"center", 2.0}});
    const TppModelSpec back = TppModelSpec::from_json(s.to_json());
    CHECK(back.to_json() == s.to_json());
    EventSequence seq;
    seq.T = 2.5;
    seq.t = {0.8, 1.9};
    CHECK(loglik(back, seq) == doctest::Approx(loglik(s, seq)).epsilon(1e-14));
}

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "tpplab/experiments.hpp"
#include "tpplab/quadrature.hpp"

using namespace tpplab;

namespace {

// independent route: adaptive quadrature of the pointwise loss-excess
// integrand over the ramp window
double mismatch_oracle(double alpha, double b, double T) {
    QuadratureConfig quad;
    quad.tol = 1e-12;
    return adaptive_integrate(
        [&](double t) {
            const double q = 9.0 * t * t / T;
            const double x = std::clamp(alpha * t + b, T, 4.0 * T);
            return (x - q * std::log(x)) - (q - q * std::log(q));
        },
        T / 3.0, 2.0 * T / 3.0, quad);
}

} // namespace

TEST_CASE("experiments: first-interval mismatch objective against quadrature") {
    const double combos[][3] = {
        {0.0, 1.0, 1.0},  // pinned at the clamp floor
        {0.0, 4.0, 1.0},  // pinned at the ceiling
        {9.0, -2.0, 1.0}, // crosses the window
        {3.0, 0.5, 1.0},
        {5.0, -1.0, 2.0},
    };
    for (const auto& c : combos) {
        INFO("alpha=", c[0], " b=", c[1], " T=", c[2]);
        CHECK(affine_mismatch_objective(c[0], c[1], c[2]) ==
              doctest::Approx(mismatch_oracle(c[0], c[1], c[2])).epsilon(1e-9));
    }
    // the objective is a loss excess, so it is nonnegative everywhere
    CHECK(affine_mismatch_objective(-3.0, 0.0, 1.0) >= 0.0);
}

TEST_CASE("experiments: minimized mismatch is positive and locally minimal") {
    const MismatchMin m = minimize_affine_mismatch(1.0);
    // no clamped affine intensity can follow the quadratic ramp: the floor
    // is strictly positive and sits near 3.55e-4 at T = 1
    CHECK(m.value > 1e-4);
    CHECK(m.value == doctest::Approx(3.5478e-4).epsilon(1e-3));
    CHECK(affine_mismatch_objective(m.alpha, m.b, 1.0) == doctest::Approx(m.value));
    // nothing nearby does better
    for (double da : {-0.1, 0.0, 0.1}) {
        for (double db : {-0.05, 0.0, 0.05}) {
            CHECK(affine_mismatch_objective(m.alpha + da, m.b + db, 1.0) >=
                  m.value - 1e-12);
        }
    }
    // and neither do the saturated plateaus
    CHECK(affine_mismatch_objective(0.0, 1.0, 1.0) >= m.value);
    CHECK(affine_mismatch_objective(0.0, 4.0, 1.0) >= m.value);
}

TEST_CASE("experiments: exact-intensity losses agree with the closed-form likelihood") {
    TppModelSpec truth;
    truth.family = TppFamily::LinearHawkesExp;
    truth.T = 2.0;
    truth.lambda0 = Lambda0Spec::make("constant", {{"value", 1.0}});
    truth.alpha = 0.6;
    truth.beta = 1.5;
    const auto test = simulate(truth, 10, 44);
    const std::vector<double> nll = truth_nll_per_seq(truth, test);
    REQUIRE(nll.size() == test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        // the quadrature route on the raw intensity must land on the same value
        const double viaquad = quadrature_nll(
            [&](double t) { return intensity_at(truth, test[i], t); }, test[i]);
        CHECK(std::abs(nll[i] - viaquad) < 1e-8);
        CHECK(nll[i] == doctest::Approx(-loglik(truth, test[i])).epsilon(1e-12));
    }
}

TEST_CASE("experiments: perturbation-bound trials stay below the bound") {
    const LipschitzTrialSummary s = lipschitz_trials(60, 4);
    CHECK(s.trials == 60);
    CHECK(s.violations == 0);
    CHECK(s.max_ratio <= 1.0);
    CHECK(s.worst_margin >= -1e-9);
}

TEST_CASE("experiments: scaling study smoke run with artifacts") {
    ScalingConfig cfg;
    cfg.truth.family = TppFamily::HomPoisson;
    cfg.truth.T = 1.0;
    cfg.truth.lambda = 2.0;
    cfg.rnn.widths = {2};
    cfg.rnn.link = LinkKind::SoftplusClamp;
    cfg.rnn.l_f = 0.1;
    cfg.rnn.u_f = 20.0;
    cfg.train.epochs = 8;
    cfg.train.lr = 0.05;
    cfg.train.init_rate = 2.0;
    cfg.train_sizes = {20, 60};
    cfg.reps = 1;
    cfg.n_test = 60;
    cfg.seed = 9;
    cfg.out_dir = "tpplab_test_runs";

    const ScalingResult res = scaling_study(cfg);
    REQUIRE(res.rows.size() == 2);
    REQUIRE(res.mean_gaps.size() == 2);
    CHECK(res.rows[0].n == 20);
    CHECK(res.rows[1].n == 60);
    for (const auto& r : res.rows) {
        CHECK(std::isfinite(r.gap));
        CHECK(r.se >= 0.0);
        CHECK(std::isfinite(r.train_nll));
    }
    CHECK(std::isfinite(res.slope));
    CHECK(res.summary.contains("rows"));
    CHECK(res.summary.at("slope").get<double>() == res.slope);

    // one CSV and one JSON artifact under a config-hash name
    int csvs = 0, jsons = 0;
    for (const auto& e : std::filesystem::directory_iterator(cfg.out_dir)) {
        const std::string name = e.path().filename().string();
        if (name.rfind("scaling_", 0) == 0 && name.ends_with(".csv")) ++csvs;
        if (name.rfind("scaling_", 0) == 0 && name.ends_with(".json")) ++jsons;
    }
    CHECK(csvs == 1);
    CHECK(jsons == 1);
    std::filesystem::remove_all(cfg.out_dir);

    // the study is deterministic end to end
    ScalingConfig cfg2 = cfg;
    cfg2.out_dir.clear();
    const ScalingResult res2 = scaling_study(cfg2);
    CHECK(res2.slope == res.slope);
    CHECK(res2.rows[0].gap == res.rows[0].gap);
}

TEST_CASE("experiments: interpolation study wiring (tiny run)") {
    CounterexampleConfig cfg;
    cfg.T = 1.0;
    cfg.n_train = 60;
    cfg.n_test = 80;
    cfg.train.epochs = 3;
    cfg.train.init_rate = 2.5;
    cfg.seed = 5;

    const CounterexampleResult res = counterexample_study(cfg);
    CHECK(res.prob_pinned == doctest::Approx(std::exp(-16.0 / 27.0)).epsilon(1e-12));
    // plateau-then-ramp at scale T = 1: Lambda(2/3) = 1/3 + 7/9
    CHECK(res.prob_true == doctest::Approx(std::exp(-(1.0 / 3.0 + 7.0 / 9.0))).epsilon(1e-10));
    CHECK(res.inf_mismatch.value ==
          doctest::Approx(minimize_affine_mismatch(1.0).value).epsilon(1e-12));

    REQUIRE(res.arms.size() == 3);
    CHECK(res.arms[0].head == "linear_in_time");
    CHECK(res.arms[1].head == "constant_hold");
    CHECK(res.arms[2].head == "input_embedding");
    for (const auto& a : res.arms) {
        CHECK(std::isfinite(a.gap));
        CHECK(a.se >= 0.0);
    }
    CHECK(res.summary.at("gap_floor_pinned").get<double>() ==
          doctest::Approx(res.inf_mismatch.value * res.prob_pinned));
}

#include "doctest.h"

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "tpplab/errors.hpp"
#include "tpplab/rnn.hpp"
#include "tpplab/rng.hpp"

using namespace tpplab;

namespace {

RnnConfig small_config(InterpMode interp, LinkKind link = LinkKind::SoftplusClamp) {
    RnnConfig cfg;
    cfg.widths = {3, 2};
    cfg.interp = interp;
    cfg.link = link;
    cfg.l_f = 0.2;
    cfg.u_f = 6.0;
    return cfg;
}

RnnParams random_params(const RnnConfig& cfg, std::uint64_t seed, double scale = 0.6) {
    CounterRng rng(seed);
    RnnParams p = zeros_params(cfg);
    Eigen::VectorXd v = flatten(p);
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-scale, scale);
    return unflatten(cfg, v);
}

EventSequence sample_seq() {
    EventSequence s;
    s.T = 2.0;
    s.t = {0.3, 0.75, 1.6};
    return s;
}

} // namespace

TEST_CASE("rnn: name helpers round-trip") {
    CHECK(link_from_name(link_name(LinkKind::Clamp)) == LinkKind::Clamp);
    CHECK(link_from_name(link_name(LinkKind::SoftplusClamp)) == LinkKind::SoftplusClamp);
    CHECK(interp_from_name(interp_name(InterpMode::InputEmbedding)) ==
          InterpMode::InputEmbedding);
    CHECK(interp_from_name(interp_name(InterpMode::ConstantHold)) == InterpMode::ConstantHold);
    CHECK(interp_from_name(interp_name(InterpMode::LinearInTime)) == InterpMode::LinearInTime);
    CHECK_THROWS_AS(link_from_name("bogus"), ConfigError);
    CHECK_THROWS_AS(interp_from_name("bogus"), ConfigError);
}

TEST_CASE("rnn: config validation") {
    RnnConfig cfg = small_config(InterpMode::InputEmbedding);
    CHECK_NOTHROW(validate_config(cfg));

    SUBCASE("no layers") {
        cfg.widths.clear();
        CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    }
    SUBCASE("nonpositive width") {
        cfg.widths = {4, 0};
        CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    }
    SUBCASE("window must be ordered and positive") {
        cfg.l_f = 3.0;
        cfg.u_f = 1.0;
        CHECK_THROWS_AS(validate_config(cfg), ConfigError);
        cfg.l_f = 0.0;
        cfg.u_f = 1.0;
        CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    }
}

TEST_CASE("rnn: embedded input carries absolute time and the last gap") {
    const EventSequence seq = sample_seq();
    Eigen::Vector2d x = embed_input(seq, 0.2); // empty strict past: t_last = 0
    CHECK(x[0] == doctest::Approx(0.2));
    CHECK(x[1] == doctest::Approx(0.2));
    x = embed_input(seq, 0.75); // the event at 0.75 itself is not in the past
    CHECK(x[0] == doctest::Approx(0.75));
    CHECK(x[1] == doctest::Approx(0.75 - 0.3));
    x = embed_input(seq, 1.9);
    CHECK(x[1] == doctest::Approx(1.9 - 1.6));
}

TEST_CASE("rnn: flatten and unflatten invert each other on the fixed layout") {
    const RnnConfig cfg = small_config(InterpMode::LinearInTime);
    const RnnParams p = random_params(cfg, 11);
    const Eigen::VectorXd v = flatten(p);
    CHECK(static_cast<std::size_t>(v.size()) == param_count(cfg));
    const RnnParams q = unflatten(cfg, v);
    const Eigen::VectorXd w = flatten(q);
    REQUIRE(w.size() == v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) CHECK(v[i] == w[i]);

    // the layout is positional: bumping one coordinate changes exactly the
    // matching entry after a round-trip
    Eigen::VectorXd v2 = v;
    v2[3] += 1.0;
    const Eigen::VectorXd w2 = flatten(unflatten(cfg, v2));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        CHECK(w2[i] == (i == 3 ? v[3] + 1.0 : v[i]));
    }
}

TEST_CASE("rnn: parameter count matches the architecture") {
    const RnnConfig cfg = small_config(InterpMode::InputEmbedding);
    // layer 1: 3x2 + 3x3 + 3; layer 2: 2x3 + 2x2 + 2; readout: 2 + 1 + 1
    CHECK(param_count(cfg) == 3 * 2 + 3 * 3 + 3 + 2 * 3 + 2 * 2 + 2 + 2 + 1 + 1);
}

TEST_CASE("rnn: hidden grid starts at zero and interpolation reproduces it") {
    const RnnConfig cfg = small_config(InterpMode::InputEmbedding);
    const RnnParams p = random_params(cfg, 3);
    const EventSequence seq = sample_seq();
    const HiddenGrid grid = hidden_grid(p, cfg, seq);

    REQUIRE(grid.size() == 2);
    for (const auto& layer : grid) {
        REQUIRE(layer.size() == seq.size() + 1);
        CHECK(layer[0].norm() == 0.0);
    }
    // the interpolation at an event time freezes the recurrent term at the
    // previous grid state, which is exactly the grid recursion step
    for (std::size_t j = 0; j < seq.size(); ++j) {
        const Eigen::VectorXd h = interpolate_hidden(p, cfg, seq, grid, seq.t[j]);
        CHECK((h - grid.back()[j + 1]).norm() == doctest::Approx(0.0).epsilon(1e-15));
    }
}

TEST_CASE("rnn: readout heads behave as declared between events") {
    const EventSequence seq = sample_seq();
    const double t0 = 0.8, t1 = 1.2; // interior points of (0.75, 1.6)

    {
        RnnConfig cfg = small_config(InterpMode::ConstantHold);
        const RnnParams p = random_params(cfg, 17);
        const double a = intensity(p, cfg, seq, t0);
        const double b = intensity(p, cfg, seq, t1);
        CHECK(a == b); // frozen grid state: constant within the interval
    }
    {
        RnnConfig cfg = small_config(InterpMode::LinearInTime, LinkKind::Clamp);
        RnnParams p = random_params(cfg, 17);
        p.alpha_naive = 0.5;
        // widen the window so the clamp is inactive and the slope is visible
        cfg.l_f = 1e-6;
        cfg.u_f = 1e6;
        const double a = intensity(p, cfg, seq, t0);
        const double b = intensity(p, cfg, seq, t1);
        CHECK(b - a == doctest::Approx(0.5 * (t1 - t0)).epsilon(1e-12));
    }
    {
        RnnConfig cfg = small_config(InterpMode::InputEmbedding);
        const RnnParams p = random_params(cfg, 17);
        const double a = intensity(p, cfg, seq, t0);
        const double b = intensity(p, cfg, seq, t1);
        CHECK(a != b); // the full interpolation moves within the interval
    }
}

TEST_CASE("rnn: intensity is left-continuous at event times") {
    const RnnConfig cfg = small_config(InterpMode::InputEmbedding);
    const RnnParams p = random_params(cfg, 23);
    const EventSequence seq = sample_seq();
    const double te = seq.t[1];
    const double at = intensity(p, cfg, seq, te);
    const double before = intensity(p, cfg, seq, te - 1e-9);
    const double after = intensity(p, cfg, seq, te + 1e-9);
    CHECK(std::abs(at - before) < 1e-6);
    // the event enters the history immediately after te; generically the
    // intensity jumps there
    CHECK(std::abs(after - at) > 1e-8);
}

TEST_CASE("rnn: links map pre-activations into the window") {
    RnnConfig cfg = small_config(InterpMode::InputEmbedding, LinkKind::Clamp);
    CHECK(apply_link(cfg, -100.0) == doctest::Approx(0.2));
    CHECK(apply_link(cfg, 100.0) == doctest::Approx(6.0));
    CHECK(apply_link(cfg, 1.3) == doctest::Approx(1.3));
    CHECK(link_derivative(cfg, 1.3) == 1.0);

    cfg.link = LinkKind::SoftplusClamp;
    CHECK(apply_link(cfg, -100.0) == doctest::Approx(0.2));
    CHECK(apply_link(cfg, 100.0) == doctest::Approx(6.0));
    // in the interior the softplus is smooth and increasing
    const double y0 = apply_link(cfg, 0.9);
    const double y1 = apply_link(cfg, 1.0);
    CHECK(y0 > 0.2);
    CHECK(y1 < 6.0);
    CHECK(y1 > y0);
    CHECK(link_derivative(cfg, 1.0) ==
          doctest::Approx((apply_link(cfg, 1.0 + 5e-7) - apply_link(cfg, 1.0 - 5e-7)) / 1e-6)
              .epsilon(1e-5));
}

TEST_CASE("rnn: softplus helpers invert each other") {
    for (double y : {0.1, 0.7, 2.0, 20.0}) {
        CHECK(softplus(inverse_softplus(y)) == doctest::Approx(y).epsilon(1e-12));
    }
    CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
    CHECK(softplus(500.0) == doctest::Approx(500.0)); // no overflow
}

TEST_CASE("rnn: parameter norm is the max over blocks") {
    RnnConfig cfg;
    cfg.widths = {2};
    cfg.interp = InterpMode::LinearInTime;
    RnnParams p = zeros_params(cfg);
    p.layers[0].Wx << 3.0, 0.0, 0.0, 0.0; // operator norm 3
    p.layers[0].Wh << 0.0, 1.0, 0.0, 0.0;
    p.layers[0].b << 0.6, 0.8; // 2-norm 1
    p.Wout << 2.0, 0.0;
    p.bout = -2.5;
    p.alpha_naive = 0.25;
    CHECK(param_norm(p, cfg) == doctest::Approx(3.0).epsilon(1e-10));
    p.bout = -4.0;
    CHECK(param_norm(p, cfg) == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("rnn: fixed-panel loss agrees with adaptive quadrature") {
    const RnnConfig cfg = small_config(InterpMode::InputEmbedding);
    const RnnParams p = random_params(cfg, 31);
    const EventSequence seq = sample_seq();

    const double fixed = nll_loss(p, cfg, seq);
    QuadratureConfig quad;
    quad.tol = 1e-11;
    const double adaptive =
        quadrature_nll([&](double t) { return intensity(p, cfg, seq, t); }, seq, quad);
    CHECK(fixed == doctest::Approx(adaptive).epsilon(1e-7));
}

TEST_CASE("rnn: loss panels respect the refinement knob and cover [0, T]") {
    RnnConfig cfg = small_config(InterpMode::InputEmbedding);
    cfg.quad_refine = 16;
    const EventSequence seq = sample_seq();
    const auto panels = loss_nodes(cfg, seq);
    REQUIRE(panels.size() >= 1);
    double mass = 0.0;
    for (const auto& pn : panels) {
        for (std::size_t i = 0; i < pn.w.size(); ++i) mass += pn.w[i];
    }
    CHECK(mass == doctest::Approx(seq.T).epsilon(1e-12));
}

TEST_CASE("rnn: quadrature_nll on an exact constant intensity") {
    EventSequence seq;
    seq.T = 1.5;
    seq.t = {0.3, 1.0};
    // rate-2 homogeneous truth: nll = 2 * 1.5 - 2 log 2
    const double got = quadrature_nll([](double) { return 2.0; }, seq);
    CHECK(got == doctest::Approx(3.0 - 2.0 * std::log(2.0)).epsilon(1e-10));
}

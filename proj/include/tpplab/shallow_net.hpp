#pragma once

/*
 * One-hidden-layer tanh approximators with certified sup-norm error.
 *
 * The constructive network builders need small function approximations
 * (baseline intensities, one-step recursion maps, output links) whose error
 * they can propagate into an end-to-end certificate.  We fit x -> v . tanh(Wx
 * + b) + c by least squares on a low-discrepancy lattice over a box, then
 * *certify* the fit by measuring the sup error on a denser offset lattice.
 *
 * Hidden features are drawn from a seeded stream, one substream per unit, so
 * the feature set of width m is a prefix of the feature set of width 2m.
 * The fit tries every power-of-two prefix and keeps the best-certifying one;
 * as a result the certified error is non-increasing as the width budget
 * doubles, which the width-ladder searches in the builders rely on.  Small
 * prefixes (<= 32 units) also get a deterministic damped Gauss-Newton pass
 * that moves the hidden weights, not just the readout; the certificate is
 * always measured after refinement, and the refinement depends only on the
 * prefix, so nesting is preserved.
 */

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

namespace tpplab {

struct ShallowNet {
    Eigen::MatrixXd W;    // m x d
    Eigen::VectorXd b;    // m
    Eigen::RowVectorXd v; // 1 x m
    double c = 0.0;       // output offset

    int width() const { return static_cast<int>(W.rows()); }
    int dim() const { return static_cast<int>(W.cols()); }
    double eval(const Eigen::VectorXd& x) const;
};

struct ShallowFitOptions {
    int width = 32;             // units in the returned net (zero-padded if needed)
    std::uint64_t seed = 7;
    bool fit_output_bias = true; // recursion maps must keep c = 0 (zero state in -> zero out)
    int fit_points = 0;          // 0 = auto (max(2048, 8 * width))
    int cert_points = 10000;
};

struct ShallowFit {
    ShallowNet net;
    double cert_error = 0.0; // measured sup |f - net| on the certification lattice
    int active_width = 0;    // units actually carrying weight
};

ShallowFit fit_shallow_tanh(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                            const ShallowFitOptions& opt);

// psi_h(x) = (2/h) tanh(h x / 2): a single tanh unit that approximates the
// identity; used to pass scalar readouts through an extra recurrent layer
ShallowNet identity_net(double h);

// sup_{|x| <= M} |x - psi_h(x)| is bounded by this (loose but safe)
double psi_error_bound(double M, double h);

// largest step h whose bound stays below `target` on [-M, M]
double psi_step_for(double M, double target);

/*
 * Four-unit product gadget.  With S(u) = [tanh(1+hu) + tanh(1-hu)
 * - 2 tanh(1)] / (tanh''(1) h^2) ~ u^2, the combination
 *
 *   P(a, b) = [S(a+b) - S(a-b)] / 4
 *           = q [tanh(1+h(a+b)) + tanh(1-h(a+b))
 *               - tanh(1+h(a-b)) - tanh(1-h(a-b))],   q = 1/(4 tanh''(1) h^2)
 *
 * approximates the product a*b; the constant parts of S cancel, so the four
 * tanh units need no output offset, and P(a, 0) cancels in pairs (to exact
 * zero in real arithmetic, to the round-off allowance in floats).  Like psi_h the
 * accuracy is not width-limited: the analytic error is O(h^2 (A+B)^4) on
 * |a| <= A, |b| <= B, and shrinking h trades it against round-off in the
 * 1/h^2 readout.  prod_error_bound includes both terms.
 */
double prod_readout_coeff(double h); // q above

// sup over |a| <= a_sup, |b| <= b_sup of |P(a,b) - a b| (analytic + round-off)
double prod_error_bound(double a_sup, double b_sup, double h);

// step h whose bound stays below `target` (throws if round-off floor exceeds it)
double prod_step_for(double a_sup, double b_sup, double target);

} // namespace tpplab

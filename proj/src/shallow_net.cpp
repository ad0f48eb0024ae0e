#include "tpplab/shallow_net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tpplab/errors.hpp"
#include "tpplab/rng.hpp"

namespace tpplab {

double ShallowNet::eval(const Eigen::VectorXd& x) const {
    if (W.rows() == 0) return c;
    return v.dot(((W * x + b).array().tanh()).matrix()) + c;
}

namespace {

double frac(double x) { return x - std::floor(x); }

// low-discrepancy point set over [0,1]^d with a phase offset so the fit grid
// and the certification grid never share points.  Coordinate k >= 1 uses a
// Weyl sequence with multiplier sqrt(prime_k); the multipliers are rationally
// independent, so the coordinates are jointly equidistributed (powers of one
// irrational would not be: e.g. golden-ratio powers satisfy phi^2 = 1 - phi,
// which collapses the points onto diagonal planes)
Eigen::VectorXd lattice_point(int i, int n, int d, double phase) {
    static const double mult[8] = {
        1.4142135623730951, 1.7320508075688772, 2.2360679774997896,
        2.6457513110645907, 3.3166247903554, 3.605551275463989,
        4.123105625617661, 4.358898943540674}; // sqrt of 2,3,5,7,11,13,17,19
    Eigen::VectorXd u(d);
    u[0] = frac((static_cast<double>(i) + 0.5) / static_cast<double>(n) + phase);
    for (int k = 1; k < d && k <= 8; ++k) {
        u[k] = frac((static_cast<double>(i) + 0.5) * mult[k - 1] +
                    static_cast<double>(k + 1) * phase);
    }
    return u;
}

struct FeatureBank {
    Eigen::MatrixXd W; // width x d, already in original coordinates
    Eigen::VectorXd b;
};

// seeded feature construction: unit k draws its own substream, so widths are
// nested prefixes of one another
FeatureBank make_features(int width, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                          std::uint64_t seed) {
    const int d = static_cast<int>(lo.size());
    static const double octaves[6] = {0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    FeatureBank fb;
    fb.W.resize(width, d);
    fb.b.resize(width);
    for (int k = 0; k < width; ++k) {
        CounterRng rng = CounterRng::substream(seed, static_cast<std::uint64_t>(k));
        const double scale = octaves[k % 6];
        Eigen::VectorXd dir(d);
        double norm2 = 0.0;
        for (int j = 0; j < d; ++j) {
            dir[j] = rng.uniform(-1.0, 1.0);
            norm2 += dir[j] * dir[j];
        }
        if (norm2 < 1e-12) {
            dir.setZero();
            dir[0] = 1.0;
            norm2 = 1.0;
        }
        dir /= std::sqrt(norm2);
        Eigen::VectorXd center(d);
        for (int j = 0; j < d; ++j) center[j] = rng.uniform01();
        // unit k computes tanh(scale * dir . (x_normalized - center))
        double offset = 0.0;
        for (int j = 0; j < d; ++j) {
            const double span = hi[j] - lo[j];
            const double wj = scale * dir[j] / span;
            fb.W(k, j) = wj;
            offset += wj * lo[j] + scale * dir[j] * center[j];
        }
        fb.b[k] = -offset;
    }
    return fb;
}

} // namespace

ShallowFit fit_shallow_tanh(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                            const ShallowFitOptions& opt) {
    const int d = static_cast<int>(lo.size());
    if (d < 1 || hi.size() != lo.size()) throw ConfigError("fit_shallow_tanh: bad domain");
    for (int j = 0; j < d; ++j) {
        if (!(hi[j] > lo[j])) throw ConfigError("fit_shallow_tanh: empty domain box");
    }
    if (opt.width < 1) throw ConfigError("fit_shallow_tanh: width must be >= 1");

    const int n_fit = opt.fit_points > 0 ? opt.fit_points : std::max(2048, 8 * opt.width);
    const int n_cert = std::max(opt.cert_points, 10000);

    const FeatureBank fb = make_features(opt.width, lo, hi, opt.seed);

    // sample the target on both lattices once
    auto to_box = [&](const Eigen::VectorXd& u) {
        Eigen::VectorXd x(d);
        for (int j = 0; j < d; ++j) x[j] = lo[j] + (hi[j] - lo[j]) * u[j];
        return x;
    };
    std::vector<Eigen::VectorXd> fit_x(static_cast<std::size_t>(n_fit));
    Eigen::VectorXd fit_y(n_fit);
    for (int i = 0; i < n_fit; ++i) {
        fit_x[static_cast<std::size_t>(i)] = to_box(lattice_point(i, n_fit, d, 0.0));
        fit_y[i] = f(fit_x[static_cast<std::size_t>(i)]);
    }
    std::vector<Eigen::VectorXd> cert_x(static_cast<std::size_t>(n_cert));
    Eigen::VectorXd cert_y(n_cert);
    for (int i = 0; i < n_cert; ++i) {
        cert_x[static_cast<std::size_t>(i)] = to_box(lattice_point(i, n_cert, d, 0.318309886));
        cert_y[i] = f(cert_x[static_cast<std::size_t>(i)]);
    }

    // full feature matrices; prefixes of columns give the nested sub-banks
    Eigen::MatrixXd fit_feat(n_fit, opt.width);
    for (int i = 0; i < n_fit; ++i) {
        fit_feat.row(i) =
            ((fb.W * fit_x[static_cast<std::size_t>(i)] + fb.b).array().tanh()).transpose();
    }
    Eigen::MatrixXd cert_feat(n_cert, opt.width);
    for (int i = 0; i < n_cert; ++i) {
        cert_feat.row(i) =
            ((fb.W * cert_x[static_cast<std::size_t>(i)] + fb.b).array().tanh()).transpose();
    }

    // candidate widths: powers of two up to the budget, plus the budget itself
    std::vector<int> widths;
    for (int w = 1; w < opt.width; w *= 2) widths.push_back(w);
    widths.push_back(opt.width);

    // a candidate is a full sub-network; the linear solve only adjusts (v, c),
    // the curvature refinement below also moves (W, b)
    struct Candidate {
        Eigen::MatrixXd W;
        Eigen::VectorXd b;
        Eigen::RowVectorXd v;
        double c = 0.0;
    };
    auto cert_sup = [&](const Candidate& cand) {
        double err = 0.0;
        for (int i = 0; i < n_cert; ++i) {
            const double pred =
                cand.v.dot(((cand.W * cert_x[static_cast<std::size_t>(i)] + cand.b)
                                .array()
                                .tanh())
                               .matrix()) +
                cand.c;
            err = std::max(err, std::abs(pred - cert_y[i]));
        }
        return err;
    };

    // damped Gauss-Newton on the fit lattice for one candidate, all
    // parameters free (output bias only when enabled); deterministic, so
    // shared prefixes of two width budgets refine to identical nets
    auto refine = [&](Candidate cand) {
        const int w = static_cast<int>(cand.W.rows());
        const int np = w * d + 2 * w + (opt.fit_output_bias ? 1 : 0);
        Eigen::VectorXd theta(np);
        auto pack = [&](const Candidate& q, Eigen::VectorXd& th) {
            int at = 0;
            for (int k = 0; k < w; ++k)
                for (int j = 0; j < d; ++j) th[at++] = q.W(k, j);
            for (int k = 0; k < w; ++k) th[at++] = q.b[k];
            for (int k = 0; k < w; ++k) th[at++] = q.v[k];
            if (opt.fit_output_bias) th[at] = q.c;
        };
        auto unpack = [&](const Eigen::VectorXd& th, Candidate& q) {
            int at = 0;
            for (int k = 0; k < w; ++k)
                for (int j = 0; j < d; ++j) q.W(k, j) = th[at++];
            for (int k = 0; k < w; ++k) q.b[k] = th[at++];
            for (int k = 0; k < w; ++k) q.v[k] = th[at++];
            if (opt.fit_output_bias) q.c = th[at];
        };
        pack(cand, theta);

        Eigen::MatrixXd jac(n_fit, np);
        Eigen::VectorXd resid(n_fit);
        auto residuals = [&](const Candidate& q, Eigen::VectorXd& r) {
            double ssr = 0.0;
            for (int i = 0; i < n_fit; ++i) {
                const double pred =
                    q.v.dot(((q.W * fit_x[static_cast<std::size_t>(i)] + q.b)
                                 .array()
                                 .tanh())
                                .matrix()) +
                    q.c;
                r[i] = pred - fit_y[i];
                ssr += r[i] * r[i];
            }
            return ssr;
        };

        double ssr = residuals(cand, resid);
        double mu = 1e-3;
        for (int iter = 0; iter < 40 && mu < 1e9; ++iter) {
            for (int i = 0; i < n_fit; ++i) {
                const Eigen::VectorXd& x = fit_x[static_cast<std::size_t>(i)];
                const Eigen::VectorXd z = (cand.W * x + cand.b).array().tanh();
                int at = 0;
                for (int k = 0; k < w; ++k) {
                    const double sech2 = (1.0 - z[k] * z[k]) * cand.v[k];
                    for (int j = 0; j < d; ++j) jac(i, at++) = sech2 * x[j];
                }
                for (int k = 0; k < w; ++k) jac(i, at++) = (1.0 - z[k] * z[k]) * cand.v[k];
                for (int k = 0; k < w; ++k) jac(i, at++) = z[k];
                if (opt.fit_output_bias) jac(i, at) = 1.0;
            }
            const Eigen::MatrixXd jtj = jac.transpose() * jac;
            const Eigen::VectorXd jtr = jac.transpose() * resid;
            bool stepped = false;
            for (int tries = 0; tries < 8; ++tries) {
                Eigen::MatrixXd lhs = jtj;
                lhs.diagonal() += mu * jtj.diagonal() +
                                  Eigen::VectorXd::Constant(np, 1e-12);
                const Eigen::VectorXd step = lhs.ldlt().solve(-jtr);
                Candidate trial = cand;
                unpack(theta + step, trial);
                Eigen::VectorXd trial_r(n_fit);
                const double trial_ssr = residuals(trial, trial_r);
                if (std::isfinite(trial_ssr) && trial_ssr < ssr) {
                    const double gain = (ssr - trial_ssr) / std::max(ssr, 1e-300);
                    cand = trial;
                    theta += step;
                    resid = trial_r;
                    ssr = trial_ssr;
                    mu = std::max(mu * 0.35, 1e-12);
                    stepped = true;
                    if (gain < 1e-12) iter = 40; // converged
                    break;
                }
                mu *= 5.0;
            }
            if (!stepped) break;
        }
        return cand;
    };

    double best_err = std::numeric_limits<double>::infinity();
    int best_w = widths.front();
    Candidate best_cand;
    for (int w : widths) {
        const int cols = w + (opt.fit_output_bias ? 1 : 0);
        Eigen::MatrixXd a(n_fit, cols);
        a.leftCols(w) = fit_feat.leftCols(w);
        if (opt.fit_output_bias) a.col(w).setOnes();
        const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(fit_y);

        Candidate cand;
        cand.W = fb.W.topRows(w);
        cand.b = fb.b.head(w);
        cand.v = coef.head(w).transpose();
        cand.c = opt.fit_output_bias ? coef[w] : 0.0;
        double err = cert_sup(cand);

        // curvature refinement pays off most at small widths, where the
        // random feature bank rarely has the right kinks; larger banks stay
        // linear-solve-only to keep the build fast
        if (w <= 32) {
            const Candidate polished = refine(cand);
            const double perr = cert_sup(polished);
            if (perr < err) {
                cand = polished;
                err = perr;
            }
        }
        if (err < best_err) {
            best_err = err;
            best_w = w;
            best_cand = cand;
        }
    }

    ShallowFit out;
    out.cert_error = best_err;
    out.active_width = best_w;
    out.net.W = Eigen::MatrixXd::Zero(opt.width, d);
    out.net.b = Eigen::VectorXd::Zero(opt.width);
    out.net.v = Eigen::RowVectorXd::Zero(opt.width);
    out.net.W.topRows(best_w) = best_cand.W;
    out.net.b.head(best_w) = best_cand.b;
    out.net.v.head(best_w) = best_cand.v;
    out.net.c = best_cand.c;
    return out;
}

ShallowNet identity_net(double h) {
    if (!(h > 0.0)) throw ConfigError("identity_net: need h > 0");
    ShallowNet n;
    n.W = Eigen::MatrixXd::Constant(1, 1, 0.5 * h);
    n.b = Eigen::VectorXd::Zero(1);
    n.v = Eigen::RowVectorXd::Constant(1, 2.0 / h);
    n.c = 0.0;
    return n;
}

double psi_error_bound(double M, double h) {
    const double s = 6.0 * M;
    return s * s * s * s * h * h;
}

double psi_step_for(double M, double target) {
    if (!(target > 0.0) || !(M > 0.0)) throw ConfigError("psi_step_for: bad arguments");
    const double s = 6.0 * M;
    return std::sqrt(target / (s * s * s * s));
}

namespace {

double tanh_curvature_at_one() {
    const double t1 = std::tanh(1.0);
    return -2.0 * t1 * (1.0 - t1 * t1); // tanh''(1) = -0.63970...
}

// |S(u) - u^2| <= kProdAnalytic h^2 u^4: fourth-order Taylor remainder of
// tanh(1+hu) + tanh(1-hu) around h=0, using sup |tanh''''| <= 4.2 and
// |tanh''(1)| = 0.6397; 2*4.2 / (24 * 0.6397) = 0.547, and averaging the two
// S evaluations of P over (a+-b)^4 <= (A+B)^4 halves the net constant.
constexpr double kProdAnalytic = 0.28;
// round-off allowance: the 1/h^2 readout amplifies unit-level evaluation
// noise (a few ulp on O(1) pre-activations and tanh values)
constexpr double kProdRoundoff = 1.2e-14;

} // namespace

double prod_readout_coeff(double h) {
    if (!(h > 0.0)) throw ConfigError("prod_readout_coeff: need h > 0");
    return 1.0 / (4.0 * tanh_curvature_at_one() * h * h);
}

double prod_error_bound(double a_sup, double b_sup, double h) {
    const double s = a_sup + b_sup;
    return kProdAnalytic * h * h * s * s * s * s + kProdRoundoff / (h * h);
}

double prod_step_for(double a_sup, double b_sup, double target) {
    if (!(target > 0.0) || !(a_sup >= 0.0) || !(b_sup >= 0.0)) {
        throw ConfigError("prod_step_for: bad arguments");
    }
    const double s = a_sup + b_sup;
    const double alpha = kProdAnalytic * s * s * s * s;
    // split the target evenly; feasible iff the round-off floor 2 sqrt(alpha
    // * kProdRoundoff) stays under it
    const double h2 = 0.5 * target / std::max(alpha, 1e-300);
    if (kProdRoundoff / h2 > 0.5 * target) {
        throw NumericError("prod_step_for: round-off floor exceeds the requested accuracy");
    }
    return std::sqrt(h2);
}

} // namespace tpplab

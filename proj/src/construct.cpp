#include "tpplab/construct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tpplab/errors.hpp"
#include "tpplab/shallow_net.hpp"

namespace tpplab {

/* ---------------- analytic ingredients ---------------- */

double ExpMixture::eval(double t) const {
    double s = 0.0;
    for (Eigen::Index j = 0; j < delta.size(); ++j) s += c[j] * std::exp(-delta[j] * t);
    return s;
}

ExpMixture decompose_kernel(const KernelSpec& kernel, double T) {
    const int k = static_cast<int>(std::lround(kernel.k));
    if (k < 1) throw ConfigError("decompose_kernel: kernel smoothness order must be >= 1");
    if (!(T > 0.0)) throw ConfigError("decompose_kernel: need T > 0");

    // any k distinct positive rates make the matching system solvable; the
    // choice drives the coefficient sizes, and those multiply every
    // downstream state-block certificate.  Try a few ladders and keep the
    // smallest-coefficient solution; rates are capped near 10/T so the decay
    // maps keep a resolvable boundary layer.
    Eigen::VectorXd rhs(k);
    for (int r = 0; r < k; ++r) rhs[r] = kernel.deriv(T, r) - kernel.deriv(0.0, r);

    std::vector<Eigen::VectorXd> ladders;
    auto add_ladder = [&](const std::vector<double>& rates) {
        Eigen::VectorXd d(k);
        for (int j = 0; j < k; ++j) d[j] = rates[static_cast<std::size_t>(j)];
        ladders.push_back(std::move(d));
    };
    {
        std::vector<double> flat(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) flat[static_cast<std::size_t>(j)] = double(j + 1) / k;
        add_ladder(flat);
        for (int j = 0; j < k; ++j) flat[static_cast<std::size_t>(j)] = 2.0 * (j + 1) / (k * T);
        add_ladder(flat);
        // geometric ladders g * rho^j with the top rate pinned near cap/T
        for (double g : {0.5, 1.0, 2.0}) {
            const double cap = 10.0;
            const double rho = (k == 1) ? 1.0 : std::pow(cap / g, 1.0 / (k - 1));
            std::vector<double> geo(static_cast<std::size_t>(k));
            for (int j = 0; j < k; ++j) geo[static_cast<std::size_t>(j)] = (g / T) * std::pow(rho, j);
            add_ladder(geo);
        }
    }

    // solve sum_j a_j (-delta_j)^r (1 - e^{-delta_j T}) = mu^(r)(T-) - mu^(r)(0+)
    ExpMixture best;
    double best_l1 = std::numeric_limits<double>::infinity();
    for (const Eigen::VectorXd& delta : ladders) {
        Eigen::MatrixXd A(k, k);
        for (int r = 0; r < k; ++r) {
            for (int j = 0; j < k; ++j) {
                A(r, j) = std::pow(-delta[j], r) * (1.0 - std::exp(-delta[j] * T));
            }
        }
        const Eigen::VectorXd a = A.fullPivLu().solve(rhs);
        const double resid = (A * a - rhs).cwiseAbs().maxCoeff();
        if (!a.allFinite() || resid > 1e-9 * (1.0 + rhs.cwiseAbs().maxCoeff())) continue;
        const double l1 = a.cwiseAbs().sum();
        if (l1 < best_l1) {
            best_l1 = l1;
            best.delta = delta;
            best.c = -a;
        }
    }
    if (!std::isfinite(best_l1)) {
        throw NumericError("decompose_kernel: endpoint-matching system is singular");
    }
    return best;
}

double FourierSeries::eval(double t) const {
    constexpr double kTwoPi = 6.283185307179586476925;
    double s = 0.5 * a0;
    for (Eigen::Index l = 0; l < a.size(); ++l) {
        const double w = kTwoPi * static_cast<double>(l + 1) / period;
        s += a[l] * std::cos(w * t) + b[l] * std::sin(w * t);
    }
    return s;
}

FourierSeries fourier_coefficients(const std::function<double(double)>& f, double T,
                                   int n_terms, const QuadratureConfig& quad) {
    if (!(T > 0.0) || n_terms < 0) throw ConfigError("fourier_coefficients: bad arguments");
    constexpr double kTwoPi = 6.283185307179586476925;
    FourierSeries fs;
    fs.period = T;
    fs.a0 = (2.0 / T) * adaptive_integrate(f, 0.0, T, quad);
    fs.a.resize(n_terms);
    fs.b.resize(n_terms);
    for (int l = 1; l <= n_terms; ++l) {
        const double w = kTwoPi * l / T;
        fs.a[l - 1] = (2.0 / T) * adaptive_integrate(
                          [&](double t) { return f(t) * std::cos(w * t); }, 0.0, T, quad);
        fs.b[l - 1] = (2.0 / T) * adaptive_integrate(
                          [&](double t) { return f(t) * std::sin(w * t); }, 0.0, T, quad);
    }
    return fs;
}

double poisson_series_constant(int s) {
    if (s < 1) throw ConfigError("poisson_series_constant: need s >= 1");
    return std::sqrt(2.0 * s) * std::pow(5.0, s) / std::tgamma(static_cast<double>(s));
}

double poisson_theoretical_error(int s, double B0, double T, int N) {
    if (N < 1) throw ConfigError("poisson_theoretical_error: need N >= 1");
    return 1.5 * poisson_series_constant(s) * B0 * std::pow(T, s) /
           std::pow(static_cast<double>(N), s);
}

int poisson_theoretical_width(int s, int N) {
    return 3 * ((s + 1) / 2) + 6 * N;
}

/* ---------------- assembly machinery ---------------- */

namespace {

// a state block: p scalar state components, each advanced across an interval
// by a fitted tanh map (state_1..state_p, delta) -> next component value
struct RecBlock {
    std::string name;
    std::vector<ShallowNet> maps;
    std::vector<double> err; // certified per-step sup error per component
    int p() const { return static_cast<int>(maps.size()); }
};

// a feedforward net reads one input channel (0 = absolute time, 1 = time
// since the last event) and has no recurrent wiring
struct FeedforwardUnit {
    const ShallowNet* net;
    int input_col;
};

struct Layer1 {
    Eigen::MatrixXd Wx, Wh;
    Eigen::VectorXd b;
    int width = 0;
    std::vector<std::vector<Eigen::RowVectorXd>> state_readout; // [block][component]
    std::vector<Eigen::RowVectorXd> ff_readout;                 // one per feedforward net
    std::vector<double> ff_bias;
};

Layer1 assemble_layer1(const std::vector<RecBlock>& blocks,
                       const std::vector<FeedforwardUnit>& ff) {
    Layer1 out;
    int width = 0;
    for (const auto& blk : blocks) {
        for (const auto& net : blk.maps) width += net.width();
    }
    for (const auto& f : ff) width += f.net->width();
    out.width = width;
    out.Wx = Eigen::MatrixXd::Zero(width, kInputDim);
    out.Wh = Eigen::MatrixXd::Zero(width, width);
    out.b = Eigen::VectorXd::Zero(width);

    // first pass: unit offsets and global readout rows
    std::vector<std::vector<int>> offsets(blocks.size());
    int at = 0;
    out.state_readout.resize(blocks.size());
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        for (int q = 0; q < blocks[bi].p(); ++q) {
            const ShallowNet& net = blocks[bi].maps[static_cast<std::size_t>(q)];
            offsets[bi].push_back(at);
            Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(width);
            row.segment(at, net.width()) = net.v;
            out.state_readout[bi].push_back(std::move(row));
            at += net.width();
        }
    }

    // second pass: wire each map; its state inputs come from the readout rows
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const int p = blocks[bi].p();
        for (int q = 0; q < p; ++q) {
            const ShallowNet& net = blocks[bi].maps[static_cast<std::size_t>(q)];
            const int o = offsets[bi][static_cast<std::size_t>(q)];
            const int m = net.width();
            out.Wx.block(o, 1, m, 1) = net.W.col(p); // last input column is delta
            out.b.segment(o, m) = net.b;
            for (int r = 0; r < p; ++r) {
                out.Wh.block(o, 0, m, width) +=
                    net.W.col(r) * out.state_readout[bi][static_cast<std::size_t>(r)];
            }
        }
    }
    for (const auto& f : ff) {
        const int m = f.net->width();
        out.Wx.block(at, f.input_col, m, 1) = f.net->W.col(0);
        out.b.segment(at, m) = f.net->b;
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(width);
        row.segment(at, m) = f.net->v;
        out.ff_readout.push_back(std::move(row));
        out.ff_bias.push_back(f.net->c);
        at += m;
    }
    return out;
}

// a scalar readout of layer 1 that is carried through layer 2 by one
// near-identity unit psi_h, then summed with coefficient `coeff`
struct PsiTerm {
    std::string name;
    Eigen::RowVectorXd v;
    double c = 0.0;
    double coeff = 0.0;
    double M = 1.0;          // certified |readout| bound (psi domain)
    double weighted_target = 0.0;
    double weighted_bound = 0.0; // |coeff| * psi deviation bound (filled in)
};

struct TwoLayer {
    std::vector<int> widths; // {layer1, layer2}
    RnnLayer layer1, layer2;
    Eigen::RowVectorXd Wout;
    double bout = 0.0;
    double psi_total = 0.0;
};

TwoLayer finish_two_layer(const Layer1& l1, std::vector<PsiTerm>& terms, double const_term) {
    const int R = static_cast<int>(terms.size());
    TwoLayer out;
    out.widths = {l1.width, R};
    out.layer1.Wx = l1.Wx;
    out.layer1.Wh = l1.Wh;
    out.layer1.b = l1.b;
    out.layer2.Wx = Eigen::MatrixXd::Zero(R, l1.width);
    out.layer2.Wh = Eigen::MatrixXd::Zero(R, R);
    out.layer2.b = Eigen::VectorXd::Zero(R);
    out.Wout = Eigen::RowVectorXd::Zero(R);
    out.bout = const_term;
    for (int r = 0; r < R; ++r) {
        PsiTerm& term = terms[static_cast<std::size_t>(r)];
        const double per_unit =
            term.weighted_target / std::max(std::abs(term.coeff), 1e-12);
        const double h = psi_step_for(term.M, per_unit);
        out.layer2.Wx.row(r) = 0.5 * h * term.v;
        out.layer2.b[r] = 0.5 * h * term.c;
        out.Wout[r] = term.coeff * 2.0 / h;
        term.weighted_bound = std::abs(term.coeff) * psi_error_bound(term.M, h);
        out.psi_total += term.weighted_bound;
    }
    return out;
}

RnnParams two_layer_params(const RnnConfig& cfg, const TwoLayer& tl) {
    RnnParams p = zeros_params(cfg);
    p.layers[0] = tl.layer1;
    p.layers[1] = tl.layer2;
    p.Wout = tl.Wout;
    p.bout = tl.bout;
    return p;
}

// one fitted approximation problem inside a builder, with its contribution
// weight; the budget balancer tightens the worst contributor's target
struct FitTask {
    std::string name;
    std::function<double(const Eigen::VectorXd&)> f;
    Eigen::VectorXd lo, hi;
    bool output_bias = true;
    std::uint64_t seed = 0;
    double weight = 1.0;    // contribution to the certificate = weight * cert_error
    double target = 0.0;    // current cert_error target
    ShallowFit fit;
    bool exhausted = false;
};

void run_fit(FitTask& task, const BuildOptions& opt) {
    ShallowFitOptions so;
    so.fit_output_bias = task.output_bias;
    so.seed = task.seed;
    ShallowFit best;
    bool have = false;
    for (int w = 8;; w *= 2) {
        so.width = std::min(w, opt.max_width);
        ShallowFit fit = fit_shallow_tanh(task.f, task.lo, task.hi, so);
        if (!have || fit.cert_error < best.cert_error) {
            best = std::move(fit);
            have = true;
        }
        if (best.cert_error <= task.target || so.width >= opt.max_width) break;
    }
    task.exhausted = best.cert_error > task.target && best.net.width() >= opt.max_width;
    task.fit = std::move(best);
}

// tighten targets until the weighted sum of certified errors fits under
// `cap`, or every contributor is at its width ceiling
void balance_fits(std::vector<FitTask>& tasks, double fixed, double cap,
                  const BuildOptions& opt, const std::string& what) {
    for (auto& t : tasks) run_fit(t, opt);
    for (int round = 0; round <= opt.max_rounds; ++round) {
        double total = fixed;
        for (const auto& t : tasks) total += t.weight * t.fit.cert_error;
        if (total <= cap) return;
        int worst = -1;
        double worst_c = 0.0;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            const double c = tasks[i].weight * tasks[i].fit.cert_error;
            if (!tasks[i].exhausted && c > worst_c) {
                worst_c = c;
                worst = static_cast<int>(i);
            }
        }
        if (worst < 0 || round == opt.max_rounds) {
            int top = 0;
            double top_c = -1.0;
            for (std::size_t i = 0; i < tasks.size(); ++i) {
                const double c = tasks[i].weight * tasks[i].fit.cert_error;
                if (c > top_c) {
                    top_c = c;
                    top = static_cast<int>(i);
                }
            }
            throw CertificationError(
                what + ": cannot certify the error budget (total " + std::to_string(total) +
                " > " + std::to_string(cap) + "; largest contributor '" +
                tasks[static_cast<std::size_t>(top)].name + "' at " + std::to_string(top_c) +
                " with width " + std::to_string(tasks[static_cast<std::size_t>(top)].fit.net.width()) +
                ")");
        }
        FitTask& t = tasks[static_cast<std::size_t>(worst)];
        t.target = 0.5 * t.fit.cert_error;
        run_fit(t, opt);
    }
}

nlohmann::json task_json(const FitTask& t) {
    return {{"name", t.name},
            {"width", t.fit.net.width()},
            {"active_width", t.fit.active_width},
            {"cert_error", t.fit.cert_error},
            {"weight", t.weight},
            {"contribution", t.weight * t.fit.cert_error}};
}

double require_step_error_at_most_one(const FitTask& t) {
    if (t.fit.cert_error > 1.0) {
        throw CertificationError(t.name +
                                 ": per-step error exceeds 1, state domain not guaranteed");
    }
    return t.fit.cert_error;
}

} // namespace

/* ---------------- builders ---------------- */

BuildReport build_poisson_approx(const Lambda0Spec& lam0, double T, double budget,
                                 const BuildOptions& opt) {
    if (!(budget > 0.0) || !(T > 0.0)) throw ConfigError("build_poisson_approx: bad arguments");
    if (!(lam0.B1 > 0.0)) throw ConfigError("build_poisson_approx: baseline must be positive");

    FitTask lam_task;
    lam_task.name = "baseline";
    lam_task.f = [&](const Eigen::VectorXd& x) { return lam0.eval(x[0]); };
    lam_task.lo = Eigen::VectorXd::Constant(1, 0.0);
    lam_task.hi = Eigen::VectorXd::Constant(1, T);
    lam_task.seed = opt.seed;
    lam_task.weight = 1.0;
    lam_task.target = 0.95 * budget;

    std::vector<FitTask> tasks{std::move(lam_task)};
    const double psi_share = 0.05 * budget;
    balance_fits(tasks, psi_share, budget, opt, "build_poisson_approx");
    const FitTask& lam = tasks[0];
    if (lam.fit.cert_error > 1.0) {
        throw CertificationError("build_poisson_approx: baseline error exceeds 1");
    }

    Layer1 l1 = assemble_layer1({}, {{&lam.fit.net, 0}});
    std::vector<PsiTerm> terms(1);
    terms[0].name = "baseline";
    terms[0].v = l1.ff_readout[0];
    terms[0].c = l1.ff_bias[0];
    terms[0].coeff = 1.0;
    terms[0].M = lam0.B0 + 1.0;
    // the pass-through unit is nearly free (its step h is not width-limited),
    // so never let it dominate: match the achieved fit error when that is
    // smaller than the nominal share.  An exactly representable baseline then
    // certifies at ~1e-14 instead of at the share.
    terms[0].weighted_target = std::min(psi_share, std::max(lam.fit.cert_error, 1e-14));
    TwoLayer tl = finish_two_layer(l1, terms, 0.0);

    BuildReport rep;
    rep.cfg.widths = tl.widths;
    rep.cfg.link = LinkKind::Clamp;
    rep.cfg.interp = InterpMode::InputEmbedding;
    rep.cfg.l_f = std::min(lam0.B1, 1.0);
    rep.cfg.u_f = lam0.B0;
    rep.params = two_layer_params(rep.cfg, tl);
    rep.budget = budget;
    rep.certificate = lam.fit.cert_error + tl.psi_total;

    rep.details["components"] = nlohmann::json::array({task_json(lam)});
    rep.details["psi_total"] = tl.psi_total;
    // reference width/error schedule for the same budget at the declared
    // smoothness, reported next to what the fit actually used
    const int s = static_cast<int>(std::lround(lam0.s));
    if (s >= 1) {
        const double cs = poisson_series_constant(s);
        const int N = std::max(
            1, static_cast<int>(std::ceil(
                   std::pow(1.5 * cs * lam0.B0 * std::pow(T, s) / budget, 1.0 / s))));
        rep.details["theory"] = {{"series_constant", cs},
                                 {"terms", N},
                                 {"width", poisson_theoretical_width(s, N)},
                                 {"error", poisson_theoretical_error(s, lam0.B0, T, N)}};
    }
    return rep;
}

namespace {

// shared by the exponential-excitation builders: layers 1-2 plus readout
// approximating lambda0(t) + alpha * sum_{t_i < t} exp(-beta (t - t_i))
struct VanillaParts {
    TwoLayer tl;
    double cert = 0.0; // sup error of the *unclamped* readout
    nlohmann::json details;
};

VanillaParts vanilla_parts(const TppModelSpec& spec, double budget, const BuildOptions& opt) {
    const double alpha = spec.alpha;
    const double beta = spec.beta;
    const double T = spec.T;
    const double s0p1 = static_cast<double>(opt.s0) + 1.0;

    std::vector<FitTask> tasks(2);
    tasks[0].name = "baseline";
    tasks[0].f = [lam0 = spec.lambda0](const Eigen::VectorXd& x) { return lam0.eval(x[0]); };
    tasks[0].lo = Eigen::VectorXd::Constant(1, 0.0);
    tasks[0].hi = Eigen::VectorXd::Constant(1, T);
    tasks[0].seed = opt.seed;
    tasks[0].weight = 1.0;
    tasks[0].target = 0.25 * budget;

    tasks[1].name = "decay_step";
    tasks[1].f = [beta](const Eigen::VectorXd& x) {
        return x[0] * std::exp(-beta * x[1]) + 1.0;
    };
    tasks[1].lo = Eigen::VectorXd(2);
    tasks[1].lo << -s0p1, 0.0;
    tasks[1].hi = Eigen::VectorXd(2);
    tasks[1].hi << 2.0 * s0p1, T;
    tasks[1].output_bias = false; // zero state in must read out as zero
    tasks[1].seed = opt.seed + 1;
    tasks[1].weight = std::max(alpha, 1e-12) * s0p1;
    tasks[1].target = 0.60 * budget / tasks[1].weight;

    const double psi_share = 0.15 * budget;
    balance_fits(tasks, psi_share, budget, opt, "vanilla excitation build");
    require_step_error_at_most_one(tasks[1]);
    if (tasks[0].fit.cert_error > 1.0) {
        throw CertificationError("vanilla excitation build: baseline error exceeds 1");
    }

    RecBlock decay;
    decay.name = "decay";
    decay.maps = {tasks[1].fit.net};
    decay.err = {tasks[1].fit.cert_error};
    Layer1 l1 = assemble_layer1({decay}, {{&tasks[0].fit.net, 0}});

    std::vector<PsiTerm> terms(2);
    terms[0].name = "baseline";
    terms[0].v = l1.ff_readout[0];
    terms[0].c = l1.ff_bias[0];
    terms[0].coeff = 1.0;
    terms[0].M = spec.lambda0.B0 + 1.0;
    terms[0].weighted_target = 0.5 * psi_share;
    terms[1].name = "decay_state";
    terms[1].v = l1.state_readout[0][0];
    terms[1].c = 0.0;
    terms[1].coeff = alpha;
    terms[1].M = 2.0 * s0p1;
    terms[1].weighted_target = 0.5 * psi_share;

    VanillaParts parts;
    parts.tl = finish_two_layer(l1, terms, -alpha);
    parts.cert = tasks[0].fit.cert_error + tasks[1].weight * tasks[1].fit.cert_error +
                 parts.tl.psi_total;
    parts.details["components"] =
        nlohmann::json::array({task_json(tasks[0]), task_json(tasks[1])});
    parts.details["psi_total"] = parts.tl.psi_total;
    parts.details["s0"] = opt.s0;
    return parts;
}

} // namespace

BuildReport build_vanilla_hawkes_approx(const TppModelSpec& spec, double budget,
                                        const BuildOptions& opt) {
    if (spec.family != TppFamily::LinearHawkesExp) {
        throw ConfigError("build_vanilla_hawkes_approx: expects the exponential Hawkes family");
    }
    if (!(budget > 0.0)) throw ConfigError("build_vanilla_hawkes_approx: need budget > 0");
    validate_model(spec);

    VanillaParts parts = vanilla_parts(spec, budget, opt);

    BuildReport rep;
    rep.cfg.widths = parts.tl.widths;
    rep.cfg.link = LinkKind::Clamp;
    rep.cfg.interp = InterpMode::InputEmbedding;
    rep.cfg.l_f = spec.lambda0.B1;
    rep.cfg.u_f = spec.lambda0.B0 + spec.alpha * static_cast<double>(opt.s0);
    rep.params = two_layer_params(rep.cfg, parts.tl);
    rep.budget = budget;
    rep.certificate = parts.cert;
    rep.details = parts.details;
    return rep;
}

BuildReport build_general_hawkes_approx(const TppModelSpec& spec, double budget,
                                        const BuildOptions& opt) {
    if (spec.family != TppFamily::LinearHawkesGeneral) {
        throw ConfigError("build_general_hawkes_approx: expects the general Hawkes family");
    }
    if (!(budget > 0.0)) throw ConfigError("build_general_hawkes_approx: need budget > 0");
    validate_model(spec);

    const double T = spec.T;
    const double s0 = static_cast<double>(opt.s0);
    const double s0p1 = s0 + 1.0;
    constexpr double kTwoPi = 6.283185307179586476925;
    constexpr double kSqrt2 = 1.4142135623730951;

    // split the kernel into an exponential mixture plus a remainder whose
    // periodic extension is smooth
    const ExpMixture mix = decompose_kernel(spec.kernel, T);
    const int k_mix = static_cast<int>(mix.delta.size());
    auto mu_tilde = [&](double t) { return spec.kernel.eval(t) - mix.eval(t); };

    // pick the number of trigonometric terms so the measured truncation tail
    // fits inside its budget share
    const int kMaxTerms = 64;
    FourierSeries full = fourier_coefficients(mu_tilde, T, kMaxTerms);
    const int kGrid = 4096;
    auto truncation_for = [&](int n) {
        double sup = 0.0;
        for (int g = 0; g <= kGrid; ++g) {
            const double t = T * g / kGrid;
            double s = 0.5 * full.a0;
            for (int l = 1; l <= n; ++l) {
                const double w = kTwoPi * l / T;
                s += full.a[l - 1] * std::cos(w * t) + full.b[l - 1] * std::sin(w * t);
            }
            sup = std::max(sup, std::abs(mu_tilde(t) - s));
        }
        return s0 * 1.05 * sup; // at most s0 event lags each off by the sup
    };
    int n_terms = -1;
    double truncation = 0.0;
    for (int n = 2; n <= kMaxTerms; n = (n < 8 ? n + 2 : n * 2)) {
        truncation = truncation_for(n);
        if (truncation <= 0.25 * budget) {
            n_terms = n;
            break;
        }
    }
    if (n_terms < 0) {
        throw CertificationError(
            "build_general_hawkes_approx: trigonometric truncation cannot meet its budget");
    }

    /*
     * Architecture.  Layer 1 carries the counting recursion, one decay
     * recursion per mixture rate, the baseline net of absolute time, and one
     * cos/sin unit pair per trigonometric term reading the time since the
     * last event.  Layer 2 carries, per trigonometric term, a 2-dimensional
     * rotation state
     *
     *   sigma(t) = sum_{t_i} sin(w_l (t - t_i)),  chi(t) = sum cos(w_l (t - t_i)),
     *
     * advanced by the exact angle-addition step
     *
     *   sigma' = P(u_c, sigma) + P(u_s, chi)
     *   chi'   = -P(u_s, sigma) + P(u_c, chi) + 1,
     *
     * where u_c ~ cos(w_l gap), u_s ~ sin(w_l gap) come from the layer-1
     * units and P is the four-unit product gadget.  The per-event +1 enters
     * through a constant unit (silent at the zero initial state), and the
     * query re-applies it, so the output layer subtracts it once per
     * coefficient.  A rotation is an isometry, so step errors accumulate
     * additively in the Euclidean norm, with no state feedback blow-up.
     */

    // budget layout: the fitted pieces (baseline, decay steps, trig units)
    // are balanced within the remainder; the product gadgets, the counting
    // step, and the psi pass-throughs have freely choosable steps and get
    // fixed slices
    const double prod_share = 0.10 * budget;
    const double psi_share = 0.04 * budget;
    const double count_share = 0.01 * budget;

    // state geometry: decay states are sums of e^{-delta lag} plus the unit
    // jump, so they live in [0, s0 + 1] with margin 1 for accumulated error;
    // rotation coordinates are bounded by s0 with margin 1.5; trig units
    // stay within 1 plus their fit error
    const double box_d = s0 + 2.0;
    const double M_rot = s0 + 1.5;
    const double u_sup = 1.1;

    std::vector<FitTask> tasks;
    {
        FitTask t;
        t.name = "baseline";
        t.f = [lam0 = spec.lambda0](const Eigen::VectorXd& x) { return lam0.eval(x[0]); };
        t.lo = Eigen::VectorXd::Constant(1, 0.0);
        t.hi = Eigen::VectorXd::Constant(1, T);
        t.seed = opt.seed;
        t.weight = 1.0;
        t.target = 0.10 * budget;
        tasks.push_back(std::move(t));
    }
    const double rec_share =
        0.5 * budget / static_cast<double>(std::max(k_mix + n_terms, 1));
    for (int j = 0; j < k_mix; ++j) {
        const double d = mix.delta[j];
        FitTask t;
        t.name = "mixture_decay_" + std::to_string(j + 1);
        t.f = [d](const Eigen::VectorXd& x) { return x[0] * std::exp(-d * x[1]) + 1.0; };
        t.lo = Eigen::VectorXd(2);
        t.lo << -1.0, 0.0;
        t.hi = Eigen::VectorXd(2);
        t.hi << box_d, T;
        t.output_bias = false;
        t.seed = opt.seed + 1000 + static_cast<std::uint64_t>(j);
        t.weight = std::max(std::abs(mix.c[j]), 1e-12) * s0p1;
        // the second cap keeps the state inside its fitted box even when the
        // readout coefficient (and hence the weight) is negligible
        t.target = std::min(rec_share / t.weight, 0.5 / s0p1);
        tasks.push_back(std::move(t));
    }
    // trig units of the time-since-last-event channel; a unit error eps
    // perturbs each rotation step by at most M_rot * eps per coordinate.
    // The second cap keeps accumulated step errors inside the containment
    // margin M_rot - s0 even when the Fourier coefficient (and hence the
    // budget weight) is negligible.
    const double rot_margin = (M_rot - s0) / (s0p1 * kSqrt2);
    const double trig_cap = 0.25 * rot_margin / (2.0 * M_rot);
    for (int l = 1; l <= n_terms; ++l) {
        const double w = kTwoPi * l / T;
        const double cnorm = std::hypot(full.a[l - 1], full.b[l - 1]);
        const double weight = std::max(cnorm, 1e-12) * s0p1 * kSqrt2 * M_rot;
        FitTask tc;
        tc.name = "trig_cos_" + std::to_string(l);
        tc.f = [w](const Eigen::VectorXd& x) { return std::cos(w * x[0]); };
        tc.lo = Eigen::VectorXd::Constant(1, 0.0);
        tc.hi = Eigen::VectorXd::Constant(1, T);
        tc.seed = opt.seed + 100 + static_cast<std::uint64_t>(2 * l);
        tc.weight = weight;
        tc.target = std::min(0.5 * rec_share / weight, trig_cap);
        tasks.push_back(std::move(tc));
        FitTask ts;
        ts.name = "trig_sin_" + std::to_string(l);
        ts.f = [w](const Eigen::VectorXd& x) { return std::sin(w * x[0]); };
        ts.lo = Eigen::VectorXd::Constant(1, 0.0);
        ts.hi = Eigen::VectorXd::Constant(1, T);
        ts.seed = opt.seed + 101 + static_cast<std::uint64_t>(2 * l);
        ts.weight = weight;
        ts.target = std::min(0.5 * rec_share / weight, trig_cap);
        tasks.push_back(std::move(ts));
    }

    balance_fits(tasks, truncation + prod_share + psi_share + count_share, budget, opt,
                 "build_general_hawkes_approx");
    if (tasks[0].fit.cert_error > 1.0) {
        throw CertificationError("build_general_hawkes_approx: baseline error exceeds 1");
    }
    for (int j = 0; j < k_mix; ++j) {
        if (s0p1 * tasks[static_cast<std::size_t>(1 + j)].fit.cert_error > 1.0) {
            throw CertificationError(
                "build_general_hawkes_approx: decay state may leave its fitted box");
        }
    }
    for (std::size_t i = 1 + static_cast<std::size_t>(k_mix); i < tasks.size(); ++i) {
        if (tasks[i].fit.cert_error > u_sup - 1.0) {
            throw CertificationError(
                "build_general_hawkes_approx: trig unit error breaks its range bound");
        }
    }

    // product gadget steps and the per-term rotation error chains
    std::vector<double> prod_h(static_cast<std::size_t>(n_terms));
    std::vector<double> prod_eps(static_cast<std::size_t>(n_terms));
    std::vector<double> rot_step(static_cast<std::size_t>(n_terms));
    double rot_total = 0.0;
    const double prod_cap = 0.25 * rot_margin / 2.0;
    for (int l = 0; l < n_terms; ++l) {
        const double cnorm = std::hypot(full.a[l], full.b[l]);
        const double scale = std::max(cnorm, 1e-12) * s0p1 * kSqrt2;
        const double target = std::min(
            prod_share / static_cast<double>(n_terms) / (2.0 * scale), prod_cap);
        prod_h[static_cast<std::size_t>(l)] = prod_step_for(u_sup, M_rot, target);
        prod_eps[static_cast<std::size_t>(l)] =
            prod_error_bound(u_sup, M_rot, prod_h[static_cast<std::size_t>(l)]);
        const double eps_uc =
            tasks[static_cast<std::size_t>(1 + k_mix + 2 * l)].fit.cert_error;
        const double eps_us =
            tasks[static_cast<std::size_t>(2 + k_mix + 2 * l)].fit.cert_error;
        rot_step[static_cast<std::size_t>(l)] =
            2.0 * prod_eps[static_cast<std::size_t>(l)] + M_rot * (eps_uc + eps_us);
        if (s0p1 * kSqrt2 * rot_step[static_cast<std::size_t>(l)] > M_rot - s0) {
            throw CertificationError(
                "build_general_hawkes_approx: rotation state may leave its bound");
        }
        rot_total += cnorm * s0p1 * kSqrt2 * rot_step[static_cast<std::size_t>(l)];
    }

    // counting block: a psi unit plus an exact constant unit realize the
    // x -> x + 1 recursion; the step is free, so the chain error is tiny
    const double a0h = 0.5 * full.a0;
    const double count_step_target =
        count_share / (std::max(std::abs(a0h), 1e-12) * s0p1);
    const double h_count = psi_step_for(box_d, count_step_target);
    const double count_step = psi_error_bound(box_d, h_count);
    const double count_total = std::abs(a0h) * s0p1 * count_step;

    // ---- layer 1: counting + decay recursions; baseline + trig units
    std::vector<RecBlock> blocks;
    {
        RecBlock b;
        b.name = "count";
        ShallowNet n;
        n.W = Eigen::MatrixXd::Zero(2, 2);
        n.W(0, 0) = 0.5 * h_count;
        n.b = Eigen::VectorXd::Zero(2);
        n.b[1] = 3.0; // constant unit
        n.v = Eigen::RowVectorXd(2);
        n.v << 2.0 / h_count, 1.0 / std::tanh(3.0);
        b.maps = {std::move(n)};
        b.err = {count_step};
        blocks.push_back(std::move(b));
    }
    for (int j = 0; j < k_mix; ++j) {
        RecBlock b;
        b.name = "decay_" + std::to_string(j + 1);
        b.maps = {tasks[static_cast<std::size_t>(1 + j)].fit.net};
        b.err = {tasks[static_cast<std::size_t>(1 + j)].fit.cert_error};
        blocks.push_back(std::move(b));
    }
    std::vector<FeedforwardUnit> ff;
    ff.push_back({&tasks[0].fit.net, 0});
    for (int l = 0; l < n_terms; ++l) {
        ff.push_back({&tasks[static_cast<std::size_t>(1 + k_mix + 2 * l)].fit.net, 1});
        ff.push_back({&tasks[static_cast<std::size_t>(2 + k_mix + 2 * l)].fit.net, 1});
    }
    Layer1 l1 = assemble_layer1(blocks, ff);

    // ---- layer 2: constant unit, psi pass-throughs, rotation gadgets
    const int n_psi = 2 + k_mix;
    const int R2 = 1 + n_psi + 16 * n_terms;
    RnnLayer layer2;
    layer2.Wx = Eigen::MatrixXd::Zero(R2, l1.width);
    layer2.Wh = Eigen::MatrixXd::Zero(R2, R2);
    layer2.b = Eigen::VectorXd::Zero(R2);
    Eigen::RowVectorXd Wout = Eigen::RowVectorXd::Zero(R2);
    double bout = 0.0;

    layer2.b[0] = 3.0; // constant unit: 0 at the zero initial state, else 1
    const double const_read = 1.0 / std::tanh(3.0);

    double psi_total = 0.0;
    const double per_psi = psi_share / static_cast<double>(n_psi);
    int at2 = 1;
    auto add_psi = [&](const Eigen::RowVectorXd& v, double c, double coeff, double M) {
        const double h = psi_step_for(M, per_psi / std::max(std::abs(coeff), 1e-12));
        layer2.Wx.row(at2) = 0.5 * h * v;
        layer2.b[at2] = 0.5 * h * c;
        Wout[at2] = coeff * 2.0 / h;
        psi_total += std::abs(coeff) * psi_error_bound(M, h);
        ++at2;
    };
    add_psi(l1.ff_readout[0], l1.ff_bias[0], 1.0, spec.lambda0.B0 + 1.0);
    add_psi(l1.state_readout[0][0], 0.0, a0h, box_d);
    bout -= a0h;
    for (int j = 0; j < k_mix; ++j) {
        add_psi(l1.state_readout[static_cast<std::size_t>(1 + j)][0], 0.0, mix.c[j], box_d);
        bout -= mix.c[j];
    }

    for (int l = 0; l < n_terms; ++l) {
        const double h = prod_h[static_cast<std::size_t>(l)];
        const double q = prod_readout_coeff(h);
        // unit layout per term: [0..3] P(u_c, sigma), [4..7] P(u_s, chi),
        // [8..11] P(u_s, sigma), [12..15] P(u_c, chi)
        const int o = at2;
        Eigen::RowVectorXd vsig = Eigen::RowVectorXd::Zero(R2);
        Eigen::RowVectorXd vchi = Eigen::RowVectorXd::Zero(R2);
        const double pat[4] = {q, q, -q, -q};
        for (int u = 0; u < 4; ++u) {
            vsig[o + u] = pat[u];
            vsig[o + 4 + u] = pat[u];
            vchi[o + 8 + u] = -pat[u];
            vchi[o + 12 + u] = pat[u];
        }
        vchi[0] = const_read; // per-event +1 via the constant unit

        const Eigen::RowVectorXd& uc = l1.ff_readout[static_cast<std::size_t>(1 + 2 * l)];
        const double uc_c = l1.ff_bias[static_cast<std::size_t>(1 + 2 * l)];
        const Eigen::RowVectorXd& us = l1.ff_readout[static_cast<std::size_t>(2 + 2 * l)];
        const double us_c = l1.ff_bias[static_cast<std::size_t>(2 + 2 * l)];
        auto wire_product = [&](int g, const Eigen::RowVectorXd& av, double ac,
                                const Eigen::RowVectorXd& bv) {
            const double sa[4] = {1.0, -1.0, 1.0, -1.0};
            const double sb[4] = {1.0, -1.0, -1.0, 1.0};
            for (int u = 0; u < 4; ++u) {
                layer2.Wx.row(g + u) = sa[u] * h * av;
                layer2.Wh.row(g + u) = sb[u] * h * bv;
                layer2.b[g + u] = 1.0 + sa[u] * h * ac;
            }
        };
        wire_product(o, uc, uc_c, vsig);
        wire_product(o + 4, us, us_c, vchi);
        wire_product(o + 8, us, us_c, vsig);
        wire_product(o + 12, uc, uc_c, vchi);

        Wout += full.b[l] * vsig + full.a[l] * vchi;
        bout -= full.a[l]; // the query re-applies the per-event offset
        at2 += 16;
    }

    double decay_total = 0.0;
    for (int j = 0; j < k_mix; ++j) {
        decay_total += tasks[static_cast<std::size_t>(1 + j)].weight *
                       tasks[static_cast<std::size_t>(1 + j)].fit.cert_error;
    }

    BuildReport rep;
    rep.cfg.widths = {l1.width, R2};
    rep.cfg.link = LinkKind::Clamp;
    rep.cfg.interp = InterpMode::InputEmbedding;
    rep.cfg.l_f = spec.lambda0.B1;
    rep.cfg.u_f = spec.lambda0.B0 + s0 * spec.kernel.mu_max;
    rep.params = zeros_params(rep.cfg);
    rep.params.layers[0].Wx = l1.Wx;
    rep.params.layers[0].Wh = l1.Wh;
    rep.params.layers[0].b = l1.b;
    rep.params.layers[1] = layer2;
    rep.params.Wout = Wout;
    rep.params.bout = bout;
    rep.budget = budget;
    rep.certificate = tasks[0].fit.cert_error + decay_total + rot_total + count_total +
                      psi_total + truncation;

    nlohmann::json comps = nlohmann::json::array();
    for (const auto& t : tasks) comps.push_back(task_json(t));
    rep.details["components"] = comps;
    nlohmann::json rots = nlohmann::json::array();
    for (int l = 0; l < n_terms; ++l) {
        rots.push_back({{"term", l + 1},
                        {"product_step", prod_h[static_cast<std::size_t>(l)]},
                        {"product_error", prod_eps[static_cast<std::size_t>(l)]},
                        {"step_error", rot_step[static_cast<std::size_t>(l)]},
                        {"contribution", std::hypot(full.a[l], full.b[l]) * s0p1 * kSqrt2 *
                                             rot_step[static_cast<std::size_t>(l)]}});
    }
    rep.details["rotations"] = rots;
    rep.details["rotation_total"] = rot_total;
    rep.details["decay_total"] = decay_total;
    rep.details["count_total"] = count_total;
    rep.details["psi_total"] = psi_total;
    rep.details["truncation"] = truncation;
    rep.details["trig_terms"] = n_terms;
    rep.details["mixture_rates"] = std::vector<double>(mix.delta.data(),
                                                       mix.delta.data() + mix.delta.size());
    rep.details["mixture_coeffs"] =
        std::vector<double>(mix.c.data(), mix.c.data() + mix.c.size());
    rep.details["s0"] = opt.s0;
    return rep;
}

BuildReport build_nonlinear_hawkes_approx(const TppModelSpec& spec, double budget,
                                          const BuildOptions& opt) {
    if (spec.family != TppFamily::NonlinearHawkesExp) {
        throw ConfigError("build_nonlinear_hawkes_approx: expects the nonlinear Hawkes family");
    }
    if (!(budget > 0.0)) throw ConfigError("build_nonlinear_hawkes_approx: need budget > 0");
    validate_model(spec);

    const double s0 = static_cast<double>(opt.s0);
    const double lip = spec.link.lipschitz;
    const double inner_hi = spec.lambda0.B0 + spec.alpha * s0;

    // inner linear functional via the vanilla parts, kept accurate enough
    // that (a) its error stays harmless after the link's Lipschitz factor and
    // (b) its value stays inside the fitted link domain
    const double inner_budget =
        std::min(1.0, 0.5 * budget / std::max(lip, 1e-12));
    VanillaParts parts = vanilla_parts(spec, inner_budget, opt);
    if (parts.cert > 1.0) {
        throw CertificationError(
            "build_nonlinear_hawkes_approx: inner readout error exceeds 1");
    }

    // link fitted on a rescaled unit interval; the affine readout of the
    // inner network is folded into the first-layer weights of the link net
    const double rho = inner_hi + 2.0;
    LinkSpec link = spec.link;
    FitTask link_task;
    link_task.name = "link";
    link_task.f = [link, rho](const Eigen::VectorXd& x) { return link.eval(rho * x[0] - 1.0); };
    link_task.lo = Eigen::VectorXd::Constant(1, 0.0);
    link_task.hi = Eigen::VectorXd::Constant(1, 1.0);
    link_task.seed = opt.seed + 7;
    link_task.weight = 1.0;
    link_task.target = 0.3 * budget;
    std::vector<FitTask> tasks{std::move(link_task)};
    const double psi2_share = 0.2 * budget;
    balance_fits(tasks, psi2_share + lip * parts.cert, budget, opt,
                 "build_nonlinear_hawkes_approx");
    const FitTask& lk = tasks[0];
    if (lk.fit.cert_error > 1.0) {
        throw CertificationError("build_nonlinear_hawkes_approx: link error exceeds 1");
    }

    const int w2 = parts.tl.widths[1];
    const int m_link = lk.fit.net.width();
    RnnLayer layer3;
    layer3.Wx = lk.fit.net.W.col(0) * (parts.tl.Wout / rho);
    layer3.Wh = Eigen::MatrixXd::Zero(m_link, m_link);
    layer3.b = lk.fit.net.W.col(0) * ((parts.tl.bout + 1.0) / rho) + lk.fit.net.b;

    const double M2 = spec.link.B0t + 1.0;
    const double h2 = psi_step_for(M2, psi2_share);
    RnnLayer layer4;
    layer4.Wx = 0.5 * h2 * lk.fit.net.v;
    layer4.Wh = Eigen::MatrixXd::Zero(1, 1);
    layer4.b = Eigen::VectorXd::Constant(1, 0.5 * h2 * lk.fit.net.c);

    BuildReport rep;
    rep.cfg.widths = {parts.tl.widths[0], w2, m_link, 1};
    rep.cfg.link = LinkKind::Clamp;
    rep.cfg.interp = InterpMode::InputEmbedding;
    rep.cfg.l_f = spec.link.B1t;
    rep.cfg.u_f = spec.link.B0t;
    rep.params = zeros_params(rep.cfg);
    rep.params.layers[0] = parts.tl.layer1;
    rep.params.layers[1] = parts.tl.layer2;
    rep.params.layers[2] = layer3;
    rep.params.layers[3] = layer4;
    rep.params.Wout = Eigen::RowVectorXd::Constant(1, 2.0 / h2);
    rep.params.bout = 0.0;
    rep.budget = budget;
    const double psi2 = psi_error_bound(M2, h2);
    rep.certificate = lip * parts.cert + lk.fit.cert_error + psi2;

    rep.details["inner"] = parts.details;
    rep.details["inner_certificate"] = parts.cert;
    rep.details["link"] = task_json(lk);
    rep.details["psi_out"] = psi2;
    rep.details["rho"] = rho;
    rep.details["s0"] = opt.s0;
    return rep;
}

double measured_sup_error(const BuildReport& rep, const TppModelSpec& target,
                          const std::vector<EventSequence>& seqs, int grid_per_seq) {
    double sup = 0.0;
    for (const auto& seq : seqs) {
        const HiddenGrid grid = hidden_grid(rep.params, rep.cfg, seq);
        auto check = [&](double t) {
            if (!(t > 0.0) || t > seq.T) return;
            const double a = intensity_with_grid(rep.params, rep.cfg, seq, grid, t);
            const double b = intensity_at(target, seq, t);
            sup = std::max(sup, std::abs(a - b));
        };
        for (int g = 0; g < grid_per_seq; ++g) {
            check(seq.T * (static_cast<double>(g) + 0.5) / static_cast<double>(grid_per_seq));
        }
        for (double tj : seq.t) check(tj);
        check(seq.T);
    }
    return sup;
}

} // namespace tpplab

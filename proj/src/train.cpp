#include "tpplab/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tpplab/checkpoint.hpp"
#include "tpplab/errors.hpp"
#include "tpplab/rng.hpp"
#include "tpplab/spectral.hpp"

namespace tpplab {

std::string optimizer_name(OptimizerKind k) {
    switch (k) {
        case OptimizerKind::Gd: return "gd";
        case OptimizerKind::Momentum: return "momentum";
        case OptimizerKind::Adam: return "adam";
    }
    throw ConfigError("unknown optimizer");
}

OptimizerKind optimizer_from_name(const std::string& name) {
    if (name == "gd") return OptimizerKind::Gd;
    if (name == "momentum") return OptimizerKind::Momentum;
    if (name == "adam") return OptimizerKind::Adam;
    throw ConfigError("unknown optimizer '" + name + "'");
}

std::string init_name(InitScheme s) {
    switch (s) {
        case InitScheme::Zeros: return "zeros";
        case InitScheme::SmallUniform: return "small_uniform";
        case InitScheme::WarmStart: return "warm_start";
    }
    return "small_uniform";
}

InitScheme init_from_name(const std::string& name) {
    if (name == "zeros") return InitScheme::Zeros;
    if (name == "small_uniform") return InitScheme::SmallUniform;
    if (name == "warm_start") return InitScheme::WarmStart;
    throw ConfigError("unknown init scheme '" + name + "'");
}

namespace {

struct QueryCache {
    double t = 0.0;
    double coeff = 0.0;   // dLoss/dlambda at this point
    std::size_t j = 0;    // events strictly before t
    double pre = 0.0;
    double lambda = 0.0;
    std::vector<Eigen::VectorXd> u; // per-layer interpolated states (InputEmbedding only)
    Eigen::Vector2d x = Eigen::Vector2d::Zero();
};

} // namespace

LossGrad loss_grad(const RnnParams& p, const RnnConfig& cfg, const EventSequence& seq) {
    const std::size_t L = cfg.widths.size();
    const std::size_t N = seq.size();
    const HiddenGrid grid = hidden_grid(p, cfg, seq);

    // ---- forward over all query points (quadrature nodes + event times) ----
    const std::vector<QuadNodes> panels = loss_nodes(cfg, seq);
    std::vector<QueryCache> queries;
    auto eval_query = [&](double t, bool is_event) {
        QueryCache q;
        q.t = t;
        q.j = seq.count_before(t);
        q.x = embed_input(seq, t);
        double pre;
        if (cfg.interp == InterpMode::InputEmbedding) {
            q.u.resize(L);
            Eigen::VectorXd below = q.x;
            for (std::size_t l = 0; l < L; ++l) {
                Eigen::VectorXd a =
                    p.layers[l].Wx * below + p.layers[l].Wh * grid[l][q.j] + p.layers[l].b;
                q.u[l] = a.array().tanh().matrix();
                below = q.u[l];
            }
            pre = p.Wout.dot(q.u[L - 1]) + p.bout;
        } else {
            pre = p.Wout.dot(grid[L - 1][q.j]) + p.bout;
            if (cfg.interp == InterpMode::LinearInTime) pre += p.alpha_naive * q.x[1];
        }
        q.pre = pre;
        q.lambda = apply_link(cfg, pre);
        q.coeff = is_event ? -1.0 / q.lambda : 0.0; // weight filled by caller for nodes
        return q;
    };

    double loss = 0.0;
    for (const auto& nodes : panels) {
        for (std::size_t i = 0; i < nodes.x.size(); ++i) {
            QueryCache q = eval_query(nodes.x[i], false);
            q.coeff = nodes.w[i];
            loss += nodes.w[i] * q.lambda;
            queries.push_back(std::move(q));
        }
    }
    for (double tj : seq.t) {
        QueryCache q = eval_query(tj, true);
        loss -= std::log(q.lambda);
        queries.push_back(std::move(q));
    }

    // ---- backward ----
    RnnParams g = zeros_params(cfg);
    std::vector<std::vector<Eigen::VectorXd>> dgrid(L);
    for (std::size_t l = 0; l < L; ++l) {
        dgrid[l].assign(N + 1, Eigen::VectorXd::Zero(cfg.widths[l]));
    }

    for (const auto& q : queries) {
        const double dpre = q.coeff * link_derivative(cfg, q.pre);
        if (dpre == 0.0) continue;
        if (cfg.interp == InterpMode::InputEmbedding) {
            g.Wout += dpre * q.u[L - 1].transpose();
            g.bout += dpre;
            Eigen::VectorXd du = dpre * p.Wout.transpose();
            for (std::size_t li = L; li-- > 0;) {
                const Eigen::VectorXd da =
                    (du.array() * (1.0 - q.u[li].array().square())).matrix();
                const Eigen::VectorXd below =
                    (li == 0) ? Eigen::VectorXd(q.x) : q.u[li - 1];
                g.layers[li].Wx += da * below.transpose();
                g.layers[li].Wh += da * grid[li][q.j].transpose();
                g.layers[li].b += da;
                dgrid[li][q.j] += p.layers[li].Wh.transpose() * da;
                if (li > 0) du = p.layers[li].Wx.transpose() * da;
            }
        } else {
            g.Wout += dpre * grid[L - 1][q.j].transpose();
            g.bout += dpre;
            if (cfg.interp == InterpMode::LinearInTime) g.alpha_naive += dpre * q.x[1];
            dgrid[L - 1][q.j] += dpre * p.Wout.transpose();
        }
    }

    // grid recursion backward: later events first, upper layers first, so all
    // downstream contributions to a state are accumulated before it is used
    for (std::size_t j = N; j >= 1; --j) {
        const Eigen::Vector2d xj = embed_input(seq, seq.t[j - 1]);
        for (std::size_t li = L; li-- > 0;) {
            const Eigen::VectorXd da =
                (dgrid[li][j].array() * (1.0 - grid[li][j].array().square())).matrix();
            const Eigen::VectorXd below =
                (li == 0) ? Eigen::VectorXd(xj) : grid[li - 1][j];
            g.layers[li].Wx += da * below.transpose();
            g.layers[li].Wh += da * grid[li][j - 1].transpose();
            g.layers[li].b += da;
            dgrid[li][j - 1] += p.layers[li].Wh.transpose() * da;
            if (li > 0) dgrid[li - 1][j] += p.layers[li].Wx.transpose() * da;
        }
    }

    LossGrad out;
    out.loss = loss;
    out.grad = flatten(g);
    return out;
}

Eigen::VectorXd grad_nll(const RnnParams& p, const RnnConfig& cfg, const EventSequence& seq) {
    return loss_grad(p, cfg, seq).grad;
}

double mean_nll(const RnnParams& p, const RnnConfig& cfg,
                const std::vector<EventSequence>& data) {
    if (data.empty()) return 0.0;
    double s = 0.0;
    for (const auto& seq : data) s += nll_loss(p, cfg, seq);
    return s / static_cast<double>(data.size());
}

namespace {

// pairwise tree reduction: sums adjacent pairs until one vector remains, a
// fixed association order that keeps batch sums bit-stable
Eigen::VectorXd tree_sum(std::vector<Eigen::VectorXd> terms) {
    if (terms.empty()) return Eigen::VectorXd();
    while (terms.size() > 1) {
        std::vector<Eigen::VectorXd> next;
        next.reserve((terms.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < terms.size(); i += 2) {
            next.push_back(terms[i] + terms[i + 1]);
        }
        if (terms.size() % 2 == 1) next.push_back(terms.back());
        terms = std::move(next);
    }
    return terms[0];
}

} // namespace

LossGrad mean_loss_grad(const RnnParams& p, const RnnConfig& cfg,
                        const std::vector<EventSequence>& data) {
    if (data.empty()) throw ConfigError("mean_loss_grad: empty batch");
    std::vector<Eigen::VectorXd> grads;
    grads.reserve(data.size());
    std::vector<double> losses;
    losses.reserve(data.size());
    for (const auto& seq : data) {
        LossGrad lg = loss_grad(p, cfg, seq);
        grads.push_back(std::move(lg.grad));
        losses.push_back(lg.loss);
    }
    LossGrad out;
    std::vector<Eigen::VectorXd> loss_terms;
    loss_terms.reserve(losses.size());
    for (double v : losses) loss_terms.push_back(Eigen::VectorXd::Constant(1, v));
    out.loss = tree_sum(std::move(loss_terms))[0] / static_cast<double>(data.size());
    out.grad = tree_sum(std::move(grads)) / static_cast<double>(data.size());
    return out;
}

RnnParams init_params(const RnnConfig& cfg, InitScheme scheme, std::uint64_t seed) {
    if (scheme == InitScheme::WarmStart) {
        throw ConfigError(
            "init_params: warm start copies explicit weights; use the fit_erm overload "
            "that takes an initial model");
    }
    RnnParams p = zeros_params(cfg);
    if (scheme == InitScheme::SmallUniform) {
        CounterRng rng(seed);
        Eigen::VectorXd v = flatten(p);
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-0.1, 0.1);
        p = unflatten(cfg, v);
    }
    return p;
}

void center_output_bias(RnnParams& p, const RnnConfig& cfg, double rate) {
    const double r = std::clamp(rate, cfg.l_f, cfg.u_f);
    p.bout = (cfg.link == LinkKind::SoftplusClamp) ? inverse_softplus(r) : r;
}

void project_params(RnnParams& p, const RnnConfig& cfg, double B_m) {
    if (B_m <= 0.0) return;
    auto shrink_matrix = [&](Eigen::MatrixXd& m) {
        const double s = spectral_norm(m);
        if (s > B_m) m *= B_m / s;
    };
    auto shrink_scalar = [&](double& x) {
        if (std::abs(x) > B_m) x *= B_m / std::abs(x);
    };
    for (auto& layer : p.layers) {
        shrink_matrix(layer.Wx);
        shrink_matrix(layer.Wh);
        const double bn = layer.b.norm();
        if (bn > B_m) layer.b *= B_m / bn;
    }
    const double wn = p.Wout.norm();
    if (wn > B_m) p.Wout *= B_m / wn;
    shrink_scalar(p.bout);
    if (cfg.interp == InterpMode::LinearInTime) shrink_scalar(p.alpha_naive);
}

double cosine_lr(const TrainConfig& tc, int epoch) {
    if (tc.epochs <= 1) return tc.lr;
    const double frac = static_cast<double>(epoch) / static_cast<double>(tc.epochs);
    constexpr double kPi = 3.14159265358979323846;
    return tc.lr_floor + (tc.lr - tc.lr_floor) * 0.5 * (1.0 + std::cos(kPi * frac));
}

TrainResult fit_erm(const RnnConfig& cfg, const TrainConfig& tc,
                    const std::vector<EventSequence>& data) {
    validate_config(cfg);
    if (tc.init == InitScheme::WarmStart) {
        throw ConfigError(
            "fit_erm: warm-start init needs explicit initial weights; use the overload "
            "taking an initial model");
    }
    RnnParams p = init_params(cfg, tc.init, tc.seed);
    if (tc.init_rate > 0.0) center_output_bias(p, cfg, tc.init_rate);
    return fit_erm(p, cfg, tc, data);
}

TrainResult fit_erm(const RnnParams& init, const RnnConfig& cfg, const TrainConfig& tc,
                    const std::vector<EventSequence>& data) {
    validate_config(cfg);
    if (data.empty()) throw ConfigError("fit_erm: no training sequences");
    if (tc.epochs < 0) throw ConfigError("fit_erm: epochs must be >= 0");
    if (tc.val_fraction < 0.0 || tc.val_fraction >= 1.0) {
        throw ConfigError("fit_erm: val_fraction must be in [0, 1)");
    }
    if (flatten(init).size() != static_cast<Eigen::Index>(param_count(cfg))) {
        throw ConfigError("fit_erm: initial weights do not match the architecture");
    }

    const std::size_t n_val =
        static_cast<std::size_t>(std::llround(tc.val_fraction * static_cast<double>(data.size())));
    if (n_val >= data.size()) throw ConfigError("fit_erm: validation split leaves no train data");
    const std::vector<EventSequence> train(data.begin(), data.end() - static_cast<long>(n_val));
    const std::vector<EventSequence> val(data.end() - static_cast<long>(n_val), data.end());

    RnnParams p = init;
    if (tc.epochs == 0) {
        // zero training steps: hand back the starting point untouched
        TrainResult res;
        res.params = p;
        res.final_train_nll = mean_nll(p, cfg, train);
        res.final_val_nll = val.empty() ? 0.0 : mean_nll(p, cfg, val);
        res.epochs_run = 0;
        if (!tc.trace_path.empty()) {
            write_text_file(tc.trace_path, "epoch,train_nll,val_nll,param_norm,lr\n");
        }
        return res;
    }
    project_params(p, cfg, tc.B_m);

    const Eigen::Index dim = static_cast<Eigen::Index>(param_count(cfg));
    Eigen::VectorXd mom = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd adam_m = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd adam_v = Eigen::VectorXd::Zero(dim);

    TrainResult res;
    RnnParams best = p;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    int stale = 0;

    std::ostringstream trace;
    if (!tc.trace_path.empty()) trace << "epoch,train_nll,val_nll,param_norm,lr\n";

    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        LossGrad lg = mean_loss_grad(p, cfg, train);
        const double lr = cosine_lr(tc, epoch);

        Eigen::VectorXd theta = flatten(p);
        switch (tc.optimizer) {
            case OptimizerKind::Gd:
                theta -= lr * lg.grad;
                break;
            case OptimizerKind::Momentum:
                mom = tc.momentum * mom + lg.grad;
                theta -= lr * mom;
                break;
            case OptimizerKind::Adam: {
                adam_m = tc.adam_beta1 * adam_m + (1.0 - tc.adam_beta1) * lg.grad;
                adam_v = tc.adam_beta2 * adam_v +
                         (1.0 - tc.adam_beta2) * lg.grad.cwiseProduct(lg.grad);
                const double bc1 = 1.0 - std::pow(tc.adam_beta1, epoch + 1);
                const double bc2 = 1.0 - std::pow(tc.adam_beta2, epoch + 1);
                theta -= (lr * (adam_m / bc1).array() /
                          ((adam_v / bc2).array().sqrt() + tc.adam_eps))
                             .matrix();
                break;
            }
        }
        p = unflatten(cfg, theta);
        project_params(p, cfg, tc.B_m);

        const double val_nll = val.empty() ? 0.0 : mean_nll(p, cfg, val);
        res.train_curve.push_back(lg.loss);
        res.val_curve.push_back(val_nll);
        if (!tc.trace_path.empty()) {
            trace << epoch << ',' << lg.loss << ',' << val_nll << ',' << param_norm(p, cfg)
                  << ',' << lr << '\n';
        }

        res.epochs_run = epoch + 1;
        if (!val.empty()) {
            if (val_nll < best_val - 1e-12) {
                best_val = val_nll;
                best = p;
                best_epoch = epoch;
                stale = 0;
            } else if (tc.patience > 0 && ++stale >= tc.patience) {
                break;
            }
        }
    }

    if (!val.empty() && best_epoch >= 0) {
        res.params = best;
        res.best_epoch = best_epoch;
        res.final_val_nll = best_val;
    } else {
        res.params = p;
        res.best_epoch = res.epochs_run - 1;
        res.final_val_nll = val.empty() ? 0.0 : mean_nll(p, cfg, val);
    }
    res.final_train_nll = mean_nll(res.params, cfg, train);

    if (!tc.trace_path.empty()) write_text_file(tc.trace_path, trace.str());
    return res;
}

nlohmann::json train_config_to_json(const TrainConfig& tc) {
    return {{"optimizer", optimizer_name(tc.optimizer)},
            {"init", init_name(tc.init)},
            {"epochs", tc.epochs},
            {"lr", tc.lr},
            {"lr_floor", tc.lr_floor},
            {"momentum", tc.momentum},
            {"adam_beta1", tc.adam_beta1},
            {"adam_beta2", tc.adam_beta2},
            {"adam_eps", tc.adam_eps},
            {"B_m", tc.B_m},
            {"init_rate", tc.init_rate},
            {"val_fraction", tc.val_fraction},
            {"patience", tc.patience},
            {"seed", tc.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig tc;
    try {
        if (j.contains("optimizer")) tc.optimizer = optimizer_from_name(j.at("optimizer"));
        if (j.contains("init")) tc.init = init_from_name(j.at("init"));
        tc.epochs = j.value("epochs", tc.epochs);
        tc.lr = j.value("lr", tc.lr);
        tc.lr_floor = j.value("lr_floor", tc.lr_floor);
        tc.momentum = j.value("momentum", tc.momentum);
        tc.adam_beta1 = j.value("adam_beta1", tc.adam_beta1);
        tc.adam_beta2 = j.value("adam_beta2", tc.adam_beta2);
        tc.adam_eps = j.value("adam_eps", tc.adam_eps);
        tc.B_m = j.value("B_m", tc.B_m);
        tc.init_rate = j.value("init_rate", tc.init_rate);
        tc.val_fraction = j.value("val_fraction", tc.val_fraction);
        tc.patience = j.value("patience", tc.patience);
        tc.seed = j.value("seed", tc.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("train config: ") + e.what());
    }
    if (tc.epochs < 0 || !(tc.lr > 0.0) || tc.lr_floor < 0.0 ||
        tc.val_fraction < 0.0 || tc.val_fraction >= 1.0 || tc.patience < 0) {
        throw ConfigError("train config: invalid field value");
    }
    return tc;
}

} // namespace tpplab

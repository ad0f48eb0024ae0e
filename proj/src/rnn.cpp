#include "tpplab/rnn.hpp"

#include <algorithm>
#include <cmath>

#include "tpplab/errors.hpp"
#include "tpplab/spectral.hpp"

namespace tpplab {

std::string link_name(LinkKind k) {
    return k == LinkKind::Clamp ? "clamp" : "softplus_clamp";
}

LinkKind link_from_name(const std::string& name) {
    if (name == "clamp") return LinkKind::Clamp;
    if (name == "softplus_clamp") return LinkKind::SoftplusClamp;
    throw ConfigError("unknown link '" + name + "'");
}

std::string interp_name(InterpMode m) {
    switch (m) {
        case InterpMode::InputEmbedding: return "input_embedding";
        case InterpMode::ConstantHold: return "constant_hold";
        case InterpMode::LinearInTime: return "linear_in_time";
    }
    throw ConfigError("unknown interpolation mode");
}

InterpMode interp_from_name(const std::string& name) {
    if (name == "input_embedding") return InterpMode::InputEmbedding;
    if (name == "constant_hold") return InterpMode::ConstantHold;
    if (name == "linear_in_time") return InterpMode::LinearInTime;
    throw ConfigError("unknown interpolation mode '" + name + "'");
}

void validate_config(const RnnConfig& cfg) {
    if (cfg.widths.empty()) throw ConfigError("rnn: need at least one layer");
    for (int w : cfg.widths) {
        if (w < 1) throw ConfigError("rnn: layer widths must be >= 1");
    }
    if (!(cfg.l_f > 0.0) || !(cfg.u_f >= cfg.l_f) || !std::isfinite(cfg.u_f)) {
        throw ConfigError("rnn: need 0 < l_f <= u_f < inf");
    }
    if (cfg.quad_refine < 1) throw ConfigError("rnn: quad_refine must be >= 1");
}

RnnParams zeros_params(const RnnConfig& cfg) {
    validate_config(cfg);
    RnnParams p;
    p.layers.resize(cfg.widths.size());
    for (std::size_t l = 0; l < cfg.widths.size(); ++l) {
        const int d = cfg.widths[l];
        const int in = cfg.layer_input_dim(static_cast<int>(l));
        p.layers[l].Wx = Eigen::MatrixXd::Zero(d, in);
        p.layers[l].Wh = Eigen::MatrixXd::Zero(d, d);
        p.layers[l].b = Eigen::VectorXd::Zero(d);
    }
    p.Wout = Eigen::RowVectorXd::Zero(cfg.widths.back());
    return p;
}

std::size_t param_count(const RnnConfig& cfg) {
    std::size_t n = 0;
    for (std::size_t l = 0; l < cfg.widths.size(); ++l) {
        const std::size_t d = static_cast<std::size_t>(cfg.widths[l]);
        const std::size_t in = static_cast<std::size_t>(cfg.layer_input_dim(static_cast<int>(l)));
        n += d * in + d * d + d;
    }
    n += static_cast<std::size_t>(cfg.widths.back()) + 2; // Wout, bout, alpha_naive
    return n;
}

Eigen::VectorXd flatten(const RnnParams& p) {
    std::size_t n = 0;
    for (const auto& layer : p.layers) {
        n += static_cast<std::size_t>(layer.Wx.size() + layer.Wh.size() + layer.b.size());
    }
    n += static_cast<std::size_t>(p.Wout.size()) + 2;
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    Eigen::Index k = 0;
    for (const auto& layer : p.layers) {
        for (Eigen::Index r = 0; r < layer.Wx.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.Wx.cols(); ++c) v[k++] = layer.Wx(r, c);
        for (Eigen::Index r = 0; r < layer.Wh.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.Wh.cols(); ++c) v[k++] = layer.Wh(r, c);
        for (Eigen::Index r = 0; r < layer.b.size(); ++r) v[k++] = layer.b[r];
    }
    for (Eigen::Index c = 0; c < p.Wout.size(); ++c) v[k++] = p.Wout[c];
    v[k++] = p.bout;
    v[k++] = p.alpha_naive;
    return v;
}

RnnParams unflatten(const RnnConfig& cfg, const Eigen::VectorXd& v) {
    if (static_cast<std::size_t>(v.size()) != param_count(cfg)) {
        throw ConfigError("unflatten: vector length does not match config");
    }
    RnnParams p = zeros_params(cfg);
    Eigen::Index k = 0;
    for (auto& layer : p.layers) {
        for (Eigen::Index r = 0; r < layer.Wx.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.Wx.cols(); ++c) layer.Wx(r, c) = v[k++];
        for (Eigen::Index r = 0; r < layer.Wh.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.Wh.cols(); ++c) layer.Wh(r, c) = v[k++];
        for (Eigen::Index r = 0; r < layer.b.size(); ++r) layer.b[r] = v[k++];
    }
    for (Eigen::Index c = 0; c < p.Wout.size(); ++c) p.Wout[c] = v[k++];
    p.bout = v[k++];
    p.alpha_naive = v[k++];
    return p;
}

double param_norm(const RnnParams& p, const RnnConfig& cfg) {
    double m = 0.0;
    for (const auto& layer : p.layers) {
        m = std::max(m, spectral_norm(layer.Wx));
        m = std::max(m, spectral_norm(layer.Wh));
        m = std::max(m, layer.b.norm());
    }
    m = std::max(m, p.Wout.norm()); // operator norm of a single row
    m = std::max(m, std::abs(p.bout));
    if (cfg.interp == InterpMode::LinearInTime) m = std::max(m, std::abs(p.alpha_naive));
    return m;
}

Eigen::Vector2d embed_input(const EventSequence& seq, double t) {
    const std::size_t j = seq.count_before(t);
    const double last = (j == 0) ? 0.0 : seq.t[j - 1];
    return Eigen::Vector2d(t, t - last);
}

HiddenGrid hidden_grid(const RnnParams& p, const RnnConfig& cfg, const EventSequence& seq) {
    const std::size_t L = cfg.widths.size();
    const std::size_t N = seq.size();
    HiddenGrid grid(L);
    for (std::size_t l = 0; l < L; ++l) {
        grid[l].assign(N + 1, Eigen::VectorXd::Zero(cfg.widths[l]));
    }
    for (std::size_t j = 1; j <= N; ++j) {
        Eigen::VectorXd below = embed_input(seq, seq.t[j - 1]);
        for (std::size_t l = 0; l < L; ++l) {
            Eigen::VectorXd a =
                p.layers[l].Wx * below + p.layers[l].Wh * grid[l][j - 1] + p.layers[l].b;
            grid[l][j] = a.array().tanh().matrix();
            below = grid[l][j];
        }
    }
    return grid;
}

Eigen::VectorXd interpolate_hidden(const RnnParams& p, const RnnConfig& cfg,
                                   const EventSequence& seq, const HiddenGrid& grid, double t) {
    const std::size_t j = seq.count_before(t);
    Eigen::VectorXd below = embed_input(seq, t);
    for (std::size_t l = 0; l < cfg.widths.size(); ++l) {
        Eigen::VectorXd a = p.layers[l].Wx * below + p.layers[l].Wh * grid[l][j] + p.layers[l].b;
        below = a.array().tanh().matrix();
    }
    return below;
}

double preactivation(const RnnParams& p, const RnnConfig& cfg, const EventSequence& seq,
                     const HiddenGrid& grid, double t) {
    const std::size_t j = seq.count_before(t);
    switch (cfg.interp) {
        case InterpMode::InputEmbedding:
            return p.Wout.dot(interpolate_hidden(p, cfg, seq, grid, t)) + p.bout;
        case InterpMode::ConstantHold:
            return p.Wout.dot(grid[cfg.widths.size() - 1][j]) + p.bout;
        case InterpMode::LinearInTime: {
            const double last = (j == 0) ? 0.0 : seq.t[j - 1];
            return p.alpha_naive * (t - last) + p.Wout.dot(grid[cfg.widths.size() - 1][j]) +
                   p.bout;
        }
    }
    throw ConfigError("unknown interpolation mode");
}

double softplus(double x) {
    // stable log(1 + exp(x))
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

double inverse_softplus(double y) {
    if (!(y > 0.0)) throw ConfigError("inverse_softplus: need y > 0");
    if (y > 30.0) return y;
    return std::log(std::expm1(y));
}

double apply_link(const RnnConfig& cfg, double pre) {
    const double x = (cfg.link == LinkKind::SoftplusClamp) ? softplus(pre) : pre;
    return std::clamp(x, cfg.l_f, cfg.u_f);
}

double link_derivative(const RnnConfig& cfg, double pre) {
    if (cfg.link == LinkKind::SoftplusClamp) {
        const double s = softplus(pre);
        if (s < cfg.l_f || s > cfg.u_f) return 0.0;
        return 1.0 / (1.0 + std::exp(-pre)); // sigmoid
    }
    return (pre < cfg.l_f || pre > cfg.u_f) ? 0.0 : 1.0;
}

double intensity_with_grid(const RnnParams& p, const RnnConfig& cfg, const EventSequence& seq,
                           const HiddenGrid& grid, double t) {
    return apply_link(cfg, preactivation(p, cfg, seq, grid, t));
}

double intensity(const RnnParams& p, const RnnConfig& cfg, const EventSequence& seq, double t) {
    const HiddenGrid grid = hidden_grid(p, cfg, seq);
    return intensity_with_grid(p, cfg, seq, grid, t);
}

std::vector<QuadNodes> loss_nodes(const RnnConfig& cfg, const EventSequence& seq) {
    const auto& gx = gl16_nodes();
    const auto& gw = gl16_weights();
    std::vector<QuadNodes> out;
    out.reserve(seq.size() + 1);
    const double max_width = seq.T / static_cast<double>(cfg.quad_refine);
    double lo = 0.0;
    for (std::size_t j = 0; j <= seq.size(); ++j) {
        const double hi = (j < seq.size()) ? seq.t[j] : seq.T;
        QuadNodes nodes;
        if (hi > lo) {
            const int panels =
                std::max(1, static_cast<int>(std::ceil((hi - lo) / max_width - 1e-12)));
            const double w = (hi - lo) / panels;
            for (int k = 0; k < panels; ++k) {
                const double a = lo + k * w;
                const double mid = a + 0.5 * w;
                const double half = 0.5 * w;
                for (int i = 0; i < 16; ++i) {
                    nodes.x.push_back(mid + half * gx[static_cast<std::size_t>(i)]);
                    nodes.w.push_back(half * gw[static_cast<std::size_t>(i)]);
                }
            }
        }
        out.push_back(std::move(nodes));
        lo = hi;
    }
    return out;
}

double nll_loss(const RnnParams& p, const RnnConfig& cfg, const EventSequence& seq) {
    const HiddenGrid grid = hidden_grid(p, cfg, seq);
    const std::vector<QuadNodes> panels = loss_nodes(cfg, seq);
    double integral = 0.0;
    for (const auto& nodes : panels) {
        for (std::size_t i = 0; i < nodes.x.size(); ++i) {
            integral += nodes.w[i] * intensity_with_grid(p, cfg, seq, grid, nodes.x[i]);
        }
    }
    double logsum = 0.0;
    for (double tj : seq.t) {
        logsum += std::log(intensity_with_grid(p, cfg, seq, grid, tj));
    }
    return integral - logsum;
}

double quadrature_nll(const std::function<double(double)>& lambda, const EventSequence& seq,
                      const QuadratureConfig& quad) {
    double integral = 0.0;
    double lo = 0.0;
    for (std::size_t j = 0; j <= seq.size(); ++j) {
        const double hi = (j < seq.size()) ? seq.t[j] : seq.T;
        if (hi > lo) integral += adaptive_integrate(lambda, lo, hi, quad);
        lo = hi;
    }
    double logsum = 0.0;
    for (double tj : seq.t) {
        const double lam = lambda(tj);
        if (!(lam > 0.0)) throw NumericError("quadrature_nll: zero intensity at an event");
        logsum += std::log(lam);
    }
    return integral - logsum;
}

} // namespace tpplab

#include "tpplab/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "tpplab/errors.hpp"
#include "tpplab/spectral.hpp"

namespace tpplab {

double s_poly(int i, int l, double beta) {
    if (i < 0) return 0.0;
    if (l < 0) throw ConfigError("s_poly: need l >= 0");
    double sum = 0.0;
    double binom = 1.0; // C(l, l)
    double bpow = 1.0;
    for (int j = 0; j <= i; ++j) {
        sum += binom * bpow;
        // C(j+1+l, l) = C(j+l, l) * (j+1+l) / (j+1)
        binom *= static_cast<double>(j + 1 + l) / static_cast<double>(j + 1);
        bpow *= beta;
    }
    return sum;
}

double log_geom_sum(double beta, double m) {
    if (!(beta >= 0.0) || !(m >= 1.0)) throw ConfigError("log_geom_sum: bad arguments");
    const double d = beta - 1.0;
    if (std::abs(d) <= 1e-8) {
        // sum = m (1 + (m-1) d / 2 + O(d^2 m^2)); the band keeps d*m tiny
        return std::log(m) + std::log1p(0.5 * (m - 1.0) * d);
    }
    if (beta > 1.0) {
        // (beta^m - 1) / (beta - 1) = beta^m (1 - beta^{-m}) / (beta - 1)
        return m * std::log(beta) + std::log1p(-std::exp(-m * std::log(beta))) - std::log(d);
    }
    if (beta == 0.0) return 0.0; // single term j = 0
    // log((1 - beta^m) / (1 - beta)) for 0 < beta < 1
    return std::log1p(-std::exp(m * std::log(beta))) - std::log1p(-beta);
}

namespace {

// log(1 + e^z), stable for large z
double log1p_exp(double z) {
    if (z > 30.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

} // namespace

LayerDeltas param_deltas(const RnnParams& a, const RnnParams& b, const RnnConfig& cfg) {
    const std::size_t L = cfg.widths.size();
    LayerDeltas d;
    d.dx.assign(L + 2, 0.0);
    d.dh.assign(L + 1, 0.0);
    d.db.assign(L + 2, 0.0);
    for (std::size_t l = 0; l < L; ++l) {
        d.dx[l + 1] = spectral_norm(a.layers[l].Wx - b.layers[l].Wx);
        d.dh[l + 1] = spectral_norm(a.layers[l].Wh - b.layers[l].Wh);
        d.db[l + 1] = (a.layers[l].b - b.layers[l].b).norm();
    }
    d.dx[L + 1] = (a.Wout - b.Wout).norm();
    d.db[L + 1] = std::abs(a.bout - b.bout);
    return d;
}

double lipschitz_bound(int L, int D, double T, double B_m, int events_before,
                       const LayerDeltas& d) {
    if (L < 1 || D < 1 || !(T > 0.0) || !(B_m >= 0.0)) {
        throw ConfigError("lipschitz_bound: bad arguments");
    }
    if (static_cast<int>(d.dx.size()) != L + 2 || static_cast<int>(d.db.size()) != L + 2 ||
        static_cast<int>(d.dh.size()) != L + 1) {
        throw ConfigError("lipschitz_bound: delta lists must cover layers 1..L+1");
    }
    // tanh activation and clamp link: unit Lipschitz factors, unit range
    const double rho_f = 1.0;
    const double B_sigma = 1.0;
    const double gamma = B_m; // rho_sigma * B_x
    const double beta = B_m;  // rho_sigma * B_h
    const double sqrtD = std::sqrt(static_cast<double>(D));
    const double B_in = std::sqrt(2.0) * T;
    const int i = events_before;

    double inner = 0.0;
    double gpow = 1.0;
    for (int l = 0; l <= L - 1; ++l) {
        inner += gpow * s_poly(i, l, beta) * d.db[static_cast<std::size_t>(L - l)];
        if (l <= L - 2) {
            inner += B_sigma * sqrtD * gpow * s_poly(i, l, beta) *
                     d.dx[static_cast<std::size_t>(L - l)];
        }
        inner += B_sigma * sqrtD * gpow * s_poly(i - 1, l, beta) *
                 d.dh[static_cast<std::size_t>(L - l)];
        gpow *= gamma;
    }
    const double gLm1 = std::pow(gamma, L - 1);
    inner += B_in * gLm1 * s_poly(i, L - 1, beta) * d.dx[1];

    return rho_f * gamma * inner + rho_f * d.db[static_cast<std::size_t>(L + 1)] +
           rho_f * B_sigma * sqrtD * d.dx[static_cast<std::size_t>(L + 1)];
}

double log_class_magnitude(int s_events, int L, int D, double B_m, double T) {
    if (s_events < 0 || L < 1 || D < 1 || !(B_m > 0.0) || !(T > 0.0)) {
        throw ConfigError("log_class_magnitude: bad arguments");
    }
    const double sqrtD = std::sqrt(static_cast<double>(D));
    const double B_in = std::sqrt(2.0) * T;
    const double front = std::max({sqrtD, B_in, 1.0});
    const double m = static_cast<double>(s_events) + 1.0;
    double lg = std::log(B_m * sqrtD) + std::log(front);
    lg += std::max(static_cast<double>(L) * std::log(B_m), 0.0); // gamma^L v 1
    lg += static_cast<double>(L - 1) * std::log(m);
    lg += log_geom_sum(B_m, m);
    return lg;
}

double covering_log(double eps, int L, int D, double B_m, int n0_events, double T) {
    if (!(eps > 0.0)) throw ConfigError("covering_log: need eps > 0");
    if (L < 1 || D < 1 || !(B_m > 0.0) || n0_events < 0 || !(T > 0.0)) {
        throw ConfigError("covering_log: bad arguments");
    }
    const double dims = static_cast<double>(D) * D * (3.0 * L + 2.0);
    // log(1 + C(n0) (3L+2) B_m sqrt(D) / eps), with C carried in log space;
    // C(n0) = M(n0) / (B_m sqrt(D)) in terms of the class magnitude
    const double logC = log_class_magnitude(n0_events, L, D, B_m, T) -
                        std::log(B_m * std::sqrt(static_cast<double>(D)));
    const double z = logC + std::log(3.0 * L + 2.0) +
                     std::log(B_m * std::sqrt(static_cast<double>(D))) - std::log(eps);
    return dims * log1p_exp(z);
}

BoundReport stochastic_error_bound(const TppModelSpec& process, const RnnConfig& cfg,
                                   double B_m, std::size_t n, double delta) {
    validate_config(cfg);
    if (n < 1) throw ConfigError("stochastic_error_bound: need n >= 1");
    if (!(delta > 0.0) || !(delta < 1.0)) {
        throw ConfigError("stochastic_error_bound: need delta in (0,1)");
    }
    if (!(B_m > 0.0)) throw ConfigError("stochastic_error_bound: need B_m > 0");

    const TailConstants tc = tail_constants(process);
    const int L = cfg.depth();
    const int D = *std::max_element(cfg.widths.begin(), cfg.widths.end());
    const double T = process.T;
    const double nn = static_cast<double>(n);

    // event-count cut: start at the closed-form value, then enforce the
    // defining property n a_N exp(-c_N s0) <= delta / 2
    int s0 = static_cast<int>(
        std::ceil((std::log(2.0 * tc.a_N * nn / delta) - 1.0) / tc.c_N));
    s0 = std::max(s0, 0);
    while (nn * tc.a_N * std::exp(-tc.c_N * static_cast<double>(s0)) > 0.5 * delta) {
        ++s0;
    }

    BoundReport rep;
    rep.s0 = s0;
    rep.a_N = tc.a_N;
    rep.c_N = tc.c_N;
    rep.term_confidence = std::sqrt(std::log(4.0 / delta));
    const double logM = log_class_magnitude(s0, L, D, B_m, T);
    rep.term_complexity = static_cast<double>(D) * std::sqrt(3.0 * L + 2.0) *
                          (std::sqrt(log1p_exp(logM)) + 1.0);
    const double tail_base = 1.0 / (1.0 - std::exp(-tc.c_N));
    rep.term_tail = tail_base * tail_base;
    rep.value = (192.0 / std::sqrt(nn)) * (T + 1.0 / cfg.l_f) *
                (static_cast<double>(s0) + 1.0) * cfg.u_f *
                (rep.term_confidence + rep.term_complexity + rep.term_tail);
    return rep;
}

double excess_risk_rate(const TppModelSpec& spec) {
    switch (spec.family) {
        case TppFamily::HomPoisson:
            return -0.5;
        case TppFamily::NonHomPoisson:
        case TppFamily::LinearHawkesExp: {
            const double s = spec.lambda0.s;
            if (!(s >= 1.0)) throw ConfigError("excess_risk_rate: baseline smoothness must be >= 1");
            return -s / (2.0 * (s + 1.0));
        }
        case TppFamily::LinearHawkesGeneral: {
            const double s = spec.lambda0.s;
            const double k = spec.kernel.k;
            if (!(s >= 1.0) || !(k >= 1.0)) {
                throw ConfigError("excess_risk_rate: need smoothness declarations >= 1");
            }
            return -0.5 * std::min(s / (s + 1.0), (k - 1.0) / (k + 4.0));
        }
        case TppFamily::NonlinearHawkesExp:
            return -0.25;
        case TppFamily::SelfCorrecting:
            throw ConfigError("excess_risk_rate: no rate for the self-correcting family");
    }
    throw ConfigError("excess_risk_rate: unknown family");
}

} // namespace tpplab

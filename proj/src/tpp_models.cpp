#include "tpplab/tpp_models.hpp"

#include <algorithm>
#include <cmath>

#include "tpplab/errors.hpp"

namespace tpplab {

std::string family_name(TppFamily f) {
    switch (f) {
        case TppFamily::HomPoisson: return "hom_poisson";
        case TppFamily::NonHomPoisson: return "nonhom_poisson";
        case TppFamily::LinearHawkesExp: return "linear_hawkes_exp";
        case TppFamily::LinearHawkesGeneral: return "linear_hawkes_general";
        case TppFamily::NonlinearHawkesExp: return "nonlinear_hawkes_exp";
        case TppFamily::SelfCorrecting: return "self_correcting";
    }
    throw ConfigError("unknown family");
}

TppFamily family_from_name(const std::string& name) {
    if (name == "hom_poisson") return TppFamily::HomPoisson;
    if (name == "nonhom_poisson") return TppFamily::NonHomPoisson;
    if (name == "linear_hawkes_exp") return TppFamily::LinearHawkesExp;
    if (name == "linear_hawkes_general") return TppFamily::LinearHawkesGeneral;
    if (name == "nonlinear_hawkes_exp") return TppFamily::NonlinearHawkesExp;
    if (name == "self_correcting") return TppFamily::SelfCorrecting;
    throw ConfigError("unknown model family '" + name + "'");
}

namespace {

bool has_lambda0(TppFamily f) {
    return f == TppFamily::NonHomPoisson || f == TppFamily::LinearHawkesExp ||
           f == TppFamily::LinearHawkesGeneral || f == TppFamily::NonlinearHawkesExp;
}

// sum of exp(-beta * (t - t_i)) over events strictly before t
double exp_excitation(const EventSequence& seq, double beta, double t, std::size_t n_before) {
    double s = 0.0;
    for (std::size_t i = 0; i < n_before; ++i) s += std::exp(-beta * (t - seq.t[i]));
    return s;
}

} // namespace

void validate_model(const TppModelSpec& spec) {
    if (!(spec.T > 0.0) || !std::isfinite(spec.T)) throw ConfigError("model: T must be positive");
    if (spec.family == TppFamily::HomPoisson) {
        if (!(spec.lambda >= 0.0)) throw ConfigError("model: lambda must be >= 0");
        return;
    }
    if (has_lambda0(spec.family)) {
        if (spec.lambda0.name.empty()) throw ConfigError("model: lambda0 required");
        // declared-bound check on a grid (the A1-style contract on the baseline)
        for (int i = 0; i <= 2048; ++i) {
            const double t = spec.T * i / 2048.0;
            const double v = spec.lambda0.eval(t);
            if (!(v >= spec.lambda0.B1 - 1e-9 && v <= spec.lambda0.B0 + 1e-9)) {
                throw ConfigError("model: lambda0 violates its declared bounds");
            }
        }
    }
    switch (spec.family) {
        case TppFamily::LinearHawkesExp:
        case TppFamily::NonlinearHawkesExp:
            if (!(spec.alpha >= 0.0) || !(spec.beta > 0.0)) {
                throw ConfigError("model: need alpha >= 0, beta > 0");
            }
            if (spec.family == TppFamily::LinearHawkesExp && spec.alpha / spec.beta >= 1.0) {
                throw ConfigError("model: subcriticality requires alpha/beta < 1");
            }
            if (spec.family == TppFamily::NonlinearHawkesExp && spec.link.name.empty()) {
                throw ConfigError("model: link required");
            }
            break;
        case TppFamily::LinearHawkesGeneral: {
            if (spec.kernel.name.empty()) throw ConfigError("model: kernel required");
            if (spec.kernel.name == "smooth_periodic" &&
                spec.kernel.params.at("period") < spec.T - 1e-12) {
                throw ConfigError("model: smooth_periodic kernel needs period >= T");
            }
            break;
        }
        case TppFamily::SelfCorrecting:
            if (spec.link.name.empty()) throw ConfigError("model: link required");
            if (!(spec.mu_sc >= 0.0) || !(spec.alpha_sc >= 0.0)) {
                throw ConfigError("model: need mu_sc >= 0, alpha_sc >= 0");
            }
            break;
        default:
            break;
    }
}

double intensity_at(const TppModelSpec& spec, const EventSequence& seq, double t) {
    const std::size_t n = seq.count_before(t);
    switch (spec.family) {
        case TppFamily::HomPoisson:
            return spec.lambda;
        case TppFamily::NonHomPoisson:
            return spec.lambda0.eval(t);
        case TppFamily::LinearHawkesExp:
            return spec.lambda0.eval(t) + spec.alpha * exp_excitation(seq, spec.beta, t, n);
        case TppFamily::LinearHawkesGeneral: {
            double s = spec.lambda0.eval(t);
            for (std::size_t i = 0; i < n; ++i) s += spec.kernel.eval(t - seq.t[i]);
            return s;
        }
        case TppFamily::NonlinearHawkesExp:
            return spec.link.eval(spec.lambda0.eval(t) +
                                  spec.alpha * exp_excitation(seq, spec.beta, t, n));
        case TppFamily::SelfCorrecting:
            return spec.link.eval(spec.mu_sc * t - spec.alpha_sc * static_cast<double>(n));
    }
    throw ConfigError("unknown family");
}

namespace {

// quadrature route for families without a closed-form compensator: integrate the
// intensity interval-by-interval so each integrand is smooth
double compensator_quadrature(const TppModelSpec& spec, const EventSequence& seq, double t,
                              const QuadratureConfig& quad) {
    double acc = 0.0;
    double lo = 0.0;
    const std::size_t n = seq.count_before(t);
    for (std::size_t j = 0; j <= n; ++j) {
        const double hi = (j < n) ? seq.t[j] : t;
        if (hi > lo) {
            acc += adaptive_integrate(
                [&](double u) { return intensity_at(spec, seq, u); }, lo, hi, quad);
        }
        lo = hi;
    }
    return acc;
}

} // namespace

double compensator(const TppModelSpec& spec, const EventSequence& seq, double t,
                   const QuadratureConfig& quad) {
    if (t <= 0.0) return 0.0;
    const std::size_t n = seq.count_before(t);
    switch (spec.family) {
        case TppFamily::HomPoisson:
            return spec.lambda * t;
        case TppFamily::NonHomPoisson:
            return spec.lambda0.integral(0.0, t);
        case TppFamily::LinearHawkesExp: {
            double exc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                exc += 1.0 - std::exp(-spec.beta * (t - seq.t[i]));
            }
            return spec.lambda0.integral(0.0, t) + (spec.alpha / spec.beta) * exc;
        }
        case TppFamily::LinearHawkesGeneral: {
            double exc = 0.0;
            for (std::size_t i = 0; i < n; ++i) exc += spec.kernel.integral0(t - seq.t[i]);
            return spec.lambda0.integral(0.0, t) + exc;
        }
        default:
            return compensator_quadrature(spec, seq, t, quad);
    }
}

double loglik(const TppModelSpec& spec, const EventSequence& seq, const QuadratureConfig& quad) {
    double ll = 0.0;
    for (double tj : seq.t) {
        const double lam = intensity_at(spec, seq, tj);
        if (!(lam > 0.0)) throw NumericError("loglik: zero intensity at an event time");
        ll += std::log(lam);
    }
    return ll - compensator(spec, seq, seq.T, quad);
}

std::vector<double> transformed_interarrivals(const TppModelSpec& spec, const EventSequence& seq,
                                              const QuadratureConfig& quad) {
    std::vector<double> out;
    out.reserve(seq.size());
    double prev = 0.0;
    for (double tj : seq.t) {
        const double cur = compensator(spec, seq, tj, quad);
        out.push_back(cur - prev);
        prev = cur;
    }
    return out;
}

std::vector<double> rescaled_exp1_samples(const TppModelSpec& spec, const EventSequence& seq,
                                          const QuadratureConfig& quad) {
    std::vector<double> out;
    out.reserve(seq.size());
    // the censoring budget for gap j is the integrated intensity to T with the
    // history *frozen* at event j-1: excitation contributed by later events
    // must not count, or the budget is overstated and the correction biased
    EventSequence prefix;
    prefix.T = seq.T;
    double prev_time = 0.0;
    for (double tj : seq.t) {
        const double prev = compensator(spec, prefix, prev_time, quad);
        const double tau = compensator(spec, prefix, tj, quad) - prev;
        const double budget = compensator(spec, prefix, seq.T, quad) - prev;
        // truncated-CDF value, computed in expm1 form; kept strictly below 1
        // so the inverse map stays finite when an event lands exactly at T
        double u = std::expm1(-tau) / std::expm1(-budget);
        u = std::min(u, 1.0 - 1e-16);
        out.push_back(-std::log1p(-u));
        prefix.t.push_back(tj);
        prev_time = tj;
    }
    return out;
}

namespace {

double lambda0_sup(const TppModelSpec& spec) {
    return spec.family == TppFamily::HomPoisson ? spec.lambda : spec.lambda0.B0;
}

// majorant valid for every s > t given the events so far (excitation decays or
// is bounded by per-event peaks; links are globally bounded)
double majorant_after(const TppModelSpec& spec, const EventSequence& partial, double t,
                      double exp_state) {
    switch (spec.family) {
        case TppFamily::HomPoisson:
            return spec.lambda;
        case TppFamily::NonHomPoisson:
            return spec.lambda0.B0;
        case TppFamily::LinearHawkesExp:
            return spec.lambda0.B0 + spec.alpha * exp_state;
        case TppFamily::LinearHawkesGeneral:
            return spec.lambda0.B0 +
                   static_cast<double>(partial.t.size()) * spec.kernel.mu_max;
        case TppFamily::NonlinearHawkesExp:
        case TppFamily::SelfCorrecting:
            return spec.link.B0t;
    }
    throw ConfigError("unknown family");
}

} // namespace

EventSequence simulate_one(const TppModelSpec& spec, CounterRng& rng) {
    EventSequence seq;
    seq.T = spec.T;
    double t = 0.0;
    double exp_state = 0.0; // sum exp(-beta (t - t_i)) over accepted events, at current t
    while (true) {
        const double maj = majorant_after(spec, seq, t, exp_state);
        if (!(maj > 0.0)) break; // dead process
        const double gap = rng.exponential(maj);
        const double tc = t + gap;
        if (tc > spec.T) break;
        exp_state *= std::exp(-spec.beta * (tc - t));
        t = tc;
        const double lam = intensity_at(spec, seq, tc);
        if (rng.uniform01() * maj <= lam) {
            seq.t.push_back(tc);
            exp_state += 1.0;
        }
    }
    return seq;
}

std::vector<EventSequence> simulate(const TppModelSpec& spec, std::size_t n, std::uint64_t seed) {
    validate_model(spec);
    std::vector<EventSequence> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        CounterRng rng = CounterRng::substream(seed, i);
        out.push_back(simulate_one(spec, rng));
    }
    return out;
}

TailConstants tail_constants(const TppModelSpec& spec, double eta0) {
    TailConstants tc;
    switch (spec.family) {
        case TppFamily::HomPoisson:
            tc.B0 = spec.lambda;
            tc.c_mu = 0.0;
            break;
        case TppFamily::NonHomPoisson:
            tc.B0 = spec.lambda0.B0;
            tc.c_mu = 0.0;
            break;
        case TppFamily::LinearHawkesExp:
            tc.B0 = spec.lambda0.B0;
            tc.c_mu = spec.alpha / spec.beta;
            break;
        case TppFamily::LinearHawkesGeneral:
            tc.B0 = spec.lambda0.B0;
            tc.c_mu = spec.kernel.c_mu;
            break;
        case TppFamily::NonlinearHawkesExp:
            // bounded link reduces the count tail to the Poisson argument at Btilde0
            tc.B0 = spec.link.B0t;
            tc.c_mu = 0.0;
            break;
        case TppFamily::SelfCorrecting:
            throw ConfigError("tail_constants: no tail-constant route for self_correcting");
    }
    if (tc.c_mu >= 1.0) throw ConfigError("tail_constants: requires c_mu < 1");
    if (eta0 == 0.0) {
        eta0 = (tc.c_mu < 1.0 / 2.718281828459045) ? 2.718281828459045
                                                   : 0.5 * (1.0 + 1.0 / tc.c_mu);
    }
    if (!(eta0 > 1.0) || (tc.c_mu > 0.0 && !(eta0 < 1.0 / tc.c_mu))) {
        throw ConfigError("tail_constants: eta0 must lie in (1, 1/c_mu)");
    }
    tc.eta0 = eta0;
    tc.c_N = 0.5 * std::log(eta0) * (1.0 - tc.c_mu * eta0);
    tc.a_N = 2.0 * std::sqrt(tc.B0 * spec.T) *
             std::exp(0.5 * std::log(eta0) * eta0 * tc.B0 * spec.T) / (1.0 - tc.c_mu);
    return tc;
}

TppModelSpec TppModelSpec::from_json(const nlohmann::json& j) {
    TppModelSpec spec;
    spec.family = family_from_name(j.at("family").get<std::string>());
    spec.T = j.at("T").get<double>();
    if (j.contains("lambda")) spec.lambda = j.at("lambda").get<double>();
    if (j.contains("lambda0")) spec.lambda0 = Lambda0Spec::from_json(j.at("lambda0"));
    if (j.contains("alpha")) spec.alpha = j.at("alpha").get<double>();
    if (j.contains("beta")) spec.beta = j.at("beta").get<double>();
    if (j.contains("kernel")) spec.kernel = KernelSpec::from_json(j.at("kernel"));
    if (j.contains("link")) spec.link = LinkSpec::from_json(j.at("link"));
    if (j.contains("mu_sc")) spec.mu_sc = j.at("mu_sc").get<double>();
    if (j.contains("alpha_sc")) spec.alpha_sc = j.at("alpha_sc").get<double>();
    validate_model(spec);
    return spec;
}

nlohmann::json TppModelSpec::to_json() const {
    nlohmann::json j;
    j["family"] = family_name(family);
    j["T"] = T;
    switch (family) {
        case TppFamily::HomPoisson:
            j["lambda"] = lambda;
            break;
        case TppFamily::NonHomPoisson:
            j["lambda0"] = lambda0.to_json();
            break;
        case TppFamily::LinearHawkesExp:
            j["lambda0"] = lambda0.to_json();
            j["alpha"] = alpha;
            j["beta"] = beta;
            break;
        case TppFamily::LinearHawkesGeneral:
            j["lambda0"] = lambda0.to_json();
            j["kernel"] = kernel.to_json();
            break;
        case TppFamily::NonlinearHawkesExp:
            j["lambda0"] = lambda0.to_json();
            j["alpha"] = alpha;
            j["beta"] = beta;
            j["link"] = link.to_json();
            break;
        case TppFamily::SelfCorrecting:
            j["mu_sc"] = mu_sc;
            j["alpha_sc"] = alpha_sc;
            j["link"] = link.to_json();
            break;
    }
    return j;
}

} // namespace tpplab

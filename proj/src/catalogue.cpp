#include "tpplab/catalogue.hpp"

#include <algorithm>
#include <cmath>

#include "tpplab/errors.hpp"

namespace { constexpr double kPi = 3.141592653589793238462643383279502884; }

namespace tpplab {

namespace {

double require(const std::map<std::string, double>& p, const std::string& key,
               const std::string& owner) {
    auto it = p.find(key);
    if (it == p.end()) throw ConfigError(owner + ": missing parameter '" + key + "'");
    if (!std::isfinite(it->second)) throw ConfigError(owner + ": parameter '" + key + "' not finite");
    return it->second;
}

double optional(const std::map<std::string, double>& p, const std::string& key, double def) {
    auto it = p.find(key);
    return it == p.end() ? def : it->second;
}

std::map<std::string, double> params_from_json(const nlohmann::json& j) {
    std::map<std::string, double> p;
    if (j.contains("params")) {
        for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it) {
            p[it.key()] = it.value().get<double>();
        }
    }
    return p;
}

nlohmann::json params_to_json(const std::map<std::string, double>& p) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : p) j[k] = v;
    return j;
}

} // namespace

// ---------------------------------------------------------------- lambda0

Lambda0Spec Lambda0Spec::make(const std::string& name, std::map<std::string, double> params) {
    Lambda0Spec spec;
    spec.name = name;
    spec.params = std::move(params);
    const auto& p = spec.params;
    if (name == "constant") {
        const double v = require(p, "value", "lambda0.constant");
        if (v < 0.0) throw ConfigError("lambda0.constant: value must be >= 0");
        spec.B0 = spec.B1 = v;
        spec.s = optional(p, "s", 8.0);
    } else if (name == "affine") {
        const double base = require(p, "base", "lambda0.affine");
        const double slope = require(p, "slope", "lambda0.affine");
        const double h = require(p, "horizon", "lambda0.affine");
        const double end = base + slope * h;
        spec.B1 = std::min(base, end);
        spec.B0 = std::max(base, end);
        if (spec.B1 < 0.0) throw ConfigError("lambda0.affine: negative on [0, horizon]");
        spec.s = optional(p, "s", 8.0);
    } else if (name == "sinusoid") {
        const double base = require(p, "base", "lambda0.sinusoid");
        const double amp = require(p, "amp", "lambda0.sinusoid");
        require(p, "cycles", "lambda0.sinusoid");
        require(p, "horizon", "lambda0.sinusoid");
        if (amp < 0.0 || base < amp) {
            throw ConfigError("lambda0.sinusoid: need 0 <= amp <= base for positivity");
        }
        spec.B0 = base + amp;
        spec.B1 = base - amp;
        spec.s = optional(p, "s", 4.0);
    } else if (name == "bump") {
        const double base = require(p, "base", "lambda0.bump");
        const double amp = require(p, "amp", "lambda0.bump");
        require(p, "center", "lambda0.bump");
        const double w = require(p, "width", "lambda0.bump");
        if (amp < 0.0 || base < 0.0 || w <= 0.0) throw ConfigError("lambda0.bump: bad shape");
        spec.B0 = base + amp;
        spec.B1 = base;
        spec.s = optional(p, "s", 2.0);
    } else if (name == "plateau_ramp") {
        const double sc = require(p, "scale", "lambda0.plateau_ramp");
        if (sc <= 0.0) throw ConfigError("lambda0.plateau_ramp: scale must be positive");
        spec.B1 = sc;
        spec.B0 = 4.0 * sc;
        spec.s = optional(p, "s", 1.0);
    } else {
        throw ConfigError("lambda0: unknown catalogue entry '" + name + "'");
    }
    return spec;
}

double Lambda0Spec::eval(double t) const {
    const auto& p = params;
    if (name == "constant") return p.at("value");
    if (name == "affine") return p.at("base") + p.at("slope") * t;
    if (name == "sinusoid") {
        const double w = 2.0 * kPi * p.at("cycles") / p.at("horizon");
        return p.at("base") + p.at("amp") * std::sin(w * t + optional(p, "phase", 0.0));
    }
    if (name == "bump") {
        const double c = p.at("center"), w = p.at("width");
        if (std::abs(t - c) >= w) return p.at("base");
        return p.at("base") + 0.5 * p.at("amp") * (1.0 + std::cos(kPi * (t - c) / w));
    }
    if (name == "plateau_ramp") {
        const double sc = p.at("scale");
        if (t <= sc / 3.0) return sc;
        if (t <= 2.0 * sc / 3.0) return 9.0 * t * t / sc;
        return 4.0 * sc;
    }
    throw ConfigError("lambda0: unknown entry");
}

namespace {

// antiderivative of the unit raised-cosine 0.5*(1+cos(pi*u/w)) on [-w, w]
double bump_anti(double u, double w) {
    u = std::clamp(u, -w, w);
    return 0.5 * (u + (w / kPi) * std::sin(kPi * u / w));
}

double plateau_anti(double t, double sc) {
    const double a = sc / 3.0, b = 2.0 * sc / 3.0;
    if (t <= a) return sc * t;
    const double at_a = sc * a;
    if (t <= b) return at_a + 3.0 * (t * t * t - a * a * a) / sc;
    const double at_b = at_a + 3.0 * (b * b * b - a * a * a) / sc;
    return at_b + 4.0 * sc * (t - b);
}

} // namespace

double Lambda0Spec::integral(double a, double b) const {
    if (!(b > a)) return 0.0;
    const auto& p = params;
    if (name == "constant") return p.at("value") * (b - a);
    if (name == "affine") {
        return p.at("base") * (b - a) + 0.5 * p.at("slope") * (b * b - a * a);
    }
    if (name == "sinusoid") {
        const double w = 2.0 * kPi * p.at("cycles") / p.at("horizon");
        const double ph = optional(p, "phase", 0.0);
        return p.at("base") * (b - a) -
               (p.at("amp") / w) * (std::cos(w * b + ph) - std::cos(w * a + ph));
    }
    if (name == "bump") {
        const double c = p.at("center"), w = p.at("width");
        return p.at("base") * (b - a) +
               p.at("amp") * (bump_anti(b - c, w) - bump_anti(a - c, w));
    }
    if (name == "plateau_ramp") {
        const double sc = p.at("scale");
        return plateau_anti(b, sc) - plateau_anti(a, sc);
    }
    throw ConfigError("lambda0: unknown entry");
}

Lambda0Spec Lambda0Spec::from_json(const nlohmann::json& j) {
    return make(j.at("name").get<std::string>(), params_from_json(j));
}

nlohmann::json Lambda0Spec::to_json() const {
    return {{"name", name}, {"params", params_to_json(params)}};
}

// ---------------------------------------------------------------- kernels

KernelSpec KernelSpec::make(const std::string& name, std::map<std::string, double> params) {
    KernelSpec spec;
    spec.name = name;
    spec.params = std::move(params);
    const auto& p = spec.params;
    if (name == "exp") {
        const double a = require(p, "alpha", "kernel.exp");
        const double b = require(p, "beta", "kernel.exp");
        if (a < 0.0 || b <= 0.0) throw ConfigError("kernel.exp: need alpha >= 0, beta > 0");
        spec.k = optional(p, "k", 6.0);
        spec.c_mu = a / b;
        spec.mu_max = a;
        spec.C0 = a * std::pow(std::max(1.0, b), spec.k);
    } else if (name == "smooth_periodic") {
        const double mass = require(p, "mass", "kernel.smooth_periodic");
        const double cycles = require(p, "cycles", "kernel.smooth_periodic");
        const double period = require(p, "period", "kernel.smooth_periodic");
        if (mass < 0.0 || period <= 0.0 || cycles < 1.0) {
            throw ConfigError("kernel.smooth_periodic: bad shape");
        }
        spec.k = optional(p, "k", 6.0);
        // c_mu bounds the integral over lags within one period; valid for horizons <= period
        spec.c_mu = mass;
        spec.mu_max = 2.0 * mass / period;
        const double w = 2.0 * kPi * cycles / period;
        spec.C0 = (mass / period) * std::pow(std::max(1.0, w), spec.k) * 2.0;
    } else if (name == "bump") {
        const double mass = require(p, "mass", "kernel.bump");
        const double c = require(p, "center", "kernel.bump");
        const double w = require(p, "width", "kernel.bump");
        if (mass < 0.0 || w <= 0.0 || c - w < 0.0) throw ConfigError("kernel.bump: bad shape");
        spec.k = 1.0;
        spec.c_mu = mass;
        spec.mu_max = mass / w;
        spec.C0 = std::max(mass / w, 0.5 * (mass / w) * kPi / w);
    } else {
        throw ConfigError("kernel: unknown catalogue entry '" + name + "'");
    }
    if (spec.c_mu >= 1.0) throw ConfigError("kernel: c_mu must be < 1 (stability)");
    return spec;
}

double KernelSpec::eval(double t) const { return deriv(t, 0); }

double KernelSpec::deriv(double t, int order) const {
    const auto& p = params;
    if (name == "exp") {
        const double a = p.at("alpha"), b = p.at("beta");
        return a * std::pow(-b, order) * std::exp(-b * t);
    }
    if (name == "smooth_periodic") {
        const double mass = p.at("mass"), period = p.at("period");
        const double w = 2.0 * kPi * p.at("cycles") / period;
        if (order == 0) return (mass / period) * (1.0 + std::cos(w * t));
        // d^r cos(wt) = w^r cos(wt + r*pi/2)
        return (mass / period) * std::pow(w, order) * std::cos(w * t + order * (kPi / 2.0));
    }
    if (name == "bump") {
        const double c = p.at("center"), w = p.at("width"), mass = p.at("mass");
        if (order != 0) throw ConfigError("kernel.bump: derivatives beyond order 0 undeclared");
        if (std::abs(t - c) >= w) return 0.0;
        return (mass / (2.0 * w)) * (1.0 + std::cos(kPi * (t - c) / w));
    }
    throw ConfigError("kernel: unknown entry");
}

double KernelSpec::integral0(double x) const {
    if (x <= 0.0) return 0.0;
    const auto& p = params;
    if (name == "exp") {
        const double a = p.at("alpha"), b = p.at("beta");
        return (a / b) * (1.0 - std::exp(-b * x));
    }
    if (name == "smooth_periodic") {
        const double mass = p.at("mass"), period = p.at("period");
        const double w = 2.0 * kPi * p.at("cycles") / period;
        return (mass / period) * (x + std::sin(w * x) / w);
    }
    if (name == "bump") {
        const double c = p.at("center"), w = p.at("width"), mass = p.at("mass");
        return (mass / (2.0 * w)) * (bump_anti(x - c, w) - bump_anti(-c, w)) * 2.0;
    }
    throw ConfigError("kernel: unknown entry");
}

KernelSpec KernelSpec::from_json(const nlohmann::json& j) {
    return make(j.at("name").get<std::string>(), params_from_json(j));
}

nlohmann::json KernelSpec::to_json() const {
    return {{"name", name}, {"params", params_to_json(params)}};
}

// ---------------------------------------------------------------- links

LinkSpec LinkSpec::make(const std::string& name, std::map<std::string, double> params) {
    LinkSpec spec;
    spec.name = name;
    spec.params = std::move(params);
    const auto& p = spec.params;
    if (name == "identity_clamp") {
        const double lo = require(p, "lo", "link.identity_clamp");
        const double hi = require(p, "hi", "link.identity_clamp");
        if (!(0.0 < lo && lo <= hi)) throw ConfigError("link.identity_clamp: need 0 < lo <= hi");
        spec.B1t = lo;
        spec.B0t = hi;
        spec.lipschitz = 1.0;
    } else if (name == "scaled_sigmoid") {
        const double lo = require(p, "lo", "link.scaled_sigmoid");
        const double hi = require(p, "hi", "link.scaled_sigmoid");
        const double rate = require(p, "rate", "link.scaled_sigmoid");
        require(p, "center", "link.scaled_sigmoid");
        if (!(0.0 < lo && lo < hi) || rate <= 0.0) throw ConfigError("link.scaled_sigmoid: bad shape");
        spec.B1t = lo;
        spec.B0t = hi;
        spec.lipschitz = 0.25 * (hi - lo) * rate;
    } else if (name == "constant") {
        const double v = require(p, "value", "link.constant");
        if (v <= 0.0) throw ConfigError("link.constant: value must be positive");
        spec.B1t = spec.B0t = v;
        spec.lipschitz = 0.0;
    } else {
        throw ConfigError("link: unknown catalogue entry '" + name + "'");
    }
    return spec;
}

double LinkSpec::eval(double x) const {
    const auto& p = params;
    if (name == "identity_clamp") return std::clamp(x, p.at("lo"), p.at("hi"));
    if (name == "scaled_sigmoid") {
        const double lo = p.at("lo"), hi = p.at("hi");
        return lo + (hi - lo) / (1.0 + std::exp(-p.at("rate") * (x - p.at("center"))));
    }
    if (name == "constant") return p.at("value");
    throw ConfigError("link: unknown entry");
}

LinkSpec LinkSpec::from_json(const nlohmann::json& j) {
    return make(j.at("name").get<std::string>(), params_from_json(j));
}

nlohmann::json LinkSpec::to_json() const {
    return {{"name", name}, {"params", params_to_json(params)}};
}

} // namespace tpplab

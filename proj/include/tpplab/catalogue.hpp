#pragma once

#include <map>
#include <string>

#include "json.hpp"

namespace tpplab {

// Named baseline intensities lambda0 with declared smoothness/bounds metadata.
// Entries: constant{value}, affine{base,slope,horizon}, sinusoid{base,amp,cycles,phase,horizon},
// bump{base,amp,center,width}, plateau_ramp{scale} (the three-piece ramp target:
// scale on [0,s/3], 9t^2/s on (s/3,2s/3], 4*scale on (2s/3,s]).
// All entries carry a closed-form antiderivative, so compensators that only
// involve lambda0 stay exact.
struct Lambda0Spec {
    std::string name;
    std::map<std::string, double> params;

    double B0 = 0.0;  // declared sup bound
    double B1 = 0.0;  // declared inf bound
    double s = 0.0;   // declared smoothness index

    double eval(double t) const;
    double integral(double a, double b) const;

    static Lambda0Spec make(const std::string& name, std::map<std::string, double> params);
    static Lambda0Spec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// Excitation kernels mu >= 0 with declared (k, C0, c_mu, mu_max) and derivative
// access up to order k-1 (needed by the boundary-matching decomposition).
// Entries: exp{alpha,beta[,k]}, smooth_periodic{mass,cycles,period[,k]},
// bump{mass,center,width}.
struct KernelSpec {
    std::string name;
    std::map<std::string, double> params;

    double k = 0.0;      // declared smoothness order
    double C0 = 0.0;     // declared Sobolev-type constant max_{r<=k} sup |mu^(r)|
    double c_mu = 0.0;   // declared integral bound (A2 requires < 1)
    double mu_max = 0.0; // sup of mu, used by the thinning majorant

    double eval(double t) const;
    double deriv(double t, int order) const; // order <= k-1
    // exact integral of mu over [0, x] (used by exp-kernel compensators)
    double integral0(double x) const;

    static KernelSpec make(const std::string& name, std::map<std::string, double> params);
    static KernelSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// Bounded positive links Psi with declared (Btilde1, Btilde0, lipschitz).
// Entries: identity_clamp{lo,hi}, scaled_sigmoid{lo,hi,center,rate}, constant{value}.
struct LinkSpec {
    std::string name;
    std::map<std::string, double> params;

    double B1t = 0.0;       // lower bound of Psi
    double B0t = 0.0;       // upper bound of Psi
    double lipschitz = 0.0;

    double eval(double x) const;

    static LinkSpec make(const std::string& name, std::map<std::string, double> params);
    static LinkSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

} // namespace tpplab

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "tpplab/catalogue.hpp"
#include "tpplab/quadrature.hpp"
#include "tpplab/rng.hpp"
#include "tpplab/sequence.hpp"

namespace tpplab {

enum class TppFamily {
    HomPoisson,
    NonHomPoisson,
    LinearHawkesExp,
    LinearHawkesGeneral,
    NonlinearHawkesExp,
    SelfCorrecting,
};

std::string family_name(TppFamily f);
TppFamily family_from_name(const std::string& name);

// Ground-truth process specification. Which fields are meaningful depends on
// the family:
//   HomPoisson:          lambda
//   NonHomPoisson:       lambda0
//   LinearHawkesExp:     lambda0, alpha, beta      (kernel alpha * exp(-beta * lag))
//   LinearHawkesGeneral: lambda0, kernel
//   NonlinearHawkesExp:  lambda0, alpha, beta, link   (Psi applied to the linear part)
//   SelfCorrecting:      mu_sc, alpha_sc, link        (Psi(mu_sc * t - alpha_sc * N(t-)))
struct TppModelSpec {
    TppFamily family = TppFamily::HomPoisson;
    double T = 1.0;

    double lambda = 1.0;
    Lambda0Spec lambda0;
    double alpha = 0.0;
    double beta = 1.0;
    KernelSpec kernel;
    LinkSpec link;
    double mu_sc = 0.0;
    double alpha_sc = 0.0;

    static TppModelSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// checks the declared-bound assumptions that apply to the family; throws ConfigError
void validate_model(const TppModelSpec& spec);

// lambda*(t | events strictly before t); predictable, left-continuous
double intensity_at(const TppModelSpec& spec, const EventSequence& seq, double t);

// integrated intensity on [0, t]; closed form where the pieces admit one,
// per-interval adaptive quadrature otherwise
double compensator(const TppModelSpec& spec, const EventSequence& seq, double t,
                   const QuadratureConfig& quad = {});

// sum_j log lambda*(t_j) - compensator(T)
double loglik(const TppModelSpec& spec, const EventSequence& seq,
              const QuadratureConfig& quad = {});

// time-rescaled interarrivals Lambda(t_j) - Lambda(t_{j-1}); approximately
// Exp(1) for long windows, but the pooled set is biased small on short
// windows because gaps overrunning T are never recorded
std::vector<double> transformed_interarrivals(const TppModelSpec& spec,
                                              const EventSequence& seq,
                                              const QuadratureConfig& quad = {});

// horizon-corrected rescaled interarrivals: conditional on being observed
// before T, each rescaled gap is Exp(1) truncated to the remaining rescaled
// budget; its truncated-CDF value is exactly uniform and is mapped back to
// an exact Exp(1) sample, so the pooled set is unbiased at any horizon
std::vector<double> rescaled_exp1_samples(const TppModelSpec& spec,
                                          const EventSequence& seq,
                                          const QuadratureConfig& quad = {});

// Ogata thinning with family-specific majorant refresh after every candidate
EventSequence simulate_one(const TppModelSpec& spec, CounterRng& rng);

// one substream per sequence index: sequence i is reproducible in isolation
std::vector<EventSequence> simulate(const TppModelSpec& spec, std::size_t n,
                                    std::uint64_t seed);

// Event-count tail constants: P(N_e >= s) <= a_N * exp(-c_N * s).
// eta0 must lie in (1, 1/c_mu); pass 0 to take the documented default.
struct TailConstants {
    double a_N = 0.0;
    double c_N = 0.0;
    double eta0 = 0.0;
    double B0 = 0.0;   // intensity-scale bound used (B0 for linear, Btilde0 for nonlinear)
    double c_mu = 0.0; // branching bound used (0 for Poisson-like and nonlinear)
};
TailConstants tail_constants(const TppModelSpec& spec, double eta0 = 0.0);

} // namespace tpplab

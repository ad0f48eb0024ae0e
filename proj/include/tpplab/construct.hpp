#pragma once

/*
 * Constructive network builders.
 *
 * Each builder assembles recurrent-network weights *by hand* so that the
 * network's intensity tracks a target process from the model zoo, and
 * returns a certificate: a provable sup-norm bound on the intensity error
 * over every sequence carrying at most s0 events.  The moving parts:
 *
 *   - scalar state blocks in layer 1 whose one-step maps (exponential decay,
 *     plane rotation, event counting) are fitted as small tanh nets with a
 *     certified per-step error; the maps are 1-Lipschitz / isometric in the
 *     state, so per-step errors add up to at most (s0+1) x step error;
 *   - a layer of near-identity units (psi_h) that carries each scalar
 *     readout through the depth with a quadratic-in-h error bound;
 *   - a clamp link whose window contains the target intensity range, so the
 *     final clamp can only shrink the error.
 *
 * General excitation kernels are first split into a small exponential
 * mixture (chosen so the remainder has matching endpoint derivatives) plus a
 * trigonometric part handled by rotation blocks; the truncated tail of the
 * trigonometric expansion enters the certificate as a measured sup norm
 * times the event budget.
 */

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "tpplab/catalogue.hpp"
#include "tpplab/quadrature.hpp"
#include "tpplab/rnn.hpp"
#include "tpplab/tpp_models.hpp"

namespace tpplab {

// ---- analytic ingredients ----

struct ExpMixture {
    Eigen::VectorXd delta; // decay rates j/k
    Eigen::VectorXd c;     // coefficients (any sign)
    double eval(double t) const;
};

// mixture with rates j/k whose removal leaves mu with equal derivatives at
// 0+ and T- up to order k-1, so the remainder's periodic extension is smooth
// and its trigonometric expansion decays fast
ExpMixture decompose_kernel(const KernelSpec& kernel, double T);

struct FourierSeries {
    double a0 = 0.0;       // series = a0/2 + sum_l a_l cos(w_l t) + b_l sin(w_l t)
    Eigen::VectorXd a, b;  // l = 1..n
    double period = 1.0;
    double eval(double t) const;
};

FourierSeries fourier_coefficients(const std::function<double(double)>& f, double T,
                                   int n_terms, const QuadratureConfig& quad = {});

// width/error schedule of the smooth-baseline approximation theory
double poisson_series_constant(int s);                            // sqrt(2s) 5^s / (s-1)!
double poisson_theoretical_error(int s, double B0, double T, int N);
int poisson_theoretical_width(int s, int N);                      // 3 ceil(s/2) + 6 N

// ---- builders ----

struct BuildOptions {
    int s0 = 8;              // admissible sequences carry at most s0 events
    std::uint64_t seed = 2026;
    int max_width = 256;     // cap per fitted sub-net
    int max_rounds = 6;      // budget-rebalancing rounds
};

struct BuildReport {
    RnnConfig cfg;
    RnnParams params;
    double certificate = 0.0; // provable sup error over admissible sequences
    double budget = 0.0;
    nlohmann::json details;   // per-component contributions, widths, domains
};

// piecewise-smooth baseline alone (no excitation)
BuildReport build_poisson_approx(const Lambda0Spec& lam0, double T, double budget,
                                 const BuildOptions& opt = {});

// lambda0 + alpha * sum exp(-beta lag); expects family LinearHawkesExp
BuildReport build_vanilla_hawkes_approx(const TppModelSpec& spec, double budget,
                                        const BuildOptions& opt = {});

// lambda0 + sum mu(lag) for a smooth kernel; expects family LinearHawkesGeneral
BuildReport build_general_hawkes_approx(const TppModelSpec& spec, double budget,
                                        const BuildOptions& opt = {});

// Psi(lambda0 + alpha * sum exp(-beta lag)); expects family NonlinearHawkesExp
BuildReport build_nonlinear_hawkes_approx(const TppModelSpec& spec, double budget,
                                          const BuildOptions& opt = {});

// measured sup |lambda_net - lambda_target| over the given sequences, on a
// dense time grid plus the event times themselves; the empirical counterpart
// of the certificate (sequences with more than s0 events should be filtered
// out by the caller, since the certificate does not cover them)
double measured_sup_error(const BuildReport& rep, const TppModelSpec& target,
                          const std::vector<EventSequence>& seqs, int grid_per_seq = 400);

} // namespace tpplab

#pragma once

/*
 * Non-asymptotic constants for the constrained recurrent intensity class:
 *
 *   - s_poly / log_geom_sum: the combinatorial sums through which parameter
 *     perturbations propagate across events and layers;
 *   - lipschitz_bound: sup-norm intensity change under per-layer parameter
 *     perturbations, after i observed events (tanh activation, clamp link,
 *     all weight matrices inside the operator-norm ball of radius B_m);
 *   - covering_log: log covering number of the intensity class at scale eps
 *     restricted to sequences with at most n0 events;
 *   - stochastic_error_bound: the finite-sample deviation bound combining
 *     the covering term, a confidence term, and the event-count tail of the
 *     data-generating process (through its tail constants a_N, c_N);
 *   - excess_risk_rate: the predicted exponent of the excess-risk decay in
 *     the sample size for each target family.
 */

#include <cstddef>
#include <vector>

#include "tpplab/rnn.hpp"
#include "tpplab/tpp_models.hpp"

namespace tpplab {

// sum_{j=0}^{i} C(j+l, l) beta^j; zero for i < 0
double s_poly(int i, int l, double beta);

// log of sum_{j=0}^{m-1} beta^j, beta >= 0, m >= 1, stable near beta = 1
double log_geom_sum(double beta, double m);

// per-layer parameter perturbations in operator norm: dx/db are indexed by
// layer 1..L+1 (entry 0 unused), dh by 1..L
struct LayerDeltas {
    std::vector<double> dx;
    std::vector<double> dh;
    std::vector<double> db;
};

LayerDeltas param_deltas(const RnnParams& a, const RnnParams& b, const RnnConfig& cfg);

double lipschitz_bound(int L, int D, double T, double B_m, int events_before,
                       const LayerDeltas& d);

// log covering number at scale eps for depth L, width D, radius B_m,
// restricted to sequences with at most n0 events on [0, T]
double covering_log(double eps, int L, int D, double B_m, int n0_events, double T);

// log of the class-magnitude constant M(s) entering the deviation bound
double log_class_magnitude(int s_events, int L, int D, double B_m, double T);

struct BoundReport {
    double value = 0.0;
    int s0 = 0;          // event-count cut chosen for the tail split
    double a_N = 0.0;
    double c_N = 0.0;
    double term_confidence = 0.0; // sqrt(log(4/delta))
    double term_complexity = 0.0; // D sqrt(3L+2) (sqrt(log(1+M(s0))) + 1)
    double term_tail = 0.0;       // (1 - exp(-c_N))^{-2}
};

BoundReport stochastic_error_bound(const TppModelSpec& process, const RnnConfig& cfg,
                                   double B_m, std::size_t n, double delta);

// predicted excess-risk exponent on the sample size (negative number)
double excess_risk_rate(const TppModelSpec& spec);

} // namespace tpplab

#pragma once

/*
 * Experiment drivers.  Each driver is deterministic given its config (seeded
 * substreams everywhere, fixed batch order, tree-reduced sums) and can write
 * its artifacts (CSV rows + JSON summary) under a config-hash file name.
 *
 *   - excess-risk estimation: paired test-set gap between a fitted model's
 *     loss and the exact-intensity loss of the generating process;
 *   - scaling study: the gap as a function of the training-set size, with a
 *     log-log slope;
 *   - interpolation study: trains the three readout heads on a
 *     plateau-then-ramp baseline whose first-interval shape no clamped
 *     affine-in-time intensity can follow; reports per-head gaps plus the
 *     analytic first-interval mismatch lower bound;
 *   - perturbation-bound trials: randomized check that measured intensity
 *     differences stay below the layerwise perturbation bound.
 */

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "tpplab/bounds.hpp"
#include "tpplab/rnn.hpp"
#include "tpplab/tpp_models.hpp"
#include "tpplab/train.hpp"

namespace tpplab {

// exact-intensity loss of the generating process, one value per sequence
std::vector<double> truth_nll_per_seq(const TppModelSpec& truth,
                                      const std::vector<EventSequence>& test,
                                      const QuadratureConfig& quad = {});

struct PairedGap {
    double mean = 0.0;
    double se = 0.0; // standard error of the paired mean
};

PairedGap paired_gap(const RnnParams& p, const RnnConfig& cfg,
                     const std::vector<EventSequence>& test,
                     const std::vector<double>& truth_nll);

/* ---- scaling study ---- */

struct ScalingConfig {
    TppModelSpec truth;
    RnnConfig rnn;
    TrainConfig train;
    std::vector<std::size_t> train_sizes;
    int reps = 3;
    std::size_t n_test = 2000;
    std::uint64_t seed = 11;
    std::string out_dir; // write CSV/JSON artifacts here when non-empty
};

struct ScalingRow {
    std::size_t n = 0;
    int rep = 0;
    double gap = 0.0;
    double se = 0.0;
    double train_nll = 0.0;
};

struct ScalingResult {
    std::vector<ScalingRow> rows;
    std::vector<double> mean_gaps; // one per train size
    double slope = 0.0;            // log-log least squares
    nlohmann::json summary;
};

ScalingResult scaling_study(const ScalingConfig& cfg);

/* ---- interpolation counterexample study ---- */

// first-interval mismatch objective for a clamped affine intensity
// x(t) = clamp(alpha t + b, T, 4T) against the ramp piece of the
// plateau-then-ramp baseline, integrated over the ramp window
double affine_mismatch_objective(double alpha, double b, double T);

struct MismatchMin {
    double value = 0.0;
    double alpha = 0.0;
    double b = 0.0;
};

// grid search + simplex polish + saturated-plateau candidates
MismatchMin minimize_affine_mismatch(double T);

struct CounterexampleConfig {
    double T = 1.0;
    std::size_t n_train = 12000;
    std::size_t n_test = 20000;
    RnnConfig base;    // interp is overridden per arm
    TrainConfig train;
    std::uint64_t seed = 5;
    std::string out_dir;
};

struct ArmResult {
    std::string head;
    double gap = 0.0;
    double se = 0.0;
    double train_nll = 0.0;
};

struct CounterexampleResult {
    MismatchMin inf_mismatch;
    double prob_pinned = 0.0; // exp(-16/27), the probability constant the
                              // gap thresholds are quoted against
    double prob_true = 0.0;   // exp(-Lambda(2T/3)) under the actual baseline
    std::vector<ArmResult> arms;
    nlohmann::json summary;
};

CounterexampleResult counterexample_study(const CounterexampleConfig& cfg);

/* ---- perturbation-bound trials ---- */

struct LipschitzTrialSummary {
    int trials = 0;
    int violations = 0;
    double worst_margin = 0.0; // min over trials of bound - measured
    double max_ratio = 0.0;    // max over trials of measured / bound
};

LipschitzTrialSummary lipschitz_trials(int n_trials, std::uint64_t seed);

} // namespace tpplab

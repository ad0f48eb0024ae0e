#pragma once

/*
 * Constrained empirical-risk minimization for the recurrent intensity model.
 *
 * The loss per sequence is nll_loss (fixed-panel quadrature minus the log
 * terms); the gradient is computed by backpropagation through both the
 * interpolation queries and the event-time grid recursion, over exactly the
 * same panel nodes, so finite differences of the loss match the gradient to
 * roundoff.  Batch gradients are reduced by pairwise tree summation in a
 * fixed sequence order, making every fit bit-reproducible.
 */

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "tpplab/rnn.hpp"

namespace tpplab {

enum class OptimizerKind { Gd, Momentum, Adam };
enum class InitScheme { Zeros, SmallUniform, WarmStart };

std::string optimizer_name(OptimizerKind k);
OptimizerKind optimizer_from_name(const std::string& name);
std::string init_name(InitScheme s);
InitScheme init_from_name(const std::string& name);

struct TrainConfig {
    OptimizerKind optimizer = OptimizerKind::Adam;
    InitScheme init = InitScheme::SmallUniform;
    int epochs = 200;
    double lr = 1e-2;
    double lr_floor = 1e-4; // cosine schedule decays from lr to lr_floor
    double momentum = 0.9;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double B_m = 0.0;          // operator-norm radius per matrix; 0 = unconstrained
    double init_rate = 0.0;    // if > 0, recenter the readout bias so the fresh
                               // model outputs roughly this intensity
    double val_fraction = 0.0; // holdout: last K sequences; 0 = none
    int patience = 0;          // stop after this many epochs without val improvement; 0 = off
    std::uint64_t seed = 1;
    std::string trace_path;    // optional CSV (epoch, train_nll, val_nll, param_norm, lr)
};

nlohmann::json train_config_to_json(const TrainConfig& tc);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct TrainResult {
    RnnParams params;           // best-validation snapshot when a split is active, else final
    double final_train_nll = 0; // mean per-sequence loss at the returned params
    double final_val_nll = 0;   // 0 when no split
    int epochs_run = 0;
    int best_epoch = -1;
    std::vector<double> train_curve;
    std::vector<double> val_curve;
};

struct LossGrad {
    double loss = 0.0;
    Eigen::VectorXd grad; // flat layout matching flatten()
};

LossGrad loss_grad(const RnnParams& p, const RnnConfig& cfg, const EventSequence& seq);
Eigen::VectorXd grad_nll(const RnnParams& p, const RnnConfig& cfg, const EventSequence& seq);

double mean_nll(const RnnParams& p, const RnnConfig& cfg,
                const std::vector<EventSequence>& data);

// mean loss and gradient over a batch; gradients combined by pairwise trees
LossGrad mean_loss_grad(const RnnParams& p, const RnnConfig& cfg,
                        const std::vector<EventSequence>& data);

RnnParams init_params(const RnnConfig& cfg, InitScheme scheme, std::uint64_t seed);

// set the readout bias so the fresh model outputs close to `rate` everywhere
void center_output_bias(RnnParams& p, const RnnConfig& cfg, double rate);

// rescale every matrix / bias whose norm exceeds B_m back onto the ball
void project_params(RnnParams& p, const RnnConfig& cfg, double B_m);

double cosine_lr(const TrainConfig& tc, int epoch);

TrainResult fit_erm(const RnnConfig& cfg, const TrainConfig& tc,
                    const std::vector<EventSequence>& data);

// warm-started fit: begin from explicit initial weights (typically copied out
// of a constructive build) instead of a seeded draw.  Zero epochs returns the
// initial weights unchanged; a shape mismatch with the architecture is a
// configuration error.
TrainResult fit_erm(const RnnParams& init, const RnnConfig& cfg, const TrainConfig& tc,
                    const std::vector<EventSequence>& data);

} // namespace tpplab

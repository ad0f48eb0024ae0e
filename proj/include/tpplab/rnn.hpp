#pragma once

/*
 * Recurrent intensity models over event sequences.
 *
 * The hidden state is updated at event times (the "grid" recursion) and
 * evaluated between events by re-feeding the continuous input through the
 * same cell with the recurrent term frozen at the last grid state (the
 * "interpolation").  Evaluating the interpolation at the next event time
 * reproduces the grid recursion exactly, which keeps the intensity
 * left-continuous and predictable.
 *
 * Input at time t is the two-channel signal x(t) = (t, t - t_last) where
 * t_last is the most recent event strictly before t (0 if none).
 *
 * Readout modes:
 *   InputEmbedding - full interpolation through every layer, readout on
 *                    h^{(L)}(t); the intensity can move within an interval.
 *   ConstantHold   - readout on the frozen grid state h_j^{(L)}; piecewise
 *                    constant intensity.
 *   LinearInTime   - ConstantHold plus an explicit slope on (t - t_last);
 *                    the weakest head that can still tilt within intervals.
 *
 * The readout passes through a link f that keeps the intensity inside
 * [l_f, u_f]: either a hard clamp of the pre-activation or a clamped
 * softplus.
 */

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tpplab/quadrature.hpp"
#include "tpplab/sequence.hpp"

namespace tpplab {

inline constexpr int kInputDim = 2;

enum class LinkKind { Clamp, SoftplusClamp };
enum class InterpMode { InputEmbedding, ConstantHold, LinearInTime };

std::string link_name(LinkKind k);
LinkKind link_from_name(const std::string& name);
std::string interp_name(InterpMode m);
InterpMode interp_from_name(const std::string& name);

struct RnnConfig {
    std::vector<int> widths;                       // hidden width per recurrent layer
    LinkKind link = LinkKind::Clamp;
    InterpMode interp = InterpMode::InputEmbedding;
    double l_f = 0.5;                              // intensity floor
    double u_f = 8.0;                              // intensity ceiling
    int quad_refine = 8;                           // loss panels: width <= T / quad_refine

    int depth() const { return static_cast<int>(widths.size()); }
    int layer_input_dim(int l) const {             // l in [0, depth())
        return l == 0 ? kInputDim : widths[static_cast<std::size_t>(l) - 1];
    }
};

void validate_config(const RnnConfig& cfg);

struct RnnLayer {
    Eigen::MatrixXd Wx; // widths[l] x layer_input_dim(l)
    Eigen::MatrixXd Wh; // widths[l] x widths[l]
    Eigen::VectorXd b;  // widths[l]
};

struct RnnParams {
    std::vector<RnnLayer> layers;
    Eigen::RowVectorXd Wout; // 1 x widths.back()
    double bout = 0.0;
    double alpha_naive = 0.0; // slope used only by the LinearInTime head
};

RnnParams zeros_params(const RnnConfig& cfg);
std::size_t param_count(const RnnConfig& cfg);

// flat layout: for each layer (vec(Wx) row-major, vec(Wh) row-major, b), then
// Wout, bout, alpha_naive — fixed so finite differences can walk every entry
Eigen::VectorXd flatten(const RnnParams& p);
RnnParams unflatten(const RnnConfig& cfg, const Eigen::VectorXd& v);

// max operator norm across all weight matrices and bias 2-norms (the readout
// row counts as a matrix; the naive slope as a 1x1 when that head is active)
double param_norm(const RnnParams& p, const RnnConfig& cfg);

// continuous input channels at time t
Eigen::Vector2d embed_input(const EventSequence& seq, double t);

// grid[l][j] = hidden state of layer l after the j-th event (j = 0 is the
// zero initial state); grid[l] has seq.size() + 1 entries
using HiddenGrid = std::vector<std::vector<Eigen::VectorXd>>;
HiddenGrid hidden_grid(const RnnParams& p, const RnnConfig& cfg, const EventSequence& seq);

// top-layer interpolated state h^{(L)}(t)
Eigen::VectorXd interpolate_hidden(const RnnParams& p, const RnnConfig& cfg,
                                   const EventSequence& seq, const HiddenGrid& grid, double t);

// readout pre-activation and intensity at time t
double preactivation(const RnnParams& p, const RnnConfig& cfg, const EventSequence& seq,
                     const HiddenGrid& grid, double t);
double intensity_with_grid(const RnnParams& p, const RnnConfig& cfg, const EventSequence& seq,
                           const HiddenGrid& grid, double t);
double intensity(const RnnParams& p, const RnnConfig& cfg, const EventSequence& seq, double t);

// link helpers
double softplus(double x);
double inverse_softplus(double y); // log(expm1(y)), y > 0
double apply_link(const RnnConfig& cfg, double pre);
double link_derivative(const RnnConfig& cfg, double pre); // subgradient: 1 at clamp edges

// fixed quadrature discretization of [0, T] split at event times; the loss
// and its gradient share these nodes so they are exactly consistent
std::vector<QuadNodes> loss_nodes(const RnnConfig& cfg, const EventSequence& seq);

// negative log-likelihood: integral lambda dt - sum log lambda(t_j), with the
// integral taken over the fixed panels above
double nll_loss(const RnnParams& p, const RnnConfig& cfg, const EventSequence& seq);

// adaptive-quadrature route for an arbitrary intensity function; used to
// cross-check the fixed-panel loss and to score exact-intensity baselines
double quadrature_nll(const std::function<double(double)>& lambda, const EventSequence& seq,
                      const QuadratureConfig& quad = {});

} // namespace tpplab

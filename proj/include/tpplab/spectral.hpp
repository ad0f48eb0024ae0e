#pragma once

/*
 * Spectral-norm estimation via power iteration on A^T A.  The weight
 * projection step of constrained training rescales each parameter matrix so
 * its operator norm stays within the model-class radius; this is the one
 * numerical kernel that step depends on, so it is deterministic (fixed start
 * vector) and tight (relative tolerance on the Rayleigh estimate).
 */

#include <Eigen/Dense>

namespace tpplab {

// Largest singular value of a (possibly non-square) matrix.  Returns 0 for a
// zero matrix.  rel_tol controls the stopping rule on successive estimates.
double spectral_norm(const Eigen::MatrixXd& a, double rel_tol = 1e-10, int max_iters = 10000);

} // namespace tpplab

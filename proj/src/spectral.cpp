#include "tpplab/spectral.hpp"

#include <cmath>

namespace tpplab {

double spectral_norm(const Eigen::MatrixXd& a, double rel_tol, int max_iters) {
    if (a.size() == 0) return 0.0;

    // deterministic start vector with a slight ramp so it is never orthogonal
    // to the leading right-singular subspace by symmetry accident
    Eigen::VectorXd v(a.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = 1.0 + 1e-3 * static_cast<double>(i);
    }
    v.normalize();

    double sigma = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        Eigen::VectorXd av = a * v;
        const double s = av.norm();
        if (s == 0.0) return 0.0; // v landed in the null space of a zero map
        Eigen::VectorXd w = a.transpose() * av;
        const double wn = w.norm();
        if (wn == 0.0) return s;
        v = w / wn;
        if (it > 0 && std::abs(s - sigma) <= rel_tol * std::max(1.0, s)) {
            return s;
        }
        sigma = s;
    }
    return sigma;
}

} // namespace tpplab

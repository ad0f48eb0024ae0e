#pragma once

#include <functional>
#include <vector>

namespace tpplab {

struct QuadratureConfig {
    double tol = 1e-9;   // per-interval bisection tolerance (abs, scaled by max(1,|I|))
    int max_depth = 24;
};

// 16-point Gauss-Legendre nodes/weights on [-1,1], computed once by Newton iteration
const std::vector<double>& gl16_nodes();
const std::vector<double>& gl16_weights();

// single 16-point panel on [a,b]
double gl16(const std::function<double(double)>& f, double a, double b);

// adaptive bisection: panel vs two half panels until the difference passes tol
double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          const QuadratureConfig& cfg = {});

// The subdivision underlying adaptive_integrate, as explicit (node, weight) pairs.
// Training differentiates this fixed discretization, so gradients and values agree.
struct QuadNodes {
    std::vector<double> x;
    std::vector<double> w;
};
QuadNodes adaptive_nodes(const std::function<double(double)>& f, double a, double b,
                         const QuadratureConfig& cfg = {});

} // namespace tpplab

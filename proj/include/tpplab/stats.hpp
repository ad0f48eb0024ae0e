#pragma once

/*
 * Goodness-of-fit helpers built around the time-rescaling property: if a
 * point process is run through its own compensator, the transformed
 * interarrival times are iid Exp(1).  We test that with a one-sample
 * Kolmogorov-Smirnov statistic against the unit-exponential CDF.
 */

#include <cstddef>
#include <vector>

namespace tpplab {

struct KsResult {
    double statistic = 0.0; // sup_x |F_n(x) - F(x)|
    double p_value = 1.0;   // asymptotic (Kolmogorov distribution with small-n correction)
    std::size_t n = 0;
};

// One-sample KS test of `samples` against the Exp(1) CDF 1 - exp(-x).
KsResult ks_test_exp1(std::vector<double> samples);

// Survival function of the Kolmogorov distribution with the standard
// finite-sample adjustment lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) * d.
double ks_p_value(double d, std::size_t n);

// Basic summaries used by the experiment drivers.
double mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs); // unbiased, 0 for n < 2

} // namespace tpplab

#include "tpplab/stats.hpp"

#include <algorithm>
#include <cmath>

#include "tpplab/errors.hpp"

namespace tpplab {

double ks_p_value(double d, std::size_t n) {
    if (n == 0) return 1.0;
    const double sn = std::sqrt(static_cast<double>(n));
    const double lam = (sn + 0.12 + 0.11 / sn) * d;
    if (!(lam > 0.0)) return 1.0;
    if (lam < 1.18) {
        // the survival series needs ~4/lam terms here, so switch to the
        // theta-transformed CDF, which converges in a couple of terms:
        // P(K <= lam) = sqrt(2 pi)/lam * sum_j exp(-(2j-1)^2 pi^2 / (8 lam^2))
        const double pi = 3.141592653589793238462643;
        const double f = std::exp(-pi * pi / (8.0 * lam * lam));
        const double cdf = std::sqrt(2.0 * pi) / lam *
                           (f + std::pow(f, 9.0) + std::pow(f, 25.0) + std::pow(f, 49.0));
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    // alternating series for the Kolmogorov survival function; terms decay
    // like exp(-2 j^2 lam^2), fast in this regime
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lam * lam);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test_exp1(std::vector<double> samples) {
    KsResult r;
    r.n = samples.size();
    if (samples.empty()) return r;
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!(samples[i] >= 0.0) || !std::isfinite(samples[i])) {
            throw NumericError("ks_test_exp1: samples must be finite and nonnegative");
        }
        const double cdf = 1.0 - std::exp(-samples[i]);
        d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - cdf));
    }
    r.statistic = d;
    r.p_value = ks_p_value(d, samples.size());
    return r;
}

double mean(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

} // namespace tpplab

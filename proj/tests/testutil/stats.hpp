#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace testutil {

/// Lower regularized incomplete gamma P(a, x) by series expansion
/// (converges fast for x < a + 1).
inline double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 500; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Upper regularized incomplete gamma Q(a, x) by Lentz's continued
/// fraction (converges fast for x >= a + 1).
inline double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Survival function of the chi-square distribution: P(X >= chi2).
inline double chi_square_p_value(double chi2, int dof) {
    if (dof < 1) throw std::invalid_argument("chi_square_p_value: dof must be >= 1");
    if (chi2 <= 0.0) return 1.0;
    const double a = 0.5 * dof;
    const double x = 0.5 * chi2;
    return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_contfrac(a, x);
}

/// Chi-square statistic of observed counts against a uniform expectation.
inline double uniform_chi_square(const std::vector<long>& counts) {
    long total = 0;
    for (long c : counts) total += c;
    const double expected = static_cast<double>(total) / counts.size();
    double chi2 = 0.0;
    for (long c : counts) {
        const double d = c - expected;
        chi2 += d * d / expected;
    }
    return chi2;
}

}  // namespace testutil

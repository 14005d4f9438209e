#pragma once

#include <algorithm>

namespace ssalt {

struct Interval {
    double lower = 0.0;
    double upper = 0.0;

    bool contains(double x) const { return lower <= x && x <= upper; }
    double width() const { return upper - lower; }
    Interval clipped(double lo, double hi) const {
        return {std::clamp(lower, lo, hi), std::clamp(upper, lo, hi)};
    }
};

/// Standard normal distribution function, computed from erfc so the lower
/// tail keeps full relative precision.
double normal_cdf(double x);

/// Upper-tail critical value z_{alpha/2} for a two-sided test at significance
/// alpha, i.e. Phi^{-1}(1 - alpha / 2).
double normal_two_sided_critical(double alpha);

/// z_{alpha/2} for a two-sided interval at confidence level 1 - alpha.
double normal_interval_critical(double level);

/// Upper alpha-quantile of the chi-square distribution with `dof` degrees.
double chi2_upper_quantile(double alpha, int dof);

/// P(X > x) for X ~ chi-square(dof).
double chi2_survival(double x, int dof);

}  // namespace ssalt

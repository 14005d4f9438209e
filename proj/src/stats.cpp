#include "ssalt/stats.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "ssalt/error.hpp"

namespace ssalt {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_two_sided_critical(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("significance level must lie in (0, 1)");
    }
    return boost::math::quantile(boost::math::complement(boost::math::normal(), alpha / 2.0));
}

double normal_interval_critical(double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw ValidationError("confidence level must lie in (0, 1)");
    }
    return normal_two_sided_critical(1.0 - level);
}

double chi2_upper_quantile(double alpha, int dof) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("significance level must lie in (0, 1)");
    }
    if (dof < 1) throw ValidationError("chi-square needs at least one degree of freedom");
    return boost::math::quantile(
        boost::math::complement(boost::math::chi_squared(static_cast<double>(dof)), alpha));
}

double chi2_survival(double x, int dof) {
    if (dof < 1) throw ValidationError("chi-square needs at least one degree of freedom");
    if (x <= 0.0) return 1.0;
    return boost::math::cdf(
        boost::math::complement(boost::math::chi_squared(static_cast<double>(dof)), x));
}

}  // namespace ssalt

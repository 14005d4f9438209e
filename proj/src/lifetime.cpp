#include "ssalt/lifetime.hpp"

#include <cmath>
#include <limits>

namespace ssalt {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("failed fraction alpha must lie in (0, 1)");
    }
}

void check_mission_time(double t) {
    if (!(t >= 0.0)) throw ValidationError("mission time must be nonnegative");
}

double quadratic_form(const FitResult& fit, const Eigen::Vector2d& grad, int n_units) {
    if (n_units < 1) throw ValidationError("sample size must be positive");
    return grad.dot(fit.covariance * grad) / static_cast<double>(n_units);
}

}  // namespace

double reliability_at_use(const ModelParams& params, double x0, double t) {
    check_mission_time(t);
    return std::exp(-hazard_rate(params, x0) * t);
}

double quantile_at_use(const ModelParams& params, double x0, double alpha) {
    check_alpha(alpha);
    return -std::log1p(-alpha) / hazard_rate(params, x0);
}

double mean_lifetime_at_use(const ModelParams& params, double x0) {
    return std::exp(-params.theta1 * x0) / params.theta0;
}

Eigen::Vector2d reliability_gradient(const ModelParams& params, double x0, double t) {
    const double r = reliability_at_use(params, x0, t);
    const double lt = hazard_rate(params, x0) * t;
    return {-r * lt / params.theta0, -r * lt * x0};
}

Eigen::Vector2d quantile_gradient(const ModelParams& params, double x0, double alpha) {
    check_alpha(alpha);
    const double c = std::log1p(-alpha) * std::exp(-params.theta1 * x0) / params.theta0;
    return {c / params.theta0, c * x0};
}

Eigen::Vector2d mean_gradient(const ModelParams& params, double x0) {
    const double m = mean_lifetime_at_use(params, x0);
    return {-m / params.theta0, -m * x0};
}

double delta_variance_reliability(const FitResult& fit, double x0, double t, int n_units) {
    return quadratic_form(fit, reliability_gradient(fit.params_hat, x0, t), n_units);
}

double delta_variance_quantile(const FitResult& fit, double x0, double alpha, int n_units) {
    return quadratic_form(fit, quantile_gradient(fit.params_hat, x0, alpha), n_units);
}

double delta_variance_mean(const FitResult& fit, double x0, int n_units) {
    return quadratic_form(fit, mean_gradient(fit.params_hat, x0), n_units);
}

Interval direct_ci(double value, double std_error, double level, double lower_bound,
                   double upper_bound) {
    if (!(std_error >= 0.0)) throw ValidationError("standard error must be nonnegative");
    const double h = normal_interval_critical(level) * std_error;
    return Interval{value - h, value + h}.clipped(lower_bound, upper_bound);
}

Interval transformed_ci(double value, double std_error, double level, TransformKind kind) {
    if (!(std_error >= 0.0)) throw ValidationError("standard error must be nonnegative");
    const double z = normal_interval_critical(level);
    if (kind == TransformKind::log) {
        if (!(value > 0.0)) throw ValidationError("log-transformed interval needs a positive value");
        const double f = std::exp(z * std_error / value);
        return {value / f, value * f};
    }
    if (!(value > 0.0 && value < 1.0)) {
        throw NumericalError("logit-transformed interval needs a reliability strictly in (0, 1)");
    }
    const double s = std::exp(z * std_error / (value * (1.0 - value)));
    return {value / (value + (1.0 - value) * s), value / (value + (1.0 - value) / s)};
}

LifetimeEstimate estimate_reliability(const FitResult& fit, double x0, double t, int n_units,
                                      double level) {
    LifetimeEstimate est;
    est.quantity = LifetimeQuantity::reliability;
    est.stress = x0;
    est.time_or_alpha = t;
    est.value = reliability_at_use(fit.params_hat, x0, t);
    est.std_error = std::sqrt(delta_variance_reliability(fit, x0, t, n_units));
    est.direct_ci = direct_ci(est.value, est.std_error, level, 0.0, 1.0);
    if (est.value > 0.0 && est.value < 1.0) {
        est.transformed_ci = transformed_ci(est.value, est.std_error, level, TransformKind::logit);
    } else {
        est.transformed_ci = {est.value, est.value};
        est.degenerate_transform = true;
    }
    return est;
}

LifetimeEstimate estimate_quantile(const FitResult& fit, double x0, double alpha, int n_units,
                                   double level) {
    LifetimeEstimate est;
    est.quantity = LifetimeQuantity::quantile;
    est.stress = x0;
    est.time_or_alpha = alpha;
    est.value = quantile_at_use(fit.params_hat, x0, alpha);
    est.std_error = std::sqrt(delta_variance_quantile(fit, x0, alpha, n_units));
    est.direct_ci = direct_ci(est.value, est.std_error, level, 0.0,
                              std::numeric_limits<double>::infinity());
    est.transformed_ci = transformed_ci(est.value, est.std_error, level, TransformKind::log);
    return est;
}

LifetimeEstimate estimate_mean(const FitResult& fit, double x0, int n_units, double level) {
    LifetimeEstimate est;
    est.quantity = LifetimeQuantity::mean;
    est.stress = x0;
    est.value = mean_lifetime_at_use(fit.params_hat, x0);
    est.std_error = std::sqrt(delta_variance_mean(fit, x0, n_units));
    est.direct_ci = direct_ci(est.value, est.std_error, level, 0.0,
                              std::numeric_limits<double>::infinity());
    est.transformed_ci = transformed_ci(est.value, est.std_error, level, TransformKind::log);
    return est;
}

LifetimeEstimate rescale_time(const LifetimeEstimate& est, double scale) {
    if (!(scale > 0.0)) throw ValidationError("time scale must be positive");
    if (est.quantity == LifetimeQuantity::reliability) return est;
    LifetimeEstimate out = est;
    out.value /= scale;
    out.std_error /= scale;
    out.direct_ci = {est.direct_ci.lower / scale, est.direct_ci.upper / scale};
    out.transformed_ci = {est.transformed_ci.lower / scale, est.transformed_ci.upper / scale};
    return out;
}

}  // namespace ssalt

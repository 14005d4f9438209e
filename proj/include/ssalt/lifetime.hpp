#pragma once

// Reliability, quantiles and mean lifetime at a constant use stress x0, with
// delta-method standard errors from a fitted model.
//
// Standard errors returned here already include the 1/sqrt(N) factor, so the
// interval helpers never rescale them.

#include <Eigen/Core>

#include "ssalt/estimation.hpp"
#include "ssalt/model.hpp"
#include "ssalt/stats.hpp"

namespace ssalt {

enum class LifetimeQuantity { reliability, quantile, mean };

struct LifetimeEstimate {
    LifetimeQuantity quantity = LifetimeQuantity::mean;
    double stress = 0.0;
    double time_or_alpha = 0.0;  // mission time, failed fraction, or unused for the mean
    double value = 0.0;
    double std_error = 0.0;
    Interval direct_ci;
    Interval transformed_ci;
    /// Set when the logit transform is undefined (R exactly 0 or 1) and the
    /// transformed interval collapsed to the point.
    bool degenerate_transform = false;
};

/// exp(-theta0 exp(theta1 x0) t).
double reliability_at_use(const ModelParams& params, double x0, double t);

/// Time by which a fraction alpha of the units has failed: -log(1 - alpha) / lambda0.
double quantile_at_use(const ModelParams& params, double x0, double alpha);

/// 1 / lambda0 = exp(-theta1 x0) / theta0.
double mean_lifetime_at_use(const ModelParams& params, double x0);

Eigen::Vector2d reliability_gradient(const ModelParams& params, double x0, double t);
Eigen::Vector2d quantile_gradient(const ModelParams& params, double x0, double alpha);
Eigen::Vector2d mean_gradient(const ModelParams& params, double x0);

// grad^T Sigma grad / N with Sigma the fit's sandwich covariance.
double delta_variance_reliability(const FitResult& fit, double x0, double t, int n_units);
double delta_variance_quantile(const FitResult& fit, double x0, double alpha, int n_units);
double delta_variance_mean(const FitResult& fit, double x0, int n_units);

/// value -/+ z se, clipped to [lower_bound, upper_bound].
Interval direct_ci(double value, double std_error, double level, double lower_bound,
                   double upper_bound);

enum class TransformKind { logit, log };

/// Back-transformed Wald interval on the logit (reliability) or log (times) scale.
Interval transformed_ci(double value, double std_error, double level, TransformKind kind);

LifetimeEstimate estimate_reliability(const FitResult& fit, double x0, double t, int n_units,
                                      double level = 0.95);
LifetimeEstimate estimate_quantile(const FitResult& fit, double x0, double alpha, int n_units,
                                   double level = 0.95);
LifetimeEstimate estimate_mean(const FitResult& fit, double x0, int n_units, double level = 0.95);

/// Expresses a time-valued estimate (quantile or mean) in units of `scale`
/// (e.g. 3600 to go from seconds to hours). Reliability is returned untouched.
LifetimeEstimate rescale_time(const LifetimeEstimate& est, double scale);

}  // namespace ssalt

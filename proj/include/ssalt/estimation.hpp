#pragma once

// Minimum density power divergence estimation for the step-stress model and
// the asymptotic quantities built on it.
//
// The optimizer works in eta = (log theta0, theta1), which removes the
// positivity constraint on theta0. Covariances are reported both in the
// natural coordinates (theta0, theta1) and in eta; all of them are per-unit
// sandwich matrices J^{-1} K J^{-1}, so they must be divided by N before
// building intervals. The loss surface has been unimodal on every scenario
// tried, but uniqueness of the minimizer is not guaranteed: the result is the
// minimum reached from the starting point.

#include <optional>
#include <string>

#include <Eigen/Core>

#include "ssalt/divergence.hpp"
#include "ssalt/model.hpp"
#include "ssalt/stats.hpp"

namespace ssalt {

struct FitConfig {
    double beta = 0.0;
    int max_iterations = 500;
    double gradient_tolerance = 1e-9;
    std::optional<ModelParams> initial_params;

    void validate() const;
};

struct FitResult {
    ModelParams params_hat;
    double beta = 0.0;
    double loss = 0.0;
    /// Norm of the estimating residual expressed in eta coordinates, i.e.
    /// || diag(theta0, 1) W^T D^{beta-1} (p_hat - pi) ||.
    double residual_norm = 0.0;
    Eigen::Matrix2d j_matrix = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d k_matrix = Eigen::Matrix2d::Zero();
    /// Per-unit sandwich covariance in (theta0, theta1).
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
    /// Per-unit sandwich covariance in (log theta0, theta1).
    Eigen::Matrix2d covariance_log = Eigen::Matrix2d::Zero();
    bool converged = false;
    int iterations = 0;
    bool used_simplex = false;
    std::string diagnostic;

    double log_theta0() const;
};

struct InfoMatrices {
    Eigen::Matrix2d j;
    Eigen::Matrix2d k;
};

/// Minimizes dpd_loss(p_hat, pi(theta), beta). Non-convergence and degenerate
/// data are reported through `converged` and `diagnostic`, never thrown.
FitResult fit_mdpde(const EmpiricalFrequencies& counts, const TestPlan& plan,
                    const FitConfig& config);

/// J_beta = W^T D^{beta-1} W and K_beta = W^T (D^{2 beta - 1} - pi^beta pi^beta^T) W.
InfoMatrices info_matrices(const ModelParams& params, const TestPlan& plan, double beta);

/// J^{-1} K J^{-1}; throws NumericalError when J is singular.
Eigen::Matrix2d sandwich(const InfoMatrices& info);

/// Sandwich covariance at the fit divided by N.
Eigen::Matrix2d asymptotic_covariance(const FitResult& fit, int n_units);

enum class ParamScale { natural, log_theta0 };

struct ParamIntervals {
    ParamScale scale = ParamScale::natural;
    double theta0_estimate = 0.0;  // theta0 or log theta0 according to scale
    Interval theta0;
    double theta1_estimate = 0.0;
    Interval theta1;
};

ParamIntervals param_confidence_interval(const FitResult& fit, int n_units, double level,
                                         ParamScale scale = ParamScale::natural);

/// Ellipse {theta : N (theta_hat - theta)^T Sigma^{-1} (theta_hat - theta) <= chi2_{2,alpha}}.
class ConfidenceRegion {
public:
    ConfidenceRegion(Eigen::Vector2d center, Eigen::Matrix2d scaled_covariance, double threshold);

    bool contains(const Eigen::Vector2d& point) const;
    /// Area of the ellipse: threshold * pi * sqrt(det(Sigma / N)).
    double volume() const;

    const Eigen::Vector2d& center() const { return center_; }
    double threshold() const { return threshold_; }

private:
    Eigen::Vector2d center_;
    Eigen::Matrix2d scaled_covariance_;
    Eigen::Matrix2d precision_;
    double threshold_;
};

/// Region in natural coordinates, or in (log theta0, theta1) for ParamScale::log_theta0.
ConfidenceRegion confidence_region(const FitResult& fit, int n_units, double level,
                                   ParamScale scale = ParamScale::natural);

/// sqrt(det(I_F^{-1}(theta_mle)) / det(Sigma_beta(theta_beta))): ratio of the
/// confidence ellipse areas of the MLE and of the MDPDE.
double relative_efficiency(const FitResult& fit_beta, const FitResult& fit_mle);

}  // namespace ssalt

#pragma once

// Wald-type tests of linear hypotheses on theta built on the MDPDE and its
// sandwich covariance, evaluated at the unrestricted estimate.

#include <Eigen/Core>

#include "ssalt/estimation.hpp"

namespace ssalt {

/// H0: m^T theta = d.
struct LinearHypothesis {
    Eigen::Vector2d m{0.0, 1.0};
    double d = 0.0;
    double alpha = 0.05;

    void validate() const;
};

/// H0: M theta = d with M of size r x 2, r in {1, 2}, full row rank.
struct MatrixHypothesis {
    Eigen::MatrixXd m;
    Eigen::VectorXd d;
    double alpha = 0.05;

    void validate() const;
    int rank() const { return static_cast<int>(m.rows()); }
};

struct TestOutcome {
    double statistic = 0.0;
    double p_value = 1.0;
    double critical_value = 0.0;
    double alpha = 0.05;
    int dof = 1;
    bool reject = false;
};

/// sqrt(N) (m^T Sigma m)^{-1/2} (m^T theta_hat - d).
double z_statistic(const FitResult& fit, const LinearHypothesis& hyp, int n_units);

/// Two-sided test: reject when |Z| > z_{alpha/2}.
TestOutcome z_test(const FitResult& fit, const LinearHypothesis& hyp, int n_units);

/// N (M theta_hat - d)^T (M Sigma M^T)^{-1} (M theta_hat - d).
double wald_chi2_statistic(const FitResult& fit, const MatrixHypothesis& hyp, int n_units);

/// Reject when the statistic exceeds the upper alpha quantile of chi2_r.
TestOutcome wald_test(const FitResult& fit, const MatrixHypothesis& hyp, int n_units);

enum class PowerFormula {
    /// P(|Z| > z_{alpha/2}) for Z ~ N(delta, 1): 1 - Phi(z - delta) + Phi(-z - delta).
    two_sided,
    /// The doubled one-tail display 2 [1 - Phi(c - delta)]; c = z_{alpha/2} for
    /// contiguous alternatives and c = 1 for a fixed alternative. It exceeds
    /// one for large shifts.
    printed,
};

/// Approximate power at theta_0 + ell / sqrt(N). Z is asymptotically
/// N(delta, 1) with delta = m^T ell / sqrt(m^T Sigma m), which does not depend
/// on N. The printed variant keeps the display's extra factor,
/// delta = sqrt(N / m^T Sigma m) m^T ell; it is what a fixed alternative
/// theta_0 + ell would give.
double power_contiguous(const Eigen::Matrix2d& covariance, const LinearHypothesis& hyp,
                        const Eigen::Vector2d& ell, int n_units,
                        PowerFormula formula = PowerFormula::two_sided);

/// Approximate power at a fixed alternative theta_star;
/// delta = sqrt(N) (m^T Sigma m)^{-1/2} (m^T theta_star - d).
double power_at_point(const Eigen::Matrix2d& covariance, const LinearHypothesis& hyp,
                      const ModelParams& theta_star, int n_units,
                      PowerFormula formula = PowerFormula::printed);

}  // namespace ssalt

#include "ssalt/hypothesis.hpp"

#include <cmath>

#include <Eigen/LU>

namespace ssalt {

namespace {

double check_sample_size(int n_units) {
    if (n_units < 1) throw ValidationError("sample size must be positive");
    return static_cast<double>(n_units);
}

double projected_variance(const Eigen::Matrix2d& covariance, const Eigen::Vector2d& m) {
    const double v = m.dot(covariance * m);
    if (!(v > 0.0)) throw NumericalError("m^T Sigma m must be positive");
    return v;
}

double power_from_shift(double delta, double alpha, PowerFormula formula, double printed_c) {
    const double z = normal_two_sided_critical(alpha);
    if (formula == PowerFormula::printed) return 2.0 * (1.0 - normal_cdf(printed_c - delta));
    return normal_cdf(delta - z) + normal_cdf(-z - delta);
}

}  // namespace

void LinearHypothesis::validate() const {
    if (!m.allFinite() || m.isZero(0.0)) throw ValidationError("hypothesis vector m must be nonzero");
    if (!std::isfinite(d)) throw ValidationError("hypothesis value d must be finite");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
}

void MatrixHypothesis::validate() const {
    if (m.cols() != 2 || m.rows() < 1 || m.rows() > 2) {
        throw ValidationError("hypothesis matrix must have 1 or 2 rows and 2 columns");
    }
    if (d.size() != m.rows()) throw ValidationError("hypothesis vector d must have one entry per row of M");
    if (!m.allFinite() || !d.allFinite()) throw ValidationError("hypothesis must be finite");
    if (Eigen::FullPivLU<Eigen::MatrixXd>(m).rank() != m.rows()) {
        throw ValidationError("hypothesis matrix must have full row rank");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
}

double z_statistic(const FitResult& fit, const LinearHypothesis& hyp, int n_units) {
    hyp.validate();
    const double n = check_sample_size(n_units);
    const double v = projected_variance(fit.covariance, hyp.m);
    return std::sqrt(n / v) * (hyp.m.dot(fit.params_hat.vec()) - hyp.d);
}

TestOutcome z_test(const FitResult& fit, const LinearHypothesis& hyp, int n_units) {
    TestOutcome out;
    out.statistic = z_statistic(fit, hyp, n_units);
    out.alpha = hyp.alpha;
    out.dof = 1;
    out.critical_value = normal_two_sided_critical(hyp.alpha);
    out.p_value = 2.0 * normal_cdf(-std::abs(out.statistic));
    out.reject = std::abs(out.statistic) > out.critical_value;
    return out;
}

double wald_chi2_statistic(const FitResult& fit, const MatrixHypothesis& hyp, int n_units) {
    hyp.validate();
    const double n = check_sample_size(n_units);
    const Eigen::MatrixXd middle = hyp.m * fit.covariance * hyp.m.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(middle);
    if (!lu.isInvertible() || !middle.allFinite()) {
        throw NumericalError("M Sigma M^T is singular");
    }
    const Eigen::VectorXd r = hyp.m * fit.params_hat.vec() - hyp.d;
    return n * r.dot(lu.solve(r));
}

TestOutcome wald_test(const FitResult& fit, const MatrixHypothesis& hyp, int n_units) {
    TestOutcome out;
    out.statistic = wald_chi2_statistic(fit, hyp, n_units);
    out.alpha = hyp.alpha;
    out.dof = hyp.rank();
    out.critical_value = chi2_upper_quantile(hyp.alpha, out.dof);
    out.p_value = chi2_survival(out.statistic, out.dof);
    out.reject = out.statistic > out.critical_value;
    return out;
}

double power_contiguous(const Eigen::Matrix2d& covariance, const LinearHypothesis& hyp,
                        const Eigen::Vector2d& ell, int n_units, PowerFormula formula) {
    hyp.validate();
    const double n = check_sample_size(n_units);
    const double scale = formula == PowerFormula::printed ? std::sqrt(n) : 1.0;
    const double delta = scale * hyp.m.dot(ell) / std::sqrt(projected_variance(covariance, hyp.m));
    return power_from_shift(delta, hyp.alpha, formula, normal_two_sided_critical(hyp.alpha));
}

double power_at_point(const Eigen::Matrix2d& covariance, const LinearHypothesis& hyp,
                      const ModelParams& theta_star, int n_units, PowerFormula formula) {
    hyp.validate();
    const double n = check_sample_size(n_units);
    const double delta = std::sqrt(n / projected_variance(covariance, hyp.m)) *
                         (hyp.m.dot(theta_star.vec()) - hyp.d);
    return power_from_shift(delta, hyp.alpha, formula, 1.0);
}

}  // namespace ssalt

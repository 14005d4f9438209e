#include "ssalt/estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace ssalt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxAbsLogTheta0 = 200.0;
constexpr int kMaxFailedNewtonSteps = 5;
constexpr double kLossResolution = 1e-14;

// DPD loss and gradient as functions of eta = (log theta0, theta1).
class EtaObjective {
public:
    EtaObjective(const EmpiricalFrequencies& p_hat, const TestPlan& plan, double beta)
        : p_hat_(p_hat), plan_(plan), beta_(beta) {}

    double value(const Eigen::Vector2d& eta) const {
        if (!eta.allFinite() || std::abs(eta(0)) > kMaxAbsLogTheta0) return kInf;
        try {
            const double v =
                dpd_loss(p_hat_, cell_probabilities(to_params(eta), plan_), beta_);
            return std::isfinite(v) ? v : kInf;
        } catch (const NumericalError&) {
            return kInf;
        }
    }

    Eigen::Vector2d gradient(const Eigen::Vector2d& eta) const {
        const ModelParams params = to_params(eta);
        try {
            const Eigen::Vector2d g = dpd_loss_gradient(params, plan_, p_hat_, beta_);
            return {params.theta0 * g(0), g(1)};
        } catch (const NumericalError&) {
            return Eigen::Vector2d::Constant(std::numeric_limits<double>::quiet_NaN());
        }
    }

    Eigen::Matrix2d hessian(const Eigen::Vector2d& eta, const Eigen::Vector2d& steps) const {
        Eigen::Matrix2d h;
        for (int i = 0; i < 2; ++i) {
            Eigen::Vector2d e = Eigen::Vector2d::Zero();
            e(i) = steps(i);
            h.col(i) = (gradient(eta + e) - gradient(eta - e)) / (2.0 * steps(i));
        }
        return 0.5 * (h + h.transpose());
    }

    static ModelParams to_params(const Eigen::Vector2d& eta) {
        return ModelParams::from_log(eta(0), eta(1));
    }

private:
    const EmpiricalFrequencies& p_hat_;
    const TestPlan& plan_;
    double beta_;
};

// Newton direction with the Hessian's spectrum clamped to be positive.
Eigen::Vector2d newton_direction(const Eigen::Matrix2d& h, const Eigen::Vector2d& g) {
    if (!h.allFinite()) return -g;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(h);
    Eigen::Vector2d values = eig.eigenvalues();
    const double scale = values.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) return -g;
    for (int i = 0; i < 2; ++i) values(i) = std::max(std::abs(values(i)), 1e-8 * scale);
    const Eigen::Matrix2d& v = eig.eigenvectors();
    return -(v * values.cwiseInverse().asDiagonal() * v.transpose() * g);
}

struct SimplexOutcome {
    Eigen::Vector2d best;
    double value;
};

SimplexOutcome nelder_mead(const EtaObjective& f, const Eigen::Vector2d& start,
                           const Eigen::Vector2d& initial_steps, int max_iterations) {
    std::array<Eigen::Vector2d, 3> x{start, start + Eigen::Vector2d(initial_steps(0), 0.0),
                                     start + Eigen::Vector2d(0.0, initial_steps(1))};
    std::array<double, 3> fx{f.value(x[0]), f.value(x[1]), f.value(x[2])};
    for (int it = 0; it < max_iterations; ++it) {
        std::array<int, 3> order{0, 1, 2};
        std::sort(order.begin(), order.end(), [&](int a, int b) { return fx[a] < fx[b]; });
        const int lo = order[0], mid = order[1], hi = order[2];
        const double spread = fx[hi] - fx[lo];
        if (std::isfinite(spread) &&
            spread <= 1e-16 * (std::abs(fx[lo]) + 1e-300) &&
            (x[hi] - x[lo]).norm() < 1e-13 * (1.0 + x[lo].norm())) {
            break;
        }
        const Eigen::Vector2d centroid = 0.5 * (x[lo] + x[mid]);
        const Eigen::Vector2d reflected = centroid + (centroid - x[hi]);
        const double fr = f.value(reflected);
        if (fr < fx[lo]) {
            const Eigen::Vector2d expanded = centroid + 2.0 * (centroid - x[hi]);
            const double fe = f.value(expanded);
            if (fe < fr) {
                x[hi] = expanded, fx[hi] = fe;
            } else {
                x[hi] = reflected, fx[hi] = fr;
            }
        } else if (fr < fx[mid]) {
            x[hi] = reflected, fx[hi] = fr;
        } else {
            const bool outside = fr < fx[hi];
            const Eigen::Vector2d contracted =
                outside ? centroid + 0.5 * (reflected - centroid)
                        : centroid + 0.5 * (x[hi] - centroid);
            const double fc = f.value(contracted);
            if (fc < std::min(fr, fx[hi])) {
                x[hi] = contracted, fx[hi] = fc;
            } else {
                for (int i : {mid, hi}) {
                    x[i] = x[lo] + 0.5 * (x[i] - x[lo]);
                    fx[i] = f.value(x[i]);
                }
            }
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(fx.begin(), fx.end()) - fx.begin());
    return {x[best], fx[best]};
}

double max_abs_stress(const TestPlan& plan) {
    double m = 1.0;
    for (double x : plan.stress_levels) m = std::max(m, std::abs(x));
    return m;
}

std::optional<std::string> degenerate_data(const EmpiricalFrequencies& p_hat) {
    const Eigen::Index last = p_hat.freqs.size() - 1;
    if (p_hat.freqs(last) == 1.0) {
        return "all units survived the experiment; theta0 diverges to zero";
    }
    if (p_hat.freqs(0) == 1.0) {
        return "all units failed before the first inspection; theta0 diverges to infinity";
    }
    return std::nullopt;
}

Eigen::Vector2d initial_eta(const EmpiricalFrequencies& p_hat, const TestPlan& plan,
                            const FitConfig& config) {
    if (config.initial_params) {
        config.initial_params->validate();
        return {std::log(config.initial_params->theta0), config.initial_params->theta1};
    }
    const double n = p_hat.source_counts ? static_cast<double>(p_hat.total())
                                         : static_cast<double>(plan.n_units);
    const double survivors = p_hat.freqs(p_hat.freqs.size() - 1) * n;
    const double fraction = std::clamp(survivors, 0.5, std::max(n - 0.5, 0.5)) / n;
    const double theta0 = -std::log(fraction) / plan.inspection_times.back();
    return {std::log(theta0), 0.0};
}

bool is_singular(const Eigen::Matrix2d& m) {
    const double scale = std::abs(m(0, 0) * m(1, 1)) + std::abs(m(0, 1) * m(1, 0));
    return !m.allFinite() || !(scale > 0.0) || std::abs(m.determinant()) <= 1e-13 * scale;
}

void finish_fit(FitResult& fit, const TestPlan& plan, const EtaObjective& objective, const Eigen::Vector2d& eta) {
    fit.params_hat = EtaObjective::to_params(eta);
    fit.loss = objective.value(eta);
    fit.residual_norm = objective.gradient(eta).norm() / (fit.beta + 1.0);
    if (!fit.converged) return;
    try {
        const InfoMatrices info = info_matrices(fit.params_hat, plan, fit.beta);
        fit.j_matrix = info.j;
        fit.k_matrix = info.k;
        fit.covariance = sandwich(info);
        const Eigen::DiagonalMatrix<double, 2> to_log(1.0 / fit.params_hat.theta0, 1.0);
        fit.covariance_log = to_log * fit.covariance * to_log;
    } catch (const NumericalError& e) {
        fit.converged = false;
        fit.diagnostic = e.what();
    }
}

}  // namespace

void FitConfig::validate() const {
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw ValidationError("tuning parameter beta must be finite and nonnegative");
    }
    if (max_iterations < 1) throw ValidationError("max_iterations must be positive");
    if (!(gradient_tolerance > 0.0)) throw ValidationError("gradient tolerance must be positive");
}

double FitResult::log_theta0() const { return std::log(params_hat.theta0); }

FitResult fit_mdpde(const EmpiricalFrequencies& counts, const TestPlan& plan,
                    const FitConfig& config) {
    config.validate();
    plan.validate();
    if (counts.size() != plan.cells()) {
        throw ValidationError("data has " + std::to_string(counts.size()) +
                              " cells but the plan defines " + std::to_string(plan.cells()));
    }
    if (counts.source_counts && counts.total() != plan.n_units) {
        throw ValidationError("counts sum to " + std::to_string(counts.total()) +
                              " but the plan tests " + std::to_string(plan.n_units) + " units");
    }

    FitResult fit;
    fit.beta = config.beta;
    const EtaObjective objective(counts, plan, config.beta);
    Eigen::Vector2d eta = initial_eta(counts, plan, config);

    if (auto reason = degenerate_data(counts)) {
        fit.diagnostic = *reason;
        finish_fit(fit, plan, objective, eta);
        return fit;
    }

    const double stress_scale = max_abs_stress(plan);
    const Eigen::Vector2d fd_steps(1e-5, 1e-5 / stress_scale);
    const Eigen::Vector2d simplex_steps(0.5, 0.5 / stress_scale);
    const double max_step = 10.0;

    double value = objective.value(eta);
    if (!std::isfinite(value)) {
        // The moment-matched start can sit where a cell has zero probability.
        eta = {std::log(1.0 / plan.inspection_times.back()), 0.0};
        value = objective.value(eta);
    }
    int failed_steps = 0;
    int simplex_runs = 0;
    for (fit.iterations = 0; fit.iterations < config.max_iterations; ++fit.iterations) {
        const Eigen::Vector2d g = objective.gradient(eta);
        if (!g.allFinite()) {
            fit.diagnostic = "gradient is not finite at the current estimate";
            break;
        }
        if (g.norm() / (config.beta + 1.0) <= config.gradient_tolerance) {
            fit.converged = true;
            break;
        }
        Eigen::Vector2d step = newton_direction(objective.hessian(eta, fd_steps), g);
        if (step.norm() > max_step) step *= max_step / step.norm();

        const double slope = g.dot(step);
        bool accepted = false;
        if (-slope <= 1e-12 * std::abs(value) + kLossResolution) {
            // Predicted decrease is below the resolution of the loss: judge
            // the full Newton step by the gradient instead. The loss sums
            // terms of order one even when its value is near zero, so the
            // resolution has an absolute floor.
            const Eigen::Vector2d trial = eta + step;
            const Eigen::Vector2d trial_grad = objective.gradient(trial);
            if (trial_grad.allFinite() && trial_grad.norm() < g.norm()) {
                eta = trial;
                value = objective.value(trial);
                accepted = true;
            }
        } else {
            for (double t = 1.0; t > 1e-10; t *= 0.5) {
                const Eigen::Vector2d trial = eta + t * step;
                const double trial_value = objective.value(trial);
                if (trial_value < value && trial_value <= value + 1e-4 * t * slope) {
                    eta = trial;
                    value = trial_value;
                    accepted = true;
                    break;
                }
            }
        }
        failed_steps = accepted ? 0 : failed_steps + 1;
        if (failed_steps >= kMaxFailedNewtonSteps) {
            if (simplex_runs == 2) {
                fit.diagnostic = "Newton and simplex steps both stalled";
                break;
            }
            const SimplexOutcome simplex = nelder_mead(objective, eta, simplex_steps, 4000);
            ++simplex_runs;
            fit.used_simplex = true;
            if (simplex.value <= value) {
                eta = simplex.best;
                value = simplex.value;
            }
            failed_steps = 0;
        }
        if (std::abs(eta(0)) >= kMaxAbsLogTheta0 - 1.0) {
            fit.diagnostic = "estimate diverged (|log theta0| too large)";
            break;
        }
    }
    if (!fit.converged && fit.diagnostic.empty()) {
        fit.diagnostic = "no convergence after " + std::to_string(config.max_iterations) +
                         " iterations";
    }
    finish_fit(fit, plan, objective, eta);
    return fit;
}

InfoMatrices info_matrices(const ModelParams& params, const TestPlan& plan, double beta) {
    if (!(beta >= 0.0)) throw ValidationError("tuning parameter beta must be nonnegative");
    const CellProbabilities pi = cell_probabilities(params, plan);
    if ((pi.probs.array() <= 0.0).any()) {
        throw NumericalError("information matrices need strictly positive cell probabilities");
    }
    const ScoreMatrix w = score_matrix(params, plan);
    const Eigen::ArrayXd p = pi.probs.array();
    const Eigen::VectorXd p_beta = p.pow(beta).matrix();
    const Eigen::Vector2d u = w.transpose() * p_beta;
    InfoMatrices info;
    info.j = w.transpose() * p.pow(beta - 1.0).matrix().asDiagonal() * w;
    info.k = w.transpose() * p.pow(2.0 * beta - 1.0).matrix().asDiagonal() * w - u * u.transpose();
    return info;
}

Eigen::Matrix2d sandwich(const InfoMatrices& info) {
    if (is_singular(info.j)) {
        throw NumericalError("J matrix is singular: the plan has too few informative cells");
    }
    const Eigen::Matrix2d j_inv = info.j.inverse();
    const Eigen::Matrix2d s = j_inv * info.k * j_inv;
    const Eigen::Matrix2d sym = 0.5 * (s + s.transpose());
    // Closed-form eigenvalues of the symmetric 2x2 result; a clearly negative
    // one means J and K were lost to cancellation.
    const double mean = 0.5 * sym.trace();
    const double radius = std::hypot(0.5 * (sym(0, 0) - sym(1, 1)), sym(0, 1));
    if (!sym.allFinite() || mean - radius < -1e-9 * (std::abs(mean) + radius)) {
        throw NumericalError("sandwich covariance is not positive semidefinite: the information is numerically degenerate");
    }
    return sym;
}

Eigen::Matrix2d asymptotic_covariance(const FitResult& fit, int n_units) {
    if (n_units < 1) throw ValidationError("sample size must be positive");
    if (is_singular(fit.j_matrix)) throw NumericalError("J matrix of the fit is singular");
    return fit.covariance / static_cast<double>(n_units);
}

ParamIntervals param_confidence_interval(const FitResult& fit, int n_units, double level,
                                         ParamScale scale) {
    if (n_units < 1) throw ValidationError("sample size must be positive");
    const double z = normal_interval_critical(level);
    const Eigen::Matrix2d& cov =
        scale == ParamScale::natural ? fit.covariance : fit.covariance_log;
    const double root_n = std::sqrt(static_cast<double>(n_units));
    ParamIntervals out;
    out.scale = scale;
    out.theta0_estimate =
        scale == ParamScale::natural ? fit.params_hat.theta0 : fit.log_theta0();
    out.theta1_estimate = fit.params_hat.theta1;
    const double h0 = z * std::sqrt(cov(0, 0)) / root_n;
    const double h1 = z * std::sqrt(cov(1, 1)) / root_n;
    out.theta0 = {out.theta0_estimate - h0, out.theta0_estimate + h0};
    out.theta1 = {out.theta1_estimate - h1, out.theta1_estimate + h1};
    return out;
}

ConfidenceRegion::ConfidenceRegion(Eigen::Vector2d center, Eigen::Matrix2d scaled_covariance,
                                   double threshold)
    : center_(std::move(center)), scaled_covariance_(std::move(scaled_covariance)),
      threshold_(threshold) {
    if (is_singular(scaled_covariance_)) {
        throw NumericalError("confidence region needs a nonsingular covariance");
    }
    precision_ = scaled_covariance_.inverse();
}

bool ConfidenceRegion::contains(const Eigen::Vector2d& point) const {
    const Eigen::Vector2d d = point - center_;
    return d.dot(precision_ * d) <= threshold_;
}

double ConfidenceRegion::volume() const {
    return threshold_ * std::numbers::pi * std::sqrt(scaled_covariance_.determinant());
}

ConfidenceRegion confidence_region(const FitResult& fit, int n_units, double level,
                                   ParamScale scale) {
    if (n_units < 1) throw ValidationError("sample size must be positive");
    const double threshold = chi2_upper_quantile(1.0 - level, 2);
    const bool natural = scale == ParamScale::natural;
    const Eigen::Vector2d center = natural ? fit.params_hat.vec()
                                           : Eigen::Vector2d(fit.log_theta0(), fit.params_hat.theta1);
    const Eigen::Matrix2d& cov = natural ? fit.covariance : fit.covariance_log;
    return {center, cov / static_cast<double>(n_units), threshold};
}

double relative_efficiency(const FitResult& fit_beta, const FitResult& fit_mle) {
    if (fit_mle.beta != 0.0) {
        throw ValidationError("relative efficiency needs the maximum likelihood fit as reference");
    }
    // At beta = 0 the sandwich reduces to the inverse Fisher information.
    const double det_mle = fit_mle.covariance.determinant();
    const double det_beta = fit_beta.covariance.determinant();
    if (!(det_mle > 0.0) || !(det_beta > 0.0)) {
        throw NumericalError("relative efficiency needs nonsingular covariances");
    }
    return std::sqrt(det_mle / det_beta);
}

}  // namespace ssalt

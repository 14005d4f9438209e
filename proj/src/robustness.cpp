#include "ssalt/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/LU>

#include "ssalt/estimation.hpp"

namespace ssalt {

namespace {

// Terms of sum_j (z_j - z_{j-1}) pi_j^{beta-1} that carry z_m for the
// inspections m >= first (0-based): z_m pi_m^{beta-1} and z_m pi_{m+1}^{beta-1}.
// The plan need not pass validation.
Eigen::Matrix<double, Eigen::Dynamic, 2> leverage_terms(const ModelParams& params,
                                                        const TestPlan& plan, double beta,
                                                        std::size_t first) {
    const std::size_t L = plan.inspections();
    std::vector<double> log_surv(L);
    Eigen::Matrix<double, Eigen::Dynamic, 2> out(static_cast<Eigen::Index>(2 * (L - first)), 2);
    for (std::size_t j = 0; j < L; ++j) log_surv[j] = log_survival(params, plan, plan.inspection_times[j]);
    for (std::size_t m = first; m < L; ++m) {
        const double t = plan.inspection_times[m];
        const std::size_t level = plan.level_at(t) + 1;
        const double start = level == 1 ? 0.0 : plan.change_times[level - 2];
        const double xi = plan.stress_levels[level - 1];
        const double shifted = t + exposure_shift(params, plan, level) - start;
        const Eigen::Vector2d v(shifted / params.theta0,
                                shifted * xi + exposure_shift_gradient_term(params, plan, level));
        const double rate = hazard_rate(params, xi);
        // z_m = rate S_m v; pi_m = S_{m-1} (1 - S_m / S_{m-1}).
        const double prev = m == 0 ? 0.0 : log_surv[m - 1];
        const double delta = log_surv[m] - prev;
        const double own = std::exp(delta + beta * prev) * std::pow(-std::expm1(delta), beta - 1.0);
        double next = std::exp(beta * log_surv[m]);
        if (m + 1 < L) next *= std::pow(-std::expm1(log_surv[m + 1] - log_surv[m]), beta - 1.0);
        const auto row = static_cast<Eigen::Index>(2 * (m - first));
        out.row(row) = (rate * own * v).transpose();
        out.row(row + 1) = (-rate * next * v).transpose();
    }
    return out;
}

void check_point(const ContaminationPoint& point, const TestPlan& plan) {
    if (point.cell_index < 1 || point.cell_index > plan.cells()) {
        throw ValidationError("contamination cell " + std::to_string(point.cell_index) +
                              " out of range 1.." + std::to_string(plan.cells()));
    }
}

}  // namespace

Eigen::Vector2d if_estimator(const ContaminationPoint& point, const ModelParams& params,
                             const TestPlan& plan, double beta) {
    check_point(point, plan);
    const CellProbabilities pi = cell_probabilities(params, plan);
    const InfoMatrices info = info_matrices(params, plan, beta);
    Eigen::FullPivLU<Eigen::Matrix2d> lu(info.j);
    if (!lu.isInvertible()) throw NumericalError("J matrix is singular");
    const ScoreMatrix w = score_matrix(params, plan);
    Eigen::VectorXd r = -pi.probs;
    r(static_cast<Eigen::Index>(point.cell_index - 1)) += 1.0;
    const Eigen::VectorXd weighted = pi.probs.array().pow(beta - 1.0).matrix().cwiseProduct(r);
    return lu.solve(w.transpose() * weighted);
}

double if_ztest(const ContaminationPoint& point, const ModelParams& params, const TestPlan& plan,
                double beta, const LinearHypothesis& hyp, int n_units) {
    hyp.validate();
    if (n_units < 1) throw ValidationError("sample size must be positive");
    const Eigen::Matrix2d sigma = sandwich(info_matrices(params, plan, beta));
    const double v = hyp.m.dot(sigma * hyp.m);
    if (!(v > 0.0)) throw NumericalError("m^T Sigma m must be positive");
    return std::sqrt(static_cast<double>(n_units) / v) *
           hyp.m.dot(if_estimator(point, params, plan, beta));
}

std::vector<ScanPoint> if_divergence_scan(const ModelParams& params, const TestPlan& plan,
                                          double beta, ScanAxis axis,
                                          const std::vector<double>& grid, std::size_t level) {
    plan.validate();
    params.validate();
    if (!(beta >= 0.0)) throw ValidationError("tuning parameter beta must be nonnegative");
    if (!std::is_sorted(grid.begin(), grid.end())) throw ValidationError("scan grid must be increasing");
    const std::size_t L = plan.inspections();
    const std::size_t k = plan.levels();
    if (level == 0) level = k;
    if (level > k) throw ValidationError("scan level out of range");

    std::size_t first = L - 1;
    if (axis == ScanAxis::stress_level) {
        const double start = level == 1 ? 0.0 : plan.change_times[level - 2];
        first = static_cast<std::size_t>(
            std::upper_bound(plan.inspection_times.begin(), plan.inspection_times.end(), start) -
            plan.inspection_times.begin());
    }
    const double previous = axis == ScanAxis::inspection_time && L > 1
                                ? plan.inspection_times[L - 2]
                                : -std::numeric_limits<double>::infinity();

    std::vector<ScanPoint> out;
    out.reserve(grid.size());
    TestPlan moved = plan;
    for (double value : grid) {
        if (axis == ScanAxis::inspection_time) {
            if (!(value > previous) || (k > 1 && !(value > plan.change_times[k - 2]))) {
                throw ValidationError("scan value must exceed the preceding inspection time");
            }
            moved.inspection_times.back() = value;
            moved.change_times.back() = value;
        } else {
            for (std::size_t i = level - 1; i < k; ++i) moved.stress_levels[i] = value;
        }
        const auto s = leverage_terms(params, moved, beta, first);
        out.push_back({value, s.col(0).cwiseAbs().maxCoeff(), s.col(1).cwiseAbs().maxCoeff()});
    }
    return out;
}

}  // namespace ssalt

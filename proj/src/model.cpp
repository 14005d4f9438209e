#include "ssalt/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ssalt {

namespace {

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

bool strictly_increasing(const std::vector<double>& v) {
    return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
}

double level_start(const TestPlan& plan, std::size_t i0) {
    return i0 == 0 ? 0.0 : plan.change_times[i0 - 1];
}

// sum_{l < i0} lambda_l (tau_l - tau_{l-1}), the exposure accumulated before
// 0-based level i0 starts.
double exposure_before(const ModelParams& params, const TestPlan& plan, std::size_t i0) {
    double acc = 0.0;
    for (std::size_t l = 0; l < i0; ++l) {
        acc += hazard_rate(params, plan.stress_levels[l]) *
               (plan.change_times[l] - level_start(plan, l));
    }
    return acc;
}

void check_level(const TestPlan& plan, std::size_t level) {
    if (level < 1 || level > plan.levels()) {
        throw ValidationError("stress level index " + std::to_string(level) +
                              " out of range 1.." + std::to_string(plan.levels()));
    }
}

void check_time(double t) {
    if (!(t >= 0.0)) throw ValidationError("lifetime evaluated at negative or NaN time");
}

}  // namespace

void TestPlan::validate() const {
    const std::size_t k = stress_levels.size();
    if (k == 0) throw ValidationError("test plan needs at least one stress level");
    if (change_times.size() != k) {
        throw ValidationError("test plan has " + std::to_string(k) + " stress levels but " +
                              std::to_string(change_times.size()) + " change times");
    }
    if (inspection_times.size() < k) {
        throw ValidationError("test plan needs at least as many inspection times as stress levels");
    }
    if (!all_finite(stress_levels) || !all_finite(change_times) || !all_finite(inspection_times) ||
        !std::isfinite(use_stress)) {
        throw ValidationError("test plan contains non-finite values");
    }
    if (!strictly_increasing(stress_levels)) {
        throw ValidationError("stress levels must be strictly increasing");
    }
    if (!strictly_increasing(change_times)) {
        throw ValidationError("stress change times must be strictly increasing");
    }
    if (!strictly_increasing(inspection_times) || inspection_times.front() <= 0.0) {
        throw ValidationError("inspection times must be positive and strictly increasing");
    }
    for (double tau : change_times) {
        if (std::count(inspection_times.begin(), inspection_times.end(), tau) != 1) {
            throw ValidationError("stress change time " + std::to_string(tau) +
                                  " is not an inspection time");
        }
    }
    if (inspection_times.back() != change_times.back()) {
        throw ValidationError("last inspection time must equal the end of the experiment");
    }
    if (n_units < 1) throw ValidationError("test plan needs at least one unit");
}

std::size_t TestPlan::level_at(double t) const {
    const std::size_t k = stress_levels.size();
    for (std::size_t i = 0; i + 1 < k; ++i) {
        if (t < change_times[i]) return i;
    }
    return k - 1;
}

void ModelParams::validate() const {
    if (!(theta0 > 0.0) || !std::isfinite(theta0) || !std::isfinite(theta1)) {
        throw ValidationError("model parameters need theta0 > 0 and finite theta1");
    }
}

ModelParams ModelParams::from_log(double log_theta0, double theta1) {
    return {std::exp(log_theta0), theta1};
}

double hazard_rate(const ModelParams& params, double stress) {
    return params.theta0 * std::exp(params.theta1 * stress);
}

double exposure_shift(const ModelParams& params, const TestPlan& plan, std::size_t level) {
    check_level(plan, level);
    const std::size_t i0 = level - 1;
    return exposure_before(params, plan, i0) / hazard_rate(params, plan.stress_levels[i0]);
}

double exposure_shift_gradient_term(const ModelParams& params, const TestPlan& plan,
                                    std::size_t level) {
    check_level(plan, level);
    const std::size_t i0 = level - 1;
    const double xi = plan.stress_levels[i0];
    double acc = 0.0;
    for (std::size_t l = 0; l < i0; ++l) {
        const double xl = plan.stress_levels[l];
        acc += hazard_rate(params, xl) * (plan.change_times[l] - level_start(plan, l)) * (xl - xi);
    }
    return acc / hazard_rate(params, xi);
}

double log_survival(const ModelParams& params, const TestPlan& plan, double t) {
    check_time(t);
    const std::size_t i0 = plan.level_at(t);
    const double rate = hazard_rate(params, plan.stress_levels[i0]);
    return -(exposure_before(params, plan, i0) + rate * (t - level_start(plan, i0)));
}

double lifetime_cdf(const ModelParams& params, const TestPlan& plan, double t) {
    return -std::expm1(log_survival(params, plan, t));
}

double reliability(const ModelParams& params, const TestPlan& plan, double t) {
    return std::exp(log_survival(params, plan, t));
}

double lifetime_pdf(const ModelParams& params, const TestPlan& plan, double t) {
    const double rate = hazard_rate(params, plan.stress_levels[plan.level_at(t)]);
    return rate * reliability(params, plan, t);
}

CellProbabilities cell_probabilities(const ModelParams& params, const TestPlan& plan) {
    params.validate();
    const std::size_t L = plan.inspections();
    Eigen::VectorXd probs(static_cast<Eigen::Index>(L + 1));
    double prev_log_surv = 0.0;
    for (std::size_t j = 0; j < L; ++j) {
        const double log_surv = log_survival(params, plan, plan.inspection_times[j]);
        // S(t_{j-1}) - S(t_j) without cancellation for close inspection times.
        probs(static_cast<Eigen::Index>(j)) =
            std::exp(prev_log_surv) * -std::expm1(log_surv - prev_log_surv);
        prev_log_surv = log_surv;
    }
    probs(static_cast<Eigen::Index>(L)) = std::exp(prev_log_surv);
    return {std::move(probs)};
}

Eigen::Vector2d cdf_gradient(const ModelParams& params, const TestPlan& plan, std::size_t j) {
    if (j < 1 || j > plan.inspections()) {
        throw ValidationError("inspection index " + std::to_string(j) + " out of range 1.." +
                              std::to_string(plan.inspections()));
    }
    const double t = plan.inspection_times[j - 1];
    const std::size_t level = plan.level_at(t) + 1;
    const double shifted = t + exposure_shift(params, plan, level) - level_start(plan, level - 1);
    const double xi = plan.stress_levels[level - 1];
    const double density = lifetime_pdf(params, plan, t);
    return density * Eigen::Vector2d(shifted / params.theta0,
                                     shifted * xi +
                                         exposure_shift_gradient_term(params, plan, level));
}

ScoreMatrix score_matrix(const ModelParams& params, const TestPlan& plan) {
    const std::size_t L = plan.inspections();
    ScoreMatrix w(static_cast<Eigen::Index>(L + 1), 2);
    Eigen::Vector2d prev = Eigen::Vector2d::Zero();
    for (std::size_t j = 1; j <= L; ++j) {
        const Eigen::Vector2d z = cdf_gradient(params, plan, j);
        w.row(static_cast<Eigen::Index>(j - 1)) = (z - prev).transpose();
        prev = z;
    }
    w.row(static_cast<Eigen::Index>(L)) = -prev.transpose();
    return w;
}

}  // namespace ssalt

#pragma once

// Step-stress cumulative exposure model with exponential lifetimes.
//
// A test plan runs k ordered stress levels x_1 < ... < x_k; the stress is raised
// at the change times tau_1 < ... < tau_k (tau_k ends the experiment) and the
// units are inspected at t_1 < ... < t_L, a grid that contains every tau_i.
// At level i the failure rate is lambda_i = theta0 * exp(theta1 * x_i).
//
// Indexing: levels and inspection times are stored 0-based. Cell j (0-based)
// for j < L is the interval (t_{j-1}, t_j] with t_{-1} = 0, and cell L holds
// the survivors. Each inspection time belongs to the level whose half-open
// interval [tau_{i-1}, tau_i) contains it; times at or after tau_{k-1} belong
// to the last level.

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "ssalt/error.hpp"

namespace ssalt {

struct TestPlan {
    std::vector<double> stress_levels;     // x_1..x_k
    std::vector<double> change_times;      // tau_1..tau_k
    std::vector<double> inspection_times;  // t_1..t_L
    double use_stress = 0.0;               // x_0
    int n_units = 1;                       // N

    std::size_t levels() const { return stress_levels.size(); }
    std::size_t inspections() const { return inspection_times.size(); }
    std::size_t cells() const { return inspection_times.size() + 1; }

    /// Throws ValidationError when any structural invariant is broken.
    void validate() const;

    /// 0-based level that is active at time t (half-open intervals).
    std::size_t level_at(double t) const;

    friend bool operator==(const TestPlan&, const TestPlan&) = default;
};

struct ModelParams {
    double theta0 = 1.0;
    double theta1 = 0.0;

    void validate() const;

    Eigen::Vector2d vec() const { return {theta0, theta1}; }
    static ModelParams from_vec(const Eigen::Vector2d& v) { return {v(0), v(1)}; }
    static ModelParams from_log(double log_theta0, double theta1);

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Probability vector over the L failure intervals plus the survival cell.
struct CellProbabilities {
    Eigen::VectorXd probs;

    std::size_t size() const { return static_cast<std::size_t>(probs.size()); }
    double operator[](std::size_t j) const { return probs(static_cast<Eigen::Index>(j)); }
};

/// (L+1) x 2 matrix W with rows w_j = z_j - z_{j-1}.
using ScoreMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2>;

double hazard_rate(const ModelParams& params, double stress);

/// a_{i-1} for the 1-based level i; exposure at earlier levels expressed as
/// equivalent time at level i.
double exposure_shift(const ModelParams& params, const TestPlan& plan, std::size_t level);

/// a*_{i-1} for the 1-based level i: the extra theta1-derivative term of the
/// shifted exposure. Zero at level 1.
double exposure_shift_gradient_term(const ModelParams& params, const TestPlan& plan,
                                    std::size_t level);

/// log(1 - G_T(t)); finite for any finite parameters.
double log_survival(const ModelParams& params, const TestPlan& plan, double t);
double lifetime_cdf(const ModelParams& params, const TestPlan& plan, double t);
double lifetime_pdf(const ModelParams& params, const TestPlan& plan, double t);
double reliability(const ModelParams& params, const TestPlan& plan, double t);

CellProbabilities cell_probabilities(const ModelParams& params, const TestPlan& plan);

/// z_j = dG_T(t_j)/dtheta for the 1-based inspection index j in 1..L.
Eigen::Vector2d cdf_gradient(const ModelParams& params, const TestPlan& plan, std::size_t j);

ScoreMatrix score_matrix(const ModelParams& params, const TestPlan& plan);

}  // namespace ssalt

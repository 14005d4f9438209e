#pragma once

// Influence functions of the MDPDE and of the Z-type statistic at the model,
// and scans of the IF summands against leverage points.

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "ssalt/hypothesis.hpp"
#include "ssalt/model.hpp"

namespace ssalt {

/// Degenerate contamination at one cell, 1-based in 1..L+1.
struct ContaminationPoint {
    std::size_t cell_index = 1;
};

/// J_beta^{-1} W^T D_pi^{beta-1} (Delta_n - pi).
Eigen::Vector2d if_estimator(const ContaminationPoint& point, const ModelParams& params,
                             const TestPlan& plan, double beta);

/// sqrt(N / m^T Sigma m) m^T IF.
double if_ztest(const ContaminationPoint& point, const ModelParams& params, const TestPlan& plan,
                double beta, const LinearHypothesis& hyp, int n_units);

enum class ScanAxis {
    /// Moves the end of the experiment t_L = tau_k.
    inspection_time,
    /// Sets the stress of one level and of every later level to the grid value.
    stress_level,
};

struct ScanPoint {
    double axis_value = 0.0;
    double theta0_component = 0.0;
    double theta1_component = 0.0;
};

/// For each grid value, the largest magnitude per component among the terms
/// of sum_j (z_j - z_{j-1}) pi_j^{beta-1} that involve a z_m moved by the
/// swept value; terms tied only to earlier inspections are bounded and left
/// out. Terms are evaluated in log-survival form so they stay finite where
/// pi_j underflows.
/// `level` (1-based) selects the swept stress level; it is ignored for the
/// inspection-time axis.
std::vector<ScanPoint> if_divergence_scan(const ModelParams& params, const TestPlan& plan,
                                          double beta, ScanAxis axis,
                                          const std::vector<double>& grid,
                                          std::size_t level = 0);

}  // namespace ssalt

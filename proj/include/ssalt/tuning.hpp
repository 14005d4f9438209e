#pragma once

// Data-driven choice of beta: minimize the estimated MSE against a pilot
// estimate over a grid, replace the pilot by the winner, and repeat until the
// estimate settles.

#include <iosfwd>
#include <vector>

#include "ssalt/estimation.hpp"

namespace ssalt {

struct TuningConfig {
    double pilot_beta = 0.5;
    std::vector<double> grid = default_grid();
    /// Stopping threshold on the distance in (log theta0, theta1).
    double convergence_rate = 1e-3;
    int max_rounds = 50;

    /// 100 equally spaced points on [0, 1].
    static std::vector<double> default_grid(int points = 100);
    void validate() const;
};

/// ||theta_hat - theta_pilot||^2 + trace(J^{-1} K J^{-1}) / N at theta_hat.
double mse_hat(const FitResult& fit_beta, const ModelParams& pilot, int n_units);

struct TuningRound {
    int round = 0;
    ModelParams pilot;
    double beta_star = 0.0;
    double mse_min = 0.0;
};

struct TuningResult {
    double beta_star = 0.0;
    FitResult fit;
    int rounds = 0;
    bool converged = false;
    std::vector<TuningRound> trace;
    /// Grid values dropped because their fit did not converge.
    std::vector<double> excluded_betas;
};

TuningResult select_beta(const EmpiricalFrequencies& counts, const TestPlan& plan,
                         const TuningConfig& config);

void write_tuning_trace_csv(std::ostream& out, const std::vector<TuningRound>& trace);

}  // namespace ssalt

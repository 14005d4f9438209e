#include "ssalt/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>

namespace ssalt {

namespace {

double eta_distance(const ModelParams& a, const ModelParams& b) {
    return std::hypot(std::log(a.theta0) - std::log(b.theta0), a.theta1 - b.theta1);
}

}  // namespace

std::vector<double> TuningConfig::default_grid(int points) {
    if (points < 2) throw ValidationError("tuning grid needs at least two points");
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = static_cast<double>(i) / (points - 1);
    return grid;
}

void TuningConfig::validate() const {
    if (!(pilot_beta >= 0.0 && pilot_beta <= 1.0)) throw ValidationError("pilot beta must lie in [0, 1]");
    if (grid.empty()) throw ValidationError("tuning grid is empty");
    for (double b : grid) {
        if (!(b >= 0.0 && b <= 1.0)) throw ValidationError("tuning grid must lie in [0, 1]");
    }
    if (!(convergence_rate > 0.0)) throw ValidationError("convergence rate must be positive");
    if (max_rounds < 1) throw ValidationError("max_rounds must be positive");
}

double mse_hat(const FitResult& fit_beta, const ModelParams& pilot, int n_units) {
    if (n_units < 1) throw ValidationError("sample size must be positive");
    if (!fit_beta.converged) throw ValidationError("mse_hat needs a converged fit");
    const double bias = (fit_beta.params_hat.vec() - pilot.vec()).squaredNorm();
    return bias + fit_beta.covariance.trace() / static_cast<double>(n_units);
}

TuningResult select_beta(const EmpiricalFrequencies& counts, const TestPlan& plan,
                         const TuningConfig& config) {
    config.validate();
    std::vector<double> grid = config.grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    FitConfig fc;
    fc.beta = config.pilot_beta;
    const FitResult pilot_fit = fit_mdpde(counts, plan, fc);
    if (!pilot_fit.converged) {
        throw NumericalError("pilot fit at beta = " + std::to_string(config.pilot_beta) +
                             " did not converge: " + pilot_fit.diagnostic);
    }

    // The grid fits do not depend on the pilot, so one pass serves every
    // round; each fit starts from its converged neighbour.
    TuningResult result;
    std::vector<FitResult> fits;
    std::vector<double> betas;
    std::optional<ModelParams> warm = pilot_fit.params_hat;
    for (double beta : grid) {
        fc.beta = beta;
        fc.initial_params = warm;
        FitResult fit = fit_mdpde(counts, plan, fc);
        if (!fit.converged) {
            fc.initial_params.reset();
            fit = fit_mdpde(counts, plan, fc);
        }
        if (!fit.converged) {
            result.excluded_betas.push_back(beta);
            continue;
        }
        warm = fit.params_hat;
        betas.push_back(beta);
        fits.push_back(std::move(fit));
    }
    if (fits.empty()) throw NumericalError("no grid fit converged");

    ModelParams pilot = pilot_fit.params_hat;
    for (int round = 1; round <= config.max_rounds; ++round) {
        std::vector<double> mse(fits.size());
        for (std::size_t i = 0; i < fits.size(); ++i) mse[i] = mse_hat(fits[i], pilot, plan.n_units);
        const double lowest = *std::min_element(mse.begin(), mse.end());
        std::size_t best = 0;
        while (mse[best] > lowest + 1e-12) ++best;

        result.trace.push_back({round, pilot, betas[best], mse[best]});
        result.rounds = round;
        result.beta_star = betas[best];
        result.fit = fits[best];
        const bool settled = eta_distance(fits[best].params_hat, pilot) < config.convergence_rate;
        pilot = fits[best].params_hat;
        if (settled) {
            result.converged = true;
            break;
        }
    }
    return result;
}

void write_tuning_trace_csv(std::ostream& out, const std::vector<TuningRound>& trace) {
    out << "round,pilot_log_theta0,pilot_theta1,beta_star,mse_min\n";
    const auto old_precision = out.precision(10);
    for (const TuningRound& r : trace) {
        out << r.round << ',' << std::log(r.pilot.theta0) << ',' << r.pilot.theta1 << ','
            << r.beta_star << ',' << r.mse_min << '\n';
    }
    out.precision(old_precision);
}

}  // namespace ssalt

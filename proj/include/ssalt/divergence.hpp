#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ssalt/model.hpp"

namespace ssalt {

/// Empirical cell frequencies p_hat, optionally remembering the counts they
/// came from.
struct EmpiricalFrequencies {
    Eigen::VectorXd freqs;
    std::optional<std::vector<int>> source_counts;

    static EmpiricalFrequencies from_counts(const std::vector<int>& counts);
    /// Frequencies that need not come from integer counts (e.g. a contaminated
    /// model distribution). Must be nonnegative and sum to one.
    static EmpiricalFrequencies from_frequencies(Eigen::VectorXd freqs);

    std::size_t size() const { return static_cast<std::size_t>(freqs.size()); }
    /// Sum of the source counts, or 0 when built from raw frequencies.
    int total() const;
};

/// Density power divergence between p_hat and pi; beta = 0 is Kullback-Leibler.
double dpd_loss(const EmpiricalFrequencies& p_hat, const CellProbabilities& pi, double beta);

double kl_loss(const EmpiricalFrequencies& p_hat, const CellProbabilities& pi);

/// W^T D_pi^{beta-1} (p_hat - pi(theta)); vanishes at the MDPDE.
Eigen::Vector2d estimating_residual(const ModelParams& params, const TestPlan& plan,
                                    const EmpiricalFrequencies& p_hat, double beta);

/// d/dtheta dpd_loss(p_hat, pi(theta), beta) = -(beta + 1) * estimating_residual.
Eigen::Vector2d dpd_loss_gradient(const ModelParams& params, const TestPlan& plan,
                                  const EmpiricalFrequencies& p_hat, double beta);

}  // namespace ssalt

#include "ssalt/divergence.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace ssalt {

namespace {

void check_lengths(const EmpiricalFrequencies& p_hat, const CellProbabilities& pi) {
    if (p_hat.size() != pi.size()) {
        throw ValidationError("frequency vector has " + std::to_string(p_hat.size()) +
                              " cells but model has " + std::to_string(pi.size()));
    }
}

void check_beta(double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw ValidationError("tuning parameter beta must be finite and nonnegative");
    }
}

}  // namespace

EmpiricalFrequencies EmpiricalFrequencies::from_counts(const std::vector<int>& counts) {
    if (counts.empty()) throw ValidationError("empty count vector");
    long total = 0;
    for (int n : counts) {
        if (n < 0) throw ValidationError("negative cell count");
        total += n;
    }
    if (total == 0) throw ValidationError("count vector sums to zero");
    Eigen::VectorXd freqs(static_cast<Eigen::Index>(counts.size()));
    for (std::size_t j = 0; j < counts.size(); ++j) {
        freqs(static_cast<Eigen::Index>(j)) =
            static_cast<double>(counts[j]) / static_cast<double>(total);
    }
    return {std::move(freqs), counts};
}

EmpiricalFrequencies EmpiricalFrequencies::from_frequencies(Eigen::VectorXd freqs) {
    if (freqs.size() == 0) throw ValidationError("empty frequency vector");
    if ((freqs.array() < 0.0).any() || !freqs.allFinite()) {
        throw ValidationError("frequencies must be finite and nonnegative");
    }
    if (std::abs(freqs.sum() - 1.0) > 1e-12) {
        throw ValidationError("frequencies must sum to one");
    }
    return {std::move(freqs), std::nullopt};
}

int EmpiricalFrequencies::total() const {
    if (!source_counts) return 0;
    return std::accumulate(source_counts->begin(), source_counts->end(), 0);
}

double kl_loss(const EmpiricalFrequencies& p_hat, const CellProbabilities& pi) {
    check_lengths(p_hat, pi);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < p_hat.freqs.size(); ++j) {
        const double p = p_hat.freqs(j);
        if (p == 0.0) continue;
        if (!(pi.probs(j) > 0.0)) {
            throw NumericalError("model assigns zero probability to observed cell " +
                                 std::to_string(j + 1));
        }
        acc += p * std::log(p / pi.probs(j));
    }
    return acc;
}

double dpd_loss(const EmpiricalFrequencies& p_hat, const CellProbabilities& pi, double beta) {
    check_beta(beta);
    check_lengths(p_hat, pi);
    if (beta == 0.0) return kl_loss(p_hat, pi);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < p_hat.freqs.size(); ++j) {
        const double p = p_hat.freqs(j);
        const double q = pi.probs(j);
        const double q_beta = std::pow(q, beta);
        acc += q * q_beta - (1.0 + 1.0 / beta) * p * q_beta + std::pow(p, beta + 1.0) / beta;
    }
    return acc;
}

Eigen::Vector2d estimating_residual(const ModelParams& params, const TestPlan& plan,
                                    const EmpiricalFrequencies& p_hat, double beta) {
    check_beta(beta);
    const CellProbabilities pi = cell_probabilities(params, plan);
    check_lengths(p_hat, pi);
    const ScoreMatrix w = score_matrix(params, plan);
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    for (Eigen::Index j = 0; j < w.rows(); ++j) {
        const double q = pi.probs(j);
        if (q == 0.0 && beta < 1.0) {
            throw NumericalError("zero model probability in cell " + std::to_string(j + 1) +
                                 " makes the estimating equations singular");
        }
        acc += w.row(j).transpose() * (std::pow(q, beta - 1.0) * (p_hat.freqs(j) - q));
    }
    return acc;
}

Eigen::Vector2d dpd_loss_gradient(const ModelParams& params, const TestPlan& plan,
                                  const EmpiricalFrequencies& p_hat, double beta) {
    return -(beta + 1.0) * estimating_residual(params, plan, p_hat, beta);
}

}  // namespace ssalt

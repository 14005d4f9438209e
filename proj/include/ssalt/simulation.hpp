#pragma once

// Multinomial data generation under the model and under single-cell
// contamination, and the Monte-Carlo studies built on it.
//
// Replication r draws from the SplitMix64 stream keyed by (seed, r) at every
// grid point, and results are reduced in replication
// order, so a study's output does not depend on the number of threads.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ssalt/divergence.hpp"
#include "ssalt/hypothesis.hpp"
#include "ssalt/model.hpp"

namespace ssalt {

/// SplitMix64: a counter-based generator whose streams are cheap to derive
/// from a key. Satisfies UniformRandomBitGenerator.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    /// Independent stream for (seed, a, b).
    static SplitMix64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()();

private:
    std::uint64_t state_;
};

enum class ContaminatedCoordinate { none, theta0, theta1 };

/// One contaminated interval whose failure probability uses theta_tilde for
/// its left end point.
struct ContaminationSpec {
    std::size_t cell_index = 3;  // 1-based, 2..L
    ContaminatedCoordinate coordinate = ContaminatedCoordinate::none;
    ModelParams contaminated_params;
    double epsilon = 0.0;

    /// theta_tilde_i = (1 - epsilon) theta_i on the chosen coordinate.
    static ContaminationSpec from_rate(const ModelParams& params, std::size_t cell_index,
                                       ContaminatedCoordinate coordinate, double epsilon);
    /// 1 - theta_tilde_i / theta_i for the contaminated coordinate, 0 without contamination.
    double rate(const ModelParams& params) const;
    void validate(const ModelParams& params, const TestPlan& plan) const;
};

/// pi_j replaced by G_theta(t_j) - G_theta_tilde(t_{j-1}) in the contaminated
/// cell, then the whole vector renormalized.
CellProbabilities contaminated_probabilities(const ModelParams& params,
                                             const ContaminationSpec& spec, const TestPlan& plan);

/// One multinomial draw of N units by sequential conditional binomials.
EmpiricalFrequencies sample_counts(const CellProbabilities& probs, int n_units, SplitMix64& rng);

/// Root mean squared Euclidean error of the estimates around the truth.
double rmse(const std::vector<ModelParams>& estimates, const ModelParams& truth);

struct RmseRho {
    double rmse = 0.0;
    double rho = 0.0;
};

/// RMSE of `estimates` and rho = RMSE / RMSE_mle - 1.
RmseRho rmse_and_rho(const std::vector<ModelParams>& estimates, const ModelParams& truth,
                     const std::vector<ModelParams>& mle_estimates);

struct StudyConfig {
    std::string scenario = "study";
    TestPlan plan;
    ModelParams true_params;
    std::vector<double> betas{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    std::vector<ContaminationSpec> contamination_grid;
    int replications = 1000;
    std::uint64_t seed = 1;
    /// 0 uses every hardware thread.
    unsigned threads = 0;
    /// Largest tolerated share of non-convergent fits before the study throws.
    double max_failure_rate = 0.01;

    void validate() const;
};

struct StudyRow {
    std::string scenario;
    double beta = 0.0;
    double epsilon_or_n = 0.0;
    std::string metric;
    double value = 0.0;
    int replications = 0;
    int failures = 0;

    friend bool operator==(const StudyRow&, const StudyRow&) = default;
};

/// RMSE and rho per (beta, epsilon). The same datasets are shared by all betas.
std::vector<StudyRow> run_estimator_study(const StudyConfig& config);

/// Z-test rejection rate per (beta, epsilon) under config.true_params.
std::vector<StudyRow> run_level_power_study(const StudyConfig& config, const LinearHypothesis& hyp);

/// Rejection rate per (beta, N) with an optional fixed contamination.
std::vector<StudyRow> run_level_power_by_n(const StudyConfig& config, const LinearHypothesis& hyp,
                                           const std::vector<int>& sample_sizes,
                                           const std::optional<ContaminationSpec>& contamination);

void write_study_csv(std::ostream& out, const std::vector<StudyRow>& rows);

}  // namespace ssalt

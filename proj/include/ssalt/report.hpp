#pragma once

// JSON forms of the library's results and of simulation requests.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssalt/estimation.hpp"
#include "ssalt/hypothesis.hpp"
#include "ssalt/lifetime.hpp"
#include "ssalt/simulation.hpp"
#include "ssalt/tuning.hpp"

namespace ssalt {

nlohmann::json to_json(const FitResult& fit);
nlohmann::json to_json(const ParamIntervals& intervals);
nlohmann::json to_json(const LifetimeEstimate& est);
nlohmann::json to_json(const TuningResult& result);

/// {statistic, p_value, alpha, reject, hypothesis: {m, d}, beta, N}.
nlohmann::json test_report(const TestOutcome& outcome, const LinearHypothesis& hyp, double beta,
                           int n_units);
nlohmann::json test_report(const TestOutcome& outcome, const MatrixHypothesis& hyp, double beta,
                           int n_units);

std::string to_string(LifetimeQuantity quantity);

enum class StudyKind { estimator, level_power, level_power_by_n };

struct StudyRequest {
    StudyKind kind = StudyKind::estimator;
    StudyConfig config;
    std::optional<LinearHypothesis> hypothesis;
    std::vector<int> sample_sizes;
    std::optional<ContaminationSpec> fixed_contamination;
};

/// Reads {study, scenario, plan, true_params, betas, contamination: {cell,
/// coordinate, rates}, replications, seed, threads, hypothesis: {m, d, alpha},
/// sample_sizes}.
StudyRequest study_request_from_json(const nlohmann::json& j);
StudyRequest load_study_request(const std::string& path);
std::vector<StudyRow> run_study(const StudyRequest& request);

}  // namespace ssalt

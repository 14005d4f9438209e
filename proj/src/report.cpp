#include "ssalt/report.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ssalt/dataset.hpp"

namespace ssalt {

namespace {

using nlohmann::json;

json matrix_rows(const Eigen::Matrix2d& m) {
    return json::array({m(0, 0), m(0, 1), m(1, 0), m(1, 1)});
}

// JSON has no infinity; open upper ends are written as null.
json bound(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json interval(const Interval& i) { return json::array({bound(i.lower), bound(i.upper)}); }

ContaminatedCoordinate coordinate_from(const std::string& s) {
    if (s == "theta0") return ContaminatedCoordinate::theta0;
    if (s == "theta1") return ContaminatedCoordinate::theta1;
    if (s == "none") return ContaminatedCoordinate::none;
    throw ValidationError("contamination coordinate must be theta0, theta1 or none");
}

LinearHypothesis hypothesis_from(const json& j) {
    LinearHypothesis h;
    const auto m = j.at("m").get<std::vector<double>>();
    if (m.size() != 2) throw ValidationError("hypothesis m must have two entries");
    h.m = {m[0], m[1]};
    h.d = j.at("d").get<double>();
    h.alpha = j.value("alpha", 0.05);
    h.validate();
    return h;
}

}  // namespace

std::string to_string(LifetimeQuantity quantity) {
    switch (quantity) {
        case LifetimeQuantity::reliability: return "reliability";
        case LifetimeQuantity::quantile: return "quantile";
        case LifetimeQuantity::mean: return "mean";
    }
    return "unknown";
}

json to_json(const FitResult& fit) {
    return {{"theta0", fit.params_hat.theta0},
            {"theta1", fit.params_hat.theta1},
            {"log_theta0", fit.log_theta0()},
            {"beta", fit.beta},
            {"loss", fit.loss},
            {"residual_norm", fit.residual_norm},
            {"covariance", matrix_rows(fit.covariance)},
            {"covariance_log", matrix_rows(fit.covariance_log)},
            {"j_matrix", matrix_rows(fit.j_matrix)},
            {"k_matrix", matrix_rows(fit.k_matrix)},
            {"converged", fit.converged},
            {"iterations", fit.iterations},
            {"used_simplex", fit.used_simplex},
            {"diagnostic", fit.diagnostic}};
}

json to_json(const ParamIntervals& intervals) {
    const bool log_scale = intervals.scale == ParamScale::log_theta0;
    return {{log_scale ? "log_theta0" : "theta0", intervals.theta0_estimate},
            {log_scale ? "log_theta0_ci" : "theta0_ci", interval(intervals.theta0)},
            {"theta1", intervals.theta1_estimate},
            {"theta1_ci", interval(intervals.theta1)}};
}

json to_json(const LifetimeEstimate& est) {
    json j = {{"quantity", to_string(est.quantity)},
              {"stress", est.stress},
              {"time_or_alpha", est.quantity == LifetimeQuantity::mean ? json(nullptr)
                                                                     : json(est.time_or_alpha)},
              {"estimate", est.value},
              {"se", est.std_error},
              {"direct_ci", interval(est.direct_ci)},
              {"transformed_ci", interval(est.transformed_ci)}};
    if (est.degenerate_transform) j["warning"] = "logit transform undefined; point interval";
    return j;
}

json to_json(const TuningResult& result) {
    json trace = json::array();
    for (const TuningRound& r : result.trace) {
        trace.push_back({{"round", r.round},
                         {"pilot_log_theta0", std::log(r.pilot.theta0)},
                         {"pilot_theta1", r.pilot.theta1},
                         {"beta_star", r.beta_star},
                         {"mse_min", r.mse_min}});
    }
    return {{"beta_star", result.beta_star},
            {"rounds", result.rounds},
            {"converged", result.converged},
            {"excluded_betas", result.excluded_betas},
            {"trace", trace},
            {"fit", to_json(result.fit)}};
}

json test_report(const TestOutcome& outcome, const LinearHypothesis& hyp, double beta,
                 int n_units) {
    return {{"statistic", outcome.statistic},
            {"p_value", outcome.p_value},
            {"alpha", outcome.alpha},
            {"critical_value", outcome.critical_value},
            {"reject", outcome.reject},
            {"hypothesis", {{"m", {hyp.m(0), hyp.m(1)}}, {"d", hyp.d}}},
            {"beta", beta},
            {"N", n_units}};
}

json test_report(const TestOutcome& outcome, const MatrixHypothesis& hyp, double beta,
                 int n_units) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < hyp.m.rows(); ++r) rows.push_back({hyp.m(r, 0), hyp.m(r, 1)});
    std::vector<double> d(hyp.d.data(), hyp.d.data() + hyp.d.size());
    return {{"statistic", outcome.statistic},
            {"p_value", outcome.p_value},
            {"alpha", outcome.alpha},
            {"critical_value", outcome.critical_value},
            {"dof", outcome.dof},
            {"reject", outcome.reject},
            {"hypothesis", {{"M", rows}, {"d", d}}},
            {"beta", beta},
            {"N", n_units}};
}

StudyRequest study_request_from_json(const json& j) {
    try {
        StudyRequest req;
        const std::string kind = j.value("study", std::string("estimator"));
        if (kind == "estimator") {
            req.kind = StudyKind::estimator;
        } else if (kind == "level_power") {
            req.kind = StudyKind::level_power;
        } else if (kind == "level_power_by_n") {
            req.kind = StudyKind::level_power_by_n;
        } else {
            throw ValidationError("unknown study kind '" + kind + "'");
        }
        StudyConfig& c = req.config;
        c.scenario = j.value("scenario", kind);
        c.plan = plan_from_json(j.at("plan"));
        c.true_params = {j.at("true_params").at("theta0").get<double>(),
                         j.at("true_params").at("theta1").get<double>()};
        c.true_params.validate();
        if (j.contains("betas")) c.betas = j.at("betas").get<std::vector<double>>();
        c.replications = j.value("replications", 1000);
        c.seed = j.value("seed", std::uint64_t{1});
        c.threads = j.value("threads", 0u);
        c.max_failure_rate = j.value("max_failure_rate", 0.01);

        std::size_t cell = 3;
        ContaminatedCoordinate coordinate = ContaminatedCoordinate::none;
        std::vector<double> rates{0.0};
        if (j.contains("contamination")) {
            const json& cj = j.at("contamination");
            cell = cj.value("cell", std::size_t{3});
            coordinate = coordinate_from(cj.value("coordinate", std::string("theta0")));
            rates = cj.value("rates", std::vector<double>{0.0});
        }
        for (double eps : rates) {
            c.contamination_grid.push_back(
                ContaminationSpec::from_rate(c.true_params, cell, coordinate, eps));
        }
        if (req.kind != StudyKind::estimator) {
            if (!j.contains("hypothesis")) throw ValidationError("level/power study needs a hypothesis");
            req.hypothesis = hypothesis_from(j.at("hypothesis"));
        }
        if (req.kind == StudyKind::level_power_by_n) {
            req.sample_sizes = j.at("sample_sizes").get<std::vector<int>>();
            if (rates.size() != 1) throw ValidationError("by-N study takes a single contamination rate");
            if (coordinate != ContaminatedCoordinate::none && rates[0] > 0.0) {
                req.fixed_contamination = c.contamination_grid.front();
            }
        }
        c.validate();
        return req;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed study config: ") + e.what());
    }
}

StudyRequest load_study_request(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open study config '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    json j;
    try {
        j = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": malformed JSON: " + e.what());
    }
    return study_request_from_json(j);
}

std::vector<StudyRow> run_study(const StudyRequest& request) {
    switch (request.kind) {
        case StudyKind::estimator:
            return run_estimator_study(request.config);
        case StudyKind::level_power:
            return run_level_power_study(request.config, *request.hypothesis);
        case StudyKind::level_power_by_n:
            return run_level_power_by_n(request.config, *request.hypothesis, request.sample_sizes,
                                        request.fixed_contamination);
    }
    throw ValidationError("unknown study kind");
}

}  // namespace ssalt

// ssalt: robust estimation and testing for one-shot devices under a
// step-stress life test.
//
// Exit status: 0 on success, 2 on invalid input, 3 when an estimate cannot be
// computed (non-convergence or a numerical breakdown).

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssalt/dataset.hpp"
#include "ssalt/estimation.hpp"
#include "ssalt/hypothesis.hpp"
#include "ssalt/lifetime.hpp"
#include "ssalt/report.hpp"
#include "ssalt/robustness.hpp"
#include "ssalt/simulation.hpp"
#include "ssalt/tuning.hpp"

namespace {

using nlohmann::json;
using namespace ssalt;

constexpr int exit_validation = 2;
constexpr int exit_numerical = 3;

struct Common {
    std::string data;
    std::string beta = "0";
    double level = 0.95;
    bool json_output = false;
    std::string out;
    std::uint64_t seed = 1;
    double pilot = 0.5;
    int grid_size = 100;
    double rate = 1e-3;
};

void add_common(CLI::App& cmd, Common& c, bool needs_data) {
    auto* data = cmd.add_option("--data", c.data, "Dataset file or builtin name");
    if (needs_data) data->required();
    cmd.add_option("--beta", c.beta, "Tuning parameter, or 'auto'")->capture_default_str();
    cmd.add_option("--level", c.level, "Confidence level")->capture_default_str();
    cmd.add_flag("--json", c.json_output, "Emit JSON with full precision");
    cmd.add_option("--out", c.out, "Write the report to this file");
    cmd.add_option("--seed", c.seed, "Random seed")->capture_default_str();
    cmd.add_option("--pilot", c.pilot, "Pilot beta for --beta auto")->capture_default_str();
    cmd.add_option("--grid-size", c.grid_size, "Beta grid points for --beta auto")
        ->capture_default_str();
    cmd.add_option("--rate", c.rate, "Stopping distance for --beta auto")->capture_default_str();
}

std::string num(double x) {
    std::ostringstream s;
    s << std::setprecision(4) << x;
    return s.str();
}

std::string interval_str(const Interval& i) { return "[" + num(i.lower) + ", " + num(i.upper) + "]"; }

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw ValidationError("cannot write '" + path + "'");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

void emit_json(const Common& c, const json& j) {
    Output out(c.out);
    out.stream() << j.dump(2) << '\n';
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> values;
    std::stringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(token, &used));
            if (token.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
        } catch (const std::logic_error&) {
            throw ValidationError(what + ": '" + token + "' is not a number");
        }
    }
    if (values.empty()) throw ValidationError(what + " is empty");
    return values;
}

struct Estimate {
    FitResult fit;
    std::optional<TuningResult> tuning;
};

Estimate estimate(const Dataset& ds, const Common& c) {
    const EmpiricalFrequencies freqs = ds.frequencies();
    Estimate e;
    if (c.beta == "auto") {
        TuningConfig tc;
        tc.pilot_beta = c.pilot;
        tc.grid = TuningConfig::default_grid(c.grid_size);
        tc.convergence_rate = c.rate;
        e.tuning = select_beta(freqs, ds.plan, tc);
        e.fit = e.tuning->fit;
    } else {
        FitConfig fc;
        fc.beta = parse_list(c.beta, "--beta").at(0);
        e.fit = fit_mdpde(freqs, ds.plan, fc);
    }
    if (!e.fit.converged) throw NumericalError("fit did not converge: " + e.fit.diagnostic);
    return e;
}

json tuning_summary(const TuningResult& t) {
    json j = to_json(t);
    j.erase("fit");
    return j;
}

int cmd_fit(const Common& c) {
    const Dataset ds = load_dataset(c.data);
    const Estimate e = estimate(ds, c);
    const int n = ds.plan.n_units;
    const ParamIntervals nat = param_confidence_interval(e.fit, n, c.level, ParamScale::natural);
    const ParamIntervals lg = param_confidence_interval(e.fit, n, c.level, ParamScale::log_theta0);
    if (c.json_output) {
        json j = {{"dataset", ds.name}, {"N", n}, {"level", c.level}, {"fit", to_json(e.fit)},
                  {"intervals", {{"natural", to_json(nat)}, {"log", to_json(lg)}}}};
        if (e.tuning) j["tuning"] = tuning_summary(*e.tuning);
        emit_json(c, j);
        return 0;
    }
    Output out(c.out);
    std::ostream& os = out.stream();
    const std::string pct = num(100.0 * c.level) + "% CI";
    os << "dataset     " << ds.name << " (N = " << n << ")\n";
    os << "beta        " << num(e.fit.beta);
    if (e.tuning) os << " (selected in " << e.tuning->rounds << " rounds)";
    os << '\n';
    os << "log theta0  " << num(lg.theta0_estimate) << "  " << pct << ' ' << interval_str(lg.theta0) << '\n';
    os << "theta1      " << num(e.fit.params_hat.theta1) << "  " << pct << ' ' << interval_str(nat.theta1) << '\n';
    os << "theta0      " << num(e.fit.params_hat.theta0) << "  " << pct << ' ' << interval_str(nat.theta0) << '\n';
    os << "loss        " << num(e.fit.loss) << '\n';
    return 0;
}

struct MetricsOptions {
    std::vector<double> reliability_at;
    std::vector<double> quantile;
    bool mean = false;
    std::string stress;
    double time_scale = 1.0;
};

int cmd_metrics(const Common& c, const MetricsOptions& m) {
    const Dataset ds = load_dataset(c.data);
    if (m.reliability_at.empty() && m.quantile.empty() && !m.mean) {
        throw ValidationError("metrics needs --reliability-at, --quantile or --mean");
    }
    if (!(m.time_scale > 0.0)) throw ValidationError("--time-scale must be positive");
    const std::vector<double> stresses =
        m.stress.empty() ? std::vector<double>{ds.plan.use_stress} : parse_list(m.stress, "--stress");
    const Estimate e = estimate(ds, c);
    const int n = ds.plan.n_units;

    std::vector<LifetimeEstimate> rows;
    for (double x0 : stresses) {
        for (double t : m.reliability_at) rows.push_back(estimate_reliability(e.fit, x0, t, n, c.level));
        for (double a : m.quantile) {
            rows.push_back(rescale_time(estimate_quantile(e.fit, x0, a, n, c.level), m.time_scale));
        }
        if (m.mean) rows.push_back(rescale_time(estimate_mean(e.fit, x0, n, c.level), m.time_scale));
    }
    if (c.json_output) {
        json list = json::array();
        for (const auto& r : rows) list.push_back(to_json(r));
        json j = {{"dataset", ds.name}, {"beta", e.fit.beta}, {"level", c.level},
                  {"time_scale", m.time_scale}, {"metrics", list}};
        if (e.tuning) j["tuning"] = tuning_summary(*e.tuning);
        emit_json(c, j);
        return 0;
    }
    Output out(c.out);
    std::ostream& os = out.stream();
    os << "dataset " << ds.name << ", beta " << num(e.fit.beta) << ", level " << num(c.level) << '\n';
    for (const auto& r : rows) {
        os << std::left << std::setw(12) << to_string(r.quantity) << " x0=" << std::setw(8) << num(r.stress);
        if (r.quantity == LifetimeQuantity::reliability) os << " t=" << std::setw(8) << num(r.time_or_alpha);
        if (r.quantity == LifetimeQuantity::quantile) os << " a=" << std::setw(8) << num(r.time_or_alpha);
        if (r.quantity == LifetimeQuantity::mean) os << "   " << std::setw(8) << "";
        os << " value " << std::setw(10) << num(r.value) << " se " << std::setw(10) << num(r.std_error)
           << " direct " << interval_str(r.direct_ci) << "  transformed " << interval_str(r.transformed_ci);
        if (r.degenerate_transform) os << "  (transform undefined)";
        os << '\n';
    }
    return 0;
}

struct TestOptions {
    std::string m;
    std::optional<double> d;
    std::string big_m;
    std::string big_d;
    double alpha = 0.05;
};

int cmd_test(const Common& c, const TestOptions& t) {
    const Dataset ds = load_dataset(c.data);
    const bool matrix_form = !t.big_m.empty() || !t.big_d.empty();
    if (matrix_form == (!t.m.empty() || t.d.has_value())) {
        throw ValidationError("give either --m/--d or --M/--D");
    }
    json report;
    if (!matrix_form) {
        if (t.m.empty() || !t.d) throw ValidationError("--m and --d are both required");
        const std::vector<double> mv = parse_list(t.m, "--m");
        if (mv.size() != 2) throw ValidationError("--m needs two entries");
        LinearHypothesis hyp;
        hyp.m = {mv[0], mv[1]};
        hyp.d = *t.d;
        hyp.alpha = t.alpha;
        hyp.validate();
        const Estimate e = estimate(ds, c);
        report = test_report(z_test(e.fit, hyp, ds.plan.n_units), hyp, e.fit.beta, ds.plan.n_units);
    } else {
        if (t.big_m.empty() || t.big_d.empty()) throw ValidationError("--M and --D are both required");
        std::vector<std::vector<double>> rows;
        std::stringstream in(t.big_m);
        std::string row;
        while (std::getline(in, row, ';')) rows.push_back(parse_list(row, "--M row"));
        const std::vector<double> dv = parse_list(t.big_d, "--D");
        MatrixHypothesis hyp;
        hyp.m.resize(static_cast<Eigen::Index>(rows.size()), 2);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != 2) throw ValidationError("--M rows need two entries");
            hyp.m(static_cast<Eigen::Index>(r), 0) = rows[r][0];
            hyp.m(static_cast<Eigen::Index>(r), 1) = rows[r][1];
        }
        hyp.d = Eigen::Map<const Eigen::VectorXd>(dv.data(), static_cast<Eigen::Index>(dv.size()));
        hyp.alpha = t.alpha;
        hyp.validate();
        const Estimate e = estimate(ds, c);
        report = test_report(wald_test(e.fit, hyp, ds.plan.n_units), hyp, e.fit.beta, ds.plan.n_units);
    }
    if (c.json_output) {
        emit_json(c, report);
        return 0;
    }
    Output out(c.out);
    std::ostream& os = out.stream();
    os << "statistic " << num(report["statistic"].get<double>()) << '\n'
       << "p-value   " << num(report["p_value"].get<double>()) << '\n'
       << "critical  " << num(report["critical_value"].get<double>()) << " at alpha "
       << num(report["alpha"].get<double>()) << '\n'
       << "decision  " << (report["reject"].get<bool>() ? "reject H0" : "do not reject H0") << '\n';
    return 0;
}

int cmd_tune(const Common& c, const std::string& trace_path) {
    const Dataset ds = load_dataset(c.data);
    Common tc = c;
    tc.beta = "auto";
    const Estimate e = estimate(ds, tc);
    const TuningResult& t = *e.tuning;
    if (!trace_path.empty()) {
        std::ofstream trace(trace_path);
        if (!trace) throw ValidationError("cannot write '" + trace_path + "'");
        write_tuning_trace_csv(trace, t.trace);
    }
    if (c.json_output) {
        emit_json(c, {{"dataset", ds.name}, {"tuning", to_json(t)}});
        return 0;
    }
    Output out(c.out);
    std::ostream& os = out.stream();
    os << "beta*   " << num(t.beta_star) << (t.converged ? "" : " (round limit reached)") << '\n';
    os << "rounds  " << t.rounds << '\n';
    for (const TuningRound& r : t.trace) {
        os << "  round " << r.round << "  pilot (" << num(std::log(r.pilot.theta0)) << ", "
           << num(r.pilot.theta1) << ")  beta " << num(r.beta_star) << "  mse " << num(r.mse_min) << '\n';
    }
    if (!t.excluded_betas.empty()) os << "excluded " << t.excluded_betas.size() << " grid values\n";
    return 0;
}

struct SimulateOptions {
    std::string config;
    std::optional<int> replications;
    std::optional<unsigned> threads;
    bool seed_given = false;
};

int cmd_simulate(const Common& c, const SimulateOptions& s) {
    StudyRequest req = load_study_request(s.config);
    if (s.seed_given) req.config.seed = c.seed;
    if (s.replications) req.config.replications = *s.replications;
    if (s.threads) req.config.threads = *s.threads;
    req.config.validate();
    const std::vector<StudyRow> rows = run_study(req);
    Output out(c.out);
    if (c.json_output) {
        json list = json::array();
        for (const auto& r : rows) {
            list.push_back({{"scenario", r.scenario}, {"beta", r.beta}, {"epsilon_or_N", r.epsilon_or_n},
                            {"metric", r.metric}, {"value", r.value},
                            {"replications", r.replications}, {"failures", r.failures}});
        }
        out.stream() << list.dump(2) << '\n';
    } else {
        write_study_csv(out.stream(), rows);
    }
    return 0;
}

struct ScanOptions {
    std::string axis = "inspection";
    std::string grid;
    std::size_t level = 0;
    std::string betas = "0,0.2,0.4,0.6,0.8,1";
    std::string theta;
};

int cmd_if_scan(const Common& c, const ScanOptions& s) {
    const Dataset ds = load_dataset(c.data);
    ScanAxis axis{};
    if (s.axis == "inspection") {
        axis = ScanAxis::inspection_time;
    } else if (s.axis == "stress") {
        axis = ScanAxis::stress_level;
    } else {
        throw ValidationError("--axis must be inspection or stress");
    }
    ModelParams params;
    if (!s.theta.empty()) {
        const std::vector<double> th = parse_list(s.theta, "--theta");
        if (th.size() != 2) throw ValidationError("--theta needs theta0,theta1");
        params = {th[0], th[1]};
        params.validate();
    } else {
        Common mle = c;
        mle.beta = "0";
        params = estimate(ds, mle).fit.params_hat;
    }
    const std::vector<double> grid = parse_list(s.grid, "--grid");
    std::vector<std::pair<double, std::vector<ScanPoint>>> curves;
    for (double beta : parse_list(s.betas, "--betas")) {
        curves.emplace_back(beta, if_divergence_scan(params, ds.plan, beta, axis, grid, s.level));
    }
    Output out(c.out);
    if (c.json_output) {
        json rows = json::array();
        for (const auto& [beta, points] : curves) {
            for (const ScanPoint& p : points) {
                rows.push_back({{"beta", beta}, {"axis_value", p.axis_value},
                                {"norm_theta0_component", p.theta0_component},
                                {"norm_theta1_component", p.theta1_component}});
            }
        }
        out.stream() << rows.dump(2) << '\n';
        return 0;
    }
    out.stream() << "beta,axis_value,norm_theta0_component,norm_theta1_component\n" << std::setprecision(10);
    for (const auto& [beta, points] : curves) {
        for (const ScanPoint& p : points) {
            out.stream() << beta << ',' << p.axis_value << ',' << p.theta0_component << ','
                         << p.theta1_component << '\n';
        }
    }
    return 0;
}

int cmd_datasets(const Common& c, const std::string& show) {
    if (!show.empty()) {
        const Dataset ds = load_dataset(show);
        if (c.out.empty()) {
            std::cout << to_json(ds).dump(2) << '\n';
        } else {
            save_dataset(ds, c.out);
        }
        return 0;
    }
    Output out(c.out);
    for (const std::string& name : builtin_dataset_names()) {
        const Dataset ds = builtin_dataset(name);
        if (c.json_output) continue;
        out.stream() << std::left << std::setw(12) << name << " N=" << ds.plan.n_units << "  levels "
                     << ds.plan.levels() << "  inspections " << ds.plan.inspections() << '\n';
    }
    if (c.json_output) {
        json list = json::array();
        for (const std::string& name : builtin_dataset_names()) list.push_back(to_json(builtin_dataset(name)));
        out.stream() << list.dump(2) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust inference for one-shot devices under step-stress life testing"};
    app.require_subcommand(1);

    Common common;

    auto* fit = app.add_subcommand("fit", "Fit the model with the DPD estimator");
    add_common(*fit, common, true);

    MetricsOptions metrics_opts;
    auto* metrics = app.add_subcommand("metrics", "Reliability, quantiles and mean lifetime");
    add_common(*metrics, common, true);
    metrics->add_option("--reliability-at", metrics_opts.reliability_at, "Mission time(s)")->delimiter(',');
    metrics->add_option("--quantile", metrics_opts.quantile, "Failed fraction(s)")->delimiter(',');
    metrics->add_flag("--mean", metrics_opts.mean, "Mean lifetime");
    metrics->add_option("--stress", metrics_opts.stress, "Stress value(s); default use stress");
    metrics->add_option("--time-scale", metrics_opts.time_scale, "Divide times by this factor");

    TestOptions test_opts;
    auto* test = app.add_subcommand("test", "Wald-type test of a linear hypothesis");
    add_common(*test, common, true);
    test->add_option("--m", test_opts.m, "Hypothesis vector m1,m2");
    test->add_option("--d", test_opts.d, "Right-hand side d");
    test->add_option("--M", test_opts.big_m, "Hypothesis matrix a,b;c,d");
    test->add_option("--D", test_opts.big_d, "Right-hand side vector");
    test->add_option("--alpha", test_opts.alpha, "Significance level")->capture_default_str();

    std::string trace_path;
    auto* tune = app.add_subcommand("tune", "Data-driven choice of beta");
    add_common(*tune, common, true);
    tune->add_option("--trace", trace_path, "Write the iteration trace as CSV");

    SimulateOptions sim_opts;
    auto* simulate = app.add_subcommand("simulate", "Run a Monte-Carlo study");
    add_common(*simulate, common, false);
    simulate->add_option("--config", sim_opts.config, "Study configuration (JSON)")->required();
    simulate->add_option("--replications", sim_opts.replications, "Override the replication count");
    simulate->add_option("--threads", sim_opts.threads, "Worker threads (0 = all)");

    ScanOptions scan_opts;
    auto* scan = app.add_subcommand("if-scan", "Influence-function leverage scan");
    add_common(*scan, common, true);
    scan->add_option("--axis", scan_opts.axis, "inspection or stress")->capture_default_str();
    scan->add_option("--grid", scan_opts.grid, "Comma-separated axis values")->required();
    scan->add_option("--stress-level", scan_opts.level, "1-based level for the stress axis");
    scan->add_option("--betas", scan_opts.betas, "Comma-separated betas")->capture_default_str();
    scan->add_option("--theta", scan_opts.theta, "theta0,theta1 (default: MLE of the data)");

    std::string show;
    auto* datasets = app.add_subcommand("datasets", "List or export datasets");
    add_common(*datasets, common, false);
    datasets->add_option("--show", show, "Print (or with --out save) one dataset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_validation;
    }

    try {
        if (*fit) return cmd_fit(common);
        if (*metrics) return cmd_metrics(common, metrics_opts);
        if (*test) return cmd_test(common, test_opts);
        if (*tune) return cmd_tune(common, trace_path);
        if (*simulate) {
            sim_opts.seed_given = simulate->count("--seed") > 0;
            return cmd_simulate(common, sim_opts);
        }
        if (*scan) return cmd_if_scan(common, scan_opts);
        if (*datasets) return cmd_datasets(common, show);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

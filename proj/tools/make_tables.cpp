// Regenerates CSV versions of the parameter, mean-lifetime, reliability and
// quantile tables for the built-in datasets.
//
// usage: make_tables [output-directory]

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "ssalt/dataset.hpp"
#include "ssalt/estimation.hpp"
#include "ssalt/lifetime.hpp"
#include "ssalt/tuning.hpp"

namespace {

using namespace ssalt;

struct TableSpec {
    std::string dataset;
    std::vector<double> stresses;
    double mean_scale = 1.0;  // time unit divisor for mean lifetimes
    double mission_time = 0.0;
    double quantile_alpha = 0.1;
};

struct Row {
    std::string label;
    FitResult fit;
};

std::ofstream open_csv(const std::filesystem::path& path, const std::string& header) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << std::setprecision(10) << header << '\n';
    return out;
}

void write_lifetime(std::ofstream& out, const std::string& label, double beta,
                    const LifetimeEstimate& e) {
    out << e.stress << ',' << label << ',' << beta << ',' << e.value << ',' << e.std_error << ','
        << e.direct_ci.lower << ',' << e.direct_ci.upper << ',' << e.transformed_ci.lower << ','
        << e.transformed_ci.upper << '\n';
}

void make(const TableSpec& spec, const std::filesystem::path& dir) {
    const Dataset ds = builtin_dataset(spec.dataset);
    const EmpiricalFrequencies freqs = ds.frequencies();
    const int n = ds.plan.n_units;

    std::vector<Row> rows;
    for (double beta : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
        FitConfig fc;
        fc.beta = beta;
        rows.push_back({beta == 0.0 ? "MLE" : "fixed", fit_mdpde(freqs, ds.plan, fc)});
    }
    rows.push_back({"tuned", select_beta(freqs, ds.plan, TuningConfig{}).fit});

    auto params = open_csv(dir / (spec.dataset + "_parameters.csv"),
                           "label,beta,log_theta0,log_theta0_lo,log_theta0_hi,theta1,theta1_lo,theta1_hi");
    for (const Row& r : rows) {
        const ParamIntervals ci = param_confidence_interval(r.fit, n, 0.95, ParamScale::log_theta0);
        params << r.label << ',' << r.fit.beta << ',' << ci.theta0_estimate << ',' << ci.theta0.lower
               << ',' << ci.theta0.upper << ',' << ci.theta1_estimate << ',' << ci.theta1.lower << ','
               << ci.theta1.upper << '\n';
    }

    const std::string header = "stress,label,beta,estimate,se,direct_lo,direct_hi,transformed_lo,transformed_hi";
    auto mean = open_csv(dir / (spec.dataset + "_mean.csv"), header);
    auto rel = open_csv(dir / (spec.dataset + "_reliability.csv"), header);
    auto quant = open_csv(dir / (spec.dataset + "_quantile.csv"), header);
    for (double x0 : spec.stresses) {
        for (const Row& r : rows) {
            write_lifetime(mean, r.label, r.fit.beta,
                           rescale_time(estimate_mean(r.fit, x0, n), spec.mean_scale));
            write_lifetime(rel, r.label, r.fit.beta, estimate_reliability(r.fit, x0, spec.mission_time, n));
            write_lifetime(quant, r.label, r.fit.beta, estimate_quantile(r.fit, x0, spec.quantile_alpha, n));
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    const std::filesystem::path dir = argc > 1 ? argv[1] : "tables";
    try {
        std::filesystem::create_directories(dir);
        // Electronic times are in seconds; mean lifetimes are reported in hours.
        make({"electronic", {25.0, 100.0, 150.0}, 3600.0, 600.0, 0.1}, dir);
        make({"lightbulbs", {2.0, 2.25, 2.44}, 1.0, 50.0, 0.1}, dir);
    } catch (const std::exception& e) {
        std::cerr << "make_tables: " << e.what() << '\n';
        return 1;
    }
    std::cout << "tables written to " << dir.string() << '\n';
    return 0;
}

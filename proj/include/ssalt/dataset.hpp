#pragma once

// Binned step-stress datasets: a test plan plus the counts n_1..n_{L+1}.
//
// File format (JSON):
//   {"name": "...", "plan": {"stress_levels": [...], "change_times": [...],
//    "inspection_times": [...], "use_stress": x0, "n_units": N},
//    "counts": [n_1, ..., n_{L+1}]}
//
// Two datasets are built in:
//   electronic  Electronic components tested at 100 and 150 degrees C with the
//               stress raised at 910 s. Failure times logged at the second
//               level are measured from the stress change, so they are offset
//               by 910 before binning. Times in seconds.
//   lightbulbs  Two sets of 32 miniature bulbs at 2.25 V, raised to 2.44 V at
//               96 h and stopped at 140 h; 53 failures and 11 survivors. The
//               source listing runs "14 17.95", "41.11 42.63" and
//               "105.11 112.11" together; each pair is read as two failure
//               times. Times in hours.

#include <string>
#include <vector>

#include <json.hpp>

#include "ssalt/divergence.hpp"
#include "ssalt/model.hpp"

namespace ssalt {

struct Dataset {
    std::string name;
    TestPlan plan;
    std::vector<int> counts;

    void validate() const;
    EmpiricalFrequencies frequencies() const { return EmpiricalFrequencies::from_counts(counts); }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

std::vector<std::string> builtin_dataset_names();
bool is_builtin_dataset(const std::string& name);
Dataset builtin_dataset(const std::string& name);

/// A builtin name or a path to a dataset file.
Dataset load_dataset(const std::string& name_or_path);
/// Parses dataset JSON text; errors name the offending line.
Dataset parse_dataset(const std::string& text, const std::string& source = "<input>");
void save_dataset(const Dataset& dataset, const std::string& path);

nlohmann::json to_json(const TestPlan& plan);
TestPlan plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Dataset& dataset);
Dataset dataset_from_json(const nlohmann::json& j);

}  // namespace ssalt

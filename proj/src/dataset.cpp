#include "ssalt/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace ssalt {

namespace {

using nlohmann::json;

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the first occurrence of "key", or of the first line when absent.
std::size_t line_of_key(const std::string& text, const std::string& key) {
    const std::size_t pos = text.find('"' + key + '"');
    return pos == std::string::npos ? 1 : line_of_offset(text, pos);
}

std::vector<double> number_array(const json& j, const char* key) {
    if (!j.contains(key)) throw ValidationError(std::string("missing key '") + key + "'");
    const json& a = j.at(key);
    if (!a.is_array()) throw ValidationError(std::string("'") + key + "' must be an array");
    std::vector<double> out;
    for (const json& v : a) {
        if (!v.is_number()) throw ValidationError(std::string("'") + key + "' must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

Dataset electronic() {
    Dataset d;
    d.name = "electronic";
    d.plan.stress_levels = {100.0, 150.0};
    d.plan.change_times = {910.0, 1096.0};
    d.plan.inspection_times = {270, 430, 600, 910, 975, 1015, 1040, 1096};
    d.plan.use_stress = 25.0;
    d.plan.n_units = 100;
    d.counts = {9, 9, 5, 7, 6, 5, 4, 5, 50};
    return d;
}

Dataset lightbulbs() {
    Dataset d;
    d.name = "lightbulbs";
    d.plan.stress_levels = {2.25, 2.44};
    d.plan.change_times = {96.0, 140.0};
    d.plan.inspection_times = {25, 50, 96, 110, 120, 140};
    d.plan.use_stress = 2.0;
    d.plan.n_units = 64;
    d.counts = {8, 13, 13, 6, 4, 9, 11};
    return d;
}

}  // namespace

void Dataset::validate() const {
    plan.validate();
    if (counts.size() != plan.cells()) {
        throw ValidationError("dataset has " + std::to_string(counts.size()) +
                              " counts but the plan defines " + std::to_string(plan.cells()) +
                              " cells");
    }
    if (std::any_of(counts.begin(), counts.end(), [](int n) { return n < 0; })) {
        throw ValidationError("dataset counts must be nonnegative");
    }
    const long total = std::accumulate(counts.begin(), counts.end(), 0L);
    if (total != plan.n_units) {
        throw ValidationError("counts sum to " + std::to_string(total) + " but the plan tests " +
                              std::to_string(plan.n_units) + " units");
    }
}

std::vector<std::string> builtin_dataset_names() { return {"electronic", "lightbulbs"}; }

bool is_builtin_dataset(const std::string& name) {
    const auto names = builtin_dataset_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

Dataset builtin_dataset(const std::string& name) {
    if (name == "electronic") return electronic();
    if (name == "lightbulbs") return lightbulbs();
    throw ValidationError("unknown builtin dataset '" + name + "'");
}

json to_json(const TestPlan& plan) {
    return {{"stress_levels", plan.stress_levels},
            {"change_times", plan.change_times},
            {"inspection_times", plan.inspection_times},
            {"use_stress", plan.use_stress},
            {"n_units", plan.n_units}};
}

TestPlan plan_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("test plan must be a JSON object");
    TestPlan plan;
    plan.stress_levels = number_array(j, "stress_levels");
    plan.change_times = number_array(j, "change_times");
    plan.inspection_times = number_array(j, "inspection_times");
    if (!j.contains("use_stress") || !j.at("use_stress").is_number()) {
        throw ValidationError("missing numeric key 'use_stress'");
    }
    plan.use_stress = j.at("use_stress").get<double>();
    if (!j.contains("n_units") || !j.at("n_units").is_number_integer()) {
        throw ValidationError("missing integer key 'n_units'");
    }
    plan.n_units = j.at("n_units").get<int>();
    plan.validate();
    return plan;
}

json to_json(const Dataset& dataset) {
    return {{"name", dataset.name}, {"plan", to_json(dataset.plan)}, {"counts", dataset.counts}};
}

Dataset dataset_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("dataset must be a JSON object");
    Dataset d;
    d.name = j.value("name", std::string("dataset"));
    if (!j.contains("plan")) throw ValidationError("missing key 'plan'");
    d.plan = plan_from_json(j.at("plan"));
    if (!j.contains("counts") || !j.at("counts").is_array()) {
        throw ValidationError("missing array 'counts'");
    }
    if (j.at("counts").empty()) throw ValidationError("'counts' is empty");
    for (const json& v : j.at("counts")) {
        if (!v.is_number_integer()) throw ValidationError("'counts' must hold integers");
        d.counts.push_back(v.get<int>());
    }
    d.validate();
    return d;
}

Dataset parse_dataset(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(source + ":" + std::to_string(line_of_offset(text, e.byte)) +
                              ": malformed JSON: " + e.what());
    }
    try {
        return dataset_from_json(j);
    } catch (const ValidationError& e) {
        // Point at the key the message names, if any.
        const std::string msg = e.what();
        std::size_t line = 1;
        for (const char* key : {"counts", "stress_levels", "change_times", "inspection_times",
                                "use_stress", "n_units", "plan"}) {
            if (msg.find(key) != std::string::npos) {
                line = line_of_key(text, key);
                break;
            }
        }
        throw ValidationError(source + ":" + std::to_string(line) + ": " + msg);
    }
}

Dataset load_dataset(const std::string& name_or_path) {
    if (is_builtin_dataset(name_or_path)) return builtin_dataset(name_or_path);
    std::ifstream in(name_or_path);
    if (!in) throw ValidationError("cannot open dataset '" + name_or_path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_dataset(buffer.str(), name_or_path);
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    dataset.validate();
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write dataset to '" + path + "'");
    out << to_json(dataset).dump(2) << '\n';
}

}  // namespace ssalt

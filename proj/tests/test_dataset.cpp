#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "ssalt/dataset.hpp"
#include "support.hpp"

using namespace ssalt;

namespace {

// Failure times as listed with the light-bulb experiment, separators included.
const char* const kLightBulbListing =
    "12.07, 19.5, 22.1, 23.11, 24, 25.1, 26.9, 36.64, 44.1, 46.3, 54, 58.09, 64.17, 72.25, 86.9, "
    "90.09, 91.22, 102.1, 105.1, 109.2, 114.4, 117.9, 121.9, 122.5, 123.6, 126.5, 130.1, 14 17.95, "
    "24, 26.46, 26.58, 28.06, 34, 36.13, 40.85, 41.11 42.63, 52.51, 62.68, 73.13, 83.63, 91.56, "
    "94.38, 97.71, 101.53, 105.11 112.11, 119.58 ,120.2, 126.95, 129.25, 136.31.";

std::vector<double> parse_listing(std::string text) {
    for (char& c : text) {
        if (c == ',') c = ' ';
    }
    if (!text.empty() && text.back() == '.') text.pop_back();
    std::istringstream in(text);
    std::vector<double> out;
    for (double v; in >> v;) out.push_back(v);
    return out;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("ssalt_test_" + name);
}

}  // namespace

TEST_CASE("electronic components: counts from the failure times") {
    const std::vector<double> first{32,  54,  59,  86,  117, 123, 213, 267, 268, 273, 299, 311, 321, 333, 339,
                                    386, 408, 422, 435, 437, 476, 518, 570, 632, 666, 697, 796, 854, 858, 910};
    const std::vector<double> second{16, 19, 21, 36, 37, 63, 70, 75, 83, 95, 100, 106, 110, 113, 116, 135, 136, 149, 172, 186};
    std::vector<double> times = first;
    for (double t : second) times.push_back(910.0 + t);

    const Dataset ds = builtin_dataset("electronic");
    CHECK(oracle::bin_failures(times, ds.plan.inspection_times, 100) == ds.counts);
    CHECK(std::accumulate(ds.counts.begin(), ds.counts.end(), 0) == 100);
    CHECK(ds.counts.back() == 50);
    CHECK(ds.plan.stress_levels == std::vector<double>{100.0, 150.0});
    CHECK(ds.plan.change_times == std::vector<double>{910.0, 1096.0});
    CHECK(ds.plan.use_stress == 25.0);
}

TEST_CASE("light bulbs: counts from the failure times") {
    const std::vector<double> times = parse_listing(kLightBulbListing);
    REQUIRE(times.size() == 53);
    const Dataset ds = builtin_dataset("lightbulbs");
    CHECK(oracle::bin_failures(times, ds.plan.inspection_times, 64) == ds.counts);
    CHECK(ds.counts == std::vector<int>{8, 13, 13, 6, 4, 9, 11});
    CHECK(ds.plan.n_units == 64);
    CHECK(ds.plan.use_stress == 2.0);
}

TEST_CASE("builtin names") {
    CHECK(builtin_dataset_names() == std::vector<std::string>{"electronic", "lightbulbs"});
    CHECK(is_builtin_dataset("electronic"));
    CHECK_FALSE(is_builtin_dataset("electronic.json"));
    CHECK_THROWS_AS(builtin_dataset("bulbs"), ValidationError);
    CHECK(load_dataset("lightbulbs") == builtin_dataset("lightbulbs"));
}

TEST_CASE("property: saving and loading is the identity") {
    std::mt19937_64 rng(91);
    const auto path = temp_file("roundtrip.json");
    for (int rep = 0; rep < 200; ++rep) {
        Dataset ds;
        ds.name = "random " + std::to_string(rep);
        ds.plan = support::random_plan(rng);
        ds.plan.stress_levels[0] += 1e-9 * static_cast<double>(rng() % 1000);
        ds.counts = support::expected_counts(cell_probabilities(support::random_params(rng, ds.plan), ds.plan),
                                             ds.plan.n_units);
        ds.plan.n_units = std::accumulate(ds.counts.begin(), ds.counts.end(), 0);
        save_dataset(ds, path.string());
        REQUIRE(load_dataset(path.string()) == ds);
        REQUIRE(parse_dataset(to_json(ds).dump()) == ds);
    }
    for (const std::string& name : builtin_dataset_names()) {
        save_dataset(builtin_dataset(name), path.string());
        CHECK(load_dataset(path.string()) == builtin_dataset(name));
    }
    std::filesystem::remove(path);
}

TEST_CASE("parse errors name the offending line") {
    auto message = [](const std::string& text) {
        try {
            parse_dataset(text, "data.json");
        } catch (const ValidationError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    const std::string plan =
        "{\n"
        "  \"plan\": {\"stress_levels\": [1, 2], \"change_times\": [5, 9],\n"
        "           \"inspection_times\": [5, 9], \"use_stress\": 0.5, \"n_units\": 10},\n";

    const std::string empty = message(plan + "  \"counts\": []\n}\n");
    CHECK(empty.find("data.json:4") != std::string::npos);
    CHECK(empty.find("empty") != std::string::npos);

    const std::string short_counts = message(plan + "  \"counts\": [3, 7]\n}\n");
    CHECK(short_counts.find("data.json:") != std::string::npos);
    CHECK(short_counts.find("3 cells") != std::string::npos);

    const std::string wrong_sum = message(plan + "  \"counts\": [3, 3, 3]\n}\n");
    CHECK(wrong_sum.find("sum to 9") != std::string::npos);

    const std::string syntax = message(plan + "  \"counts\": [3, 3,, 4]\n}\n");
    CHECK(syntax.find("data.json:4") != std::string::npos);

    const std::string non_integer = message(plan + "  \"counts\": [3, 3.5, 3.5]\n}\n");
    CHECK(non_integer.find("integers") != std::string::npos);

    CHECK(message("") .find("data.json:1") != std::string::npos);
    CHECK(message(plan + "  \"counts\": [3, 3, 4]\n}\n") == "no error");
    CHECK_THROWS_AS(load_dataset(temp_file("missing.json").string()), ValidationError);
}

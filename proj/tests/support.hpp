#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ssalt/dataset.hpp"
#include "ssalt/model.hpp"

namespace support {

// A random valid plan: k levels, every change time an inspection, and a few
// extra inspections in between.
inline ssalt::TestPlan random_plan(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> levels(1, 4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ssalt::TestPlan plan;
    const int k = levels(rng);
    double x = 10.0 + 40.0 * unit(rng);
    double tau = 0.0;
    for (int i = 0; i < k; ++i) {
        plan.stress_levels.push_back(x);
        x += 1.0 + 20.0 * unit(rng);
        const double next = tau + 5.0 + 50.0 * unit(rng);
        const int extra = static_cast<int>(3.0 * unit(rng));
        for (int e = 1; e <= extra; ++e) plan.inspection_times.push_back(tau + (next - tau) * e / (extra + 1.0));
        plan.inspection_times.push_back(next);
        plan.change_times.push_back(next);
        tau = next;
    }
    plan.use_stress = plan.stress_levels.front() - 5.0;
    plan.n_units = 100;
    return plan;
}

// Parameters giving moderate failure probabilities over the plan.
inline ssalt::ModelParams random_params(std::mt19937_64& rng, const ssalt::TestPlan& plan) {
    std::uniform_real_distribution<double> t1(-0.05, 0.08);
    std::uniform_real_distribution<double> total(0.3, 3.0);
    const double theta1 = t1(rng);
    const double rate_scale = std::exp(theta1 * plan.stress_levels.back());
    const double theta0 = total(rng) / (plan.change_times.back() * rate_scale);
    return {theta0, theta1};
}

inline std::vector<int> expected_counts(const ssalt::CellProbabilities& pi, int n) {
    std::vector<int> counts;
    int used = 0;
    for (std::size_t j = 0; j + 1 < pi.size(); ++j) {
        counts.push_back(static_cast<int>(std::lround(pi[j] * n)));
        used += counts.back();
    }
    counts.push_back(std::max(0, n - used));
    return counts;
}

}  // namespace support

#include "ssalt/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

#include "ssalt/estimation.hpp"

namespace ssalt {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Runs task(i) for i in [0, n) on up to `threads` workers; rethrows the first
// exception after all workers stop.
template <class Task>
void parallel_for(std::size_t n, unsigned threads, const Task& task) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                task(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = n;
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
}

// Fits of every beta on one simulated dataset.
struct Replicate {
    std::vector<ModelParams> estimates;
    std::vector<char> converged;
    std::vector<char> rejected;
};

// Replication r draws from the stream (seed, r) at every grid point, so
// neighbouring grid points see common random numbers.
Replicate replicate(const StudyConfig& config, const CellProbabilities& probs, int n_units,
                    std::uint64_t rep, const LinearHypothesis* hyp) {
    SplitMix64 rng = SplitMix64::stream(config.seed, rep, 0);
    TestPlan plan = config.plan;
    plan.n_units = n_units;
    const EmpiricalFrequencies counts = sample_counts(probs, n_units, rng);
    Replicate out;
    for (double beta : config.betas) {
        FitConfig fc;
        fc.beta = beta;
        const FitResult fit = fit_mdpde(counts, plan, fc);
        bool ok = fit.converged;
        bool reject = false;
        if (ok && hyp) {
            try {
                reject = z_test(fit, *hyp, n_units).reject;
            } catch (const NumericalError&) {
                ok = false;
            }
        }
        out.estimates.push_back(fit.params_hat);
        out.converged.push_back(ok);
        out.rejected.push_back(reject);
    }
    return out;
}

std::vector<Replicate> replicate_all(const StudyConfig& config, const CellProbabilities& probs,
                                     int n_units, const LinearHypothesis* hyp) {
    std::vector<Replicate> reps(static_cast<std::size_t>(config.replications));
    parallel_for(reps.size(), config.threads, [&](std::size_t r) {
        reps[r] = replicate(config, probs, n_units, r, hyp);
    });
    return reps;
}

class FailureBudget {
public:
    explicit FailureBudget(double max_rate) : max_rate_(max_rate) {}
    void add(int fits, int failures) {
        fits_ += fits;
        failures_ += failures;
    }
    void check(const std::string& scenario) const {
        if (fits_ > 0 && static_cast<double>(failures_) > max_rate_ * static_cast<double>(fits_)) {
            throw NumericalError("study '" + scenario + "': " + std::to_string(failures_) + " of " +
                                 std::to_string(fits_) + " fits did not converge");
        }
    }

private:
    double max_rate_;
    long fits_ = 0;
    long failures_ = 0;
};

std::vector<StudyRow> rejection_rows(const StudyConfig& config, const std::vector<Replicate>& reps,
                                     double axis_value, FailureBudget& budget) {
    std::vector<StudyRow> rows;
    for (std::size_t b = 0; b < config.betas.size(); ++b) {
        int used = 0, failures = 0, rejections = 0;
        for (const Replicate& rep : reps) {
            if (!rep.converged[b]) {
                ++failures;
                continue;
            }
            ++used;
            rejections += rep.rejected[b];
        }
        budget.add(static_cast<int>(reps.size()), failures);
        const double rate = used > 0 ? static_cast<double>(rejections) / used : std::nan("");
        rows.push_back({config.scenario, config.betas[b], axis_value, "rejection_rate", rate,
                        used, failures});
    }
    return rows;
}

}  // namespace

SplitMix64 SplitMix64::stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t key = mix64(seed + kGolden);
    key = mix64(key ^ (a + kGolden));
    key = mix64(key ^ (b + 2 * kGolden));
    return SplitMix64(key);
}

SplitMix64::result_type SplitMix64::operator()() {
    state_ += kGolden;
    return mix64(state_);
}

ContaminationSpec ContaminationSpec::from_rate(const ModelParams& params, std::size_t cell_index,
                                               ContaminatedCoordinate coordinate, double epsilon) {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
        throw ValidationError("contamination rate must lie in [0, 1)");
    }
    ContaminationSpec spec;
    spec.cell_index = cell_index;
    spec.coordinate = coordinate;
    spec.epsilon = epsilon;
    spec.contaminated_params = params;
    if (coordinate == ContaminatedCoordinate::theta0) {
        spec.contaminated_params.theta0 *= 1.0 - epsilon;
    } else if (coordinate == ContaminatedCoordinate::theta1) {
        spec.contaminated_params.theta1 *= 1.0 - epsilon;
    }
    return spec;
}

double ContaminationSpec::rate(const ModelParams& params) const {
    switch (coordinate) {
        case ContaminatedCoordinate::theta0:
            return 1.0 - contaminated_params.theta0 / params.theta0;
        case ContaminatedCoordinate::theta1:
            return params.theta1 == 0.0 ? 0.0 : 1.0 - contaminated_params.theta1 / params.theta1;
        case ContaminatedCoordinate::none:
            break;
    }
    return 0.0;
}

void ContaminationSpec::validate(const ModelParams& params, const TestPlan& plan) const {
    if (cell_index < 2 || cell_index > plan.inspections()) {
        throw ValidationError("contaminated cell must lie in 2.." + std::to_string(plan.inspections()));
    }
    contaminated_params.validate();
    if (contaminated_params.theta0 > params.theta0 || contaminated_params.theta1 > params.theta1) {
        throw ValidationError("contaminated parameters must not exceed the true ones");
    }
}

CellProbabilities contaminated_probabilities(const ModelParams& params,
                                             const ContaminationSpec& spec, const TestPlan& plan) {
    spec.validate(params, plan);
    CellProbabilities pi = cell_probabilities(params, plan);
    if (spec.contaminated_params.theta0 == params.theta0 &&
        spec.contaminated_params.theta1 == params.theta1) {
        return pi;
    }
    const std::size_t j = spec.cell_index;
    const double left = reliability(spec.contaminated_params, plan, plan.inspection_times[j - 2]);
    const double right = reliability(params, plan, plan.inspection_times[j - 1]);
    const double cell = left - right;
    if (!(cell > 0.0)) throw NumericalError("contaminated cell probability is not positive");
    pi.probs(static_cast<Eigen::Index>(j - 1)) = cell;
    pi.probs /= pi.probs.sum();
    return pi;
}

EmpiricalFrequencies sample_counts(const CellProbabilities& probs, int n_units, SplitMix64& rng) {
    if (n_units < 1) throw ValidationError("sample size must be positive");
    const std::size_t cells = probs.size();
    std::vector<int> counts(cells, 0);
    int remaining = n_units;
    double mass = 1.0;
    for (std::size_t j = 0; j + 1 < cells && remaining > 0; ++j) {
        const double p = mass > 0.0 ? std::clamp(probs[j] / mass, 0.0, 1.0) : 1.0;
        std::binomial_distribution<int> draw(remaining, p);
        counts[j] = draw(rng);
        remaining -= counts[j];
        mass -= probs[j];
    }
    counts[cells - 1] += remaining;
    return EmpiricalFrequencies::from_counts(counts);
}

double rmse(const std::vector<ModelParams>& estimates, const ModelParams& truth) {
    if (estimates.empty()) throw ValidationError("RMSE needs at least one estimate");
    double acc = 0.0;
    for (const ModelParams& e : estimates) acc += (e.vec() - truth.vec()).squaredNorm();
    return std::sqrt(acc / static_cast<double>(estimates.size()));
}

RmseRho rmse_and_rho(const std::vector<ModelParams>& estimates, const ModelParams& truth,
                     const std::vector<ModelParams>& mle_estimates) {
    const double r = rmse(estimates, truth);
    const double r0 = rmse(mle_estimates, truth);
    if (!(r0 > 0.0)) throw NumericalError("RMSE of the MLE is zero; rho is undefined");
    return {r, r / r0 - 1.0};
}

void StudyConfig::validate() const {
    plan.validate();
    true_params.validate();
    if (betas.empty()) throw ValidationError("study needs at least one beta");
    for (double b : betas) {
        if (!(b >= 0.0) || !std::isfinite(b)) throw ValidationError("betas must be nonnegative");
    }
    if (replications < 1) throw ValidationError("study needs at least one replication");
    for (const ContaminationSpec& spec : contamination_grid) spec.validate(true_params, plan);
    if (!(max_failure_rate >= 0.0 && max_failure_rate <= 1.0)) {
        throw ValidationError("failure budget must lie in [0, 1]");
    }
}

std::vector<StudyRow> run_estimator_study(const StudyConfig& config) {
    config.validate();
    const auto mle = std::find(config.betas.begin(), config.betas.end(), 0.0);
    if (mle == config.betas.end()) throw ValidationError("estimator study needs beta = 0 for rho");
    const auto mle_index = static_cast<std::size_t>(mle - config.betas.begin());
    FailureBudget budget(config.max_failure_rate);
    std::vector<StudyRow> rows;
    for (std::size_t g = 0; g < config.contamination_grid.size(); ++g) {
        const ContaminationSpec& spec = config.contamination_grid[g];
        const CellProbabilities probs = contaminated_probabilities(config.true_params, spec, config.plan);
        const auto reps = replicate_all(config, probs, config.plan.n_units, nullptr);
        const double eps = spec.rate(config.true_params);
        // Replications where the MLE failed are dropped for every beta so rho
        // compares estimators on the same datasets.
        std::vector<ModelParams> mle_estimates;
        for (const Replicate& rep : reps) {
            if (rep.converged[mle_index]) mle_estimates.push_back(rep.estimates[mle_index]);
        }
        if (mle_estimates.empty()) throw NumericalError("no MLE fit converged in study");
        for (std::size_t b = 0; b < config.betas.size(); ++b) {
            std::vector<ModelParams> est, paired_mle;
            int failures = 0;
            for (const Replicate& rep : reps) {
                if (!rep.converged[b]) ++failures;
                if (!rep.converged[b] || !rep.converged[mle_index]) continue;
                est.push_back(rep.estimates[b]);
                paired_mle.push_back(rep.estimates[mle_index]);
            }
            budget.add(static_cast<int>(reps.size()), failures);
            if (est.empty()) throw NumericalError("no fit converged for a beta in the study");
            const RmseRho m = rmse_and_rho(est, config.true_params, paired_mle);
            const int used = static_cast<int>(est.size());
            rows.push_back({config.scenario, config.betas[b], eps, "rmse", m.rmse, used, failures});
            rows.push_back({config.scenario, config.betas[b], eps, "rho", m.rho, used, failures});
        }
        budget.check(config.scenario);
    }
    return rows;
}

std::vector<StudyRow> run_level_power_study(const StudyConfig& config, const LinearHypothesis& hyp) {
    config.validate();
    hyp.validate();
    FailureBudget budget(config.max_failure_rate);
    std::vector<StudyRow> rows;
    for (std::size_t g = 0; g < config.contamination_grid.size(); ++g) {
        const ContaminationSpec& spec = config.contamination_grid[g];
        const CellProbabilities probs = contaminated_probabilities(config.true_params, spec, config.plan);
        const auto reps = replicate_all(config, probs, config.plan.n_units, &hyp);
        const auto part = rejection_rows(config, reps, spec.rate(config.true_params), budget);
        rows.insert(rows.end(), part.begin(), part.end());
        budget.check(config.scenario);
    }
    return rows;
}

std::vector<StudyRow> run_level_power_by_n(const StudyConfig& config, const LinearHypothesis& hyp,
                                           const std::vector<int>& sample_sizes,
                                           const std::optional<ContaminationSpec>& contamination) {
    config.validate();
    hyp.validate();
    if (sample_sizes.empty()) throw ValidationError("study needs at least one sample size");
    const CellProbabilities probs =
        contamination ? contaminated_probabilities(config.true_params, *contamination, config.plan)
                      : cell_probabilities(config.true_params, config.plan);
    FailureBudget budget(config.max_failure_rate);
    std::vector<StudyRow> rows;
    for (std::size_t g = 0; g < sample_sizes.size(); ++g) {
        if (sample_sizes[g] < 1) throw ValidationError("sample sizes must be positive");
        const auto reps = replicate_all(config, probs, sample_sizes[g], &hyp);
        const auto part = rejection_rows(config, reps, sample_sizes[g], budget);
        rows.insert(rows.end(), part.begin(), part.end());
        budget.check(config.scenario);
    }
    return rows;
}

void write_study_csv(std::ostream& out, const std::vector<StudyRow>& rows) {
    out << "scenario,beta,epsilon_or_N,metric,value,replications,failures\n";
    const auto old_precision = out.precision(10);
    for (const StudyRow& r : rows) {
        out << r.scenario << ',' << r.beta << ',' << r.epsilon_or_n << ',' << r.metric << ','
            << r.value << ',' << r.replications << ',' << r.failures << '\n';
    }
    out.precision(old_precision);
}

}  // namespace ssalt

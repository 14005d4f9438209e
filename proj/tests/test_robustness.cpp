#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/LU>

#include "oracles.hpp"
#include "ssalt/estimation.hpp"
#include "ssalt/robustness.hpp"
#include "support.hpp"

using namespace ssalt;

TEST_CASE("influence function averages to zero under the model") {
    std::mt19937_64 rng(51);
    for (int rep = 0; rep < 200; ++rep) {
        const TestPlan plan = support::random_plan(rng);
        const ModelParams th = support::random_params(rng, plan);
        const CellProbabilities pi = cell_probabilities(th, plan);
        if (plan.levels() < 2 || pi.probs.minCoeff() < 1e-8) continue;
        for (double beta : {0.0, 0.3, 1.0}) {
            Eigen::Vector2d avg = Eigen::Vector2d::Zero();
            Eigen::Vector2d scale = Eigen::Vector2d::Zero();
            for (std::size_t c = 1; c <= plan.cells(); ++c) {
                const Eigen::Vector2d v = if_estimator({c}, th, plan, beta);
                avg += pi[c - 1] * v;
                scale += pi[c - 1] * v.cwiseAbs();
            }
            REQUIRE(std::abs(avg(0)) <= 1e-10 * scale(0));
            REQUIRE(std::abs(avg(1)) <= 1e-10 * scale(1));
        }
    }
}

TEST_CASE("property: refitting a contaminated model reproduces the influence function") {
    std::mt19937_64 rng(52);
    const double eps = 1e-4;
    int scenarios = 0;
    while (scenarios < 20) {
        const TestPlan plan = support::random_plan(rng);
        const ModelParams th = support::random_params(rng, plan);
        const CellProbabilities pi = cell_probabilities(th, plan);
        if (plan.levels() < 2 || pi.probs.minCoeff() < 1e-3) continue;
        ++scenarios;
        const std::size_t cell = 1 + static_cast<std::size_t>(rng() % plan.cells());
        for (double beta : {0.0, 0.5}) {
            FitConfig fc;
            fc.beta = beta;
            fc.initial_params = th;
            fc.gradient_tolerance = 1e-12;
            Eigen::VectorXd mixed = (1.0 - eps) * pi.probs;
            mixed(static_cast<Eigen::Index>(cell - 1)) += eps;
            const FitResult f = fit_mdpde(EmpiricalFrequencies::from_frequencies(mixed), plan, fc);
            INFO(f.diagnostic);
            REQUIRE(f.converged);
            const Eigen::Vector2d fd((f.params_hat.theta0 - th.theta0) / eps,
                                     (f.params_hat.theta1 - th.theta1) / eps);
            const Eigen::Vector2d ifv = if_estimator({cell}, th, plan, beta);
            // theta1 is compared on the theta0 scale of the same direction, so
            // a component that is nearly zero does not blow up the ratio.
            const Eigen::Vector2d weight(1.0 / th.theta0, 1.0);
            CHECK((fd - ifv).cwiseProduct(weight).norm() < 1e-2 * ifv.cwiseProduct(weight).norm());
        }
    }
}

TEST_CASE("vertical outliers have finite influence") {
    const TestPlan plan = oracle::simulation_plan();
    const ModelParams th = oracle::simulation_params();
    for (double beta : {0.0, 1.0}) {
        const Eigen::Vector2d v = if_estimator({3}, th, plan, beta);
        CHECK(std::isfinite(v(0)));
        CHECK(std::isfinite(v(1)));
    }
    CHECK_THROWS_AS(if_estimator({0}, th, plan, 0.0), ValidationError);
    CHECK_THROWS_AS(if_estimator({plan.cells() + 1}, th, plan, 0.0), ValidationError);
}

TEST_CASE("test influence: hand composition and linearity") {
    const TestPlan plan = oracle::simulation_plan();
    const ModelParams th = oracle::simulation_params();
    const double beta = 0.5;
    LinearHypothesis hyp;
    hyp.m = {0.0, 1.0};
    hyp.d = 0.03;

    // Independent re-coding of J, K and the IF from the oracle cells.
    const auto cells = [&](double t0, double t1) {
        const auto p = oracle::cells(t0, t1, plan);
        return Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size())).eval();
    };
    const Eigen::VectorXd pi = cells(th.theta0, th.theta1);
    Eigen::MatrixXd w(pi.size(), 2);
    const double h0 = 1e-6 * th.theta0, h1 = 1e-6;
    w.col(0) = (cells(th.theta0 + h0, th.theta1) - cells(th.theta0 - h0, th.theta1)) / (2 * h0);
    w.col(1) = (cells(th.theta0, th.theta1 + h1) - cells(th.theta0, th.theta1 - h1)) / (2 * h1);
    const Eigen::VectorXd pb = pi.array().pow(beta);
    const Eigen::Matrix2d j = w.transpose() * pi.array().pow(beta - 1.0).matrix().asDiagonal() * w;
    const Eigen::Matrix2d k =
        w.transpose() * (Eigen::MatrixXd(pi.array().pow(2 * beta - 1.0).matrix().asDiagonal()) - pb * pb.transpose()) * w;
    const Eigen::Matrix2d sigma = j.inverse() * k * j.inverse();
    Eigen::VectorXd r = -pi;
    r(2) += 1.0;
    const Eigen::Vector2d ifv = j.inverse() * (w.transpose() * pi.array().pow(beta - 1.0).matrix().cwiseProduct(r));
    const double expected = std::sqrt(180.0 / hyp.m.dot(sigma * hyp.m)) * hyp.m.dot(ifv);

    const double got = if_ztest({3}, th, plan, beta, hyp, 180);
    CHECK(got == doctest::Approx(expected).epsilon(1e-5).scale(0));

    LinearHypothesis scaled = hyp;
    scaled.m *= 3.0;
    scaled.d *= 3.0;
    CHECK(if_ztest({3}, th, plan, beta, scaled, 180) == doctest::Approx(got).epsilon(1e-12).scale(0));

    const Eigen::Vector2d v = if_estimator({3}, th, plan, beta);
    LinearHypothesis orth = hyp;
    orth.m = {v(1), -v(0)};
    CHECK(std::abs(if_ztest({3}, th, plan, beta, orth, 180)) < 1e-9 * std::abs(got));

    for (const Eigen::Vector2d& m : {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(-200.0, 1.0)}) {
        LinearHypothesis h = hyp;
        h.m = m;
        const double ratio = if_ztest({3}, th, plan, beta, h, 180) / m.dot(v);
        CHECK(ratio == doctest::Approx(std::sqrt(180.0 / m.dot(sandwich(info_matrices(th, plan, beta)) * m)))
                           .epsilon(1e-12)
                           .scale(0));
    }
}

namespace {

double max_over(const std::vector<ScanPoint>& pts, double lo, double hi, int component) {
    double m = 0.0;
    for (const ScanPoint& p : pts) {
        if (p.axis_value >= lo && p.axis_value <= hi) {
            m = std::max(m, component == 0 ? p.theta0_component : p.theta1_component);
        }
    }
    return m;
}

std::vector<double> log_grid(double lo, double hi, int per_decade) {
    std::vector<double> g;
    const int n = static_cast<int>(std::round(std::log10(hi / lo) * per_decade));
    for (int i = 0; i <= n; ++i) g.push_back(lo * std::pow(10.0, static_cast<double>(i) / per_decade));
    return g;
}

}  // namespace

TEST_CASE("inspection-time scan: unbounded for the MLE, bounded otherwise") {
    const TestPlan plan = oracle::simulation_plan();
    const ModelParams th = oracle::simulation_params();
    const auto grid = log_grid(1e3, 1e6, 10);
    const auto mle = if_divergence_scan(th, plan, 0.0, ScanAxis::inspection_time, grid);
    for (int c = 0; c < 2; ++c) {
        for (double decade = 1e3; decade < 1e6; decade *= 10.0) {
            CHECK(max_over(mle, decade * 10.0 * 0.999, decade * 10.0 * 1.001, c) >
                  10.0 * max_over(mle, decade * 0.999, decade * 1.001, c));
        }
    }
    const auto& last = mle.back();
    CHECK(std::hypot(last.theta0_component, last.theta1_component) > 1e6);
    for (double beta : {0.2, 0.4, 0.6, 0.8, 1.0}) {
        const auto curve = if_divergence_scan(th, plan, beta, ScanAxis::inspection_time, grid);
        for (int c = 0; c < 2; ++c) {
            for (std::size_t i = 1; i < curve.size(); ++i) {
                const double prev = c == 0 ? curve[i - 1].theta0_component : curve[i - 1].theta1_component;
                const double cur = c == 0 ? curve[i].theta0_component : curve[i].theta1_component;
                CHECK((cur < prev || prev == 0.0));
            }
            CHECK(max_over(curve, 1e3, 1e6, c) == (c == 0 ? curve[0].theta0_component : curve[0].theta1_component));
        }
        const auto full = if_divergence_scan(th, plan, beta, ScanAxis::inspection_time, log_grid(100.0, 1e6, 10));
        for (const ScanPoint& p : full) {
            REQUIRE(std::isfinite(p.theta0_component));
            REQUIRE(std::isfinite(p.theta1_component));
        }
    }
}

TEST_CASE("stress scan: the MLE grows with the stress, beta > 0 decays") {
    const TestPlan plan = oracle::simulation_plan();
    const ModelParams th = oracle::simulation_params();
    std::vector<double> grid;
    for (double x = 50.0; x <= 500.0; x += 10.0) grid.push_back(x);
    const auto mle = if_divergence_scan(th, plan, 0.0, ScanAxis::stress_level, grid, 2);
    const auto robust = if_divergence_scan(th, plan, 0.5, ScanAxis::stress_level, grid, 2);
    CHECK(mle.back().theta1_component > 1e5 * mle.front().theta1_component);
    CHECK(mle.back().theta0_component > 1e8);
    CHECK(robust.back().theta1_component < 1e-6 * robust.front().theta1_component);
    CHECK(robust.back().theta0_component < 1e-6 * robust.front().theta0_component);
}

TEST_CASE("scan with a flat stress response") {
    const TestPlan plan = oracle::simulation_plan();
    const ModelParams flat{0.003, 0.0};
    const auto a = if_divergence_scan(flat, plan, 0.5, ScanAxis::stress_level, {40.0, 400.0}, 2);
    CHECK(a[0].theta0_component == doctest::Approx(a[1].theta0_component).epsilon(1e-12));
    const auto b = if_divergence_scan(flat, plan, 0.0, ScanAxis::inspection_time, {70.5, 1000.0});
    CHECK(std::isfinite(b[0].theta0_component));
    CHECK_THROWS_AS(if_divergence_scan(flat, plan, 0.0, ScanAxis::inspection_time, {100.0, 80.0}),
                    ValidationError);
    CHECK_THROWS_AS(if_divergence_scan(flat, plan, 0.0, ScanAxis::inspection_time, {55.0}), ValidationError);
}

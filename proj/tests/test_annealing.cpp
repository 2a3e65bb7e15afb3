#include "support.hpp"

#include "ztot/annealing.hpp"
#include "ztot/errors.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace ztot;
using namespace ztot::testing;

TEST_CASE("schedules") {
    CHECK(default_schedule(16.0, 2.0).betas() == std::vector<double>{1, 2, 4, 8, 16});
    CHECK(default_schedule(10.0, 2.0).betas() == std::vector<double>{1, 2, 4, 8, 10});
    CHECK(default_schedule().betas().back() == 16384.0);
    CHECK(default_schedule().size() == 15);

    CHECK_THROWS_AS(Schedule({1.0, 1.0}), ArgumentError);
    CHECK_THROWS_AS(Schedule({2.0, 1.0}), ArgumentError);
    CHECK_THROWS_AS(Schedule({}), ArgumentError);
    CHECK_THROWS_AS(Schedule({1e-7, 1.0}), ArgumentError);
    CHECK_THROWS_AS(Schedule({1.0, 2e7}), ArgumentError);
    CHECK_THROWS_AS(default_schedule(16.0, 1.0), ArgumentError);
    CHECK_THROWS_AS(default_schedule(1.0, 3.0), ArgumentError);
}

TEST_CASE("constant cost: zero excess at every beta") {
    const auto prob = constant_cost(3, 4, 2.5);
    const auto traj = anneal(prob, default_schedule(1024.0));
    CHECK(traj.mAExact);
    CHECK(traj.mA == doctest::Approx(-2.5).epsilon(1e-14));
    for (const auto& r : traj.records) {
        CHECK(std::abs(r.pressure + 2.5 * r.beta) <= 1e-9 * r.beta);
        CHECK(std::abs(r.excess) <= 1e-9 * r.beta);
        CHECK(std::abs(r.entropy) <= 1e-12);
    }
}

TEST_CASE("two-point identity cost: closed-form pressure") {
    // phi = psi = const by symmetry, so P = log((1 + exp(-beta)) / 2).
    const auto prob = identity_cost_2x2();
    const auto traj = anneal(prob, default_schedule(4096.0));
    CHECK(traj.mA == 0.0);
    for (const auto& r : traj.records) {
        const double expected = std::log1p(std::exp(-r.beta)) - std::log(2.0);
        CHECK(r.pressure == doctest::Approx(expected).epsilon(1e-12));
        CHECK(r.excess == doctest::Approx(expected).epsilon(1e-12));
    }

    const auto limit = extract_limit(prob, traj);
    CHECK(limit.converged);
    CHECK(limit.entropyConsistent);
    CHECK(limit.hMaxEstimate == doctest::Approx(-std::log(2.0)).epsilon(1e-9));
    CHECK(limit.plan(0, 0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(limit.plan(0, 1) < 1e-300);
    // Limit potentials are admissible and tight on the diagonal.
    for (int i = 0; i < 2; ++i) {
        CHECK(limit.phi[i] + limit.psi[i] == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("separable cost: product plan all the way down") {
    std::mt19937_64 rng(83);
    const auto base = random_problem(rng, 3, 3);
    Vector u(3), v(3);
    u << 0.1, 0.5, 0.2;
    v << 0.3, 0.0, 0.9;
    const Matrix c = u.replicate(1, 3) + v.transpose().replicate(3, 1);
    const TransportProblem prob(base.x, base.y, base.mu, base.nu, c);
    const double alpha = u.dot(prob.mu.weights()) + v.dot(prob.nu.weights());
    const auto traj = anneal(prob, default_schedule(2048.0));
    CHECK(traj.mA == doctest::Approx(-alpha).epsilon(1e-13));
    for (const auto& r : traj.records) {
        CHECK(std::abs(r.excess) <= 1e-9 * r.beta);
        CHECK((r.plan.p() - product_plan(prob.mu, prob.nu).p()).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("excess is non-increasing and bounded by the entropy") {
    std::mt19937_64 rng(89);
    for (int trial = 0; trial < 5; ++trial) {
        const auto prob = random_problem(rng, 4, 4);
        const auto traj = anneal(prob, default_schedule(8192.0));
        const auto column = pressure_excess(traj);
        REQUIRE(column.size() == traj.records.size());
        for (std::size_t k = 1; k < column.size(); ++k) {
            CHECK(column[k].excess <= column[k - 1].excess + 1e-9);
        }
        for (const auto& r : traj.records) {
            CHECK(r.excess <= 0.0 + 1e-9);
            CHECK(r.excess <= r.entropy + 1e-9);
            CHECK(r.cost >= -traj.mA - 1e-12);
        }
        CHECK(traj.records.front().maxPhiDelta == 0.0);
        const auto limit = extract_limit(prob, traj);
        CHECK(limit.converged);
        const auto oracle = exact_ot(prob.mu, prob.nu, prob.cost.c());
        CHECK(linear_cost(limit.plan, prob.cost.c()) - oracle.alpha <= 1e-3);
    }
}

TEST_CASE("warm starts are used after the first beta") {
    std::mt19937_64 rng(97);
    const auto prob = random_problem(rng, 5, 3);
    const auto traj = anneal(prob, default_schedule(64.0));
    CHECK_FALSE(traj.records.front().report.warmStarted);
    for (std::size_t k = 1; k < traj.records.size(); ++k) {
        CHECK(traj.records[k].report.warmStarted);
        CHECK_FALSE(traj.records[k].report.warmStartAbandoned);
    }
}

TEST_CASE("beyond the oracle cap m(A) is a dual bound") {
    std::mt19937_64 rng(101);
    const auto prob = random_problem(rng, 4, 4);
    AnnealOptions narrow;
    narrow.oracle.maxVertexNodes = 6;
    const auto traj = anneal(prob, default_schedule(1024.0), narrow);
    CHECK_FALSE(traj.mAExact);
    CHECK_NOTHROW(pressure_excess(traj));
    // The bound never undercuts the true optimum.
    const auto exact = anneal(prob, default_schedule(1024.0));
    CHECK(exact.mAExact);
    CHECK(traj.mA >= exact.mA - 1e-12);
    CHECK(traj.mA - exact.mA <= 1e-2);
}

TEST_CASE("extract_limit preconditions") {
    const auto prob = identity_cost_2x2();
    const auto shortRun = anneal(prob, Schedule({1.0, 2.0}));
    CHECK_THROWS_AS(extract_limit(prob, shortRun), ArgumentError);
    const auto early = anneal(prob, Schedule({1.0, 2.0, 3.0}));
    CHECK_FALSE(extract_limit(prob, early).converged);
    CHECK_THROWS_AS(extract_limit(prob, early, 0.0), ArgumentError);
}

TEST_CASE("trajectory CSV") {
    const auto prob = identity_cost_2x2();
    const auto traj = anneal(prob, Schedule({1.0, 2.0, 4.0}));
    std::ostringstream out;
    write_trajectory_csv(out, traj);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "beta,pressure,excess,entropy,cost,maxPhiDelta");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 5);
    }
    CHECK(rows == 3);
    CHECK(out.str().find('\r') == std::string::npos);
    CHECK(out.str().rfind("1,", 0) == std::string::npos);
    CHECK(out.str().find("\n1,") != std::string::npos);
}

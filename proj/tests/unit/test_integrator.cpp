// Copyright 2026 The qsltraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qsltraj/errors.hpp"
#include "qsltraj/integrator.hpp"
#include "qsltraj/kernels.hpp"
#include "qsltraj/wiener.hpp"
#include "support.hpp"

#include <cmath>
#include <numeric>
#include <set>

#include <doctest.h>

using namespace qsltraj;

TEST_CASE("Wiener streams are reproducible and seed-specific") {
    const auto a = wiener_stream(1000, 1e-3, 99);
    const auto b = wiener_stream(1000, 1e-3, 99);
    const auto c = wiener_stream(1000, 1e-3, 100);
    CHECK(a.increments == b.increments);
    CHECK(a.increments != c.increments);
    CHECK_THROWS_AS((void)wiener_stream(0, 1e-3, 1), DomainError);
    CHECK_THROWS_AS((void)wiener_stream(10, 0.0, 1), DomainError);
}

TEST_CASE("Wiener increments have mean 0 and variance dt") {
    const std::size_t n = 1000000;
    const double dt = 1e-3;
    const auto w = wiener_stream(n, dt, 2024);
    const double mean = std::accumulate(w.increments.begin(), w.increments.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    double lag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ss += (w.increments[i] - mean) * (w.increments[i] - mean);
        if (i + 1 < n) lag += w.increments[i] * w.increments[i + 1];
    }
    const double var = ss / static_cast<double>(n - 1);
    CHECK(std::abs(mean) <= 5.0 * std::sqrt(dt / static_cast<double>(n)));
    CHECK(var >= 0.9 * dt);
    CHECK(var <= 1.1 * dt);
    // Lag-one correlation of independent draws is O(1/sqrt(n)).
    CHECK(std::abs(lag / static_cast<double>(n - 1) / dt) <= 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("per-trajectory stream seeds are distinct") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t k = 0; k < 100000; ++k) seen.insert(stream_seed(42, k));
    CHECK(seen.size() == 100000);
    CHECK(stream_seed(42, 0) != stream_seed(43, 0));
    CHECK(stream_seed(42, 5) == stream_seed(42, 5));
}

TEST_CASE("single Euler-Maruyama steps") {
    const SimParams p = test::params_with(0.3);
    SUBCASE("pole moves by the drift only") {
        for (double dw : {-0.1, 0.0, 0.05}) {
            const StepResult s = step_euler_maruyama(test::plus_z(), dw, p);
            CHECK((s.raw - Vec3(p.omega * p.dt, 0, 1)).norm() <= 1e-15);
            CHECK(s.state.norm() == doctest::Approx(1.0).epsilon(1e-15));
        }
    }
    SUBCASE("equator moves up by the diffusion") {
        const double dw = std::sqrt(p.dt);
        const StepResult s = step_euler_maruyama(BlochVector(1, 0, 0), dw, p);
        const StepResult still = step_euler_maruyama(BlochVector(1, 0, 0), 0.0, p);
        CHECK(s.raw.z() - still.raw.z() == doctest::Approx(2.0 * std::sqrt(2.0 * p.kappa) * dw).epsilon(1e-13));
    }
    SUBCASE("no measurement means no noise") {
        const SimParams rot = test::params_with(0.0);
        const StepResult a = step_euler_maruyama(rot.initial, 0.3, rot);
        const StepResult b = step_euler_maruyama(rot.initial, -0.3, rot);
        CHECK(a.raw == b.raw);
        CHECK((a.raw - rot.initial.vec() - bloch_drift(rot.initial, rot) * rot.dt).norm() <= 1e-16);
    }
    SUBCASE("oversized steps and bad inputs") {
        CHECK_THROWS_AS((void)step_euler_maruyama(BlochVector(1, 0, 0), 1.0, p), StepTooLargeError);
        CHECK_THROWS_AS((void)step_euler_maruyama(BlochVector(0.5, 0, 0), 0.0, p), DomainError);
        CHECK_THROWS_AS((void)step_euler_maruyama(BlochVector(1, 0, 0), std::nan(""), p), DomainError);
    }
    SUBCASE("clamp events count defects above the tolerance") {
        const double dw = std::sqrt(20.0 * p.dt);
        const StepResult s = step_euler_maruyama(BlochVector(1, 0, 0), dw, p);
        CHECK(s.norm_defect > p.clamp_tolerance);
        CHECK(s.clamp_event);
        CHECK_FALSE(step_euler_maruyama(BlochVector(1, 0, 0), 0.0, p).clamp_event);
    }
}

TEST_CASE("unitary trajectory follows the rigid rotation") {
    const SimParams p = test::params_with(0.0, 1.0, test::plus_z());
    const TrajectoryRecord rec = simulate_trajectory(p, 0);
    const BlochVector& last = rec.states.back();
    CHECK(std::abs(last.x() - std::sin(p.omega * p.tau)) <= p.dt);
    CHECK(std::abs(last.z() - std::cos(p.omega * p.tau)) <= p.dt);
    CHECK(std::abs(last.y()) <= 1e-15);
}

TEST_CASE("trajectory records are complete and reproducible") {
    const SimParams p = test::params_with(0.25);
    const TrajectoryRecord a = simulate_trajectory(p, 3);
    const TrajectoryRecord b = simulate_trajectory(p, 3);
    const TrajectoryRecord c = simulate_trajectory(p, 4);
    CHECK(a.times.size() == 1001);
    CHECK(a.states.size() == 1001);
    CHECK(a.fidelity_path.size() == 1001);
    CHECK(a.wiener.size() == 1000);
    CHECK(a.times.back() == doctest::Approx(p.tau));
    CHECK(a.states.front() == p.initial);
    CHECK(a.fidelity_path.front() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(a.traj_index == 3);
    CHECK(a.seed_used == stream_seed(p.seed, 3));
    CHECK(a.wiener == wiener_stream(1000, p.dt, a.seed_used).increments);
    CHECK(a.wiener == b.wiener);
    for (std::size_t i = 0; i < a.states.size(); ++i) CHECK(a.states[i] == b.states[i]);
    CHECK(a.wiener != c.wiener);
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        CHECK(a.fidelity_path[i] == doctest::Approx(0.5 * (1.0 + p.initial.dot(a.states[i]))).epsilon(1e-15));
    }
}

TEST_CASE("conditioned states stay pure") {
    const SimParams p = test::params_with(0.5, 1.0, test::plus_z());
    for (std::uint64_t k = 0; k < 20; ++k) {
        const TrajectoryRecord rec = simulate_trajectory(p, k);
        double worst = 1.0;
        for (const auto& s : rec.states) worst = std::min(worst, purity(s));
        CHECK(worst >= 1.0 - 10.0 * p.dt * p.kappa);
        // One step before projection loses at most 4 kappa dt of purity.
        for (std::size_t i = 0; i + 1 < rec.states.size(); ++i) {
            const StepResult s = step_euler_maruyama(rec.states[i], rec.wiener[i], p);
            CHECK(0.5 * (1.0 + s.raw.squaredNorm()) >= 1.0 - 10.0 * p.dt * p.kappa);
        }
    }
}

TEST_CASE("stepwise and replayed velocity accumulators agree") {
    const SimParams p = test::params_with(0.25);
    const TrajectoryRecord rec = simulate_trajectory(p, 11);
    ConditionedEvolution evo(p);
    for (double dw : rec.wiener) evo.advance(dw);
    const VelocityTerms live = evo.terms();
    const VelocityTerms replay = velocity_terms(rec, p);
    CHECK(live.liouvillian_avg == doctest::Approx(replay.liouvillian_avg).epsilon(1e-12));
    CHECK(live.ito_integral == doctest::Approx(replay.ito_integral).epsilon(1e-12));
    CHECK(live.innovation_sq_avg == doctest::Approx(replay.innovation_sq_avg).epsilon(1e-12));
    CHECK(live.projection_sum == doctest::Approx(replay.projection_sum).epsilon(1e-9));
    CHECK(evo.state() == rec.states.back());
    CHECK(evo.clamp_events() == rec.clamp_events);
    // V_C tau = 1 - F_C(tau).
    CHECK(std::abs(live.v_conditioned() * p.tau - (1.0 - rec.fidelity_path.back())) <= 1e-12);

    TrajectoryRecord cut = rec;
    cut.states.pop_back();
    CHECK_THROWS_AS((void)velocity_terms(cut, p), DomainError);
    SimParams longer = p;
    longer.tau = 2.0;
    CHECK_THROWS_AS((void)velocity_terms(rec, longer), DomainError);
}

TEST_CASE("increment count must match the grid") {
    const SimParams p = test::params_with(0.25);
    std::vector<double> dw(999, 0.0);
    CHECK_THROWS_AS((void)simulate_trajectory(p, std::span<const double>(dw)), DomainError);
}

TEST_CASE("ensemble mean of conditioned trajectories follows the master equation") {
    SimParams p = test::params_with(0.25);
    const std::uint64_t m = 2000;
    std::vector<Vec3> sum(p.n_steps() + 1, Vec3::Zero());
    for (std::uint64_t k = 0; k < m; ++k) {
        const TrajectoryRecord rec = simulate_trajectory(p, k);
        for (std::size_t i = 0; i < rec.states.size(); ++i) sum[i] += rec.states[i].vec();
    }
    const double band = 5.0 / std::sqrt(static_cast<double>(m)) + 10.0 * p.dt;
    double worst = 0.0;
    for (std::size_t i = 0; i < sum.size(); i += 10) {
        const Vec3 mean = sum[i] / static_cast<double>(m);
        const Vec3 exact = ensemble_state_analytic(static_cast<double>(i) * p.dt, p).vec();
        worst = std::max(worst, (mean - exact).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= band);
}

TEST_CASE("convergence study") {
    SUBCASE("deterministic limit is second order under projection") {
        const ConvergenceReport rep = convergence_check(test::params_with(0.0), 1, 64);
        CHECK(rep.strong_order == doctest::Approx(2.0).epsilon(0.05));
        CHECK(rep.strong_error_coarse < 1e-6);
    }
    SUBCASE("measured dynamics") {
        const ConvergenceReport rep = convergence_check(test::params_with(0.25), 300, 16);
        CHECK(rep.strong_error_fine < rep.strong_error_coarse);
        CHECK(rep.purity_order == doctest::Approx(1.0).epsilon(0.05));
        CHECK(rep.reference_dt == doctest::Approx(1e-3 / 16));
    }
    CHECK_THROWS_AS((void)convergence_check(test::params_with(0.25), 0), DomainError);
    CHECK_THROWS_AS((void)convergence_check(test::params_with(0.25), 10, 3), DomainError);
}

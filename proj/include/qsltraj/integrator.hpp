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

#pragma once

#include "qsltraj/params.hpp"
#include "qsltraj/qubit_state.hpp"
#include "qsltraj/wiener.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace qsltraj {

struct StepResult {
    BlochVector state;    // projected onto the unit sphere
    Vec3 raw;             // r + drift dt + diffusion dW, before projection
    double norm_defect;   // |raw| - 1
    bool clamp_event;     // |norm_defect| > params.clamp_tolerance
};

/// One explicit Euler-Maruyama step of the conditioned dynamics in Bloch form.
///
/// Drift and diffusion are evaluated at the left endpoint (Ito). The raw step is
/// then projected back onto the unit sphere, which the exact dynamics never
/// leaves for a pure state. Throws StepTooLargeError when
/// |norm_defect| > params.max_norm_defect, and DomainError for a mixed input.
[[nodiscard]] StepResult step_euler_maruyama(const BlochVector& r, double dW, const SimParams& params);

/// Per-trajectory accumulators behind the conditioned velocity.
///
/// With F_i = Tr(rho0 rho_i), every step satisfies
///   F_{i+1} - F_i = Tr(rho0 L[rho_i]) dt + Tr(rho0 I[rho_i]) dW_i + projection_i,
/// so v_conditioned * tau = 1 - F_C(tau) up to rounding.
struct VelocityTerms {
    double liouvillian_avg = 0.0;    // time average of Tr(rho0 L[rho_C])
    double ito_integral = 0.0;       // sum_i Tr(rho0 I[rho_i]) dW_i (left endpoint)
    double innovation_sq_avg = 0.0;  // time average of Tr(rho0 I[rho_C])^2
    double projection_sum = 0.0;     // sum_i Tr(rho0 (rho_{i+1} - raw_{i+1}))
    double tau = 0.0;

    [[nodiscard]] double v_conditioned() const noexcept {
        return -liouvillian_avg - (ito_integral + projection_sum) / tau;
    }
};

/// Conditioned state evolving step by step, accumulating VelocityTerms on the way.
class ConditionedEvolution {
public:
    explicit ConditionedEvolution(const SimParams& params);

    /// Advance by one step with increment dW.
    const StepResult& advance(double dW);

    [[nodiscard]] const BlochVector& state() const noexcept { return state_; }
    [[nodiscard]] double fidelity() const noexcept { return 0.5 * (1.0 + r0_.dot(state_.vec())); }
    [[nodiscard]] std::uint64_t steps_taken() const noexcept { return steps_; }
    [[nodiscard]] std::uint64_t clamp_events() const noexcept { return clamp_events_; }
    /// Velocity terms normalized by the elapsed time.
    [[nodiscard]] VelocityTerms terms() const noexcept;

private:
    SimParams params_;
    Vec3 r0_;
    BlochVector state_;
    StepResult last_{};
    double liouvillian_sum_ = 0.0;
    double ito_sum_ = 0.0;
    double innovation_sq_sum_ = 0.0;
    double projection_sum_ = 0.0;
    std::uint64_t steps_ = 0;
    std::uint64_t clamp_events_ = 0;
};

/// A single conditioned trajectory on the full grid t_i = i dt, i = 0..N.
struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<BlochVector> states;
    std::vector<double> wiener;         // N increments; wiener[i] drives step i -> i+1
    std::vector<double> fidelity_path;  // Tr(rho0 rho_C(t_i))
    std::uint64_t seed_used = 0;
    std::uint64_t traj_index = 0;
    std::uint64_t clamp_events = 0;
};

/// Integrate trajectory `traj_index` with the stream stream_seed(params.seed, traj_index).
[[nodiscard]] TrajectoryRecord simulate_trajectory(const SimParams& params, std::uint64_t traj_index);

/// Integrate with caller-supplied increments (len == params.n_steps()).
[[nodiscard]] TrajectoryRecord simulate_trajectory(const SimParams& params, std::span<const double> increments);

/// Recompute the velocity accumulators from a stored record.
[[nodiscard]] VelocityTerms velocity_terms(const TrajectoryRecord& traj, const SimParams& params);

struct ConvergenceReport {
    double dt = 0.0;
    double reference_dt = 0.0;
    std::uint64_t n_paths = 0;
    double strong_error_coarse = 0.0;  // E|r_dt(tau) - r_ref(tau)|
    double strong_error_fine = 0.0;    // same at dt/2
    double strong_order = 0.0;         // log2(coarse / fine)
    double purity_defect_coarse = 0.0; // mean one-step |1 - purity| before projection, at dt
    double purity_defect_fine = 0.0;   // same at dt/2
    double purity_order = 0.0;         // log2(coarse / fine); 1 means linear in dt
};

/// Matched-noise dt-halving study.
///
/// A reference path at dt / reference_factor is integrated for each of n_paths
/// Brownian paths; the dt and dt/2 runs use the same path, their increments
/// formed by summing blocks of fine increments. reference_factor must be an
/// even integer.
[[nodiscard]] ConvergenceReport convergence_check(const SimParams& params, std::uint64_t n_paths = 200,
                                                  std::uint64_t reference_factor = 128);

}  // namespace qsltraj

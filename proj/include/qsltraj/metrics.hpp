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

#include "qsltraj/integrator.hpp"
#include "qsltraj/params.hpp"
#include "qsltraj/qubit_state.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace qsltraj {

inline constexpr double kDefaultTargetAngle = std::numbers::pi / 4.0;

// ---------------------------------------------------------------------------
// Fidelity and Bures angle

/// Tr(rho0 rhot) for a pure rho0; throws DomainError if rho0 is mixed.
[[nodiscard]] double fidelity(const DensityMatrix& rho0, const DensityMatrix& rhot);
/// (1 + r0 . rt) / 2, the same quantity in Bloch form.
[[nodiscard]] double fidelity(const BlochVector& r0, const BlochVector& rt);

/// arccos(sqrt(F)). F within 1e-12 of [0, 1] is clamped; beyond that DomainError.
[[nodiscard]] double bures_angle(double fidelity);

// ---------------------------------------------------------------------------
// Ensemble (Lindblad) speed and its quantum speed limit

/// Largest singular value of L(rho), from an SVD of the 2x2 matrix.
[[nodiscard]] double liouvillian_norm(const DensityMatrix& rho, const SimParams& params);
/// sqrt(w^2/4 (x^2 + z^2) + 4 k^2 (x^2 + y^2) - 2 k w x z).
[[nodiscard]] double liouvillian_norm_radical(const BlochVector& r, const SimParams& params);

struct EnsembleVelocityRoutes {
    double liouvillian_quadrature;  // -(1/tau) int Tr(rho0 L[rho_t]) dt, matrix kernels
    double bloch_time_average;      // closed Bloch form with time-averaged coordinates
    double fidelity_endpoint;       // (1 - F(tau)) / tau
};

[[nodiscard]] EnsembleVelocityRoutes ensemble_velocity_routes(const SimParams& params);
/// Time-averaged speed of the ensemble-averaged state over [0, tau].
[[nodiscard]] double ensemble_velocity(const SimParams& params);

struct QslVelocityRoutes {
    double svd;
    double radical;
};

[[nodiscard]] QslVelocityRoutes qsl_velocity_routes(const SimParams& params);
/// (1/tau) int_0^tau ||L(rho_t)|| dt along the analytic ensemble path.
[[nodiscard]] double qsl_velocity(const SimParams& params);

/// int_0^t ||L(rho_s)|| ds.
[[nodiscard]] double qsl_distance(double t, const SimParams& params);

/// Fidelity reachable at time t by a system moving at the QSL speed:
/// max(0, 1 - qsl_distance(t)).
[[nodiscard]] double qsl_fidelity(double t, const SimParams& params);

struct QslReport {
    double v_ensemble = 0.0;
    double v_qsl = 0.0;
    double target_angle = kDefaultTargetAngle;
    /// Time for the ensemble-averaged state to reach target_angle (NaN if never).
    double tau_qsl_angle = 0.0;
    /// target_angle / v_qsl.
    double tau_qsl_ratio = 0.0;
    /// sin^2(target_angle) / v_ensemble.
    double tau_qsl_sweep = 0.0;
    /// Time at which qsl_distance reaches sin^2(target_angle) (NaN if never).
    double tau_qsl_bound = 0.0;
};

[[nodiscard]] QslReport qsl_report(const SimParams& params, double target_angle = kDefaultTargetAngle);

/// First time the ensemble-averaged state reaches the Bures angle `target`.
/// Searches [0, horizon]; the default horizon is max(tau, 20 pi / omega).
[[nodiscard]] std::optional<double> ensemble_passage_time(const SimParams& params, double target,
                                                          std::optional<double> horizon = std::nullopt);

// ---------------------------------------------------------------------------
// Conditioned trajectories

struct VelocitySample {
    double v_conditioned = 0.0;
    double bures_final = 0.0;
    double f_final = 1.0;
    std::optional<double> passage_time;
    std::uint64_t traj_index = 0;
    VelocityTerms terms;
};

[[nodiscard]] VelocitySample make_velocity_sample(const VelocityTerms& terms, double f_final,
                                                  std::optional<double> passage, std::uint64_t traj_index);

/// Conditioned velocity of a complete trajectory, with the passage time to `target_angle`.
[[nodiscard]] VelocitySample conditioned_velocity(const TrajectoryRecord& traj, const SimParams& params,
                                                  double target_angle = kDefaultTargetAngle);

struct VarianceEstimate {
    std::size_t n = 0;
    double v_ensemble = 0.0;        // closed-form V, for reference
    double mean_conditioned = 0.0;  // sample mean of V_C; its square is the subtracted V^2
    // a = avg(Tr rho0 L) + (projection remainder) / tau, the non-Ito part of -V_C.
    double liouvillian_second_moment = 0.0;  // < a^2 >
    double cross_term = 0.0;                 // (2/tau) < a * int Tr(rho0 I) dW >
    double innovation_term = 0.0;            // (1/tau) < avg(Tr(rho0 I)^2) >
    double formula = 0.0;
    double formula_se = 0.0;
    double sample = 0.0;  // unbiased sample variance of v_conditioned
    double sample_se = 0.0;

    [[nodiscard]] double combined_se() const noexcept { return std::hypot(formula_se, sample_se); }
};

/// Monte Carlo estimate of the three-term variance expression, next to the direct
/// sample variance. Requires at least 100 samples.
[[nodiscard]] VarianceEstimate velocity_variance_formula(std::span<const VelocitySample> samples,
                                                         const SimParams& params);
[[nodiscard]] VarianceEstimate velocity_variance_formula(std::span<const TrajectoryRecord> trajectories,
                                                         const SimParams& params);

/// First grid crossing of `target_angle`, interpolated linearly in the Bures angle.
[[nodiscard]] std::optional<double> passage_time(const TrajectoryRecord& traj, double target_angle);

/// Streaming passage detection; compares fidelities so the angle is only
/// evaluated at the crossing.
class PassageDetector {
public:
    explicit PassageDetector(double target_angle);

    /// Observe F at grid time t after F_prev at t - dt. Returns true on the crossing step.
    bool observe(double t, double dt, double f_prev, double f_now);

    [[nodiscard]] const std::optional<double>& time() const noexcept { return time_; }
    [[nodiscard]] bool reached() const noexcept { return time_.has_value(); }

private:
    double target_;
    double f_threshold_;
    std::optional<double> time_;
};

// ---------------------------------------------------------------------------
// Bures geometry

/// sum over p_j + p_k > 1e-12 of 2 |<j|drho|k>|^2 / (p_j + p_k), in the eigenbasis of rho.
/// Throws DomainError for non-Hermitian drho.
[[nodiscard]] double bures_line_element(const DensityMatrix& rho, const Matrix2c& drho);

struct DiffusivityProbe {
    BlochVector state;
    std::uint64_t n_samples = 0;
    double dt = 0.0;
    double mean_dl2 = 0.0;       // sample mean of dL^2
    double mean_dl2_se = 0.0;
    double predicted_rate = 0.0; // 8 kappa Var(sigma_z)
    double measured_rate = 0.0;  // mean_dl2 / dt
    double relative_deviation = 0.0;  // |measured - predicted| / predicted; NaN when predicted == 0
};

/// One SME step (matrix kernels, raw increment) from `state`, n_samples times.
[[nodiscard]] DiffusivityProbe diffusivity_probe(const SimParams& params, const BlochVector& state,
                                                 std::uint64_t n_samples, std::uint64_t seed);

struct DiffusivityReport {
    std::vector<DiffusivityProbe> probes;
    double max_relative_deviation = 0.0;  // over probes with nonzero prediction
};

/// Probes pure states in the x-z plane with z = 0, 0.5 and the measurement pole z = 1.
[[nodiscard]] DiffusivityReport brownian_diffusivity_check(const SimParams& params, std::uint64_t n_samples);

}  // namespace qsltraj

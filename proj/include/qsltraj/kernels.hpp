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

#include <array>
#include <cmath>

namespace qsltraj {

// Matrix-form generators of the conditioned dynamics
//   d rho = L[rho] dt + I[rho] dW
// for H = (omega/2) sigma_y and a sigma_z measurement of strength kappa.

/// L[rho] = -i (omega/2) [sigma_y, rho] - kappa [sigma_z, [sigma_z, rho]].
[[nodiscard]] Matrix2c liouvillian(const DensityMatrix& rho, const SimParams& params);

/// I[rho] = sqrt(2 kappa) ({sigma_z, rho} - 2 Tr(sigma_z rho) rho).
[[nodiscard]] Matrix2c innovation(const DensityMatrix& rho, const SimParams& params);

// Bloch-form counterparts, used on the integrator hot path. Both are the Bloch
// components of the matrix kernels above; the unit tests check the equivalence.

[[nodiscard]] inline Vec3 drift_rate(const Vec3& r, double omega, double kappa) noexcept {
    return {omega * r.z() - 4.0 * kappa * r.x(), -4.0 * kappa * r.y(), -omega * r.x()};
}

[[nodiscard]] inline Vec3 diffusion_rate(const Vec3& r, double kappa) noexcept {
    const double s = 2.0 * std::sqrt(2.0 * kappa);
    return {-s * r.x() * r.z(), -s * r.y() * r.z(), s * (1.0 - r.z() * r.z())};
}

/// (omega z - 4 kappa x, -4 kappa y, -omega x).
[[nodiscard]] Vec3 bloch_drift(const BlochVector& r, const SimParams& params);

/// 2 sqrt(2 kappa) (-x z, -y z, 1 - z^2).
[[nodiscard]] Vec3 bloch_diffusion(const BlochVector& r, const SimParams& params);

/// Eigen-decomposition of the x-z block M = [[-4 kappa, omega], [-omega, 0]] of
/// the ensemble dynamics, with the expansion (x0, z0) = a v_plus + b v_minus.
struct EigensystemM {
    Complex lambda_plus;
    Complex lambda_minus;
    std::array<Complex, 2> v_plus;
    std::array<Complex, 2> v_minus;
    Complex a;
    Complex b;
};

/// True when |4 kappa^2 - omega^2| < 1e-9 omega^2.
[[nodiscard]] bool is_degenerate(const SimParams& params) noexcept;

/// lambda_pm = -2 kappa +- sqrt(4 kappa^2 - omega^2), v_pm = (omega, -lambda_mp).
/// Throws DegenerateEigensystemError at the degenerate point.
[[nodiscard]] EigensystemM eigensystem_m(const SimParams& params, const BlochVector& initial);

/// Closed-form Bloch vector of the ensemble-averaged state at time t >= 0.
///
/// Uses the eigen-expansion in complex arithmetic; at the degenerate point it
/// switches to the confluent solution e^{-2 kappa t} (u0 + t (M + 2 kappa) u0).
[[nodiscard]] BlochVector ensemble_state_analytic(double t, const SimParams& params);

}  // namespace qsltraj

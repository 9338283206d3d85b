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

#include "qsltraj/qubit_state.hpp"

#include <cstdint>

namespace qsltraj {

/// Pure state in the x-z plane halfway between +z and +x.
[[nodiscard]] BlochVector default_initial_state();

/// Physical and numerical parameters of a monitored, driven qubit.
///
/// H = (omega/2) sigma_y, measured observable sigma_z with strength kappa.
/// Times are in units of 1/omega when omega = 1.
struct SimParams {
    double omega = 1.0;
    double kappa = 0.25;
    double tau = 1.0;
    double dt = 1e-3;
    BlochVector initial = default_initial_state();
    std::uint64_t n_traj = 10000;
    std::uint64_t seed = 42;

    // Positivity handling. Each step is projected back onto the unit sphere;
    // steps whose raw norm defect exceeds clamp_tolerance are counted, and a
    // defect above max_norm_defect aborts the trajectory.
    double clamp_tolerance = 0.01;
    double max_norm_defect = 0.25;

    /// Throws ConfigError naming the first offending field.
    void validate() const;

    /// round(tau / dt); validate() guarantees it is an integer to 1e-9 relative.
    [[nodiscard]] std::uint64_t n_steps() const;
};

}  // namespace qsltraj

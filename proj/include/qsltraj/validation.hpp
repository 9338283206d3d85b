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

#include "qsltraj/ensemble.hpp"
#include "qsltraj/params.hpp"

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace qsltraj {

/// Deliberate defects for checking that the suite notices them.
enum class Fault {
    none,
    diffusion_sign,  // flips the Bloch-form diffusion used by the checks
};

struct ValidationOptions {
    std::uint64_t n_traj = 10000;  // per ensemble
    std::vector<double> path_kappas{0.1, 0.25, 0.5, 1.0};  // in units of omega
    std::uint64_t n_random_states = 1000;
    std::uint64_t diffusivity_samples = 10000;
    double diffusivity_dt = 1e-4;  // in units of 1/omega
    std::uint64_t convergence_paths = 1000;
    unsigned workers = 0;
    Fault fault = Fault::none;
};

struct Check {
    std::string name;
    double measured = 0.0;
    double expected = 0.0;
    std::string criterion;  // human-readable pass rule
    bool passed = false;
};

struct ValidationReport {
    std::vector<Check> checks;

    [[nodiscard]] bool all_passed() const noexcept;
    [[nodiscard]] std::string table() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Bloch drift and diffusion against the matrix kernels, and the SVD norm of L
/// against the closed-form radical, on random states.
[[nodiscard]] std::vector<Check> check_representation(const SimParams& params, const ValidationOptions& options);

/// Ensemble-mean Bloch path against the closed-form ensemble solution,
/// in units of the standard error, for each kappa in options.path_kappas.
[[nodiscard]] std::vector<Check> check_ensemble_mean_path(const SimParams& params, const ValidationOptions& options);

/// Per-trajectory fidelity identity, V_C <= 1/tau, <V_C> = V, the variance
/// cross-estimator and V <= V_QSL, from one ensemble at `params`.
[[nodiscard]] std::vector<Check> check_velocity_identities(const EnsembleStats& stats);

/// Ensemble and QSL velocity quadrature routes agree, and V <= V_QSL.
[[nodiscard]] std::vector<Check> check_velocity_routes(const SimParams& params);

/// Mean squared Bures step against 8 kappa Var(sigma_z) dt; exact dt^2 growth at the pole.
[[nodiscard]] std::vector<Check> check_diffusivity(const SimParams& params, const ValidationOptions& options);

/// Strong order of the integrator and linear scaling of the purity defect.
[[nodiscard]] std::vector<Check> check_convergence(const SimParams& params, const ValidationOptions& options);

/// Everything above.
[[nodiscard]] ValidationReport run_validation(const SimParams& params, const ValidationOptions& options = {});

}  // namespace qsltraj

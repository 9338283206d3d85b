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

#include "qsltraj/params.hpp"

#include "qsltraj/errors.hpp"

#include <cmath>

namespace qsltraj {

BlochVector default_initial_state() {
    const double c = std::sqrt(0.5);
    return {c, 0.0, c};
}

void SimParams::validate() const {
    auto finite_positive = [](const char* name, double v) {
        if (!std::isfinite(v) || v <= 0.0) throw ConfigError(name, "must be a finite value > 0");
    };
    finite_positive("omega", omega);
    if (!std::isfinite(kappa) || kappa < 0.0) throw ConfigError("kappa", "must be a finite value >= 0");
    finite_positive("tau", tau);
    finite_positive("dt", dt);
    if (dt > tau) throw ConfigError("dt", "must not exceed tau");
    const double ratio = tau / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
        throw ConfigError("dt", "tau/dt must be an integer step count");
    }
    if (n_traj == 0) throw ConfigError("n_traj", "must be at least 1");
    if (!initial.is_pure(1e-9)) {
        throw ConfigError("initial", "must be a pure state (|r| = 1)");
    }
    finite_positive("clamp_tolerance", clamp_tolerance);
    if (!std::isfinite(max_norm_defect) || max_norm_defect < clamp_tolerance) {
        throw ConfigError("max_norm_defect", "must be >= clamp_tolerance");
    }
}

std::uint64_t SimParams::n_steps() const {
    return static_cast<std::uint64_t>(std::llround(tau / dt));
}

}  // namespace qsltraj

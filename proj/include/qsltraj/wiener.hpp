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

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace qsltraj {

/// Seed of the independent stream used by trajectory `traj_index`.
///
/// Two rounds of the SplitMix64 finalizer over (root, index); depends only on
/// its arguments, so trajectory k sees the same noise regardless of which
/// worker runs it or in which order.
[[nodiscard]] std::uint64_t stream_seed(std::uint64_t root_seed, std::uint64_t traj_index) noexcept;

/// Sequential source of Wiener increments dW ~ N(0, dt).
class GaussianIncrements {
public:
    GaussianIncrements(std::uint64_t seed, double dt) : engine_(seed), dist_(0.0, std::sqrt(dt)) {}

    double next() { return dist_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> dist_;
};

struct WienerStream {
    std::vector<double> increments;
    double dt = 0.0;
};

/// n_steps i.i.d. N(0, dt) increments; identical for identical arguments.
[[nodiscard]] WienerStream wiener_stream(std::uint64_t n_steps, double dt, std::uint64_t seed);

}  // namespace qsltraj

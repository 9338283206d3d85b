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

#include "qsltraj/wiener.hpp"

#include "qsltraj/errors.hpp"

namespace qsltraj {

namespace {
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}
}  // namespace

std::uint64_t stream_seed(std::uint64_t root_seed, std::uint64_t traj_index) noexcept {
    return splitmix64(splitmix64(root_seed) ^ splitmix64(traj_index + 0x632BE59BD9B4E019ULL));
}

WienerStream wiener_stream(std::uint64_t n_steps, double dt, std::uint64_t seed) {
    if (n_steps < 1) throw DomainError("wiener_stream requires n_steps >= 1");
    if (!(dt > 0.0)) throw DomainError("wiener_stream requires dt > 0");
    WienerStream out;
    out.dt = dt;
    out.increments.resize(n_steps);
    GaussianIncrements gen(seed, dt);
    for (auto& dw : out.increments) dw = gen.next();
    return out;
}

}  // namespace qsltraj

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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace qsltraj::test {

inline std::vector<BlochVector> random_ball(std::size_t n, std::uint64_t seed, bool pure = false) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;
    std::vector<BlochVector> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 d(normal(gen), normal(gen), normal(gen));
        d.normalize();
        out.push_back(BlochVector::unchecked(d * (pure ? 1.0 : std::cbrt(uniform(gen)))));
    }
    return out;
}

inline SimParams params_with(double kappa, double tau = 1.0, BlochVector initial = default_initial_state()) {
    SimParams p;
    p.kappa = kappa;
    p.tau = tau;
    p.initial = initial;
    return p;
}

inline BlochVector plus_z() { return BlochVector(0.0, 0.0, 1.0); }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("qsltraj_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

inline std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string line; std::getline(is, line);) out.push_back(line);
    return out;
}

}  // namespace qsltraj::test

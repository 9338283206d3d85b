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
#include "qsltraj/validation.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace qsltraj {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kIoError = 1;
inline constexpr int kConfig = 2;
inline constexpr int kNumerical = 3;
inline constexpr int kValidation = 4;
}  // namespace exit_code

struct RunConfig {
    std::string command;
    SimParams params;
    double target_angle = kDefaultTargetAngle;
    std::vector<double> kappas{0.05, 0.1, 0.25, 0.5};
    int n_bins = 60;
    std::filesystem::path output_dir = "out";
    unsigned workers = 0;
    bool overwrite = false;
    std::uint64_t traj_index = 0;
    std::size_t stride = 1;
    Fault fault = Fault::none;
};

/// Parse "a,b,c" into reals. Throws ConfigError("kappas", ...) on empty or malformed input.
[[nodiscard]] std::vector<double> parse_real_list(const std::string& text);

/// Resolved configuration echoed into output JSON. Worker count and output
/// directory are left out: neither changes any result.
[[nodiscard]] nlohmann::json config_json(const RunConfig& config);

/// Runs one command; `args` excludes the program name. Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qsltraj

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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace qsltraj {

struct EnsembleStats;
struct FidelityColormap;
struct Histogram;
struct PassageStats;
struct SimParams;
struct SweepResult;
struct TrajectoryRecord;
struct VelocitySample;

/// 17 significant digits ("%.17g"); round-trips every double.
[[nodiscard]] std::string format_real(double v);
/// Empty for nullopt or a non-finite value.
[[nodiscard]] std::string format_optional(std::optional<double> v);

// CSV writers. Headers are fixed; readers are expected to reject anything else.
inline constexpr std::string_view kTrajectoryHeader = "t,x,y,z,F,dW";
inline constexpr std::string_view kEnsembleHeader = "traj_id,v_c,bures_final,passage_time,f_final";
inline constexpr std::string_view kHistogramHeader = "bin_left,bin_right,count,density";
inline constexpr std::string_view kColormapHeader = "t,f_bin_left,f_bin_right,density";
inline constexpr std::string_view kCurvesHeader = "t,f_ensemble,f_qsl";
inline constexpr std::string_view kSweepHeader = "kappa,mean_vc,std_vc,violation_fraction,v_ensemble,v_qsl";
inline constexpr std::string_view kPassageHeader = "traj_id,passage_time";

/// One row per kept grid point. With stride s > 1 every s-th point is kept (and
/// the last one); dW on a row is the summed increment to the next kept row and
/// is empty on the final row.
[[nodiscard]] std::string trajectory_csv(const TrajectoryRecord& traj, std::size_t stride = 1);
[[nodiscard]] std::string ensemble_csv(const std::vector<VelocitySample>& samples);
[[nodiscard]] std::string histogram_csv(const Histogram& h);
[[nodiscard]] std::string colormap_csv(const FidelityColormap& cm);
[[nodiscard]] std::string curves_csv(const FidelityColormap& cm);
[[nodiscard]] std::string sweep_csv(const SweepResult& sweep);
[[nodiscard]] std::string passage_csv(const PassageStats& passage);

/// SimParams as a flat JSON object (initial state as "x,y,z").
[[nodiscard]] nlohmann::json params_json(const SimParams& params);

/// Scalar summary of an ensemble run: QSL report, velocity statistics,
/// mean Bloch path and fidelity quantile bands. Non-finite values become null.
[[nodiscard]] nlohmann::json stats_json(const EnsembleStats& stats);
[[nodiscard]] nlohmann::json sweep_json(const SweepResult& sweep);
[[nodiscard]] nlohmann::json passage_json(const PassageStats& passage);

/// Fails with ConfigError("out", ...) if any path exists and `overwrite` is false.
void check_writable(const std::filesystem::path& dir, const std::vector<std::string>& names, bool overwrite);
/// Writes the whole string; throws std::runtime_error on I/O failure.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace qsltraj

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

#include "qsltraj/metrics.hpp"
#include "qsltraj/params.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace qsltraj {

struct Histogram {
    std::vector<double> bin_edges;  // n_bins + 1 edges
    std::vector<std::uint64_t> counts;
    std::vector<double> density;    // counts / (total * width)
    bool degenerate = false;        // all values equal; a single unit-width bin is used

    [[nodiscard]] std::size_t n_bins() const noexcept { return counts.size(); }
};

/// Equal-width bins over [min, max]; the maximum lands in the last bin.
/// A zero-width range falls back to one bin [v - 0.5, v + 0.5] and sets `degenerate`.
[[nodiscard]] Histogram histogram(std::span<const double> values, int n_bins);

/// Fraction of samples with v_conditioned strictly above v_qsl. DomainError on empty input.
[[nodiscard]] double violation_fraction(std::span<const VelocitySample> samples, double v_qsl);

struct BimodalityReport {
    int n_maxima = 0;
    double valley_ratio = 1.0;  // deepest valley between the two tallest maxima over the smaller of them
    bool bimodal = false;
};

/// Peak count on the 3-bin moving average of the density. Bimodal means at least
/// two local maxima with a valley below 60% of the smaller of the two tallest.
[[nodiscard]] BimodalityReport bimodality(const Histogram& h);
[[nodiscard]] inline bool is_bimodal(const Histogram& h) { return bimodality(h).bimodal; }

struct EnsembleOptions {
    unsigned workers = 0;            // 0 means std::thread::hardware_concurrency()
    std::uint64_t chunk_size = 256;  // trajectories per work item
    int n_bins = 60;
    double target_angle = kDefaultTargetAngle;
    std::size_t n_path_samples = 10;  // checkpoints t_j = j tau / n for the mean Bloch path
    std::size_t n_time_bins = 50;     // colormap columns (plus t = 0)
    std::size_t n_f_bins = 50;
    /// Called as (done, total) after each chunk; serialized by the engine.
    std::function<void(std::uint64_t, std::uint64_t)> progress;
};

struct MeanPathPoint {
    double t = 0.0;
    Vec3 mean = Vec3::Zero();
    Vec3 standard_error = Vec3::Zero();
    Vec3 analytic = Vec3::Zero();
};

struct QuantileBand {
    double t = 0.0;
    double q10 = 0.0;
    double q50 = 0.0;
    double q90 = 0.0;
};

struct FidelityColormap {
    std::vector<double> times;                 // column times, starting at 0
    std::vector<double> f_edges;               // n_f_bins + 1 edges over [0, 1]
    std::vector<std::vector<double>> density;  // [column][f bin], each column integrates to 1
    std::vector<double> f_ensemble;            // analytic ensemble fidelity at each column time
    std::vector<double> f_qsl;                 // qsl_fidelity at each column time
    double final_sub_qsl_fraction = 0.0;       // share of trajectories with F_C(tau) < F_QSL(tau)
};

struct EnsembleStats {
    SimParams params;
    QslReport qsl;
    std::vector<VelocitySample> samples;  // indexed by trajectory
    Histogram histogram;
    double violation_fraction = 0.0;
    double mean_vc = 0.0;
    double std_vc = 0.0;  // sample standard deviation
    std::optional<VarianceEstimate> variance;  // needs >= 100 trajectories
    std::vector<MeanPathPoint> mean_path;
    std::vector<QuantileBand> fidelity_quantiles;
    FidelityColormap colormap;
    std::uint64_t clamp_events = 0;
};

/// Simulate params.n_traj trajectories and aggregate.
///
/// Trajectory k always uses stream_seed(params.seed, k), and every reduction is
/// either over integers or performed serially in trajectory order after the
/// parallel phase, so the result does not depend on the worker count.
/// An integrator failure is rethrown as TrajectoryError for the smallest failing index.
[[nodiscard]] EnsembleStats run_ensemble(const SimParams& params, const EnsembleOptions& options = {});

struct SweepRow {
    double kappa = 0.0;
    double mean_vc = 0.0;
    double std_vc = 0.0;
    double violation_fraction = 0.0;
    double v_ensemble = 0.0;
    double v_qsl = 0.0;
    std::uint64_t clamp_events = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool std_monotone = false;  // std_vc non-decreasing along the given kappa order
};

[[nodiscard]] SweepResult sweep_kappa(const SimParams& params, std::span<const double> kappas,
                                      const EnsembleOptions& options = {});

[[nodiscard]] FidelityColormap fidelity_colormap_data(const SimParams& params, std::size_t n_time_bins,
                                                      std::size_t n_f_bins, const EnsembleOptions& options = {});

struct PassageStats {
    double target_angle = 0.0;
    double horizon = 0.0;  // trajectories run until passage or this time
    QslReport qsl;
    std::vector<std::optional<double>> times;  // per trajectory
    Histogram histogram;                        // reached trajectories only; empty when none reached
    std::uint64_t reached = 0;
    std::uint64_t unreached = 0;
    /// Share of all trajectories with passage time below each tau_QSL reading.
    double fraction_below_tau_qsl = 0.0;  // ensemble state reaching the target
    double fraction_below_ratio = 0.0;    // target / v_qsl
    double fraction_below_sweep = 0.0;    // sin^2(target) / v_ensemble
    double fraction_below_bound = 0.0;    // qsl_distance reaching sin^2(target)
    std::uint64_t clamp_events = 0;
};

/// Passage times to `target_angle`. The horizon is params.tau, extended when
/// needed to twice the largest finite tau_QSL reading so no comparison with
/// tau_QSL is truncated.
[[nodiscard]] PassageStats passage_time_distribution(const SimParams& params, double target_angle,
                                                     const EnsembleOptions& options = {});

}  // namespace qsltraj

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

#include "qsltraj/ensemble.hpp"

#include "qsltraj/errors.hpp"
#include "qsltraj/integrator.hpp"
#include "qsltraj/kernels.hpp"
#include "qsltraj/wiener.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

namespace qsltraj {

namespace {

constexpr std::size_t kQuantileBins = 2000;

struct Failure {
    std::uint64_t index = std::numeric_limits<std::uint64_t>::max();
    std::string what;
};

// Runs body(begin, end, worker) over fixed chunks of [0, n) on a small pool.
// body reports the first failing trajectory of its chunk through `Failure`.
template <class Body>
void run_chunks(std::uint64_t n, const EnsembleOptions& options, unsigned n_workers, Body&& body) {
    const std::uint64_t chunk = std::max<std::uint64_t>(options.chunk_size, 1);
    const std::uint64_t n_chunks = (n + chunk - 1) / chunk;
    std::atomic<std::uint64_t> next{0};
    std::atomic<std::uint64_t> done{0};
    std::mutex progress_mutex;

    auto work = [&](unsigned worker) {
        for (;;) {
            const std::uint64_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            const std::uint64_t begin = c * chunk;
            const std::uint64_t end = std::min(n, begin + chunk);
            body(begin, end, worker);
            const std::uint64_t finished = done.fetch_add(end - begin) + (end - begin);
            if (options.progress) {
                std::lock_guard lock(progress_mutex);
                options.progress(finished, n);
            }
        }
    };

    if (n_workers <= 1) {
        work(0);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(work, w);
}

unsigned resolve_workers(const EnsembleOptions& options, std::uint64_t n) {
    unsigned w = options.workers != 0 ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    const std::uint64_t chunk = std::max<std::uint64_t>(options.chunk_size, 1);
    const std::uint64_t n_chunks = (n + chunk - 1) / chunk;
    return static_cast<unsigned>(std::min<std::uint64_t>(w, std::max<std::uint64_t>(n_chunks, 1)));
}

// Grid step index nearest to j * n_steps / parts.
std::uint64_t grid_index(std::size_t j, std::size_t parts, std::uint64_t n_steps) {
    return static_cast<std::uint64_t>(
        std::llround(static_cast<double>(j) * static_cast<double>(n_steps) / static_cast<double>(parts)));
}

std::size_t f_bin(double f, std::size_t n_bins) {
    const double clamped = std::clamp(f, 0.0, 1.0);
    return std::min(static_cast<std::size_t>(clamped * static_cast<double>(n_bins)), n_bins - 1);
}

double quantile_from_counts(std::span<const std::uint64_t> counts, std::uint64_t total, double q) {
    const double target = q * static_cast<double>(total);
    double cum = 0.0;
    const double width = 1.0 / static_cast<double>(counts.size());
    for (std::size_t b = 0; b < counts.size(); ++b) {
        const double c = static_cast<double>(counts[b]);
        if (c > 0.0 && cum + c >= target) {
            return (static_cast<double>(b) + (target - cum) / c) * width;
        }
        cum += c;
    }
    return 1.0;
}

}  // namespace

Histogram histogram(std::span<const double> values, int n_bins) {
    if (n_bins < 2) throw DomainError("histogram needs n_bins >= 2");
    if (values.empty()) throw DomainError("histogram of an empty collection");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("histogram: non-finite value");

    Histogram h;
    const auto total = static_cast<double>(values.size());
    if (hi == lo) {
        h.degenerate = true;
        h.bin_edges = {lo - 0.5, lo + 0.5};
        h.counts = {values.size()};
        h.density = {1.0};
        return h;
    }
    const auto nb = static_cast<std::size_t>(n_bins);
    const double width = (hi - lo) / static_cast<double>(nb);
    h.bin_edges.resize(nb + 1);
    for (std::size_t i = 0; i <= nb; ++i) h.bin_edges[i] = lo + static_cast<double>(i) * width;
    h.bin_edges.back() = hi;
    h.counts.assign(nb, 0);
    for (double v : values) {
        auto b = static_cast<std::size_t>((v - lo) / width);
        ++h.counts[std::min(b, nb - 1)];
    }
    h.density.resize(nb);
    for (std::size_t i = 0; i < nb; ++i) {
        h.density[i] = static_cast<double>(h.counts[i]) / (total * (h.bin_edges[i + 1] - h.bin_edges[i]));
    }
    return h;
}

double violation_fraction(std::span<const VelocitySample> samples, double v_qsl) {
    if (samples.empty()) throw DomainError("violation_fraction of an empty collection");
    const auto n = std::count_if(samples.begin(), samples.end(),
                                 [&](const VelocitySample& s) { return s.v_conditioned > v_qsl; });
    return static_cast<double>(n) / static_cast<double>(samples.size());
}

BimodalityReport bimodality(const Histogram& h) {
    BimodalityReport rep;
    const std::size_t n = h.density.size();
    if (n < 3) return rep;
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = i == 0 ? 0 : i - 1;
        const std::size_t b = std::min(i + 1, n - 1);
        double sum = 0.0;
        for (std::size_t j = a; j <= b; ++j) sum += h.density[j];
        s[i] = sum / static_cast<double>(b - a + 1);
    }
    // Local maxima; plateaus count once, at their first bin.
    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i == 0 ? -1.0 : s[i - 1];
        std::size_t j = i;
        while (j + 1 < n && s[j + 1] == s[i]) ++j;
        const double right = j + 1 == n ? -1.0 : s[j + 1];
        if (s[i] > left && s[i] > right && s[i] > 0.0) peaks.push_back(i);
        i = j;
    }
    rep.n_maxima = static_cast<int>(peaks.size());
    if (peaks.size() < 2) return rep;

    auto by_height = peaks;
    std::sort(by_height.begin(), by_height.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    const std::size_t p1 = std::min(by_height[0], by_height[1]);
    const std::size_t p2 = std::max(by_height[0], by_height[1]);
    const double valley = *std::min_element(s.begin() + static_cast<std::ptrdiff_t>(p1),
                                            s.begin() + static_cast<std::ptrdiff_t>(p2) + 1);
    rep.valley_ratio = valley / std::min(s[p1], s[p2]);
    rep.bimodal = rep.valley_ratio < 0.6;
    return rep;
}

EnsembleStats run_ensemble(const SimParams& params, const EnsembleOptions& options) {
    params.validate();
    if (options.n_bins < 2) throw ConfigError("n_bins", "must be >= 2");
    if (options.n_path_samples < 1) throw ConfigError("n_path_samples", "must be >= 1");
    if (options.n_time_bins < 1 || options.n_f_bins < 1) throw ConfigError("n_time_bins", "colormap needs >= 1 bin");

    const std::uint64_t m = params.n_traj;
    const std::uint64_t n_steps = params.n_steps();
    const std::size_t n_path = options.n_path_samples;
    const std::size_t n_cols = options.n_time_bins + 1;
    const std::size_t n_f = options.n_f_bins;
    const unsigned n_workers = resolve_workers(options, m);

    EnsembleStats stats;
    stats.params = params;
    stats.qsl = qsl_report(params, options.target_angle);
    stats.samples.resize(m);

    // Step index -> checkpoint slot, for the mean path (+1) and colormap columns (+1).
    std::vector<std::int32_t> path_slot(n_steps + 1, -1);
    std::vector<std::int32_t> col_slot(n_steps + 1, -1);
    for (std::size_t j = 1; j <= n_path; ++j) path_slot[grid_index(j, n_path, n_steps)] = static_cast<std::int32_t>(j - 1);
    for (std::size_t j = 0; j < n_cols; ++j) col_slot[grid_index(j, n_cols - 1, n_steps)] = static_cast<std::int32_t>(j);

    std::vector<double> path_states(m * n_path * 3);
    // Integer tallies merge exactly in any order, so each worker keeps its own.
    std::vector<std::vector<std::uint64_t>> col_counts(n_workers, std::vector<std::uint64_t>(n_cols * n_f, 0));
    std::vector<std::vector<std::uint64_t>> fine_counts(n_workers,
                                                        std::vector<std::uint64_t>(n_cols * kQuantileBins, 0));
    std::vector<std::uint64_t> clamps(n_workers, 0);
    std::vector<Failure> failures(n_workers);

    run_chunks(m, options, n_workers, [&](std::uint64_t begin, std::uint64_t end, unsigned w) {
        auto& cc = col_counts[w];
        auto& fc = fine_counts[w];
        for (std::uint64_t k = begin; k < end; ++k) {
            if (k > failures[w].index) return;
            try {
                ConditionedEvolution evo(params);
                GaussianIncrements gen(stream_seed(params.seed, k), params.dt);
                PassageDetector det(options.target_angle);
                double f_prev = evo.fidelity();
                auto record_col = [&](std::uint64_t step, double f) {
                    const std::int32_t c = col_slot[step];
                    if (c < 0) return;
                    ++cc[static_cast<std::size_t>(c) * n_f + f_bin(f, n_f)];
                    ++fc[static_cast<std::size_t>(c) * kQuantileBins + f_bin(f, kQuantileBins)];
                };
                record_col(0, f_prev);
                for (std::uint64_t i = 1; i <= n_steps; ++i) {
                    evo.advance(gen.next());
                    const double f = evo.fidelity();
                    det.observe(static_cast<double>(i) * params.dt, params.dt, f_prev, f);
                    if (const std::int32_t p = path_slot[i]; p >= 0) {
                        double* dst = &path_states[(k * n_path + static_cast<std::size_t>(p)) * 3];
                        const Vec3& r = evo.state().vec();
                        dst[0] = r.x();
                        dst[1] = r.y();
                        dst[2] = r.z();
                    }
                    record_col(i, f);
                    f_prev = f;
                }
                stats.samples[k] = make_velocity_sample(evo.terms(), f_prev, det.time(), k);
                clamps[w] += evo.clamp_events();
            } catch (const std::exception& e) {
                if (k < failures[w].index) failures[w] = Failure{k, e.what()};
                return;
            }
        }
    });

    const auto first_failure = std::min_element(failures.begin(), failures.end(),
                                                [](const Failure& a, const Failure& b) { return a.index < b.index; });
    if (first_failure->index != std::numeric_limits<std::uint64_t>::max()) {
        throw TrajectoryError(first_failure->index, first_failure->what);
    }

    for (unsigned w = 1; w < n_workers; ++w) {
        for (std::size_t i = 0; i < col_counts[0].size(); ++i) col_counts[0][i] += col_counts[w][i];
        for (std::size_t i = 0; i < fine_counts[0].size(); ++i) fine_counts[0][i] += fine_counts[w][i];
    }
    for (auto c : clamps) stats.clamp_events += c;

    // Serial reductions in trajectory order.
    std::vector<double> vc(m);
    for (std::uint64_t k = 0; k < m; ++k) vc[k] = stats.samples[k].v_conditioned;
    const double md = static_cast<double>(m);
    double sum = 0.0;
    for (double v : vc) sum += v;
    stats.mean_vc = sum / md;
    double ss = 0.0;
    for (double v : vc) ss += (v - stats.mean_vc) * (v - stats.mean_vc);
    stats.std_vc = m > 1 ? std::sqrt(ss / (md - 1.0)) : 0.0;
    stats.histogram = histogram(vc, options.n_bins);
    stats.violation_fraction = violation_fraction(stats.samples, stats.qsl.v_qsl);
    if (m >= 100) stats.variance = velocity_variance_formula(std::span<const VelocitySample>(stats.samples), params);

    stats.mean_path.resize(n_path);
    for (std::size_t j = 0; j < n_path; ++j) {
        Vec3 s1 = Vec3::Zero();
        Vec3 s2 = Vec3::Zero();
        for (std::uint64_t k = 0; k < m; ++k) {
            const double* src = &path_states[(k * n_path + j) * 3];
            const Vec3 r(src[0], src[1], src[2]);
            s1 += r;
            s2 += r.cwiseProduct(r);
        }
        auto& pt = stats.mean_path[j];
        pt.t = static_cast<double>(grid_index(j + 1, n_path, n_steps)) * params.dt;
        pt.mean = s1 / md;
        if (m > 1) {
            const Vec3 var = ((s2 - md * pt.mean.cwiseProduct(pt.mean)) / (md - 1.0)).cwiseMax(0.0);
            pt.standard_error = (var / md).cwiseSqrt();
        }
        pt.analytic = ensemble_state_analytic(pt.t, params).vec();
    }

    auto& cm = stats.colormap;
    cm.f_edges.resize(n_f + 1);
    for (std::size_t b = 0; b <= n_f; ++b) cm.f_edges[b] = static_cast<double>(b) / static_cast<double>(n_f);
    const double f_width = 1.0 / static_cast<double>(n_f);
    for (std::size_t c = 0; c < n_cols; ++c) {
        const double t = static_cast<double>(grid_index(c, n_cols - 1, n_steps)) * params.dt;
        cm.times.push_back(t);
        std::vector<double> col(n_f);
        for (std::size_t b = 0; b < n_f; ++b) {
            col[b] = static_cast<double>(col_counts[0][c * n_f + b]) / (md * f_width);
        }
        cm.density.push_back(std::move(col));
        cm.f_ensemble.push_back(fidelity(params.initial, ensemble_state_analytic(t, params)));
        cm.f_qsl.push_back(qsl_fidelity(t, params));

        const std::span<const std::uint64_t> fine(&fine_counts[0][c * kQuantileBins], kQuantileBins);
        stats.fidelity_quantiles.push_back(
            QuantileBand{t, quantile_from_counts(fine, m, 0.1), quantile_from_counts(fine, m, 0.5),
                         quantile_from_counts(fine, m, 0.9)});
    }
    const double f_qsl_final = cm.f_qsl.back();
    const auto below = std::count_if(stats.samples.begin(), stats.samples.end(),
                                     [&](const VelocitySample& s) { return s.f_final < f_qsl_final; });
    cm.final_sub_qsl_fraction = static_cast<double>(below) / md;
    return stats;
}

SweepResult sweep_kappa(const SimParams& params, std::span<const double> kappas, const EnsembleOptions& options) {
    if (kappas.empty()) throw ConfigError("kappas", "empty kappa list");
    for (double k : kappas) {
        if (!(k >= 0.0) || !std::isfinite(k)) throw ConfigError("kappas", "each kappa must be >= 0");
    }
    SweepResult out;
    for (double k : kappas) {
        SimParams p = params;
        p.kappa = k;
        const EnsembleStats s = run_ensemble(p, options);
        out.rows.push_back(SweepRow{k, s.mean_vc, s.std_vc, s.violation_fraction, s.qsl.v_ensemble, s.qsl.v_qsl,
                                    s.clamp_events});
    }
    out.std_monotone = std::is_sorted(out.rows.begin(), out.rows.end(),
                                      [](const SweepRow& a, const SweepRow& b) { return a.std_vc < b.std_vc; });
    return out;
}

FidelityColormap fidelity_colormap_data(const SimParams& params, std::size_t n_time_bins, std::size_t n_f_bins,
                                        const EnsembleOptions& options) {
    EnsembleOptions o = options;
    o.n_time_bins = n_time_bins;
    o.n_f_bins = n_f_bins;
    return run_ensemble(params, o).colormap;
}

PassageStats passage_time_distribution(const SimParams& params, double target_angle, const EnsembleOptions& options) {
    params.validate();
    if (!(target_angle > 0.0 && target_angle <= std::numbers::pi / 2.0)) {
        throw ConfigError("target_angle", "must lie in (0, pi/2]");
    }
    PassageStats out;
    out.target_angle = target_angle;
    out.qsl = qsl_report(params, target_angle);

    double longest = 0.0;
    for (double t : {out.qsl.tau_qsl_angle, out.qsl.tau_qsl_ratio, out.qsl.tau_qsl_sweep, out.qsl.tau_qsl_bound}) {
        if (std::isfinite(t)) longest = std::max(longest, t);
    }
    const auto n_steps = static_cast<std::uint64_t>(std::ceil(std::max(params.tau, 2.0 * longest) / params.dt - 1e-9));
    out.horizon = static_cast<double>(n_steps) * params.dt;

    const std::uint64_t m = params.n_traj;
    const unsigned n_workers = resolve_workers(options, m);
    out.times.resize(m);
    std::vector<std::uint64_t> clamps(n_workers, 0);
    std::vector<Failure> failures(n_workers);

    run_chunks(m, options, n_workers, [&](std::uint64_t begin, std::uint64_t end, unsigned w) {
        for (std::uint64_t k = begin; k < end; ++k) {
            if (k > failures[w].index) return;
            try {
                ConditionedEvolution evo(params);
                GaussianIncrements gen(stream_seed(params.seed, k), params.dt);
                PassageDetector det(target_angle);
                double f_prev = evo.fidelity();
                for (std::uint64_t i = 1; i <= n_steps; ++i) {
                    evo.advance(gen.next());
                    const double f = evo.fidelity();
                    if (det.observe(static_cast<double>(i) * params.dt, params.dt, f_prev, f)) break;
                    f_prev = f;
                }
                out.times[k] = det.time();
                clamps[w] += evo.clamp_events();
            } catch (const std::exception& e) {
                if (k < failures[w].index) failures[w] = Failure{k, e.what()};
                return;
            }
        }
    });

    const auto first_failure = std::min_element(failures.begin(), failures.end(),
                                                [](const Failure& a, const Failure& b) { return a.index < b.index; });
    if (first_failure->index != std::numeric_limits<std::uint64_t>::max()) {
        throw TrajectoryError(first_failure->index, first_failure->what);
    }
    for (auto c : clamps) out.clamp_events += c;

    std::vector<double> reached;
    reached.reserve(m);
    for (const auto& t : out.times) {
        if (t) reached.push_back(*t);
    }
    out.reached = reached.size();
    out.unreached = m - out.reached;
    if (!reached.empty()) out.histogram = histogram(reached, options.n_bins);

    const auto fraction_below = [&](double limit) {
        if (!std::isfinite(limit)) return 0.0;
        const auto n = std::count_if(reached.begin(), reached.end(), [&](double t) { return t < limit; });
        return static_cast<double>(n) / static_cast<double>(m);
    };
    out.fraction_below_tau_qsl = fraction_below(out.qsl.tau_qsl_angle);
    out.fraction_below_ratio = fraction_below(out.qsl.tau_qsl_ratio);
    out.fraction_below_sweep = fraction_below(out.qsl.tau_qsl_sweep);
    out.fraction_below_bound = fraction_below(out.qsl.tau_qsl_bound);
    return out;
}

}  // namespace qsltraj

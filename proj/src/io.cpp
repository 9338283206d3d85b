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

#include "qsltraj/io.hpp"

#include "qsltraj/ensemble.hpp"
#include "qsltraj/errors.hpp"
#include "qsltraj/integrator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace qsltraj {

namespace {

using nlohmann::json;

json real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec_json(const Vec3& v) { return json::array({real(v.x()), real(v.y()), real(v.z())}); }

void append_row(std::string& out, std::initializer_list<std::string_view> cells) {
    bool first = true;
    for (auto c : cells) {
        if (!first) out += ',';
        out += c;
        first = false;
    }
    out += '\n';
}

std::string with_header(std::string_view header) {
    std::string s(header);
    s += '\n';
    return s;
}

}  // namespace

std::string format_real(double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

std::string format_optional(std::optional<double> v) {
    return v && std::isfinite(*v) ? format_real(*v) : std::string();
}

std::string trajectory_csv(const TrajectoryRecord& traj, std::size_t stride) {
    if (stride == 0) throw DomainError("trajectory_csv: stride must be >= 1");
    const std::size_t n = traj.states.size();
    std::string out = with_header(kTrajectoryHeader);
    std::size_t i = 0;
    while (i < n) {
        const std::size_t next = (i + 1 == n) ? n : std::min(i + stride, n - 1);
        std::string dw;
        if (next < n) {
            double sum = 0.0;
            for (std::size_t j = i; j < next; ++j) sum += traj.wiener[j];
            dw = format_real(sum);
        }
        const auto& r = traj.states[i];
        append_row(out, {format_real(traj.times[i]), format_real(r.x()), format_real(r.y()), format_real(r.z()),
                         format_real(traj.fidelity_path[i]), dw});
        i = next;
    }
    return out;
}

std::string ensemble_csv(const std::vector<VelocitySample>& samples) {
    std::string out = with_header(kEnsembleHeader);
    for (const auto& s : samples) {
        append_row(out, {std::to_string(s.traj_index), format_real(s.v_conditioned), format_real(s.bures_final),
                         format_optional(s.passage_time), format_real(s.f_final)});
    }
    return out;
}

std::string histogram_csv(const Histogram& h) {
    std::string out = with_header(kHistogramHeader);
    for (std::size_t i = 0; i < h.n_bins(); ++i) {
        append_row(out, {format_real(h.bin_edges[i]), format_real(h.bin_edges[i + 1]), std::to_string(h.counts[i]),
                         format_real(h.density[i])});
    }
    return out;
}

std::string colormap_csv(const FidelityColormap& cm) {
    std::string out = with_header(kColormapHeader);
    for (std::size_t c = 0; c < cm.times.size(); ++c) {
        const std::string t = format_real(cm.times[c]);
        for (std::size_t b = 0; b + 1 < cm.f_edges.size(); ++b) {
            append_row(out, {t, format_real(cm.f_edges[b]), format_real(cm.f_edges[b + 1]),
                             format_real(cm.density[c][b])});
        }
    }
    return out;
}

std::string curves_csv(const FidelityColormap& cm) {
    std::string out = with_header(kCurvesHeader);
    for (std::size_t c = 0; c < cm.times.size(); ++c) {
        append_row(out, {format_real(cm.times[c]), format_real(cm.f_ensemble[c]), format_real(cm.f_qsl[c])});
    }
    return out;
}

std::string sweep_csv(const SweepResult& sweep) {
    std::string out = with_header(kSweepHeader);
    for (const auto& r : sweep.rows) {
        append_row(out, {format_real(r.kappa), format_real(r.mean_vc), format_real(r.std_vc),
                         format_real(r.violation_fraction), format_real(r.v_ensemble), format_real(r.v_qsl)});
    }
    return out;
}

std::string passage_csv(const PassageStats& passage) {
    std::string out = with_header(kPassageHeader);
    for (std::size_t k = 0; k < passage.times.size(); ++k) {
        append_row(out, {std::to_string(k), format_optional(passage.times[k])});
    }
    return out;
}

json params_json(const SimParams& p) {
    return json{{"omega", p.omega},
                {"kappa", p.kappa},
                {"tau", p.tau},
                {"dt", p.dt},
                {"initial", format_bloch(p.initial)},
                {"n_traj", p.n_traj},
                {"seed", p.seed},
                {"clamp_tolerance", p.clamp_tolerance},
                {"max_norm_defect", p.max_norm_defect}};
}

json stats_json(const EnsembleStats& s) {
    json j;
    j["v_ensemble"] = real(s.qsl.v_ensemble);
    j["v_qsl"] = real(s.qsl.v_qsl);
    j["target_angle"] = real(s.qsl.target_angle);
    j["tau_qsl_angle"] = real(s.qsl.tau_qsl_angle);
    j["tau_qsl_ratio"] = real(s.qsl.tau_qsl_ratio);
    j["tau_qsl_sweep"] = real(s.qsl.tau_qsl_sweep);
    j["tau_qsl_bound"] = real(s.qsl.tau_qsl_bound);
    j["n_traj"] = s.samples.size();
    j["mean_vc"] = real(s.mean_vc);
    j["std_vc"] = real(s.std_vc);
    j["var_vc_sample"] = s.variance ? real(s.variance->sample) : real(s.std_vc * s.std_vc);
    j["var_vc_sample_se"] = s.variance ? real(s.variance->sample_se) : json(nullptr);
    j["var_vc_formula"] = s.variance ? real(s.variance->formula) : json(nullptr);
    j["var_vc_formula_se"] = s.variance ? real(s.variance->formula_se) : json(nullptr);
    j["violation_fraction"] = real(s.violation_fraction);
    j["final_sub_qsl_fraction"] = real(s.colormap.final_sub_qsl_fraction);
    const BimodalityReport bi = bimodality(s.histogram);
    j["histogram"] = {{"n_bins", s.histogram.n_bins()},
                      {"degenerate", s.histogram.degenerate},
                      {"n_maxima", bi.n_maxima},
                      {"bimodal", bi.bimodal}};
    j["clamp_events"] = s.clamp_events;

    json path = json::array();
    for (const auto& p : s.mean_path) {
        path.push_back({{"t", real(p.t)},
                        {"mean", vec_json(p.mean)},
                        {"standard_error", vec_json(p.standard_error)},
                        {"analytic", vec_json(p.analytic)}});
    }
    j["mean_path"] = std::move(path);
    json bands = json::array();
    for (const auto& q : s.fidelity_quantiles) {
        bands.push_back({{"t", real(q.t)}, {"q10", real(q.q10)}, {"q50", real(q.q50)}, {"q90", real(q.q90)}});
    }
    j["fidelity_quantiles"] = std::move(bands);
    return j;
}

json sweep_json(const SweepResult& sweep) {
    json rows = json::array();
    for (const auto& r : sweep.rows) {
        rows.push_back({{"kappa", real(r.kappa)},
                        {"mean_vc", real(r.mean_vc)},
                        {"std_vc", real(r.std_vc)},
                        {"violation_fraction", real(r.violation_fraction)},
                        {"v_ensemble", real(r.v_ensemble)},
                        {"v_qsl", real(r.v_qsl)},
                        {"clamp_events", r.clamp_events}});
    }
    return json{{"rows", std::move(rows)}, {"std_monotone", sweep.std_monotone}};
}

json passage_json(const PassageStats& p) {
    return json{{"target_angle", real(p.target_angle)},
                {"horizon", real(p.horizon)},
                {"v_ensemble", real(p.qsl.v_ensemble)},
                {"v_qsl", real(p.qsl.v_qsl)},
                {"tau_qsl_angle", real(p.qsl.tau_qsl_angle)},
                {"tau_qsl_ratio", real(p.qsl.tau_qsl_ratio)},
                {"tau_qsl_sweep", real(p.qsl.tau_qsl_sweep)},
                {"tau_qsl_bound", real(p.qsl.tau_qsl_bound)},
                {"reached", p.reached},
                {"unreached", p.unreached},
                {"fraction_below_tau_qsl", real(p.fraction_below_tau_qsl)},
                {"fraction_below_ratio", real(p.fraction_below_ratio)},
                {"fraction_below_sweep", real(p.fraction_below_sweep)},
                {"fraction_below_bound", real(p.fraction_below_bound)},
                {"clamp_events", p.clamp_events}};
}

void check_writable(const std::filesystem::path& dir, const std::vector<std::string>& names, bool overwrite) {
    if (overwrite) return;
    for (const auto& name : names) {
        if (std::filesystem::exists(dir / name)) {
            throw ConfigError("out", (dir / name).string() + " already exists (use --overwrite)");
        }
    }
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace qsltraj

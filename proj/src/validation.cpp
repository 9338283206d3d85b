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

#include "qsltraj/validation.hpp"

#include "qsltraj/integrator.hpp"
#include "qsltraj/kernels.hpp"
#include "qsltraj/metrics.hpp"
#include "qsltraj/wiener.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

namespace qsltraj {

namespace {

std::string short_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

Check at_most(std::string name, double measured, double limit) {
    return Check{std::move(name), measured, limit, "<= " + short_real(limit), measured <= limit};
}

Check within(std::string name, double measured, double lo, double hi, double expected) {
    return Check{std::move(name), measured, expected, "in [" + short_real(lo) + ", " + short_real(hi) + "]",
                 measured >= lo && measured <= hi};
}

// |diff| / se, with a zero standard error only acceptable for a zero difference.
double z_score(double diff, double se) {
    if (se > 0.0) return std::abs(diff) / se;
    return std::abs(diff) <= 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
}

std::string kappa_label(double kappa_over_omega) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "kappa=%gw", kappa_over_omega);
    return buf;
}

// Uniform in the Bloch ball; every second state is pushed to the surface.
std::vector<BlochVector> random_states(std::uint64_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;
    std::vector<BlochVector> out;
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        Vec3 d(normal(gen), normal(gen), normal(gen));
        d.normalize();
        const double radius = (i % 2 == 0) ? 1.0 : std::cbrt(uniform(gen));
        out.push_back(BlochVector::unchecked(d * radius));
    }
    return out;
}

}  // namespace

bool ValidationReport::all_passed() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::string ValidationReport::table() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        char line[256];
        std::snprintf(line, sizeof line, "%-4s  %-48s measured=%-14.6g expected %s\n", c.passed ? "PASS" : "FAIL",
                      c.name.c_str(), c.measured, c.criterion.c_str());
        os << line;
    }
    return os.str();
}

nlohmann::json ValidationReport::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : checks) {
        arr.push_back({{"name", c.name},
                       {"measured", std::isfinite(c.measured) ? nlohmann::json(c.measured) : nlohmann::json(nullptr)},
                       {"expected", std::isfinite(c.expected) ? nlohmann::json(c.expected) : nlohmann::json(nullptr)},
                       {"criterion", c.criterion},
                       {"passed", c.passed}});
    }
    return nlohmann::json{{"checks", std::move(arr)}, {"all_passed", all_passed()}};
}

std::vector<Check> check_representation(const SimParams& params, const ValidationOptions& options) {
    const double sign = options.fault == Fault::diffusion_sign ? -1.0 : 1.0;
    double drift_err = 0.0;
    double diffusion_err = 0.0;
    double norm_err = 0.0;
    for (const auto& r : random_states(options.n_random_states, stream_seed(params.seed, 0x5EED0001ULL))) {
        const DensityMatrix rho = bloch_to_density(r);
        drift_err = std::max(drift_err, (bloch_drift(r, params) - bloch_components(liouvillian(rho, params))).norm());
        diffusion_err = std::max(
            diffusion_err, (sign * bloch_diffusion(r, params) - bloch_components(innovation(rho, params))).norm());
        norm_err = std::max(norm_err, std::abs(liouvillian_norm(rho, params) - liouvillian_norm_radical(r, params)));
    }
    return {at_most("representation: Bloch drift vs L[rho]", drift_err, 1e-12),
            at_most("representation: Bloch diffusion vs I[rho]", diffusion_err, 1e-12),
            at_most("representation: SVD norm vs radical", norm_err, 1e-10)};
}

std::vector<Check> check_ensemble_mean_path(const SimParams& params, const ValidationOptions& options) {
    std::vector<Check> out;
    EnsembleOptions eo;
    eo.workers = options.workers;
    eo.n_time_bins = 1;
    eo.n_f_bins = 2;
    for (double k : options.path_kappas) {
        SimParams p = params;
        p.kappa = k * params.omega;
        p.n_traj = options.n_traj;
        const EnsembleStats s = run_ensemble(p, eo);
        double worst = 0.0;
        for (const auto& pt : s.mean_path) {
            for (int i = 0; i < 3; ++i) {
                worst = std::max(worst, z_score(pt.mean(i) - pt.analytic(i), pt.standard_error(i)));
            }
        }
        out.push_back(at_most("ensemble mean path, max |z| (" + kappa_label(k) + ")", worst, 3.0));
    }
    return out;
}

std::vector<Check> check_velocity_identities(const EnsembleStats& stats) {
    const double tau = stats.params.tau;
    double identity = 0.0;
    double excess = -std::numeric_limits<double>::infinity();
    for (const auto& s : stats.samples) {
        const double sl = std::sin(s.bures_final);
        identity = std::max(identity, std::abs(s.v_conditioned * tau - sl * sl));
        excess = std::max(excess, s.v_conditioned - 1.0 / tau);
    }
    const double m = static_cast<double>(stats.samples.size());
    const double se = stats.std_vc / std::sqrt(m);
    const double z_mean = z_score(stats.mean_vc - stats.qsl.v_ensemble, se);

    std::vector<Check> out{
        at_most("fidelity identity max |V_C tau - sin^2 L_C|", identity, 1e-6),
        at_most("velocity ceiling max(V_C - 1/tau)", excess, 1e-6),
        at_most("mean conditioned velocity |z| vs V", z_mean, 3.0),
    };
    if (stats.variance) {
        const auto& v = *stats.variance;
        out.push_back(at_most("variance formula vs sample |z|", z_score(v.formula - v.sample, v.combined_se()), 3.0));
    }
    return out;
}

std::vector<Check> check_velocity_routes(const SimParams& params) {
    const EnsembleVelocityRoutes v = ensemble_velocity_routes(params);
    const QslVelocityRoutes q = qsl_velocity_routes(params);
    const double v_spread = std::max({std::abs(v.liouvillian_quadrature - v.bloch_time_average),
                                      std::abs(v.liouvillian_quadrature - v.fidelity_endpoint),
                                      std::abs(v.bloch_time_average - v.fidelity_endpoint)});
    return {at_most("ensemble velocity routes spread", v_spread, 1e-8),
            at_most("QSL velocity SVD vs radical", std::abs(q.svd - q.radical), 1e-8),
            at_most("V - V_QSL", v.liouvillian_quadrature - q.svd, 0.0)};
}

std::vector<Check> check_diffusivity(const SimParams& params, const ValidationOptions& options) {
    SimParams p = params;
    p.dt = options.diffusivity_dt / params.omega;
    p.tau = p.dt;
    const DiffusivityReport rep = brownian_diffusivity_check(p, options.diffusivity_samples);
    std::vector<Check> out;
    for (const auto& probe : rep.probes) {
        char label[96];
        if (probe.predicted_rate > 0.0) {
            std::snprintf(label, sizeof label, "diffusivity rel. deviation (z=%.2f)", probe.state.z());
            out.push_back(at_most(label, probe.relative_deviation, 0.05));
        } else {
            // Pure deterministic rotation at the pole: dL^2 = omega^2 dt^2.
            std::snprintf(label, sizeof label, "pole dL^2 / (omega dt)^2 (z=%.2f)", probe.state.z());
            const double ratio = probe.mean_dl2 / std::pow(params.omega * p.dt, 2);
            out.push_back(within(label, ratio, 1.0 - 1e-6, 1.0 + 1e-6, 1.0));
        }
    }
    return out;
}

std::vector<Check> check_convergence(const SimParams& params, const ValidationOptions& options) {
    const ConvergenceReport rep = convergence_check(params, options.convergence_paths);
    return {within("strong convergence order", rep.strong_order, 0.4, 1.1, 0.5),
            within("purity defect order under dt halving", rep.purity_order, 0.8, 1.2, 1.0)};
}

ValidationReport run_validation(const SimParams& params, const ValidationOptions& options) {
    params.validate();
    ValidationReport rep;
    const auto add = [&](std::vector<Check> cs) {
        for (auto& c : cs) rep.checks.push_back(std::move(c));
    };
    add(check_representation(params, options));
    add(check_velocity_routes(params));

    SimParams p = params;
    p.n_traj = options.n_traj;
    EnsembleOptions eo;
    eo.workers = options.workers;
    add(check_velocity_identities(run_ensemble(p, eo)));
    add(check_ensemble_mean_path(params, options));
    add(check_diffusivity(params, options));
    add(check_convergence(params, options));
    return rep;
}

}  // namespace qsltraj

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

#include "qsltraj/integrator.hpp"

#include "qsltraj/errors.hpp"
#include "qsltraj/kernels.hpp"

#include <cmath>
#include <sstream>

namespace qsltraj {

namespace {

constexpr double kPureTolerance = 1e-9;

struct StepOverlaps {
    double liouvillian;  // Tr(rho0 L[rho]) = r0 . drift / 2
    double innovation;   // Tr(rho0 I[rho]) = r0 . diffusion / 2
};

// Shared by the streaming integrator and the record replay so both produce
// bit-identical accumulators.
StepResult raw_step(const Vec3& r, double dW, const SimParams& params, const Vec3& r0, StepOverlaps& overlaps) {
    const Vec3 f = drift_rate(r, params.omega, params.kappa);
    const Vec3 g = diffusion_rate(r, params.kappa);
    overlaps.liouvillian = 0.5 * r0.dot(f);
    overlaps.innovation = 0.5 * r0.dot(g);

    StepResult out;
    out.raw = r + f * params.dt + g * dW;
    const double n = out.raw.norm();
    out.norm_defect = n - 1.0;
    if (!std::isfinite(n) || std::abs(out.norm_defect) > params.max_norm_defect) {
        std::ostringstream os;
        os << "Euler-Maruyama step left the Bloch sphere by " << out.norm_defect
           << " (limit " << params.max_norm_defect << "); reduce dt";
        throw StepTooLargeError(os.str(), out.norm_defect);
    }
    out.clamp_event = std::abs(out.norm_defect) > params.clamp_tolerance;
    out.state = BlochVector::unchecked(out.raw / n);
    return out;
}

}  // namespace

StepResult step_euler_maruyama(const BlochVector& r, double dW, const SimParams& params) {
    if (!r.is_pure(kPureTolerance)) {
        throw DomainError("step_euler_maruyama expects a pure state (|r| = 1)");
    }
    if (!std::isfinite(dW)) throw DomainError("step_euler_maruyama: non-finite dW");
    StepOverlaps overlaps{};
    return raw_step(r.vec(), dW, params, params.initial.vec(), overlaps);
}

ConditionedEvolution::ConditionedEvolution(const SimParams& params)
    : params_(params), r0_(params.initial.vec()), state_(params.initial) {
    if (!params.initial.is_pure(kPureTolerance)) {
        throw DomainError("conditioned evolution requires a pure initial state");
    }
}

const StepResult& ConditionedEvolution::advance(double dW) {
    StepOverlaps overlaps{};
    last_ = raw_step(state_.vec(), dW, params_, r0_, overlaps);
    liouvillian_sum_ += overlaps.liouvillian * params_.dt;
    ito_sum_ += overlaps.innovation * dW;
    innovation_sq_sum_ += overlaps.innovation * overlaps.innovation * params_.dt;
    projection_sum_ += 0.5 * r0_.dot(last_.state.vec() - last_.raw);
    if (last_.clamp_event) ++clamp_events_;
    state_ = last_.state;
    ++steps_;
    return last_;
}

VelocityTerms ConditionedEvolution::terms() const noexcept {
    VelocityTerms t;
    t.tau = static_cast<double>(steps_) * params_.dt;
    if (steps_ == 0) return t;
    t.liouvillian_avg = liouvillian_sum_ / t.tau;
    t.ito_integral = ito_sum_;
    t.innovation_sq_avg = innovation_sq_sum_ / t.tau;
    t.projection_sum = projection_sum_;
    return t;
}

TrajectoryRecord simulate_trajectory(const SimParams& params, std::span<const double> increments) {
    params.validate();
    const std::uint64_t n = params.n_steps();
    if (increments.size() != n) throw DomainError("increment count does not match tau/dt");

    TrajectoryRecord rec;
    rec.times.reserve(n + 1);
    rec.states.reserve(n + 1);
    rec.fidelity_path.reserve(n + 1);
    rec.wiener.assign(increments.begin(), increments.end());

    ConditionedEvolution evo(params);
    rec.times.push_back(0.0);
    rec.states.push_back(evo.state());
    rec.fidelity_path.push_back(evo.fidelity());
    for (std::uint64_t i = 0; i < n; ++i) {
        evo.advance(increments[i]);
        rec.times.push_back(static_cast<double>(i + 1) * params.dt);
        rec.states.push_back(evo.state());
        rec.fidelity_path.push_back(evo.fidelity());
    }
    rec.clamp_events = evo.clamp_events();
    return rec;
}

TrajectoryRecord simulate_trajectory(const SimParams& params, std::uint64_t traj_index) {
    params.validate();
    const std::uint64_t seed = stream_seed(params.seed, traj_index);
    const WienerStream w = wiener_stream(params.n_steps(), params.dt, seed);
    TrajectoryRecord rec = simulate_trajectory(params, std::span<const double>(w.increments));
    rec.seed_used = seed;
    rec.traj_index = traj_index;
    return rec;
}

VelocityTerms velocity_terms(const TrajectoryRecord& traj, const SimParams& params) {
    const std::size_t n = traj.wiener.size();
    if (n == 0 || traj.states.size() != n + 1 || traj.fidelity_path.size() != n + 1) {
        throw DomainError("trajectory record is incomplete");
    }
    const double span = static_cast<double>(n) * params.dt;
    if (std::abs(span - params.tau) > 1e-9 * params.tau) {
        throw DomainError("trajectory record does not cover [0, tau]");
    }
    const Vec3 r0 = params.initial.vec();
    double liouvillian_sum = 0.0;
    double ito_sum = 0.0;
    double innovation_sq_sum = 0.0;
    double projection_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        StepOverlaps overlaps{};
        const StepResult step = raw_step(traj.states[i].vec(), traj.wiener[i], params, r0, overlaps);
        liouvillian_sum += overlaps.liouvillian * params.dt;
        ito_sum += overlaps.innovation * traj.wiener[i];
        innovation_sq_sum += overlaps.innovation * overlaps.innovation * params.dt;
        projection_sum += 0.5 * r0.dot(traj.states[i + 1].vec() - step.raw);
    }
    VelocityTerms t;
    t.tau = span;
    t.liouvillian_avg = liouvillian_sum / span;
    t.ito_integral = ito_sum;
    t.innovation_sq_avg = innovation_sq_sum / span;
    t.projection_sum = projection_sum;
    return t;
}

ConvergenceReport convergence_check(const SimParams& params, std::uint64_t n_paths, std::uint64_t reference_factor) {
    params.validate();
    if (n_paths == 0) throw DomainError("convergence_check needs at least one path");
    if (reference_factor < 2 || reference_factor % 2 != 0) {
        throw DomainError("reference_factor must be an even integer >= 2");
    }
    const std::uint64_t n_coarse = params.n_steps();
    const std::uint64_t half_block = reference_factor / 2;

    SimParams coarse = params;
    SimParams fine = params;
    fine.dt = params.dt / 2.0;
    SimParams ref = params;
    ref.dt = params.dt / static_cast<double>(reference_factor);

    ConvergenceReport rep;
    rep.dt = params.dt;
    rep.reference_dt = ref.dt;
    rep.n_paths = n_paths;

    double err_coarse = 0.0;
    double err_fine = 0.0;
    double defect_coarse = 0.0;
    double defect_fine = 0.0;
    auto purity_defect = [](const StepResult& s) { return 0.5 * std::abs(1.0 - s.raw.squaredNorm()); };

    for (std::uint64_t p = 0; p < n_paths; ++p) {
        GaussianIncrements gen(stream_seed(params.seed, p), ref.dt);
        ConditionedEvolution evo_ref(ref);
        ConditionedEvolution evo_fine(fine);
        ConditionedEvolution evo_coarse(coarse);
        for (std::uint64_t i = 0; i < n_coarse; ++i) {
            double coarse_dw = 0.0;
            for (int h = 0; h < 2; ++h) {
                double fine_dw = 0.0;
                for (std::uint64_t j = 0; j < half_block; ++j) {
                    const double dw = gen.next();
                    evo_ref.advance(dw);
                    fine_dw += dw;
                }
                defect_fine += purity_defect(evo_fine.advance(fine_dw));
                coarse_dw += fine_dw;
            }
            defect_coarse += purity_defect(evo_coarse.advance(coarse_dw));
        }
        err_coarse += (evo_coarse.state().vec() - evo_ref.state().vec()).norm();
        err_fine += (evo_fine.state().vec() - evo_ref.state().vec()).norm();
    }
    const double paths = static_cast<double>(n_paths);
    rep.strong_error_coarse = err_coarse / paths;
    rep.strong_error_fine = err_fine / paths;
    rep.strong_order = std::log2(rep.strong_error_coarse / rep.strong_error_fine);
    rep.purity_defect_coarse = defect_coarse / (paths * static_cast<double>(n_coarse));
    rep.purity_defect_fine = defect_fine / (paths * static_cast<double>(2 * n_coarse));
    rep.purity_order = std::log2(rep.purity_defect_coarse / rep.purity_defect_fine);
    return rep;
}

}  // namespace qsltraj

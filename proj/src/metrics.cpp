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

#include "qsltraj/metrics.hpp"

#include "qsltraj/errors.hpp"
#include "qsltraj/kernels.hpp"
#include "qsltraj/wiener.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <limits>

namespace qsltraj {

namespace {

constexpr double kQuadTol = 1e-13;
constexpr double kAbsFloor = 64.0 * std::numeric_limits<double>::epsilon();
constexpr int kMaxDepth = 12;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double rate_scale(const SimParams& params) { return std::max({params.omega, 4.0 * params.kappa, 1e-12}); }

// Adaptive Gauss-Kronrod with a relative tolerance and an absolute floor. The
// floor sits just above the rounding noise of integrands bounded by the rate
// scale; without it, decaying tails and zero crossings chase that noise down
// to the maximum depth.
template <class F>
double gk_adaptive(F& f, double a, double b, double abs_floor, int depth) {
    double err = 0.0;
    const double est = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &err);
    if (depth == 0 || err <= std::max(kQuadTol * std::abs(est), abs_floor)) return est;
    const double mid = 0.5 * (a + b);
    return gk_adaptive(f, a, mid, 0.5 * abs_floor, depth - 1) + gk_adaptive(f, mid, b, 0.5 * abs_floor, depth - 1);
}

// Integral over [a, b], split into pieces no longer than a quarter of the
// fastest time scale so the oscillating integrands stay well resolved.
template <class F>
double integrate(F&& f, double a, double b, const SimParams& params) {
    if (b <= a) return 0.0;
    const double rate = rate_scale(params);
    const double piece = 0.25 / rate;
    const auto n = static_cast<std::size_t>(std::ceil((b - a) / piece));
    const double h = (b - a) / static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = a + static_cast<double>(i) * h;
        const double hi = (i + 1 == n) ? b : lo + h;
        sum += gk_adaptive(f, lo, hi, kAbsFloor * rate * (hi - lo), kMaxDepth);
    }
    return sum;
}

// Bisection on a monotone-at-the-root predicate; `lo` fails and `hi` holds.
template <class Pred>
double bisect(Pred&& reached, double lo, double hi) {
    for (int i = 0; i < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        (reached(mid) ? hi : lo) = mid;
    }
    return hi;
}

double default_horizon(const SimParams& params) {
    return std::max(params.tau, 20.0 * std::numbers::pi / params.omega);
}

void require_target(double target) {
    if (!(target >= 0.0 && target <= std::numbers::pi / 2.0)) {
        throw DomainError("target angle must lie in [0, pi/2]");
    }
}

}  // namespace

double fidelity(const DensityMatrix& rho0, const DensityMatrix& rhot) {
    if (purity(rho0) < 1.0 - 1e-9) throw DomainError("fidelity: reference state must be pure");
    return (rho0.matrix() * rhot.matrix()).trace().real();
}

double fidelity(const BlochVector& r0, const BlochVector& rt) { return 0.5 * (1.0 + r0.dot(rt)); }

double bures_angle(double f) {
    if (!(f >= -tolerance::kExact && f <= 1.0 + tolerance::kExact)) {
        throw DomainError("bures_angle: fidelity outside [0, 1]");
    }
    return std::acos(std::sqrt(std::clamp(f, 0.0, 1.0)));
}

double liouvillian_norm(const DensityMatrix& rho, const SimParams& params) {
    const Matrix2c l = liouvillian(rho, params);
    Eigen::JacobiSVD<Matrix2c> svd(l);
    return svd.singularValues()(0);
}

double liouvillian_norm_radical(const BlochVector& r, const SimParams& params) {
    const double w = params.omega;
    const double k = params.kappa;
    const double x = r.x();
    const double y = r.y();
    const double z = r.z();
    const double q = 0.25 * w * w * (x * x + z * z) + 4.0 * k * k * (x * x + y * y) - 2.0 * k * w * x * z;
    return std::sqrt(std::max(q, 0.0));
}

EnsembleVelocityRoutes ensemble_velocity_routes(const SimParams& params) {
    params.validate();
    const DensityMatrix rho0 = bloch_to_density(params.initial);
    const double tau = params.tau;

    EnsembleVelocityRoutes out{};
    out.liouvillian_quadrature = -integrate(
        [&](double t) {
            const Matrix2c l = liouvillian(bloch_to_density(ensemble_state_analytic(t, params)), params);
            return (rho0.matrix() * l).trace().real();
        },
        0.0, tau, params) / tau;

    const auto mean_coord = [&](int i) {
        return integrate([&](double t) { return ensemble_state_analytic(t, params).vec()(i); }, 0.0, tau, params) /
               tau;
    };
    const double xb = mean_coord(0);
    const double yb = mean_coord(1);
    const double zb = mean_coord(2);
    const BlochVector& r0 = params.initial;
    out.bloch_time_average =
        -0.5 * params.omega * (r0.x() * zb - r0.z() * xb) + 2.0 * params.kappa * (r0.x() * xb + r0.y() * yb);

    out.fidelity_endpoint = (1.0 - fidelity(r0, ensemble_state_analytic(tau, params))) / tau;
    return out;
}

double ensemble_velocity(const SimParams& params) { return ensemble_velocity_routes(params).liouvillian_quadrature; }

QslVelocityRoutes qsl_velocity_routes(const SimParams& params) {
    params.validate();
    QslVelocityRoutes out{};
    out.svd = integrate(
                  [&](double t) {
                      return liouvillian_norm(bloch_to_density(ensemble_state_analytic(t, params)), params);
                  },
                  0.0, params.tau, params) /
              params.tau;
    out.radical = qsl_distance(params.tau, params) / params.tau;
    return out;
}

double qsl_velocity(const SimParams& params) { return qsl_velocity_routes(params).svd; }

double qsl_distance(double t, const SimParams& params) {
    if (!(t >= 0.0)) throw DomainError("qsl_distance: t must be >= 0");
    return integrate([&](double s) { return liouvillian_norm_radical(ensemble_state_analytic(s, params), params); },
                     0.0, t, params);
}

double qsl_fidelity(double t, const SimParams& params) { return std::max(0.0, 1.0 - qsl_distance(t, params)); }

std::optional<double> ensemble_passage_time(const SimParams& params, double target, std::optional<double> horizon) {
    require_target(target);
    if (target == 0.0) return 0.0;
    const double t_max = horizon.value_or(default_horizon(params));
    // L >= target  <=>  F <= cos^2(target); compare fidelities to avoid acos in the scan.
    // The margin keeps an asymptotic approach from registering through rounding.
    const double f_star = std::cos(target) * std::cos(target) - 1e-12;
    const auto reached = [&](double t) { return fidelity(params.initial, ensemble_state_analytic(t, params)) <= f_star; };
    const double h = std::min(1e-3 / std::max(params.omega, 4.0 * params.kappa), t_max / 16.0);
    double prev = 0.0;
    for (double t = h; t <= t_max + 0.5 * h; t += h) {
        const double tt = std::min(t, t_max);
        if (reached(tt)) return bisect(reached, prev, tt);
        prev = tt;
    }
    return std::nullopt;
}

QslReport qsl_report(const SimParams& params, double target_angle) {
    require_target(target_angle);
    QslReport rep;
    rep.target_angle = target_angle;
    rep.v_ensemble = ensemble_velocity(params);
    rep.v_qsl = qsl_velocity(params);
    rep.tau_qsl_angle = ensemble_passage_time(params, target_angle).value_or(kNaN);
    rep.tau_qsl_ratio = rep.v_qsl > 0.0 ? target_angle / rep.v_qsl : kNaN;
    const double s2 = std::sin(target_angle) * std::sin(target_angle);
    rep.tau_qsl_sweep = rep.v_ensemble > 0.0 ? s2 / rep.v_ensemble : kNaN;

    // qsl_distance is nondecreasing; march it piecewise until it passes s2.
    rep.tau_qsl_bound = kNaN;
    const double t_max = default_horizon(params);
    const double rate = rate_scale(params);
    const double piece = 0.25 / rate;
    const auto norm_at = [&](double s) {
        return liouvillian_norm_radical(ensemble_state_analytic(s, params), params);
    };
    double acc = 0.0;
    for (double lo = 0.0; lo < t_max; lo += piece) {
        const double hi = std::min(lo + piece, t_max);
        const double seg = gk_adaptive(norm_at, lo, hi, kAbsFloor * rate * (hi - lo), kMaxDepth);
        if (acc + seg >= s2) {
            const double base = acc;
            rep.tau_qsl_bound = bisect(
                [&](double t) {
                    return base + gk_adaptive(norm_at, lo, t, kAbsFloor * rate * (t - lo), kMaxDepth) >= s2;
                },
                lo, hi);
            break;
        }
        acc += seg;
    }
    return rep;
}

VelocitySample make_velocity_sample(const VelocityTerms& terms, double f_final, std::optional<double> passage,
                                    std::uint64_t traj_index) {
    VelocitySample s;
    s.terms = terms;
    s.v_conditioned = terms.v_conditioned();
    s.f_final = f_final;
    s.bures_final = bures_angle(f_final);
    s.passage_time = passage;
    s.traj_index = traj_index;
    return s;
}

VelocitySample conditioned_velocity(const TrajectoryRecord& traj, const SimParams& params, double target_angle) {
    const VelocityTerms terms = velocity_terms(traj, params);
    return make_velocity_sample(terms, traj.fidelity_path.back(), passage_time(traj, target_angle), traj.traj_index);
}

VarianceEstimate velocity_variance_formula(std::span<const VelocitySample> samples, const SimParams& params) {
    const std::size_t n = samples.size();
    if (n < 100) throw DomainError("velocity_variance_formula needs at least 100 trajectories");
    const double tau = params.tau;
    const double m = static_cast<double>(n);

    VarianceEstimate est;
    est.n = n;
    double mean_v = 0.0;
    // The deterministic part of V_C includes the projection remainder, so that
    // V_C = -a - (Ito integral) / tau holds exactly per trajectory.
    const auto drift_part = [tau](const VelocityTerms& t) { return t.liouvillian_avg + t.projection_sum / tau; };
    for (const auto& s : samples) {
        const auto& t = s.terms;
        const double a = drift_part(t);
        est.liouvillian_second_moment += a * a;
        est.cross_term += a * t.ito_integral;
        est.innovation_term += t.innovation_sq_avg;
        mean_v += s.v_conditioned;
    }
    est.liouvillian_second_moment /= m;
    est.cross_term *= 2.0 / (tau * m);
    est.innovation_term /= tau * m;
    mean_v /= m;

    est.v_ensemble = ensemble_velocity(params);
    est.mean_conditioned = mean_v;
    const double v2 = mean_v * mean_v;
    est.formula = est.liouvillian_second_moment - v2 + est.cross_term + est.innovation_term;

    // Spread of the per-trajectory summand q gives the Monte Carlo error of the formula.
    const double q_mean = est.formula + v2;
    double q_var = 0.0;
    double m2 = 0.0;
    double m4 = 0.0;
    for (const auto& s : samples) {
        const auto& t = s.terms;
        const double a = drift_part(t);
        const double q = a * a + 2.0 / tau * a * t.ito_integral + t.innovation_sq_avg / tau;
        q_var += (q - q_mean) * (q - q_mean);
        const double d = s.v_conditioned - mean_v;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    est.formula_se = std::sqrt(q_var / (m - 1.0) / m);
    est.sample = m2 / (m - 1.0);
    const double pop = m2 / m;
    est.sample_se = std::sqrt(std::max(m4 / m - pop * pop, 0.0) / m);
    return est;
}

VarianceEstimate velocity_variance_formula(std::span<const TrajectoryRecord> trajectories, const SimParams& params) {
    std::vector<VelocitySample> samples;
    samples.reserve(trajectories.size());
    for (const auto& tr : trajectories) samples.push_back(conditioned_velocity(tr, params));
    return velocity_variance_formula(std::span<const VelocitySample>(samples), params);
}

PassageDetector::PassageDetector(double target_angle)
    : target_(target_angle), f_threshold_(std::cos(target_angle) * std::cos(target_angle)) {
    require_target(target_angle);
}

bool PassageDetector::observe(double t, double dt, double f_prev, double f_now) {
    if (time_ || f_now > f_threshold_) return false;
    const double l_prev = bures_angle(f_prev);
    const double l_now = bures_angle(f_now);
    const double frac = l_now > l_prev ? (target_ - l_prev) / (l_now - l_prev) : 1.0;
    time_ = t - dt + std::clamp(frac, 0.0, 1.0) * dt;
    return true;
}

std::optional<double> passage_time(const TrajectoryRecord& traj, double target_angle) {
    require_target(target_angle);
    if (traj.fidelity_path.empty()) throw DomainError("passage_time: empty trajectory");
    if (target_angle == 0.0) return 0.0;
    PassageDetector det(target_angle);
    for (std::size_t i = 1; i < traj.fidelity_path.size(); ++i) {
        const double dt = traj.times[i] - traj.times[i - 1];
        if (det.observe(traj.times[i], dt, traj.fidelity_path[i - 1], traj.fidelity_path[i])) break;
    }
    return det.time();
}

double bures_line_element(const DensityMatrix& rho, const Matrix2c& drho) {
    const double scale = std::max(1.0, drho.norm());
    if ((drho - drho.adjoint()).norm() > tolerance::kExact * scale) {
        throw DomainError("bures_line_element: drho must be Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Matrix2c> es(rho.matrix());
    const auto& p = es.eigenvalues();
    const Matrix2c d = es.eigenvectors().adjoint() * drho * es.eigenvectors();
    double sum = 0.0;
    for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) {
            const double denom = p(j) + p(k);
            if (denom > 1e-12) sum += 2.0 * std::norm(d(j, k)) / denom;
        }
    }
    return sum;
}

DiffusivityProbe diffusivity_probe(const SimParams& params, const BlochVector& state, std::uint64_t n_samples,
                                   std::uint64_t seed) {
    params.validate();
    if (n_samples < 2) throw DomainError("diffusivity_probe needs at least two samples");
    const DensityMatrix rho = bloch_to_density(state);
    const Matrix2c l = liouvillian(rho, params);
    const Matrix2c in = innovation(rho, params);

    // Reuse the eigenbasis of rho across samples; the sum is then a quadratic in dW.
    Eigen::SelfAdjointEigenSolver<Matrix2c> es(rho.matrix());
    const auto& p = es.eigenvalues();
    const Matrix2c ld = es.eigenvectors().adjoint() * l * es.eigenvectors();
    const Matrix2c id = es.eigenvectors().adjoint() * in * es.eigenvectors();

    GaussianIncrements gen(seed, params.dt);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        const double dw = gen.next();
        double dl2 = 0.0;
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < 2; ++k) {
                const double denom = p(j) + p(k);
                if (denom > 1e-12) dl2 += 2.0 * std::norm(ld(j, k) * params.dt + id(j, k) * dw) / denom;
            }
        }
        sum += dl2;
        sum_sq += dl2 * dl2;
    }
    const double n = static_cast<double>(n_samples);
    DiffusivityProbe out;
    out.state = state;
    out.n_samples = n_samples;
    out.dt = params.dt;
    out.mean_dl2 = sum / n;
    out.mean_dl2_se = std::sqrt(std::max(sum_sq / n - out.mean_dl2 * out.mean_dl2, 0.0) / (n - 1.0));
    out.predicted_rate = 8.0 * params.kappa * (1.0 - state.z() * state.z());
    out.measured_rate = out.mean_dl2 / params.dt;
    out.relative_deviation =
        out.predicted_rate > 0.0 ? std::abs(out.measured_rate - out.predicted_rate) / out.predicted_rate : kNaN;
    return out;
}

DiffusivityReport brownian_diffusivity_check(const SimParams& params, std::uint64_t n_samples) {
    const std::array<double, 3> zs{0.0, 0.5, 1.0};
    DiffusivityReport rep;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        const double z = zs[i];
        const BlochVector r(std::sqrt(1.0 - z * z), 0.0, z);
        rep.probes.push_back(diffusivity_probe(params, r, n_samples, stream_seed(params.seed, 0xD1FF0000ULL + i)));
        const double dev = rep.probes.back().relative_deviation;
        if (!std::isnan(dev)) rep.max_relative_deviation = std::max(rep.max_relative_deviation, dev);
    }
    return rep;
}

}  // namespace qsltraj

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

#include "qsltraj/kernels.hpp"

#include "qsltraj/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace qsltraj {

namespace {

Matrix2c commutator(const Matrix2c& a, const Matrix2c& b) { return a * b - b * a; }

constexpr double kImagResidue = 1e-10;

double checked_real(Complex v, const char* what) {
    if (std::abs(v.imag()) > kImagResidue * std::max(1.0, std::abs(v.real()))) {
        throw std::logic_error(std::string("analytic ensemble solution left an imaginary residue in ") + what);
    }
    return v.real();
}

}  // namespace

Matrix2c liouvillian(const DensityMatrix& rho, const SimParams& params) {
    const Matrix2c& r = rho.matrix();
    const Complex minus_i(0.0, -1.0);
    return minus_i * (params.omega / 2.0) * commutator(pauli::y(), r) -
           params.kappa * commutator(pauli::z(), commutator(pauli::z(), r));
}

Matrix2c innovation(const DensityMatrix& rho, const SimParams& params) {
    const Matrix2c& r = rho.matrix();
    const Complex mean_z = (pauli::z() * r).trace();
    return std::sqrt(2.0 * params.kappa) * (pauli::z() * r + r * pauli::z() - 2.0 * mean_z * r);
}

Vec3 bloch_drift(const BlochVector& r, const SimParams& params) {
    return drift_rate(r.vec(), params.omega, params.kappa);
}

Vec3 bloch_diffusion(const BlochVector& r, const SimParams& params) {
    return diffusion_rate(r.vec(), params.kappa);
}

bool is_degenerate(const SimParams& params) noexcept {
    const double w2 = params.omega * params.omega;
    return std::abs(4.0 * params.kappa * params.kappa - w2) < 1e-9 * w2;
}

EigensystemM eigensystem_m(const SimParams& params, const BlochVector& initial) {
    if (!(params.omega > 0.0)) throw DomainError("eigensystem_m requires omega > 0");
    if (is_degenerate(params)) {
        throw DegenerateEigensystemError("4 kappa^2 == omega^2: M has a repeated eigenvalue");
    }
    const double w = params.omega;
    const double k = params.kappa;
    const Complex s = std::sqrt(Complex(4.0 * k * k - w * w, 0.0));

    EigensystemM es;
    // lambda_minus is free of cancellation; lambda_plus follows from lambda_plus * lambda_minus = omega^2.
    es.lambda_minus = -2.0 * k - s;
    es.lambda_plus = (w * w) / es.lambda_minus;
    es.v_plus = {Complex(w), -es.lambda_minus};
    es.v_minus = {Complex(w), -es.lambda_plus};

    // a w + b w = x0 ; -a lambda_minus - b lambda_plus = z0
    const double x0 = initial.x();
    const double z0 = initial.z();
    es.a = (z0 + x0 * es.lambda_plus / w) / (es.lambda_plus - es.lambda_minus);
    es.b = x0 / w - es.a;
    return es;
}

BlochVector ensemble_state_analytic(double t, const SimParams& params) {
    if (!(t >= 0.0)) throw DomainError("ensemble_state_analytic requires t >= 0");
    const BlochVector& r0 = params.initial;
    if (t == 0.0) return r0;
    const double k = params.kappa;
    const double y = r0.y() * std::exp(-4.0 * k * t);

    if (is_degenerate(params)) {
        const double w = params.omega;
        const double decay = std::exp(-2.0 * k * t);
        const double x = decay * (r0.x() + t * (-2.0 * k * r0.x() + w * r0.z()));
        const double z = decay * (r0.z() + t * (-w * r0.x() + 2.0 * k * r0.z()));
        return BlochVector::unchecked({x, y, z});
    }

    const EigensystemM es = eigensystem_m(params, r0);
    const Complex ep = std::exp(es.lambda_plus * t);
    const Complex em = std::exp(es.lambda_minus * t);
    const Complex x = es.a * es.v_plus[0] * ep + es.b * es.v_minus[0] * em;
    const Complex z = es.a * es.v_plus[1] * ep + es.b * es.v_minus[1] * em;
    return BlochVector::unchecked({checked_real(x, "x"), y, checked_real(z, "z")});
}

}  // namespace qsltraj

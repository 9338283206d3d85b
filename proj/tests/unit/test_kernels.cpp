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

#include "qsltraj/errors.hpp"
#include "qsltraj/kernels.hpp"
#include "support.hpp"

#include <array>
#include <cmath>

#include <boost/numeric/odeint.hpp>
#include <doctest.h>

using namespace qsltraj;

namespace {

const Complex I{0.0, 1.0};

Matrix2c mat(Complex a, Complex b, Complex c, Complex d) {
    Matrix2c m;
    m << a, b, c, d;
    return m;
}

double max_abs(const Matrix2c& m) { return m.cwiseAbs().maxCoeff(); }

// Master equation integrated directly on the Bloch coordinates with an
// adaptive Dormand-Prince stepper; independent of the eigen decomposition.
std::array<double, 3> ode_state(double t, double omega, double kappa, const Vec3& r0) {
    namespace ode = boost::numeric::odeint;
    std::array<double, 3> s{r0.x(), r0.y(), r0.z()};
    auto rhs = [&](const std::array<double, 3>& r, std::array<double, 3>& d, double) {
        d[0] = omega * r[2] - 4.0 * kappa * r[0];
        d[1] = -4.0 * kappa * r[1];
        d[2] = -omega * r[0];
    };
    if (t > 0.0) {
        ode::integrate_adaptive(ode::make_controlled(1e-14, 1e-14, ode::runge_kutta_dopri5<std::array<double, 3>>()),
                                rhs, s, 0.0, t, 1e-3);
    }
    return s;
}

}  // namespace

TEST_CASE("liouvillian examples") {
    const SimParams p = test::params_with(0.3);
    CHECK(max_abs(liouvillian(bloch_to_density(BlochVector(0, 0, 0)), p)) <= 1e-15);
    CHECK(max_abs(liouvillian(bloch_to_density(BlochVector(0, 0, 1)), p) - 0.5 * p.omega * pauli::x()) <= 1e-14);
    SimParams still = p;
    still.omega = 0.0;
    CHECK(max_abs(liouvillian(bloch_to_density(BlochVector(1, 0, 0)), still) + 2.0 * p.kappa * pauli::x()) <= 1e-14);
}

TEST_CASE("liouvillian matches hand-expanded commutators") {
    const SimParams p = test::params_with(0.37);
    for (const auto& r : test::random_ball(200, 3)) {
        const Matrix2c rho = bloch_to_density(r).matrix();
        const Matrix2c& sy = pauli::y();
        const Matrix2c& sz = pauli::z();
        const Matrix2c h = 0.5 * p.omega * sy;
        const Matrix2c expected = -I * (h * rho - rho * h) + p.kappa * (2.0 * sz * rho * sz - 2.0 * rho);
        CHECK(max_abs(liouvillian(bloch_to_density(r), p) - expected) <= 1e-14);
    }
}

TEST_CASE("innovation examples") {
    const SimParams p = test::params_with(0.3);
    const double s = std::sqrt(2.0 * p.kappa);
    CHECK(max_abs(innovation(bloch_to_density(BlochVector(0, 0, 1)), p)) <= 1e-15);
    CHECK(max_abs(innovation(bloch_to_density(BlochVector(0, 0, -1)), p)) <= 1e-15);
    CHECK(max_abs(innovation(bloch_to_density(BlochVector(1, 0, 0)), p) - s * pauli::z()) <= 1e-14);
    CHECK(max_abs(innovation(bloch_to_density(BlochVector(0, 0, 0)), p) - s * pauli::z()) <= 1e-14);
}

TEST_CASE("kernels are traceless and Hermitian") {
    const SimParams p = test::params_with(0.8);
    for (const auto& r : test::random_ball(1000, 5)) {
        const DensityMatrix rho = bloch_to_density(r);
        for (const Matrix2c& m : {liouvillian(rho, p), innovation(rho, p)}) {
            CHECK(std::abs(m.trace()) <= 1e-14);
            CHECK(max_abs(m - m.adjoint()) <= 1e-14);
        }
    }
}

TEST_CASE("Bloch drift and diffusion examples") {
    const SimParams p = test::params_with(0.3);
    const double s = 2.0 * std::sqrt(2.0 * p.kappa);
    CHECK((bloch_drift(BlochVector(0, 0, 1), p) - Vec3(p.omega, 0, 0)).norm() <= 1e-15);
    CHECK(bloch_drift(BlochVector(0, 0, 0), p).norm() == 0.0);
    SimParams still = p;
    still.omega = 0.0;
    CHECK((bloch_drift(BlochVector(1, 0, 0), still) - Vec3(-4.0 * p.kappa, 0, 0)).norm() <= 1e-15);
    CHECK(bloch_diffusion(BlochVector(0, 0, 1), p).norm() == 0.0);
    CHECK(bloch_diffusion(BlochVector(0, 0, -1), p).norm() == 0.0);
    CHECK((bloch_diffusion(BlochVector(1, 0, 0), p) - Vec3(0, 0, s)).norm() <= 1e-15);
    CHECK((bloch_diffusion(BlochVector(0, 0, 0), p) - Vec3(0, 0, s)).norm() <= 1e-15);
}

TEST_CASE("Bloch kernels are the components of the matrix kernels") {
    const SimParams p = test::params_with(0.61);
    for (const auto& r : test::random_ball(1000, 7)) {
        const DensityMatrix rho = bloch_to_density(r);
        // d rho = (1/2) dr . sigma, so the Bloch rate is Tr(sigma_i d rho).
        const Matrix2c l = liouvillian(rho, p);
        const Matrix2c n = innovation(rho, p);
        const Vec3 l_components((pauli::x() * l).trace().real(), (pauli::y() * l).trace().real(),
                                (pauli::z() * l).trace().real());
        const Vec3 n_components((pauli::x() * n).trace().real(), (pauli::y() * n).trace().real(),
                                (pauli::z() * n).trace().real());
        CHECK((bloch_drift(r, p) - l_components).norm() <= 1e-13);
        CHECK((bloch_diffusion(r, p) - n_components).norm() <= 1e-13);
    }
}

TEST_CASE("eigensystem of the x-z block") {
    SUBCASE("pure rotation") {
        const auto es = eigensystem_m(test::params_with(0.0), test::plus_z());
        CHECK(std::abs(es.lambda_plus - I) <= 1e-14);
        CHECK(std::abs(es.lambda_minus + I) <= 1e-14);
    }
    SUBCASE("weak drive decouples") {
        SimParams p = test::params_with(0.25);
        p.omega = 1e-6;
        const auto es = eigensystem_m(p, test::plus_z());
        CHECK(std::abs(es.lambda_plus) <= 1e-11);
        CHECK(std::abs(es.lambda_minus + 4.0 * p.kappa) <= 1e-11);
    }
    for (double kappa : {0.0, 0.1, 0.25, 0.4, 0.75, 1.0, 3.0}) {
        CAPTURE(kappa);
        const SimParams p = test::params_with(kappa);
        const auto es = eigensystem_m(p, p.initial);
        CHECK(std::abs(es.lambda_plus + es.lambda_minus + 4.0 * kappa) <= 1e-13);
        CHECK(std::abs(es.lambda_plus * es.lambda_minus - p.omega * p.omega) <= 1e-13);
        // M = [[-4 kappa, omega], [-omega, 0]] on (x, z).
        for (const auto& [lambda, v] : {std::pair{es.lambda_plus, es.v_plus}, std::pair{es.lambda_minus, es.v_minus}}) {
            const Complex mx = -4.0 * kappa * v[0] + p.omega * v[1];
            const Complex mz = -p.omega * v[0];
            CHECK(std::abs(mx - lambda * v[0]) <= 1e-12);
            CHECK(std::abs(mz - lambda * v[1]) <= 1e-12);
        }
        // Coefficients reproduce the initial state.
        CHECK(std::abs(es.a * es.v_plus[0] + es.b * es.v_minus[0] - p.initial.x()) <= 1e-13);
        CHECK(std::abs(es.a * es.v_plus[1] + es.b * es.v_minus[1] - p.initial.z()) <= 1e-13);
    }
    CHECK_THROWS_AS((void)eigensystem_m(test::params_with(0.5), test::plus_z()), DegenerateEigensystemError);
    CHECK(is_degenerate(test::params_with(0.5)));
    CHECK_FALSE(is_degenerate(test::params_with(0.4999)));
}

TEST_CASE("analytic ensemble state examples") {
    const SimParams p = test::params_with(0.3);
    CHECK(ensemble_state_analytic(0.0, p) == p.initial);
    const SimParams rot = test::params_with(0.0, 1.0, test::plus_z());
    for (double t : {0.0, 0.3, 1.0, 2.5, 7.0}) {
        const BlochVector r = ensemble_state_analytic(t, rot);
        CHECK(r.x() == doctest::Approx(std::sin(t)).epsilon(1e-13));
        CHECK(std::abs(r.y()) <= 1e-15);
        CHECK(r.z() == doctest::Approx(std::cos(t)).epsilon(1e-13));
    }
    CHECK_THROWS_AS((void)ensemble_state_analytic(-1.0, p), DomainError);
}

TEST_CASE("analytic ensemble state agrees with an adaptive ODE solution") {
    const Vec3 y_tilted = Vec3(0.3, 0.5, std::sqrt(1.0 - 0.34));
    for (const Vec3& r0 : {Vec3(0, 0, 1), default_initial_state().vec(), y_tilted}) {
        for (double kappa : {0.0, 0.1, 0.25, 0.5, 1.0}) {
            const SimParams p = test::params_with(kappa, 10.0, BlochVector(r0));
            for (int i = 0; i <= 40; ++i) {
                const double t = 0.25 * i;
                const BlochVector r = ensemble_state_analytic(t, p);
                const auto ref = ode_state(t, p.omega, kappa, r0);
                CAPTURE(kappa);
                CAPTURE(t);
                CHECK(std::abs(r.x() - ref[0]) <= 1e-8);
                CHECK(std::abs(r.y() - ref[1]) <= 1e-8);
                CHECK(std::abs(r.z() - ref[2]) <= 1e-8);
            }
        }
    }
}

TEST_CASE("analytic ensemble state is continuous through the degenerate point") {
    const SimParams at = test::params_with(0.5);
    for (double t : {0.1, 1.0, 5.0}) {
        const Vec3 mid = ensemble_state_analytic(t, at).vec();
        const Vec3 below = ensemble_state_analytic(t, test::params_with(0.5 - 1e-6)).vec();
        const Vec3 above = ensemble_state_analytic(t, test::params_with(0.5 + 1e-6)).vec();
        CHECK((mid - below).norm() <= 1e-5);
        CHECK((mid - above).norm() <= 1e-5);
    }
}

TEST_CASE("ensemble evolution contracts the Bloch vector") {
    const SimParams p = test::params_with(0.7, 10.0);
    double previous = 1.0;
    for (int i = 0; i <= 200; ++i) {
        const double n = ensemble_state_analytic(0.05 * i, p).norm();
        CHECK(n <= previous + 1e-14);
        previous = n;
    }
}

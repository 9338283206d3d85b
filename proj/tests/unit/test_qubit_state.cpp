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
#include "qsltraj/params.hpp"
#include "qsltraj/qubit_state.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace qsltraj;

namespace {

const Complex I{0.0, 1.0};

Matrix2c mat(Complex a, Complex b, Complex c, Complex d) {
    Matrix2c m;
    m << a, b, c, d;
    return m;
}

bool close(const Matrix2c& a, const Matrix2c& b, double tol = 1e-12) { return (a - b).cwiseAbs().maxCoeff() <= tol; }

}  // namespace

TEST_CASE("bloch_to_density on the axes and the center") {
    CHECK(close(bloch_to_density(BlochVector(0, 0, 0)).matrix(), mat(0.5, 0, 0, 0.5)));
    CHECK(close(bloch_to_density(BlochVector(0, 0, 1)).matrix(), mat(1, 0, 0, 0)));
    CHECK(close(bloch_to_density(BlochVector(1, 0, 0)).matrix(), mat(0.5, 0.5, 0.5, 0.5)));
}

TEST_CASE("density_to_bloch on known states") {
    auto r = density_to_bloch(DensityMatrix(mat(0.5, 0, 0, 0.5)));
    CHECK(r.vec().norm() == doctest::Approx(0.0));
    r = density_to_bloch(DensityMatrix(mat(0, 0, 0, 1)));
    CHECK(r.z() == doctest::Approx(-1.0));
    r = density_to_bloch(DensityMatrix(mat(0.5, -0.5 * I, 0.5 * I, 0.5)));
    CHECK(r.x() == doctest::Approx(0.0));
    CHECK(r.y() == doctest::Approx(1.0));
    CHECK(r.z() == doctest::Approx(0.0));
}

TEST_CASE("purity examples") {
    CHECK(purity(DensityMatrix(mat(0.5, 0, 0, 0.5))) == doctest::Approx(0.5));
    CHECK(purity(DensityMatrix(mat(1, 0, 0, 0))) == doctest::Approx(1.0));
    CHECK(purity(bloch_to_density(BlochVector(0.6, 0, 0))) == doctest::Approx(0.68));
}

TEST_CASE("matrix and Bloch round trips on random states") {
    for (const auto& r : test::random_ball(1000, 11)) {
        const DensityMatrix rho = bloch_to_density(r);
        const BlochVector back = density_to_bloch(rho);
        CHECK((back.vec() - r.vec()).norm() <= 1e-12);
        CHECK(close(bloch_to_density(back).matrix(), rho.matrix()));
        // Tr(rho sigma_i) = r_i.
        CHECK(std::abs((rho.matrix() * pauli::x()).trace().real() - r.x()) <= 1e-12);
        CHECK(std::abs((rho.matrix() * pauli::y()).trace().real() - r.y()) <= 1e-12);
        CHECK(std::abs((rho.matrix() * pauli::z()).trace().real() - r.z()) <= 1e-12);
        CHECK(purity(rho) == doctest::Approx(0.5 * (1.0 + r.norm_squared())).epsilon(1e-12));
    }
}

TEST_CASE("invalid states are rejected") {
    CHECK_THROWS_AS(BlochVector(1.0, 0.1, 0.0), InvalidStateError);
    CHECK_NOTHROW(BlochVector(1.0 + 1e-11, 0.0, 0.0));
    CHECK_THROWS_AS(DensityMatrix(mat(0.5, 0.1, 0.2, 0.5)), InvalidStateError);  // not Hermitian
    CHECK_THROWS_AS(DensityMatrix(mat(0.6, 0, 0, 0.5)), InvalidStateError);      // trace
    CHECK_THROWS_AS(DensityMatrix(mat(1.2, 0, 0, -0.2)), InvalidStateError);     // negative eigenvalue
    CHECK_THROWS_AS(BlochVector(std::nan(""), 0.0, 0.0), InvalidStateError);
}

TEST_CASE("Bloch text form") {
    const BlochVector r = parse_bloch(" 0.6, 0 ,0.8");
    CHECK(r.x() == 0.6);
    CHECK(r.z() == 0.8);
    CHECK(parse_bloch(format_bloch(default_initial_state())) == default_initial_state());
    CHECK_THROWS_AS((void)parse_bloch("1,2"), InvalidStateError);
    CHECK_THROWS_AS((void)parse_bloch("a,b,c"), InvalidStateError);
    CHECK_THROWS_AS((void)parse_bloch("1,1,1"), InvalidStateError);
}

TEST_CASE("parameter validation names the offending field") {
    auto field_of = [](SimParams p) -> std::string {
        try {
            p.validate();
        } catch (const ConfigError& e) {
            return e.field();
        }
        return "";
    };
    SimParams p;
    CHECK(field_of(p).empty());
    p.kappa = -1.0;
    CHECK(field_of(p) == "kappa");
    p = SimParams{};
    p.omega = 0.0;
    CHECK(field_of(p) == "omega");
    p = SimParams{};
    p.dt = 2.0;
    CHECK(field_of(p) == "dt");
    p = SimParams{};
    p.dt = 3e-3;  // 1 / 3e-3 is not an integer
    CHECK(field_of(p) == "dt");
    p = SimParams{};
    p.n_traj = 0;
    CHECK(field_of(p) == "n_traj");
    p = SimParams{};
    p.initial = BlochVector(0.5, 0.0, 0.0);
    CHECK(field_of(p) == "initial");
    CHECK(SimParams{}.n_steps() == 1000);
}

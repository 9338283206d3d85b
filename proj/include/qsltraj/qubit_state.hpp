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

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <string_view>

namespace qsltraj {

using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Vec3 = Eigen::Vector3d;

namespace tolerance {
inline constexpr double kExact = 1e-12;       // identities that hold analytically
inline constexpr double kAccumulated = 1e-10; // allowance for accumulated rounding
}  // namespace tolerance

namespace pauli {
[[nodiscard]] const Matrix2c& identity();
[[nodiscard]] const Matrix2c& x();
[[nodiscard]] const Matrix2c& y();
[[nodiscard]] const Matrix2c& z();
}  // namespace pauli

/// Real Bloch coordinates (x, y, z) of a qubit state, |r| <= 1.
///
/// Construction through `BlochVector(x, y, z)` validates the length; use
/// `BlochVector::unchecked` only on values produced by the integrator, which
/// keeps them on the sphere by construction.
class BlochVector {
public:
    BlochVector() = default;
    BlochVector(double x, double y, double z);
    explicit BlochVector(const Vec3& v) : BlochVector(v.x(), v.y(), v.z()) {}

    [[nodiscard]] static BlochVector unchecked(const Vec3& v) noexcept {
        BlochVector r;
        r.v_ = v;
        return r;
    }

    [[nodiscard]] double x() const noexcept { return v_.x(); }
    [[nodiscard]] double y() const noexcept { return v_.y(); }
    [[nodiscard]] double z() const noexcept { return v_.z(); }
    [[nodiscard]] const Vec3& vec() const noexcept { return v_; }
    [[nodiscard]] double norm() const noexcept { return v_.norm(); }
    [[nodiscard]] double norm_squared() const noexcept { return v_.squaredNorm(); }
    [[nodiscard]] double dot(const BlochVector& other) const noexcept { return v_.dot(other.v_); }
    [[nodiscard]] bool is_pure(double tol = tolerance::kAccumulated) const noexcept {
        return std::abs(v_.squaredNorm() - 1.0) <= tol;
    }

    friend bool operator==(const BlochVector& a, const BlochVector& b) noexcept { return a.v_ == b.v_; }

private:
    Vec3 v_ = Vec3::Zero();
};

/// 2x2 Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
public:
    /// Validates the invariants and throws InvalidStateError on violation.
    explicit DensityMatrix(const Matrix2c& m);

    [[nodiscard]] const Matrix2c& matrix() const noexcept { return m_; }
    [[nodiscard]] Complex operator()(int i, int j) const { return m_(i, j); }

private:
    Matrix2c m_;
};

/// rho = (1 + x sx + y sy + z sz) / 2.
[[nodiscard]] DensityMatrix bloch_to_density(const BlochVector& r);
/// r_i = Tr(rho sigma_i).
[[nodiscard]] BlochVector density_to_bloch(const DensityMatrix& rho);

/// Bloch components (Tr(X sigma_i)) of an arbitrary 2x2 matrix, without validation.
/// For a traceless Hermitian rate X this is the Bloch-space velocity of rho + X dt.
[[nodiscard]] Vec3 bloch_components(const Matrix2c& m);
/// Inverse of bloch_components for traceless matrices: (v . sigma) / 2.
[[nodiscard]] Matrix2c traceless_from_bloch(const Vec3& v);

/// Tr(rho^2), equal to (1 + |r|^2) / 2.
[[nodiscard]] double purity(const DensityMatrix& rho);
[[nodiscard]] double purity(const BlochVector& r) noexcept;

/// Parse "x,y,z". Throws InvalidStateError on malformed text or |r| > 1.
[[nodiscard]] BlochVector parse_bloch(std::string_view text);
/// Format as "x,y,z" with 17 significant digits.
[[nodiscard]] std::string format_bloch(const BlochVector& r);

}  // namespace qsltraj

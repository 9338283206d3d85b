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

#include "qsltraj/qubit_state.hpp"

#include "qsltraj/errors.hpp"
#include "qsltraj/io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

namespace qsltraj {

namespace pauli {

namespace {
Matrix2c make(Complex a, Complex b, Complex c, Complex d) {
    Matrix2c m;
    m << a, b, c, d;
    return m;
}
}  // namespace

const Matrix2c& identity() {
    static const Matrix2c m = Matrix2c::Identity();
    return m;
}

const Matrix2c& x() {
    static const Matrix2c m = make(0.0, 1.0, 1.0, 0.0);
    return m;
}

const Matrix2c& y() {
    static const Matrix2c m = make(0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0);
    return m;
}

const Matrix2c& z() {
    static const Matrix2c m = make(1.0, 0.0, 0.0, -1.0);
    return m;
}

}  // namespace pauli

BlochVector::BlochVector(double x, double y, double z) : v_(x, y, z) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
        throw InvalidStateError("Bloch vector has non-finite components");
    }
    if (v_.squaredNorm() > 1.0 + tolerance::kAccumulated) {
        std::ostringstream os;
        os << "Bloch vector length " << v_.norm() << " exceeds 1";
        throw InvalidStateError(os.str());
    }
}

DensityMatrix::DensityMatrix(const Matrix2c& m) : m_(m) {
    if (!m.allFinite()) {
        throw InvalidStateError("density matrix has non-finite entries");
    }
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            if (std::abs(m(i, j) - std::conj(m(j, i))) > tolerance::kExact) {
                throw InvalidStateError("density matrix is not Hermitian");
            }
        }
    }
    if (std::abs(m.trace() - 1.0) > tolerance::kExact) {
        throw InvalidStateError("density matrix trace differs from 1");
    }
    // Eigenvalues of a unit-trace 2x2 Hermitian matrix are (1 +- |r|)/2.
    const double r = bloch_components(m).norm();
    if ((1.0 - r) / 2.0 < -tolerance::kAccumulated) {
        throw InvalidStateError("density matrix has a negative eigenvalue");
    }
}

Vec3 bloch_components(const Matrix2c& m) {
    // Tr(m sx) = m01 + m10, Tr(m sy) = i (m01 - m10), Tr(m sz) = m00 - m11
    const Complex tx = m(0, 1) + m(1, 0);
    const Complex ty = Complex(0.0, 1.0) * (m(0, 1) - m(1, 0));
    const Complex tz = m(0, 0) - m(1, 1);
    return {tx.real(), ty.real(), tz.real()};
}

Matrix2c traceless_from_bloch(const Vec3& v) {
    return 0.5 * (v.x() * pauli::x() + v.y() * pauli::y() + v.z() * pauli::z());
}

DensityMatrix bloch_to_density(const BlochVector& r) {
    return DensityMatrix(0.5 * pauli::identity() + traceless_from_bloch(r.vec()));
}

BlochVector density_to_bloch(const DensityMatrix& rho) {
    return BlochVector(bloch_components(rho.matrix()));
}

double purity(const DensityMatrix& rho) {
    return (rho.matrix() * rho.matrix()).trace().real();
}

double purity(const BlochVector& r) noexcept {
    return 0.5 * (1.0 + r.norm_squared());
}

BlochVector parse_bloch(std::string_view text) {
    std::vector<double> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        std::string_view piece = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!piece.empty() && std::isspace(static_cast<unsigned char>(piece.front()))) piece.remove_prefix(1);
        while (!piece.empty() && std::isspace(static_cast<unsigned char>(piece.back()))) piece.remove_suffix(1);
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), value);
        if (piece.empty() || ec != std::errc() || ptr != piece.data() + piece.size()) {
            throw InvalidStateError("malformed Bloch vector '" + std::string(text) + "', expected x,y,z");
        }
        parts.push_back(value);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (parts.size() != 3) {
        throw InvalidStateError("malformed Bloch vector '" + std::string(text) + "', expected x,y,z");
    }
    return {parts[0], parts[1], parts[2]};
}

std::string format_bloch(const BlochVector& r) {
    return format_real(r.x()) + "," + format_real(r.y()) + "," + format_real(r.z());
}

}  // namespace qsltraj

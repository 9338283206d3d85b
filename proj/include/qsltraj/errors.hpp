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

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qsltraj {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A matrix or Bloch vector that is not a physical qubit state.
class InvalidStateError : public Error {
public:
    using Error::Error;
};

/// Input outside the domain of a metric (non-pure reference state, fidelity out of range, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Bad simulation or command configuration. `field()` names the offending parameter.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Raised by the eigensystem of the x-z block when 4 kappa^2 == omega^2.
class DegenerateEigensystemError : public Error {
public:
    using Error::Error;
};

/// An integrator step moved the Bloch vector too far off the unit sphere; dt is too large.
class StepTooLargeError : public Error {
public:
    StepTooLargeError(const std::string& message, double norm_defect)
        : Error(message), norm_defect_(norm_defect) {}

    [[nodiscard]] double norm_defect() const noexcept { return norm_defect_; }

private:
    double norm_defect_;
};

/// Wraps an error raised while integrating one trajectory of an ensemble.
class TrajectoryError : public Error {
public:
    TrajectoryError(std::uint64_t traj_index, const std::string& what)
        : Error("trajectory " + std::to_string(traj_index) + ": " + what), traj_index_(traj_index) {}

    [[nodiscard]] std::uint64_t traj_index() const noexcept { return traj_index_; }

private:
    std::uint64_t traj_index_;
};

}  // namespace qsltraj

// Copyright 2026 The centroidal-ekf Authors
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

#ifndef CENTROIDAL_EKF_ERRORS_HPP_
#define CENTROIDAL_EKF_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <utility>

namespace cekf {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed model description.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Model content breaks a structural or physical invariant. `field` names the
/// offending entity (link, joint, or foot name).
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Constraint-consistent mass matrix too ill-conditioned to invert.
class SingularMassError : public Error {
 public:
  using Error::Error;
};

/// Saddle-point contact system is rank deficient.
class SingularKKTError : public Error {
 public:
  using Error::Error;
};

/// Innovation covariance P + R is not invertible.
class SingularInnovationError : public Error {
 public:
  using Error::Error;
};

class InfeasibleScenario : public Error {
 public:
  using Error::Error;
};

class SimulationDiverged : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration input (noise file, covariance spec).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed log file. `line` is the last line that parsed correctly
/// (0 when the header itself is bad).
class FormatError : public Error {
 public:
  FormatError(const std::string& what, int last_good_line)
      : Error(what + " (last good line " + std::to_string(last_good_line) + ")"),
        last_good_line_(last_good_line) {}
  int last_good_line() const { return last_good_line_; }

 private:
  int last_good_line_;
};

}  // namespace cekf

#endif  // CENTROIDAL_EKF_ERRORS_HPP_

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

// Runs the filter over a recorded log and stores a per-frame trace.

#ifndef CENTROIDAL_EKF_PIPELINE_HPP_
#define CENTROIDAL_EKF_PIPELINE_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "centroidal_ekf/contact.hpp"
#include "centroidal_ekf/estimator.hpp"
#include "centroidal_ekf/simulate.hpp"

namespace cekf {

enum class ContactSource { kDetect, kLog };

/// "detect" or "log"; throws std::invalid_argument otherwise.
ContactSource parse_contact_source(std::string_view name);

struct EstimationOptions {
  NoiseConfig noise = NoiseConfig::defaults();
  FilterOptions filter;
  ContactSource contacts = ContactSource::kDetect;
  ContactDetectorConfig detector;
};

struct TraceRow {
  double t = 0.0;
  Vector9d raw = Vector9d::Zero();  ///< measurement computed from (q, v)
  Vector9d mean = Vector9d::Zero();
  Vector9d cov_diag = Vector9d::Zero();
  Vector9d innovation = Vector9d::Zero();
  std::vector<bool> contacts;  ///< contacts the filter used for this frame
  double nis = 0.0;
  double nees = 0.0;  ///< against the log's truth columns
};

/// Throws std::invalid_argument on a log whose dimensions do not match the
/// model, ValidationError on a bad noise configuration.
std::vector<TraceRow> run_estimation(const RobotModel& model, const std::vector<LogFrame>& log,
                                     const EstimationOptions& options = {});

std::vector<std::string> trace_header(int n_feet);
void write_trace(const std::vector<TraceRow>& trace, const std::string& path);
/// Throws IoError or FormatError (with the last good line).
std::vector<TraceRow> read_trace(const std::string& path);

/// Covariance from the command line: 9 comma-separated values (diagonal),
/// 3 values (one per c, l, k block), or the path of a JSON file holding a
/// 9-vector diagonal or a 9x9 matrix. Throws ConfigError.
Matrix9d parse_covariance_spec(std::string_view spec);

}  // namespace cekf

#endif  // CENTROIDAL_EKF_PIPELINE_HPP_

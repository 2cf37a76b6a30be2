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

// CSV persistence of simulation logs. One header line
//   t,q0..q{n+6},v0..v{n+5},tau0..tau{n-1},c0..c{m-1},
//   gt_cx,gt_cy,gt_cz,gt_lx,gt_ly,gt_lz,gt_kx,gt_ky,gt_kz
// then one row per frame, floats in shortest round-trip form.

#ifndef CENTROIDAL_EKF_LOG_IO_HPP_
#define CENTROIDAL_EKF_LOG_IO_HPP_

#include <string>
#include <vector>

#include "centroidal_ekf/model.hpp"
#include "centroidal_ekf/simulate.hpp"

namespace cekf {

std::vector<std::string> log_header(int n_joints, int n_feet);

/// Throws IoError if the file cannot be written, std::invalid_argument on
/// frames of inconsistent size.
void write_log(const std::vector<LogFrame>& frames, const std::string& path);

/// Infers n and m from the header. Throws IoError when unreadable and
/// FormatError (with the last good line) on a bad header, a short or
/// unparsable row, a non-unit quaternion, a contact flag other than 0/1, or
/// time stamps that are not strictly increasing with constant spacing.
std::vector<LogFrame> read_log(const std::string& path);

/// As above, and additionally FormatError when the log's joint or foot count
/// differs from the model's.
std::vector<LogFrame> read_log(const std::string& path, const RobotModel& model);

}  // namespace cekf

#endif  // CENTROIDAL_EKF_LOG_IO_HPP_

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

#include "centroidal_ekf/log_io.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "centroidal_ekf/errors.hpp"
#include "csv_table.hpp"

namespace cekf {
namespace {

// Spacing may wobble by decimal round-off of t = k dt, nothing more.
constexpr double kSpacingTolerance = 1e-9;
constexpr double kQuaternionTolerance = 1e-9;

int count_prefix(const std::vector<std::string>& header, const std::string& prefix) {
  return static_cast<int>(std::count_if(header.begin(), header.end(), [&](const std::string& h) {
    return h.size() > prefix.size() && h.compare(0, prefix.size(), prefix) == 0 &&
           std::isdigit(static_cast<unsigned char>(h[prefix.size()]));
  }));
}

}  // namespace

std::vector<std::string> log_header(int n_joints, int n_feet) {
  std::vector<std::string> h{"t"};
  for (int i = 0; i < n_joints + 7; ++i) h.push_back("q" + std::to_string(i));
  for (int i = 0; i < n_joints + 6; ++i) h.push_back("v" + std::to_string(i));
  for (int i = 0; i < n_joints; ++i) h.push_back("tau" + std::to_string(i));
  for (int i = 0; i < n_feet; ++i) h.push_back("c" + std::to_string(i));
  for (const char* part : {"c", "l", "k"}) {
    for (const char* axis : {"x", "y", "z"}) h.push_back(std::string("gt_") + part + axis);
  }
  return h;
}

void write_log(const std::vector<LogFrame>& frames, const std::string& path) {
  const int nj = frames.empty() ? 0 : static_cast<int>(frames.front().tau.size());
  const int nf = frames.empty() ? 0 : static_cast<int>(frames.front().contacts.size());
  for (const LogFrame& f : frames) {
    if (f.tau.size() != nj || f.q.size() != nj + 7 || f.v.size() != nj + 6 ||
        static_cast<int>(f.contacts.size()) != nf) {
      throw std::invalid_argument("log frames have inconsistent dimensions");
    }
  }
  detail::TableWriter out(path, "log", log_header(nj, nf));
  std::vector<double> row;
  for (const LogFrame& f : frames) {
    row.clear();
    row.push_back(f.t);
    row.insert(row.end(), f.q.data(), f.q.data() + f.q.size());
    row.insert(row.end(), f.v.data(), f.v.data() + f.v.size());
    row.insert(row.end(), f.tau.data(), f.tau.data() + f.tau.size());
    for (bool c : f.contacts) row.push_back(c ? 1.0 : 0.0);
    const Vector9d x = f.truth.vector();
    row.insert(row.end(), x.data(), x.data() + 9);
    out.row(row);
  }
  out.close();
}

std::vector<LogFrame> read_log(const std::string& path) {
  const detail::Table table = detail::read_table(path, "log");
  const int nj = count_prefix(table.header, "tau");
  const int nf = count_prefix(table.header, "c");
  if (table.header != log_header(nj, nf)) {
    throw FormatError("log file '" + path + "': unexpected header (expected " +
                          detail::join_header(log_header(nj, nf)) + ")",
                      0);
  }

  std::vector<LogFrame> frames;
  frames.reserve(table.rows.size());
  double spacing = 0.0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::vector<double>& row = table.rows[r];
    const int line = static_cast<int>(r) + 2;
    const auto fail = [&](const std::string& what) {
      throw FormatError("log line " + std::to_string(line) + ": " + what, line - 1);
    };
    LogFrame f;
    std::size_t i = 0;
    f.t = row[i++];
    f.q = Eigen::Map<const Eigen::VectorXd>(row.data() + i, nj + 7);
    i += nj + 7;
    f.v = Eigen::Map<const Eigen::VectorXd>(row.data() + i, nj + 6);
    i += nj + 6;
    f.tau = Eigen::Map<const Eigen::VectorXd>(row.data() + i, nj);
    i += nj;
    for (int c = 0; c < nf; ++c) {
      const double flag = row[i++];
      if (flag != 0.0 && flag != 1.0) fail("contact flag must be 0 or 1");
      f.contacts.push_back(flag == 1.0);
    }
    f.truth = CentroidalState::from_vector(Eigen::Map<const Vector9d>(row.data() + i));

    if (!std::isfinite(f.t)) fail("non-finite time stamp");
    if (!(std::abs(f.q.segment<4>(3).norm() - 1.0) <= kQuaternionTolerance)) {
      fail("base quaternion is not normalized");
    }
    if (!frames.empty()) {
      const double dt = f.t - frames.back().t;
      if (!(dt > 0.0)) fail("time stamps must be strictly increasing");
      if (frames.size() == 1) {
        spacing = dt;
      } else if (!(std::abs(dt - spacing) <= kSpacingTolerance * std::max(1.0, std::abs(f.t)))) {
        fail("time step differs from the first one");
      }
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<LogFrame> read_log(const std::string& path, const RobotModel& model) {
  std::vector<LogFrame> frames = read_log(path);
  if (!frames.empty()) {
    const auto nj = frames.front().tau.size();
    const auto nf = frames.front().contacts.size();
    if (nj != model.n_joints() || static_cast<int>(nf) != model.n_feet()) {
      throw FormatError("log file '" + path + "' has " + std::to_string(nj) + " joints and " +
                            std::to_string(nf) + " feet; model has " +
                            std::to_string(model.n_joints()) + " and " +
                            std::to_string(model.n_feet()),
                        0);
    }
  }
  return frames;
}

}  // namespace cekf

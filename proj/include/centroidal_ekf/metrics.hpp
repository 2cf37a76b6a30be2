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

// Estimate-versus-truth metrics over the post-warmup part of a trace.

#ifndef CENTROIDAL_EKF_METRICS_HPP_
#define CENTROIDAL_EKF_METRICS_HPP_

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "centroidal_ekf/pipeline.hpp"
#include "centroidal_ekf/simulate.hpp"

namespace cekf {

inline constexpr int kMaxLag = 50;

struct Metrics {
  std::size_t samples = 0;  ///< frames after warmup
  double warmup = 0.0;      ///< [s]
  std::array<double, 9> rmse{};
  /// Cross-correlation argmax in samples; positive means the estimate trails
  /// the truth.
  std::array<int, 9> lag{};
  /// Momentum components only (l, k): std of the raw first-difference
  /// residual over std of the filtered one.
  std::array<double, 6> noise_reduction{};
  /// Largest sample-to-sample change of raw and filtered momenta.
  std::array<double, 6> max_step_raw{};
  std::array<double, 6> max_step_filtered{};
  double mean_nees = 0.0;
  double mean_nis = 0.0;
};

double rmse(const std::vector<double>& estimate, const std::vector<double>& truth);

/// argmax over L in [-max_lag, max_lag] of the correlation coefficient of
/// e[t] and g[t - L] over their overlap. Ties go to the smaller |L|, then to
/// positive L. A constant signal correlates as 0, so it yields lag 0.
int estimate_lag(const std::vector<double>& estimate, const std::vector<double>& truth,
                 int max_lag = kMaxLag);

/// r_x[t] = (x[t] - x[t-1]) - (g[t] - g[t-1]); returns std(r_raw) / std(r_filtered).
/// Infinity when only the filtered residual vanishes, 1 when both do.
double noise_reduction(const std::vector<double>& raw, const std::vector<double>& filtered,
                       const std::vector<double>& truth);

/// Throws std::invalid_argument when the trace and truth lengths differ or
/// fewer than two frames remain after the warmup.
Metrics compute_metrics(const std::vector<TraceRow>& trace, const std::vector<LogFrame>& truth,
                        double warmup);

/// JSON text (2-space indent); the CLI prints exactly this.
std::string metrics_to_json(const Metrics& metrics);

}  // namespace cekf

#endif  // CENTROIDAL_EKF_METRICS_HPP_

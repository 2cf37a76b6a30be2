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

// Additive white Gaussian sensor noise on logged states and torques.

#ifndef CENTROIDAL_EKF_SENSOR_NOISE_HPP_
#define CENTROIDAL_EKF_SENSOR_NOISE_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "centroidal_ekf/simulate.hpp"

namespace cekf {

struct NoiseInjection {
  double sigma_joint_pos = 0.0;    ///< [rad]
  double sigma_joint_vel = 0.0;    ///< [rad/s]
  double sigma_torque = 0.0;       ///< [N m]
  double sigma_base_pos = 0.0;     ///< [m]
  double sigma_base_vel = 0.0;     ///< [m/s] linear
  double sigma_base_ori = 0.0;     ///< [rad] world-side tangent perturbation
  double sigma_base_angvel = 0.0;  ///< [rad/s]
  std::uint64_t seed = 0;

  /// Throws ValidationError naming the first negative or non-finite sigma.
  void validate() const;

  /// "none" (all zero) or "default". Throws std::invalid_argument otherwise.
  static NoiseInjection preset(std::string_view name);
  /// JSON object with any of the sigma_* keys and "seed"; missing keys are 0.
  /// Throws ConfigError on bad JSON or unknown keys, IoError if unreadable.
  static NoiseInjection from_json(std::string_view text);
  static NoiseInjection load(const std::string& path);
};

/// Noisy copy of `frames`; t, contact flags and truth are untouched. The
/// same seed always gives the same output.
std::vector<LogFrame> inject_noise(const std::vector<LogFrame>& frames,
                                   const NoiseInjection& noise);

}  // namespace cekf

#endif  // CENTROIDAL_EKF_SENSOR_NOISE_HPP_

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

#include "centroidal_ekf/sensor_noise.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Geometry>
#include <json.hpp>

#include "centroidal_ekf/errors.hpp"
#include "centroidal_ekf/spatial.hpp"

namespace cekf {
namespace {

struct Field {
  const char* name;
  double NoiseInjection::*member;
};

constexpr Field kFields[] = {
    {"sigma_joint_pos", &NoiseInjection::sigma_joint_pos},
    {"sigma_joint_vel", &NoiseInjection::sigma_joint_vel},
    {"sigma_torque", &NoiseInjection::sigma_torque},
    {"sigma_base_pos", &NoiseInjection::sigma_base_pos},
    {"sigma_base_vel", &NoiseInjection::sigma_base_vel},
    {"sigma_base_ori", &NoiseInjection::sigma_base_ori},
    {"sigma_base_angvel", &NoiseInjection::sigma_base_angvel},
};

}  // namespace

void NoiseInjection::validate() const {
  for (const Field& f : kFields) {
    const double value = this->*f.member;
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw ValidationError(f.name, "must be finite and nonnegative");
    }
  }
}

NoiseInjection NoiseInjection::preset(std::string_view name) {
  NoiseInjection n;
  if (name == "none") return n;
  if (name == "default") {
    n.sigma_joint_pos = 1e-3;
    n.sigma_joint_vel = 0.05;
    n.sigma_torque = 0.02;
    n.sigma_base_pos = 1e-3;
    n.sigma_base_vel = 0.02;
    n.sigma_base_ori = 2e-3;
    n.sigma_base_angvel = 0.05;
    return n;
  }
  throw std::invalid_argument("unknown noise preset '" + std::string(name) +
                              "' (expected none or default)");
}

NoiseInjection NoiseInjection::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("noise file: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("noise file: expected a JSON object");
  NoiseInjection n;
  for (const auto& [key, value] : doc.items()) {
    if (key == "seed") {
      if (!value.is_number_unsigned()) throw ConfigError("noise file: seed must be unsigned");
      n.seed = value.get<std::uint64_t>();
      continue;
    }
    bool known = false;
    for (const Field& f : kFields) {
      if (key != f.name) continue;
      if (!value.is_number()) throw ConfigError("noise file: " + key + " must be a number");
      n.*f.member = value.get<double>();
      known = true;
    }
    if (!known) throw ConfigError("noise file: unknown key '" + key + "'");
  }
  n.validate();
  return n;
}

NoiseInjection NoiseInjection::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open noise file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return from_json(text.str());
}

std::vector<LogFrame> inject_noise(const std::vector<LogFrame>& frames,
                                   const NoiseInjection& noise) {
  noise.validate();
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto draw = [&](int n, double sigma) {
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) out(i) = sigma * normal(rng);
    return out;
  };

  std::vector<LogFrame> out = frames;
  for (LogFrame& f : out) {
    const int nj = static_cast<int>(f.tau.size());
    f.q.head<3>() += draw(3, noise.sigma_base_pos);
    const Eigen::Vector3d dtheta = draw(3, noise.sigma_base_ori);
    if (!dtheta.isZero(0.0)) {
      const Eigen::Quaterniond quat(Eigen::Vector4d(f.q.segment<4>(3)));
      f.q.segment<4>(3) = (Eigen::Quaterniond(exp_so3(dtheta)) * quat).normalized().coeffs();
    }
    f.q.tail(nj) += draw(nj, noise.sigma_joint_pos);
    f.v.head<3>() += draw(3, noise.sigma_base_vel);
    f.v.segment<3>(3) += draw(3, noise.sigma_base_angvel);
    f.v.tail(nj) += draw(nj, noise.sigma_joint_vel);
    f.tau += draw(nj, noise.sigma_torque);
  }
  return out;
}

}  // namespace cekf

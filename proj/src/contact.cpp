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

#include "centroidal_ekf/contact.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>

#include "centroidal_ekf/errors.hpp"
#include "centroidal_ekf/logging.hpp"

namespace cekf {

void ContactDetectorConfig::validate() const {
  if (!(normal_threshold > 0.0) || !std::isfinite(normal_threshold)) {
    throw ValidationError("normal_threshold", "must be positive");
  }
  if (!(hysteresis >= 0.0 && hysteresis < normal_threshold)) {
    throw ValidationError("hysteresis", "must lie in [0, threshold)");
  }
  if (!(std::abs(normal_axis.norm() - 1.0) <= 1e-9)) {
    throw ValidationError("normal_axis", "must have unit norm");
  }
}

std::vector<Eigen::Vector3d> estimate_foot_forces(const RobotModel& model,
                                                  const Eigen::VectorXd& q,
                                                  const Eigen::VectorXd& tau) {
  check_state(model, q);
  if (tau.size() != model.n_joints()) {
    throw std::invalid_argument("torque vector has wrong dimension");
  }
  std::vector<Eigen::Vector3d> forces;
  forces.reserve(model.n_feet());
  for (int f = 0; f < model.n_feet(); ++f) {
    const std::vector<int>& chain = model.foot_chain(f);
    const Eigen::MatrixXd jac = contact_jacobian(model, q, ContactSet({f}));
    Eigen::MatrixXd leg_t(chain.size(), 3);
    Eigen::VectorXd leg_tau(chain.size());
    for (std::size_t i = 0; i < chain.size(); ++i) {
      leg_t.row(i) = jac.col(chain[i]).transpose();
      leg_tau(i) = tau(chain[i] - 6);
    }
    if (chain.empty()) {
      forces.push_back(Eigen::Vector3d::Zero());
      continue;
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(leg_t, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const double condition =
        sigma(sigma.size() - 1) > 0.0 ? sigma(0) / sigma(sigma.size() - 1) : INFINITY;
    const bool square = chain.size() == 3;
    Eigen::VectorXd inv(sigma.size());
    if (!square || condition > kMaxLegCondition) {
      if (condition > kMaxLegCondition) {
        log_warn("leg of foot '" + model.feet()[f].name + "' near singular (condition " +
                 std::to_string(condition) + "); damped force estimate");
      }
      const double damping = 1e-6 * sigma(0);
      for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        inv(i) = sigma(i) / (sigma(i) * sigma(i) + damping * damping);
      }
    } else {
      inv = sigma.cwiseInverse();
    }
    forces.push_back(svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * leg_tau);
  }
  return forces;
}

std::vector<double> normal_forces(const std::vector<Eigen::Vector3d>& forces,
                                  const ContactDetectorConfig& config) {
  std::vector<double> out;
  out.reserve(forces.size());
  for (const Eigen::Vector3d& f : forces) out.push_back(-f.dot(config.normal_axis));
  return out;
}

ContactSet detect_contacts(const std::vector<Eigen::Vector3d>& forces,
                           const ContactDetectorConfig& config, const ContactSet& previous) {
  const std::vector<double> normal = normal_forces(forces, config);
  std::vector<int> feet;
  for (std::size_t f = 0; f < normal.size(); ++f) {
    const bool was = previous.contains(static_cast<int>(f));
    bool now = was;
    if (normal[f] > config.normal_threshold) {
      now = true;
    } else if (normal[f] < config.normal_threshold - config.hysteresis) {
      now = false;
    }
    if (now) feet.push_back(static_cast<int>(f));
  }
  return ContactSet(std::move(feet));
}

ContactDetector::ContactDetector(const RobotModel& model, ContactDetectorConfig config)
    : model_(&model), config_(std::move(config)) {
  config_.validate();
}

ContactSet ContactDetector::update(const Eigen::VectorXd& q, const Eigen::VectorXd& tau) {
  current_ = detect_contacts(estimate_foot_forces(*model_, q, tau), config_, current_);
  return current_;
}

}  // namespace cekf

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

// Contact detection from joint torques. Each leg's torques are mapped to an
// end-effector force through the leg's own 3x3 Jacobian, ignoring leg
// dynamics, and the normal component is run through a Schmitt trigger.

#ifndef CENTROIDAL_EKF_CONTACT_HPP_
#define CENTROIDAL_EKF_CONTACT_HPP_

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "centroidal_ekf/kinodynamics.hpp"
#include "centroidal_ekf/model.hpp"

namespace cekf {

/// Leg Jacobian condition number above which the force is computed with a
/// damped inverse (near the stretched-knee singularity).
inline constexpr double kMaxLegCondition = 1e6;

struct ContactDetectorConfig {
  double normal_threshold = 3.0;  ///< [N]
  double hysteresis = 1.0;        ///< [N]
  Eigen::Vector3d normal_axis = Eigen::Vector3d::UnitZ();

  /// Throws ValidationError on threshold <= 0, hysteresis outside
  /// [0, threshold) or a non-unit normal.
  void validate() const;
};

/// Per foot, lambda = (J_leg^T)^+ tau_leg: the force the foot exerts on the
/// ground (world axes). A loaded stance foot therefore has a negative
/// component along the up axis.
std::vector<Eigen::Vector3d> estimate_foot_forces(const RobotModel& model,
                                                  const Eigen::VectorXd& q,
                                                  const Eigen::VectorXd& tau);

/// Ground reaction along the normal axis, -lambda . normal, per foot.
std::vector<double> normal_forces(const std::vector<Eigen::Vector3d>& forces,
                                  const ContactDetectorConfig& config);

/// Schmitt trigger per foot: a foot enters contact above the threshold and
/// leaves below threshold - hysteresis; anything in between (including
/// exactly the threshold) keeps the previous state.
ContactSet detect_contacts(const std::vector<Eigen::Vector3d>& forces,
                           const ContactDetectorConfig& config, const ContactSet& previous);

/// Stateful wrapper over estimate_foot_forces + detect_contacts.
class ContactDetector {
 public:
  ContactDetector(const RobotModel& model, ContactDetectorConfig config = {});

  ContactSet update(const Eigen::VectorXd& q, const Eigen::VectorXd& tau);
  const ContactSet& current() const { return current_; }
  void reset(ContactSet initial = ContactSet()) { current_ = std::move(initial); }

 private:
  const RobotModel* model_;
  ContactDetectorConfig config_;
  ContactSet current_;
};

}  // namespace cekf

#endif  // CENTROIDAL_EKF_CONTACT_HPP_

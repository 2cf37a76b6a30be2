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

// Rigid-body kinematics and dynamics of the floating-base tree:
//
//   M(q) dv + n(q, v) = B tau + Jc^T lambda
//
// All positions are computed relative to the base origin internally, so every
// quantity except absolute positions (CoM, feet) is bitwise invariant under a
// pure base translation.

#ifndef CENTROIDAL_EKF_KINODYNAMICS_HPP_
#define CENTROIDAL_EKF_KINODYNAMICS_HPP_

#include <vector>

#include <Eigen/Core>

#include "centroidal_ekf/model.hpp"
#include "centroidal_ekf/spatial.hpp"

namespace cekf {

struct GeneralizedState {
  Eigen::VectorXd q;  ///< n + 7
  Eigen::VectorXd v;  ///< n + 6
};

/// Ordered subset of the model's feet. Indices are kept sorted, so the stacked
/// contact rows always follow model foot order.
class ContactSet {
 public:
  ContactSet() = default;
  explicit ContactSet(std::vector<int> feet);

  static ContactSet all(int n_feet);
  static ContactSet from_flags(const std::vector<bool>& flags);

  const std::vector<int>& feet() const { return feet_; }
  int size() const { return static_cast<int>(feet_.size()); }
  bool empty() const { return feet_.empty(); }
  bool contains(int foot) const;
  std::vector<bool> flags(int n_feet) const;

  bool operator==(const ContactSet& other) const = default;

 private:
  std::vector<int> feet_;
};

/// Centroidal state x = [c, l, k]: CoM position, linear momentum, angular
/// momentum about the CoM (world axes).
struct CentroidalState {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  Eigen::Vector3d l = Eigen::Vector3d::Zero();
  Eigen::Vector3d k = Eigen::Vector3d::Zero();

  Vector9d vector() const;
  Vector6d momentum() const;
  static CentroidalState from_vector(const Vector9d& x);
};

/// Throws std::invalid_argument on dimension mismatch or a non-unit
/// orientation (tolerance 1e-9). `v` may be empty to skip its check.
void check_state(const RobotModel& model, const Eigen::VectorXd& q,
                 const Eigen::VectorXd& v = Eigen::VectorXd());

/// Base at the origin, identity orientation, all joints zero.
Eigen::VectorXd neutral_configuration(const RobotModel& model);

/// q (+) dq: additive on base position and joints; orientation updated by
/// exp(dq_angular) applied on the world side, consistent with world-aligned
/// angular velocities. Result quaternion is normalized.
Eigen::VectorXd integrate(const RobotModel& model, const Eigen::VectorXd& q,
                          const Eigen::VectorXd& dq);

/// Tangent vector d with integrate(q0, d) == q1.
Eigen::VectorXd difference(const RobotModel& model, const Eigen::VectorXd& q0,
                           const Eigen::VectorXd& q1);

/// World pose of every body (traversal order of model.bodies()).
struct BodyPoses {
  std::vector<Eigen::Matrix3d> rotation;
  std::vector<Eigen::Vector3d> position;
};
BodyPoses body_poses(const RobotModel& model, const Eigen::VectorXd& q);

Eigen::Vector3d com_position(const RobotModel& model, const Eigen::VectorXd& q);

/// CoM minus base origin (world axes), computed without the base position.
Eigen::Vector3d com_offset_from_base(const RobotModel& model, const Eigen::VectorXd& q);

Eigen::Vector3d foot_position(const RobotModel& model, const Eigen::VectorXd& q, int foot);

/// Stacked world-frame linear Jacobians of the active feet, 3 m x (n + 6).
Eigen::MatrixXd contact_jacobian(const RobotModel& model, const Eigen::VectorXd& q,
                                 const ContactSet& contacts);

/// Time derivative of contact_jacobian along v.
Eigen::MatrixXd contact_jacobian_rate(const RobotModel& model, const Eigen::VectorXd& q,
                                      const Eigen::VectorXd& v, const ContactSet& contacts);

/// dJc/dt * v: stacked foot accelerations at zero generalized acceleration.
Eigen::VectorXd contact_jacobian_rate_bias(const RobotModel& model, const Eigen::VectorXd& q,
                                           const Eigen::VectorXd& v,
                                           const ContactSet& contacts);

/// Joint-space inertia matrix, assembled from per-body Jacobians.
Eigen::MatrixXd mass_matrix(const RobotModel& model, const Eigen::VectorXd& q);

/// Recursive Newton-Euler: M a + n for the given gravity vector.
Eigen::VectorXd inverse_dynamics(const RobotModel& model, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& v, const Eigen::VectorXd& a);

/// Coriolis, centrifugal and gravity terms: inverse_dynamics(q, v, 0).
Eigen::VectorXd nonlinear_terms(const RobotModel& model, const Eigen::VectorXd& q,
                                const Eigen::VectorXd& v);

/// Unconstrained forward dynamics M^{-1} (tau_gen - n).
Eigen::VectorXd free_forward_dynamics(const RobotModel& model, const Eigen::VectorXd& q,
                                      const Eigen::VectorXd& v,
                                      const Eigen::VectorXd& generalized_force);

/// Centroidal momentum matrix A_G (6 x (n + 6)), from the base rows of M
/// shifted to the CoM.
Eigen::MatrixXd cmm(const RobotModel& model, const Eigen::VectorXd& q);

/// dA_G/dt * v, i.e. the centroidal momentum rate at zero acceleration and
/// zero gravity.
Vector6d cmm_rate_bias(const RobotModel& model, const Eigen::VectorXd& q,
                       const Eigen::VectorXd& v);

CentroidalState centroidal_momentum(const RobotModel& model, const Eigen::VectorXd& q,
                                    const Eigen::VectorXd& v);

}  // namespace cekf

#endif  // CENTROIDAL_EKF_KINODYNAMICS_HPP_

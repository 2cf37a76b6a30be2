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

// Kinematic tree and inertial description of a floating-base robot.
//
// Generalized coordinates follow one convention throughout the library:
//   q = [base position (3), base orientation quaternion x y z w (4), joints (n)]
//   v = [base linear velocity (3), base angular velocity (3), joint rates (n)]
// Base velocities are expressed in world-aligned axes; the linear part is the
// velocity of the base frame origin.

#ifndef CENTROIDAL_EKF_MODEL_HPP_
#define CENTROIDAL_EKF_MODEL_HPP_

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace cekf {

enum class JointType { kFloating, kRevolute };

struct LinkSpec {
  std::string name;
  double mass = 0.0;                                            ///< [kg]
  Eigen::Vector3d com_offset = Eigen::Vector3d::Zero();         ///< [m] link frame
  Eigen::Matrix3d rotational_inertia = Eigen::Matrix3d::Zero(); ///< [kg m^2] about CoM

  bool operator==(const LinkSpec& other) const = default;
};

struct JointSpec {
  std::string name;
  std::string parent;  ///< "world" for the floating root joint
  std::string child;
  JointType type = JointType::kRevolute;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  /// Child frame pose relative to the parent frame at zero joint angle.
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();

  bool operator==(const JointSpec& other) const;
};

/// Point foot rigidly attached to a link.
struct FootFrame {
  std::string name;
  std::string link;
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();  ///< [m] link frame

  bool operator==(const FootFrame& other) const = default;
};

/// Immutable, validated robot description. Construction throws
/// ValidationError naming the offending entity when an invariant fails.
class RobotModel {
 public:
  /// Traversal record, one per link, parents before children.
  struct Body {
    int link = 0;          ///< index into links()
    int parent = -1;       ///< body index; -1 for the floating base
    int dof = -1;          ///< generalized velocity index; -1 for the base
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();  ///< in child frame
  };

  RobotModel(std::vector<LinkSpec> links, std::vector<JointSpec> joints,
             std::vector<FootFrame> feet, Eigen::Vector3d gravity);

  const std::vector<LinkSpec>& links() const { return links_; }
  const std::vector<JointSpec>& joints() const { return joints_; }
  const std::vector<FootFrame>& feet() const { return feet_; }
  const Eigen::Vector3d& gravity() const { return gravity_; }

  int n_joints() const { return n_joints_; }
  int nq() const { return n_joints_ + 7; }
  int nv() const { return n_joints_ + 6; }
  int n_feet() const { return static_cast<int>(feet_.size()); }
  double total_mass() const { return total_mass_; }

  const std::vector<Body>& bodies() const { return bodies_; }
  int body_of_link(std::string_view link_name) const;
  int foot_body(int foot) const { return foot_bodies_[foot]; }
  /// Joint dofs on the path base -> foot, root first.
  const std::vector<int>& foot_chain(int foot) const { return foot_chains_[foot]; }
  /// Name of the revolute joint driving dof `6 + j`.
  const std::string& joint_name(int j) const;

  /// B = [0_{6 x n}; I_n].
  Eigen::MatrixXd selection_matrix() const;

  /// Same model with the named gravity vector.
  RobotModel with_gravity(const Eigen::Vector3d& gravity) const;

  bool operator==(const RobotModel& other) const;

 private:
  void validate_and_index();

  std::vector<LinkSpec> links_;
  std::vector<JointSpec> joints_;
  std::vector<FootFrame> feet_;
  Eigen::Vector3d gravity_;

  int n_joints_ = 0;
  double total_mass_ = 0.0;
  std::vector<Body> bodies_;
  std::vector<int> link_to_body_;
  std::vector<int> revolute_joints_;
  std::vector<int> foot_bodies_;
  std::vector<std::vector<int>> foot_chains_;
};

double total_mass(const RobotModel& model);

/// Solo12-like 12-DoF quadruped with round-number parameters, 2.5 kg total.
/// Legs FL, FR, HL, HR, each hip abduction (x), hip flexion (y), knee (y);
/// feet in the same order.
RobotModel default_quadruped();

/// Nominal stance joint angles of default_quadruped(): hip flexion +-0.8 rad,
/// knee -+1.6 rad, front and hind knees bent in opposite directions.
Eigen::VectorXd default_stance_joints();

/// Single free rigid body (no joints, no feet).
RobotModel single_rigid_body(double mass, const Eigen::Vector3d& com_offset,
                             const Eigen::Matrix3d& inertia,
                             const Eigen::Vector3d& gravity);

// Model file I/O. The format is documented in docs/model_format.md.
RobotModel parse_model(std::string_view text);
RobotModel load_model(const std::string& path);
std::string write_model(const RobotModel& model);
void save_model(const RobotModel& model, const std::string& path);

}  // namespace cekf

#endif  // CENTROIDAL_EKF_MODEL_HPP_

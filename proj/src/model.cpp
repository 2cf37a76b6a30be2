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

#include "centroidal_ekf/model.hpp"

#include <cmath>
#include <deque>
#include <set>

#include <Eigen/Eigenvalues>

#include "centroidal_ekf/errors.hpp"

namespace cekf {

namespace {

constexpr double kUnitTolerance = 1e-9;

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

void check_inertia(const LinkSpec& link) {
  const Eigen::Matrix3d& inertia = link.rotational_inertia;
  if (!all_finite(inertia)) {
    throw ValidationError(link.name, "inertia has non-finite entries");
  }
  const double scale = std::max(1.0, inertia.cwiseAbs().maxCoeff());
  if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ValidationError(link.name, "inertia is not symmetric");
  }
  const Eigen::Vector3d moments =
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(inertia, Eigen::EigenvaluesOnly)
          .eigenvalues();
  const double tol = 1e-12 * scale;
  if (moments.minCoeff() < -tol) {
    throw ValidationError(link.name, "inertia has a negative principal moment");
  }
  // eigenvalues are sorted ascending
  if (moments(0) + moments(1) < moments(2) - tol) {
    throw ValidationError(link.name,
                          "principal moments violate the triangle inequality");
  }
}

}  // namespace

bool JointSpec::operator==(const JointSpec& other) const {
  return name == other.name && parent == other.parent && child == other.child &&
         type == other.type && axis == other.axis &&
         translation == other.translation &&
         rotation.coeffs() == other.rotation.coeffs();
}

RobotModel::RobotModel(std::vector<LinkSpec> links, std::vector<JointSpec> joints,
                       std::vector<FootFrame> feet, Eigen::Vector3d gravity)
    : links_(std::move(links)),
      joints_(std::move(joints)),
      feet_(std::move(feet)),
      gravity_(std::move(gravity)) {
  validate_and_index();
}

void RobotModel::validate_and_index() {
  if (links_.empty()) throw ValidationError("links", "model has no links");
  if (!gravity_.allFinite()) throw ValidationError("gravity", "non-finite entries");

  std::set<std::string> link_names;
  total_mass_ = 0.0;
  for (const LinkSpec& link : links_) {
    if (link.name.empty()) throw ValidationError("links", "link with empty name");
    if (!link_names.insert(link.name).second) {
      throw ValidationError(link.name, "duplicate link name");
    }
    if (!std::isfinite(link.mass) || link.mass < 0.0) {
      throw ValidationError(link.name, "mass must be finite and nonnegative");
    }
    if (!link.com_offset.allFinite()) {
      throw ValidationError(link.name, "com offset has non-finite entries");
    }
    check_inertia(link);
    total_mass_ += link.mass;
  }
  if (!(total_mass_ > 0.0)) throw ValidationError("links", "total mass must be positive");

  auto link_index = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < links_.size(); ++i) {
      if (links_[i].name == name) return static_cast<int>(i);
    }
    return -1;
  };

  std::set<std::string> joint_names;
  int root_joint = -1;
  std::vector<int> parent_joint_of_link(links_.size(), -1);
  revolute_joints_.clear();
  for (std::size_t j = 0; j < joints_.size(); ++j) {
    const JointSpec& joint = joints_[j];
    if (!joint_names.insert(joint.name).second) {
      throw ValidationError(joint.name, "duplicate joint name");
    }
    const int child = link_index(joint.child);
    if (child < 0) throw ValidationError(joint.name, "unknown child link '" + joint.child + "'");
    if (parent_joint_of_link[child] >= 0) {
      throw ValidationError(joint.name, "link '" + joint.child + "' has more than one parent");
    }
    parent_joint_of_link[child] = static_cast<int>(j);
    if (joint.type == JointType::kFloating) {
      if (root_joint >= 0) throw ValidationError(joint.name, "more than one floating joint");
      if (joint.parent != "world") {
        throw ValidationError(joint.name, "floating joint must attach to 'world'");
      }
      root_joint = static_cast<int>(j);
      continue;
    }
    if (joint.parent == "world") {
      throw ValidationError(joint.name, "only the floating joint may attach to 'world'");
    }
    if (link_index(joint.parent) < 0) {
      throw ValidationError(joint.name, "unknown parent link '" + joint.parent + "'");
    }
    if (!joint.axis.allFinite() || std::abs(joint.axis.norm() - 1.0) > kUnitTolerance) {
      throw ValidationError(joint.name, "axis must have unit norm");
    }
    if (!joint.translation.allFinite() || !joint.rotation.coeffs().allFinite() ||
        std::abs(joint.rotation.norm() - 1.0) > kUnitTolerance) {
      throw ValidationError(joint.name, "placement must be finite with a unit quaternion");
    }
    revolute_joints_.push_back(static_cast<int>(j));
  }
  if (root_joint < 0) throw ValidationError("joints", "missing floating root joint");
  n_joints_ = static_cast<int>(revolute_joints_.size());

  const int root_link = link_index(joints_[root_joint].child);
  for (std::size_t i = 0; i < links_.size(); ++i) {
    if (parent_joint_of_link[i] < 0) {
      throw ValidationError(links_[i].name, "link is not attached by any joint");
    }
  }

  // Breadth-first traversal from the root; links never reached sit on a cycle.
  bodies_.clear();
  link_to_body_.assign(links_.size(), -1);
  std::vector<int> dof_of_joint(joints_.size(), -1);
  for (int k = 0; k < n_joints_; ++k) dof_of_joint[revolute_joints_[k]] = 6 + k;

  Body root;
  root.link = root_link;
  bodies_.push_back(root);
  link_to_body_[root_link] = 0;
  std::deque<int> frontier{root_link};
  while (!frontier.empty()) {
    const int parent_link = frontier.front();
    frontier.pop_front();
    for (int j : revolute_joints_) {
      const JointSpec& joint = joints_[j];
      if (joint.parent != links_[parent_link].name) continue;
      const int child = link_index(joint.child);
      if (link_to_body_[child] >= 0) {
        throw ValidationError(joint.name, "joint closes a kinematic cycle");
      }
      Body body;
      body.link = child;
      body.parent = link_to_body_[parent_link];
      body.dof = dof_of_joint[j];
      body.translation = joint.translation;
      body.rotation = joint.rotation.normalized().toRotationMatrix();
      body.axis = joint.axis;
      link_to_body_[child] = static_cast<int>(bodies_.size());
      bodies_.push_back(body);
      frontier.push_back(child);
    }
  }
  for (std::size_t i = 0; i < links_.size(); ++i) {
    if (link_to_body_[i] < 0) {
      throw ValidationError(links_[i].name, "link is part of a kinematic cycle");
    }
  }

  std::set<std::string> foot_names;
  foot_bodies_.clear();
  foot_chains_.clear();
  for (const FootFrame& foot : feet_) {
    if (!foot_names.insert(foot.name).second) {
      throw ValidationError(foot.name, "duplicate foot name");
    }
    const int link = link_index(foot.link);
    if (link < 0) throw ValidationError(foot.name, "unknown link '" + foot.link + "'");
    if (!foot.offset.allFinite()) throw ValidationError(foot.name, "non-finite offset");
    const int body = link_to_body_[link];
    foot_bodies_.push_back(body);
    std::vector<int> chain;
    for (int b = body; b > 0; b = bodies_[b].parent) chain.insert(chain.begin(), bodies_[b].dof);
    foot_chains_.push_back(std::move(chain));
  }
}

int RobotModel::body_of_link(std::string_view link_name) const {
  for (std::size_t i = 0; i < links_.size(); ++i) {
    if (links_[i].name == link_name) return link_to_body_[i];
  }
  return -1;
}

const std::string& RobotModel::joint_name(int j) const {
  return joints_[revolute_joints_[j]].name;
}

Eigen::MatrixXd RobotModel::selection_matrix() const {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(nv(), n_joints_);
  b.bottomRows(n_joints_).setIdentity();
  return b;
}

RobotModel RobotModel::with_gravity(const Eigen::Vector3d& gravity) const {
  return RobotModel(links_, joints_, feet_, gravity);
}

bool RobotModel::operator==(const RobotModel& other) const {
  return links_ == other.links_ && joints_ == other.joints_ && feet_ == other.feet_ &&
         gravity_ == other.gravity_;
}

double total_mass(const RobotModel& model) { return model.total_mass(); }

RobotModel default_quadruped() {
  // Base: 0.38 x 0.20 x 0.06 m box, 1.7 kg. Each leg 0.2 kg: hip 0.06 kg,
  // upper 0.08 kg, lower 0.06 kg, both segments 0.16 m long.
  constexpr double kBaseMass = 1.7;
  constexpr double kHipMass = 0.06;
  constexpr double kUpperMass = 0.08;
  constexpr double kLowerMass = 0.06;
  constexpr double kHipX = 0.19;
  constexpr double kHipY = 0.09;
  constexpr double kHipOffsetY = 0.06;
  constexpr double kSegment = 0.16;

  std::vector<LinkSpec> links;
  std::vector<JointSpec> joints;
  std::vector<FootFrame> feet;

  links.push_back({"base", kBaseMass, Eigen::Vector3d::Zero(),
                   Eigen::Vector3d(0.006, 0.021, 0.026).asDiagonal()});
  joints.push_back({"root", "world", "base", JointType::kFloating, Eigen::Vector3d::UnitZ(),
                    Eigen::Vector3d::Zero(), Eigen::Quaterniond::Identity()});

  struct Leg {
    const char* prefix;
    double sx;
    double sy;
  };
  const Leg legs[] = {{"FL", 1, 1}, {"FR", 1, -1}, {"HL", -1, 1}, {"HR", -1, -1}};
  for (const Leg& leg : legs) {
    const std::string p = leg.prefix;
    links.push_back({p + "_hip", kHipMass, Eigen::Vector3d(0, leg.sy * 0.03, 0),
                     Eigen::Vector3d(2e-5, 1e-5, 2e-5).asDiagonal()});
    links.push_back({p + "_upper", kUpperMass, Eigen::Vector3d(0, 0, -kSegment / 2),
                     Eigen::Vector3d(1.8e-4, 1.8e-4, 1e-5).asDiagonal()});
    links.push_back({p + "_lower", kLowerMass, Eigen::Vector3d(0, 0, -kSegment / 2),
                     Eigen::Vector3d(1.3e-4, 1.3e-4, 5e-6).asDiagonal()});
    joints.push_back({p + "_HAA", "base", p + "_hip", JointType::kRevolute,
                      Eigen::Vector3d::UnitX(), Eigen::Vector3d(leg.sx * kHipX, leg.sy * kHipY, 0),
                      Eigen::Quaterniond::Identity()});
    joints.push_back({p + "_HFE", p + "_hip", p + "_upper", JointType::kRevolute,
                      Eigen::Vector3d::UnitY(), Eigen::Vector3d(0, leg.sy * kHipOffsetY, 0),
                      Eigen::Quaterniond::Identity()});
    joints.push_back({p + "_KFE", p + "_upper", p + "_lower", JointType::kRevolute,
                      Eigen::Vector3d::UnitY(), Eigen::Vector3d(0, 0, -kSegment),
                      Eigen::Quaterniond::Identity()});
    feet.push_back({p + "_foot", p + "_lower", Eigen::Vector3d(0, 0, -kSegment)});
  }
  return RobotModel(std::move(links), std::move(joints), std::move(feet),
                    Eigen::Vector3d(0, 0, -9.81));
}

Eigen::VectorXd default_stance_joints() {
  Eigen::VectorXd q(12);
  q << 0, 0.8, -1.6,   // FL
       0, 0.8, -1.6,   // FR
       0, -0.8, 1.6,   // HL
       0, -0.8, 1.6;   // HR
  return q;
}

RobotModel single_rigid_body(double mass, const Eigen::Vector3d& com_offset,
                             const Eigen::Matrix3d& inertia,
                             const Eigen::Vector3d& gravity) {
  std::vector<LinkSpec> links{{"body", mass, com_offset, inertia}};
  std::vector<JointSpec> joints{{"root", "world", "body", JointType::kFloating,
                                 Eigen::Vector3d::UnitZ(), Eigen::Vector3d::Zero(),
                                 Eigen::Quaterniond::Identity()}};
  return RobotModel(std::move(links), std::move(joints), {}, gravity);
}

}  // namespace cekf

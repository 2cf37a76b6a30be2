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

#include "centroidal_ekf/kinodynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Geometry>

namespace cekf {

namespace {

// Poses with positions relative to the base origin (world axes).
struct Kinematics {
  Eigen::Vector3d base_position;
  std::vector<Eigen::Matrix3d> rotation;
  std::vector<Eigen::Vector3d> origin;
  std::vector<Eigen::Vector3d> com;
  std::vector<Eigen::Vector3d> axis;
  std::vector<Eigen::Matrix3d> inertia;
};

struct Velocities {
  std::vector<Eigen::Vector3d> angular;
  std::vector<Eigen::Vector3d> origin;  // velocity of the body origin
};

// Accelerations with zero generalized acceleration unless `a` is supplied.
struct Accelerations {
  std::vector<Eigen::Vector3d> angular;
  std::vector<Eigen::Vector3d> origin;
};

Eigen::Quaterniond base_orientation(const Eigen::VectorXd& q) {
  return Eigen::Quaterniond(q(6), q(3), q(4), q(5));
}

Kinematics forward_kinematics(const RobotModel& model, const Eigen::VectorXd& q) {
  const auto& bodies = model.bodies();
  const std::size_t nb = bodies.size();
  Kinematics kin;
  kin.base_position = q.head<3>();
  kin.rotation.resize(nb);
  kin.origin.resize(nb);
  kin.com.resize(nb);
  kin.axis.resize(nb);
  kin.inertia.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const RobotModel::Body& body = bodies[b];
    if (body.parent < 0) {
      kin.rotation[b] = base_orientation(q).normalized().toRotationMatrix();
      kin.origin[b].setZero();
      kin.axis[b].setZero();
    } else {
      const Eigen::Matrix3d& parent_rotation = kin.rotation[body.parent];
      const Eigen::Matrix3d joint_frame = parent_rotation * body.rotation;
      const double angle = q(body.dof + 1);
      kin.rotation[b] = joint_frame * Eigen::AngleAxisd(angle, body.axis).toRotationMatrix();
      kin.origin[b] = kin.origin[body.parent] + parent_rotation * body.translation;
      kin.axis[b] = joint_frame * body.axis;
    }
    const LinkSpec& link = model.links()[body.link];
    kin.com[b] = kin.origin[b] + kin.rotation[b] * link.com_offset;
    kin.inertia[b] = rotate_inertia(kin.rotation[b], link.rotational_inertia);
  }
  return kin;
}

Velocities body_velocities(const RobotModel& model, const Kinematics& kin,
                           const Eigen::VectorXd& v) {
  const auto& bodies = model.bodies();
  Velocities vel;
  vel.angular.resize(bodies.size());
  vel.origin.resize(bodies.size());
  for (std::size_t b = 0; b < bodies.size(); ++b) {
    const RobotModel::Body& body = bodies[b];
    if (body.parent < 0) {
      vel.origin[b] = v.head<3>();
      vel.angular[b] = v.segment<3>(3);
      continue;
    }
    const int p = body.parent;
    vel.angular[b] = vel.angular[p] + kin.axis[b] * v(body.dof);
    vel.origin[b] = vel.origin[p] + vel.angular[p].cross(kin.origin[b] - kin.origin[p]);
  }
  return vel;
}

Accelerations body_accelerations(const RobotModel& model, const Kinematics& kin,
                                 const Velocities& vel, const Eigen::VectorXd& v,
                                 const Eigen::VectorXd* a) {
  const auto& bodies = model.bodies();
  Accelerations acc;
  acc.angular.resize(bodies.size());
  acc.origin.resize(bodies.size());
  for (std::size_t b = 0; b < bodies.size(); ++b) {
    const RobotModel::Body& body = bodies[b];
    if (body.parent < 0) {
      if (a) {
        acc.origin[b] = a->head<3>();
        acc.angular[b] = a->segment<3>(3);
      } else {
        acc.origin[b].setZero();
        acc.angular[b].setZero();
      }
      continue;
    }
    const int p = body.parent;
    const double rate = v(body.dof);
    acc.angular[b] = acc.angular[p] + vel.angular[p].cross(kin.axis[b]) * rate;
    if (a) acc.angular[b] += kin.axis[b] * (*a)(body.dof);
    const Eigen::Vector3d d = kin.origin[b] - kin.origin[p];
    acc.origin[b] = acc.origin[p] + acc.angular[p].cross(d) +
                    vel.angular[p].cross(vel.angular[p].cross(d));
  }
  return acc;
}

Eigen::Vector3d point_acceleration(const Accelerations& acc, const Velocities& vel,
                                   const Kinematics& kin, int b,
                                   const Eigen::Vector3d& point) {
  const Eigen::Vector3d e = point - kin.origin[b];
  return acc.origin[b] + acc.angular[b].cross(e) + vel.angular[b].cross(vel.angular[b].cross(e));
}

// Linear velocity Jacobian of `point` (relative to base origin) on body b.
void point_jacobian(const RobotModel& model, const Kinematics& kin, int b,
                    const Eigen::Vector3d& point, Eigen::Ref<Eigen::MatrixXd> jac) {
  jac.setZero();
  jac.leftCols<3>().setIdentity();
  jac.middleCols<3>(3) = -skew(point);
  const auto& bodies = model.bodies();
  for (int i = b; bodies[i].parent >= 0; i = bodies[i].parent) {
    jac.col(bodies[i].dof) = kin.axis[i].cross(point - kin.origin[i]);
  }
}

void angular_jacobian(const RobotModel& model, const Kinematics& kin, int b,
                      Eigen::Ref<Eigen::MatrixXd> jac) {
  jac.setZero();
  jac.middleCols<3>(3).setIdentity();
  const auto& bodies = model.bodies();
  for (int i = b; bodies[i].parent >= 0; i = bodies[i].parent) {
    jac.col(bodies[i].dof) = kin.axis[i];
  }
}

Eigen::Vector3d com_relative(const RobotModel& model, const Kinematics& kin) {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (std::size_t b = 0; b < model.bodies().size(); ++b) {
    sum += model.links()[model.bodies()[b].link].mass * kin.com[b];
  }
  return sum / model.total_mass();
}

Eigen::Vector3d foot_relative(const RobotModel& model, const Kinematics& kin, int foot) {
  const int b = model.foot_body(foot);
  return kin.origin[b] + kin.rotation[b] * model.feet()[foot].offset;
}

Eigen::VectorXd rnea(const RobotModel& model, const Kinematics& kin, const Eigen::VectorXd& v,
                     const Eigen::VectorXd* a, const Eigen::Vector3d& gravity) {
  const auto& bodies = model.bodies();
  const std::size_t nb = bodies.size();
  const Velocities vel = body_velocities(model, kin, v);
  const Accelerations acc = body_accelerations(model, kin, vel, v, a);

  // Subtree force and moment about the body origin.
  std::vector<Eigen::Vector3d> force(nb), moment(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const double mass = model.links()[bodies[b].link].mass;
    const Eigen::Vector3d com_acc = point_acceleration(acc, vel, kin, b, kin.com[b]);
    const Eigen::Matrix3d& inertia = kin.inertia[b];
    force[b] = mass * (com_acc - gravity);
    const Eigen::Vector3d torque =
        inertia * acc.angular[b] + vel.angular[b].cross(inertia * vel.angular[b]);
    moment[b] = torque + (kin.com[b] - kin.origin[b]).cross(force[b]);
  }
  Eigen::VectorXd tau(model.nv());
  for (std::size_t i = nb; i-- > 0;) {
    const RobotModel::Body& body = bodies[i];
    if (body.parent < 0) {
      tau.head<3>() = force[i];
      tau.segment<3>(3) = moment[i];
      continue;
    }
    tau(body.dof) = kin.axis[i].dot(moment[i]);
    const int p = body.parent;
    force[p] += force[i];
    moment[p] += moment[i] + (kin.origin[i] - kin.origin[p]).cross(force[i]);
  }
  return tau;
}

}  // namespace

ContactSet::ContactSet(std::vector<int> feet) : feet_(std::move(feet)) {
  std::sort(feet_.begin(), feet_.end());
  feet_.erase(std::unique(feet_.begin(), feet_.end()), feet_.end());
}

ContactSet ContactSet::all(int n_feet) {
  std::vector<int> feet(n_feet);
  for (int i = 0; i < n_feet; ++i) feet[i] = i;
  return ContactSet(std::move(feet));
}

ContactSet ContactSet::from_flags(const std::vector<bool>& flags) {
  std::vector<int> feet;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) feet.push_back(static_cast<int>(i));
  }
  return ContactSet(std::move(feet));
}

bool ContactSet::contains(int foot) const {
  return std::binary_search(feet_.begin(), feet_.end(), foot);
}

std::vector<bool> ContactSet::flags(int n_feet) const {
  std::vector<bool> out(n_feet, false);
  for (int f : feet_) out[f] = true;
  return out;
}

Vector9d CentroidalState::vector() const {
  Vector9d x;
  x << c, l, k;
  return x;
}

Vector6d CentroidalState::momentum() const {
  Vector6d h;
  h << l, k;
  return h;
}

CentroidalState CentroidalState::from_vector(const Vector9d& x) {
  return {x.head<3>(), x.segment<3>(3), x.tail<3>()};
}

void check_state(const RobotModel& model, const Eigen::VectorXd& q, const Eigen::VectorXd& v) {
  if (q.size() != model.nq()) {
    throw std::invalid_argument("configuration has size " + std::to_string(q.size()) +
                                ", model expects " + std::to_string(model.nq()));
  }
  if (v.size() != 0 && v.size() != model.nv()) {
    throw std::invalid_argument("velocity has size " + std::to_string(v.size()) +
                                ", model expects " + std::to_string(model.nv()));
  }
  if (std::abs(q.segment<4>(3).norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("base orientation quaternion is not normalized");
  }
}

Eigen::VectorXd neutral_configuration(const RobotModel& model) {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(model.nq());
  q(6) = 1.0;
  return q;
}

Eigen::VectorXd integrate(const RobotModel& model, const Eigen::VectorXd& q,
                          const Eigen::VectorXd& dq) {
  Eigen::VectorXd out = q;
  out.head<3>() += dq.head<3>();
  const Eigen::Matrix3d rotation = exp_so3(dq.segment<3>(3)) *
                                   base_orientation(q).normalized().toRotationMatrix();
  Eigen::Quaterniond quat(rotation);
  quat.normalize();
  // keep the hemisphere of the input so logs stay continuous
  if (quat.coeffs().dot(q.segment<4>(3)) < 0.0) quat.coeffs() *= -1.0;
  out.segment<4>(3) = quat.coeffs();
  out.tail(model.n_joints()) += dq.tail(model.n_joints());
  return out;
}

Eigen::VectorXd difference(const RobotModel& model, const Eigen::VectorXd& q0,
                           const Eigen::VectorXd& q1) {
  Eigen::VectorXd d(model.nv());
  d.head<3>() = q1.head<3>() - q0.head<3>();
  const Eigen::Matrix3d r0 = base_orientation(q0).normalized().toRotationMatrix();
  const Eigen::Matrix3d r1 = base_orientation(q1).normalized().toRotationMatrix();
  d.segment<3>(3) = log_so3(r1 * r0.transpose());
  d.tail(model.n_joints()) = q1.tail(model.n_joints()) - q0.tail(model.n_joints());
  return d;
}

BodyPoses body_poses(const RobotModel& model, const Eigen::VectorXd& q) {
  const Kinematics kin = forward_kinematics(model, q);
  BodyPoses poses;
  poses.rotation = kin.rotation;
  poses.position.resize(kin.origin.size());
  for (std::size_t b = 0; b < kin.origin.size(); ++b) {
    poses.position[b] = kin.base_position + kin.origin[b];
  }
  return poses;
}

Eigen::Vector3d com_position(const RobotModel& model, const Eigen::VectorXd& q) {
  const Kinematics kin = forward_kinematics(model, q);
  return kin.base_position + com_relative(model, kin);
}

Eigen::Vector3d com_offset_from_base(const RobotModel& model, const Eigen::VectorXd& q) {
  return com_relative(model, forward_kinematics(model, q));
}

Eigen::Vector3d foot_position(const RobotModel& model, const Eigen::VectorXd& q, int foot) {
  const Kinematics kin = forward_kinematics(model, q);
  return kin.base_position + foot_relative(model, kin, foot);
}

Eigen::MatrixXd contact_jacobian(const RobotModel& model, const Eigen::VectorXd& q,
                                 const ContactSet& contacts) {
  const Kinematics kin = forward_kinematics(model, q);
  Eigen::MatrixXd jac(3 * contacts.size(), model.nv());
  int row = 0;
  for (int foot : contacts.feet()) {
    point_jacobian(model, kin, model.foot_body(foot), foot_relative(model, kin, foot),
                   jac.middleRows<3>(row));
    row += 3;
  }
  return jac;
}

Eigen::MatrixXd contact_jacobian_rate(const RobotModel& model, const Eigen::VectorXd& q,
                                      const Eigen::VectorXd& v, const ContactSet& contacts) {
  const Kinematics kin = forward_kinematics(model, q);
  const Velocities vel = body_velocities(model, kin, v);
  const auto& bodies = model.bodies();
  Eigen::MatrixXd rate = Eigen::MatrixXd::Zero(3 * contacts.size(), model.nv());
  int row = 0;
  for (int foot : contacts.feet()) {
    const int b = model.foot_body(foot);
    const Eigen::Vector3d point = foot_relative(model, kin, foot);
    const Eigen::Vector3d point_velocity =
        vel.origin[b] + vel.angular[b].cross(point - kin.origin[b]);
    rate.block<3, 3>(row, 3) = -skew(Eigen::Vector3d(point_velocity - vel.origin[0]));
    for (int i = b; bodies[i].parent >= 0; i = bodies[i].parent) {
      const Eigen::Vector3d axis_rate = vel.angular[bodies[i].parent].cross(kin.axis[i]);
      rate.block<3, 1>(row, bodies[i].dof) =
          axis_rate.cross(point - kin.origin[i]) +
          kin.axis[i].cross(point_velocity - vel.origin[i]);
    }
    row += 3;
  }
  return rate;
}

Eigen::VectorXd contact_jacobian_rate_bias(const RobotModel& model, const Eigen::VectorXd& q,
                                           const Eigen::VectorXd& v,
                                           const ContactSet& contacts) {
  const Kinematics kin = forward_kinematics(model, q);
  const Velocities vel = body_velocities(model, kin, v);
  const Accelerations acc = body_accelerations(model, kin, vel, v, nullptr);
  Eigen::VectorXd bias(3 * contacts.size());
  int row = 0;
  for (int foot : contacts.feet()) {
    const int b = model.foot_body(foot);
    bias.segment<3>(row) = point_acceleration(acc, vel, kin, b, foot_relative(model, kin, foot));
    row += 3;
  }
  return bias;
}

Eigen::MatrixXd mass_matrix(const RobotModel& model, const Eigen::VectorXd& q) {
  const Kinematics kin = forward_kinematics(model, q);
  const int nv = model.nv();
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(nv, nv);
  Eigen::MatrixXd linear(3, nv), angular(3, nv);
  for (std::size_t b = 0; b < model.bodies().size(); ++b) {
    const double m = model.links()[model.bodies()[b].link].mass;
    point_jacobian(model, kin, b, kin.com[b], linear);
    angular_jacobian(model, kin, b, angular);
    mass.noalias() += m * linear.transpose() * linear;
    mass.noalias() += angular.transpose() * kin.inertia[b] * angular;
  }
  return symmetrized(mass);
}

Eigen::VectorXd inverse_dynamics(const RobotModel& model, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& v, const Eigen::VectorXd& a) {
  return rnea(model, forward_kinematics(model, q), v, &a, model.gravity());
}

Eigen::VectorXd nonlinear_terms(const RobotModel& model, const Eigen::VectorXd& q,
                                const Eigen::VectorXd& v) {
  return rnea(model, forward_kinematics(model, q), v, nullptr, model.gravity());
}

Eigen::VectorXd free_forward_dynamics(const RobotModel& model, const Eigen::VectorXd& q,
                                      const Eigen::VectorXd& v,
                                      const Eigen::VectorXd& generalized_force) {
  return mass_matrix(model, q).llt().solve(generalized_force - nonlinear_terms(model, q, v));
}

Eigen::MatrixXd cmm(const RobotModel& model, const Eigen::VectorXd& q) {
  const Kinematics kin = forward_kinematics(model, q);
  const Eigen::MatrixXd mass = mass_matrix(model, q);
  return com_shift(com_relative(model, kin)) * mass.topRows<6>();
}

Vector6d cmm_rate_bias(const RobotModel& model, const Eigen::VectorXd& q,
                       const Eigen::VectorXd& v) {
  const Kinematics kin = forward_kinematics(model, q);
  const Eigen::VectorXd wrench = rnea(model, kin, v, nullptr, Eigen::Vector3d::Zero());
  return com_shift(com_relative(model, kin)) * wrench.head<6>();
}

CentroidalState centroidal_momentum(const RobotModel& model, const Eigen::VectorXd& q,
                                    const Eigen::VectorXd& v) {
  const Kinematics kin = forward_kinematics(model, q);
  const Eigen::MatrixXd mass = mass_matrix(model, q);
  const Eigen::Vector3d com = com_relative(model, kin);
  const Vector6d h = com_shift(com) * (mass.topRows<6>() * v);
  return {kin.base_position + com, h.head<3>(), h.tail<3>()};
}

}  // namespace cekf

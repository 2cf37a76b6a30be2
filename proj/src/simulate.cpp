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

#include "centroidal_ekf/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

#include "centroidal_ekf/constrained_dynamics.hpp"
#include "centroidal_ekf/errors.hpp"
#include "centroidal_ekf/logging.hpp"

namespace cekf {
namespace {

constexpr double kMaxSpeed = 1e3;
constexpr double kMaxConstraintDrift = 1e-2;

// Baumgarte feedback on foot slip and foot velocity, stacked per contact.
Eigen::VectorXd stabilization(const RobotModel& model, const Eigen::VectorXd& q,
                              const Eigen::VectorXd& foot_velocity, const ContactSet& contacts,
                              const std::map<int, Eigen::Vector3d>& anchors,
                              const ControllerGains& gains) {
  Eigen::VectorXd out(3 * contacts.size());
  for (int i = 0; i < contacts.size(); ++i) {
    const int f = contacts.feet()[i];
    const Eigen::Vector3d slip = foot_position(model, q, f) - anchors.at(f);
    out.segment<3>(3 * i) =
        gains.contact_kp * slip + gains.contact_kd * foot_velocity.segment<3>(3 * i);
  }
  return out;
}

struct Command {
  Eigen::VectorXd tau;
  Eigen::VectorXd stabilization;
};

// Inverse-dynamics tracking. Stance legs are slaved to the base so the feet
// stay put; swing joints track their references with PD feedback; the base
// acceleration and contact forces come from a weighted least-squares fit of
// the unactuated rows of the equations of motion.
class Controller {
 public:
  Controller(const RobotModel& model, const ControllerGains& gains)
      : model_(model), gains_(gains) {}

  Command operator()(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                     const Eigen::VectorXd& q_ref, const Eigen::VectorXd& v_ref,
                     const Eigen::VectorXd& a_ref, const ContactSet& contacts,
                     const std::map<int, Eigen::Vector3d>& anchors) const {
    const int nv = model_.nv();
    const int m = 3 * contacts.size();
    const Eigen::MatrixXd mass = mass_matrix(model_, q);
    const Eigen::VectorXd bias = nonlinear_terms(model_, q, v);
    const Eigen::VectorXd err = difference(model_, q, q_ref);
    const Eigen::VectorXd err_rate = v_ref - v;

    const Vector6d base_des = a_ref.head<6>() + gains_.base_kp * err.head<6>() +
                              gains_.base_kd * err_rate.head<6>();
    Eigen::VectorXd a0 = a_ref + gains_.joint_kp * err + gains_.joint_kd * err_rate;
    a0.head<6>().setZero();
    Eigen::MatrixXd slave = Eigen::MatrixXd::Zero(nv, 6);
    slave.topRows<6>().setIdentity();

    Command out;
    out.stabilization = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, nv);
    if (m > 0) {
      jac = contact_jacobian(model_, q, contacts);
      const Eigen::VectorXd jdot_v = contact_jacobian_rate_bias(model_, q, v, contacts);
      out.stabilization = stabilization(model_, q, jac * v, contacts, anchors, gains_);
      for (int i = 0; i < contacts.size(); ++i) {
        const int f = contacts.feet()[i];
        const std::vector<int>& chain = model_.foot_chain(f);
        const int dofs = static_cast<int>(chain.size());
        Eigen::MatrixXd leg(3, dofs);
        for (int j = 0; j < dofs; ++j) leg.col(j) = jac.block<3, 1>(3 * i, chain[j]);
        const auto solver = leg.completeOrthogonalDecomposition();
        const Eigen::VectorXd free =
            solver.solve(Eigen::Vector3d(-jdot_v.segment<3>(3 * i) - out.stabilization.segment<3>(3 * i)));
        const Eigen::MatrixXd coupled = solver.solve(Eigen::MatrixXd(-jac.block(3 * i, 0, 3, 6)));
        for (int j = 0; j < dofs; ++j) {
          a0(chain[j]) = free(j);
          slave.row(chain[j]) = coupled.row(j);
        }
      }
    }

    // Unknowns x = [a_base; lambda]; rows: M_b (a0 + S a_base) + n_b = J_b^T lambda.
    Eigen::MatrixXd c(6, 6 + m);
    c.leftCols<6>() = mass.topRows<6>() * slave;
    c.rightCols(m) = -jac.leftCols<6>().transpose();
    const Vector6d r = -(mass.topRows<6>() * a0 + bias.head<6>());
    Eigen::VectorXd inv_weight = Eigen::VectorXd::Ones(6 + m);
    const double mu = gains_.force_regularization;
    inv_weight.tail(m).setConstant(1.0 / (mu * mu));
    Eigen::VectorXd x_des = Eigen::VectorXd::Zero(6 + m);
    x_des.head<6>() = base_des;
    const Eigen::MatrixXd cw = c * inv_weight.asDiagonal();
    const Matrix6d normal = cw * c.transpose();
    const Eigen::VectorXd x =
        x_des + cw.transpose() * normal.ldlt().solve(Vector6d(r - c * x_des));

    const Eigen::VectorXd accel = a0 + slave * x.head<6>();
    Eigen::VectorXd generalized = mass * accel + bias;
    if (m > 0) generalized -= jac.transpose() * x.tail(m);
    out.tau = generalized.tail(model_.n_joints());
    return out;
  }

 private:
  const RobotModel& model_;
  ControllerGains gains_;
};

}  // namespace

void ControllerGains::validate() const {
  const auto check = [](double value, const char* field) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw ValidationError(field, "must be finite and nonnegative");
    }
  };
  check(base_kp, "base_kp");
  check(base_kd, "base_kd");
  check(joint_kp, "joint_kp");
  check(joint_kd, "joint_kd");
  check(contact_kp, "contact_kp");
  check(contact_kd, "contact_kd");
  if (!(force_regularization > 0.0) || !std::isfinite(force_regularization)) {
    throw ValidationError("force_regularization", "must be positive");
  }
}

GeneralizedState step_dynamics(const RobotModel& model, const GeneralizedState& state,
                               const Eigen::VectorXd& tau, const ContactSet& contacts, double dt,
                               const Eigen::VectorXd& stabilization) {
  const KktSolution sol =
      kkt_forward_dynamics(model, state.q, state.v, tau, contacts, stabilization);
  GeneralizedState next;
  next.v = state.v + sol.acceleration * dt;
  next.q = integrate(model, state.q, next.v * dt);
  return next;
}

Eigen::VectorXd impact_velocity(const RobotModel& model, const Eigen::VectorXd& q,
                                const Eigen::VectorXd& v, const ContactSet& contacts) {
  check_state(model, q, v);
  if (contacts.empty()) return v;
  const Eigen::MatrixXd jac = contact_jacobian(model, q, contacts);
  const Eigen::LLT<Eigen::MatrixXd> mass(mass_matrix(model, q));
  const Eigen::MatrixXd minv_jt = mass.solve(jac.transpose());
  const Eigen::MatrixXd delassus = jac * minv_jt;
  const Eigen::VectorXd impulse = delassus.completeOrthogonalDecomposition().solve(jac * v);
  return v - minv_jt * impulse;
}

double total_energy(const RobotModel& model, const Eigen::VectorXd& q, const Eigen::VectorXd& v) {
  check_state(model, q, v);
  const double kinetic = 0.5 * v.dot(mass_matrix(model, q) * v);
  const double potential = -model.total_mass() * model.gravity().dot(com_position(model, q));
  return kinetic + potential;
}

SimulationLog simulate(const RobotModel& model, const ReferenceTrajectory& reference,
                       const ControllerGains& gains) {
  gains.validate();
  if (reference.size() == 0) throw std::invalid_argument("empty reference trajectory");
  const double dt = reference.scenario.dt_sim;
  const Controller controller(model, gains);

  SimulationLog log;
  log.frames.reserve(reference.size());
  GeneralizedState state{reference.q.front(), reference.v.front()};
  std::map<int, Eigen::Vector3d> anchors;
  ContactSet previous;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    const ContactSet& contacts = reference.contacts[k];
    bool touchdown = false;
    for (int f : contacts.feet()) touchdown = touchdown || !previous.contains(f);
    if (touchdown && k > 0) state.v = impact_velocity(model, state.q, state.v, contacts);
    for (auto it = anchors.begin(); it != anchors.end();) {
      it = contacts.contains(it->first) ? std::next(it) : anchors.erase(it);
    }
    for (int f : contacts.feet()) {
      if (!anchors.contains(f)) anchors[f] = foot_position(model, state.q, f);
      log.max_foot_drift =
          std::max(log.max_foot_drift, (foot_position(model, state.q, f) - anchors[f]).norm());
    }

    const double drift =
        contacts.empty() ? 0.0 : (contact_jacobian(model, state.q, contacts) * state.v).norm();
    const double speed = state.v.norm();
    if (!(speed <= kMaxSpeed) || !(drift <= kMaxConstraintDrift)) {
      throw SimulationDiverged("simulation diverged at t = " + std::to_string(reference.t[k]) +
                               " s (|v| = " + std::to_string(speed) +
                               ", |Jc v| = " + std::to_string(drift) + ")");
    }

    const Command cmd = controller(state.q, state.v, reference.q[k], reference.v[k],
                                   reference.a[k], contacts, anchors);
    LogFrame frame;
    frame.t = reference.t[k];
    frame.q = state.q;
    frame.v = state.v;
    frame.tau = cmd.tau;
    frame.contacts = contacts.flags(model.n_feet());
    frame.truth = centroidal_momentum(model, state.q, state.v);
    log.frames.push_back(std::move(frame));
    log.energy.push_back(total_energy(model, state.q, state.v));
    log.constraint_drift.push_back(drift);

    const int substeps = reference.scenario.substeps;
    for (int i = 0; i < substeps; ++i) {
      const Eigen::VectorXd stab =
          i == 0 ? cmd.stabilization
                 : stabilization(model, state.q,
                                 contact_jacobian(model, state.q, contacts) * state.v, contacts,
                                 anchors, gains);
      state = step_dynamics(model, state, cmd.tau, contacts, dt / substeps, stab);
    }
    previous = contacts;
  }
  log_info("simulated " + std::to_string(log.frames.size()) + " frames, max foot drift " +
           std::to_string(log.max_foot_drift) + " m");
  return log;
}

SimulationLog simulate(const RobotModel& model, const Scenario& scenario,
                       const ControllerGains& gains) {
  return simulate(model, build_scenario(model, scenario), gains);
}

}  // namespace cekf

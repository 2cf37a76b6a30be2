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

// Rigid-contact forward simulation of a scripted scenario. Torques come from
// an inverse-dynamics tracking controller; the plant is the KKT contact
// dynamics integrated with semi-implicit Euler.

#ifndef CENTROIDAL_EKF_SIMULATE_HPP_
#define CENTROIDAL_EKF_SIMULATE_HPP_

#include <vector>

#include <Eigen/Core>

#include "centroidal_ekf/kinodynamics.hpp"
#include "centroidal_ekf/model.hpp"
#include "centroidal_ekf/scenario.hpp"

namespace cekf {

struct ControllerGains {
  double base_kp = 400.0;   ///< [1/s^2] base pose error
  double base_kd = 40.0;    ///< [1/s]
  double joint_kp = 900.0;  ///< [1/s^2] swing-leg joints
  double joint_kd = 60.0;   ///< [1/s]
  // Constraint-drift feedback added to the contact acceleration constraint.
  double contact_kp = 40000.0;
  double contact_kd = 400.0;
  // Weight of the contact forces against base-acceleration tracking.
  double force_regularization = 1e-3;

  /// Throws ValidationError on negative or non-finite gains.
  void validate() const;
};

struct LogFrame {
  double t = 0.0;
  Eigen::VectorXd q;    ///< n + 7
  Eigen::VectorXd v;    ///< n + 6, after any touchdown impact at t
  Eigen::VectorXd tau;  ///< n, applied over [t, t + dt)
  std::vector<bool> contacts;
  CentroidalState truth;
};

struct SimulationLog {
  std::vector<LogFrame> frames;
  std::vector<double> energy;           ///< kinetic + potential [J], per frame
  std::vector<double> constraint_drift; ///< ||Jc v|| per frame, before impacts
  double max_foot_drift = 0.0;          ///< [m] largest stance-foot slip
};

/// One semi-implicit Euler step of the KKT dynamics:
/// v' = v + a dt, q' = q (+) v' dt.
GeneralizedState step_dynamics(const RobotModel& model, const GeneralizedState& state,
                               const Eigen::VectorXd& tau, const ContactSet& contacts, double dt,
                               const Eigen::VectorXd& stabilization = Eigen::VectorXd());

/// Velocity after a perfectly inelastic impact of the given feet:
/// v+ = v - M^-1 Jc^T (Jc M^-1 Jc^T)^-1 Jc v.
Eigen::VectorXd impact_velocity(const RobotModel& model, const Eigen::VectorXd& q,
                                const Eigen::VectorXd& v, const ContactSet& contacts);

double total_energy(const RobotModel& model, const Eigen::VectorXd& q, const Eigen::VectorXd& v);

/// Throws SimulationDiverged if ||v|| > 1e3 or ||Jc v|| > 1e-2.
SimulationLog simulate(const RobotModel& model, const ReferenceTrajectory& reference,
                       const ControllerGains& gains = {});
SimulationLog simulate(const RobotModel& model, const Scenario& scenario,
                       const ControllerGains& gains = {});

}  // namespace cekf

#endif  // CENTROIDAL_EKF_SIMULATE_HPP_

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

// Scripted reference motions for the simulator: base and foot targets over
// time, turned into whole-body references by per-leg inverse kinematics.

#ifndef CENTROIDAL_EKF_SCENARIO_HPP_
#define CENTROIDAL_EKF_SCENARIO_HPP_

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "centroidal_ekf/kinodynamics.hpp"
#include "centroidal_ekf/model.hpp"

namespace cekf {

enum class ScenarioKind { kBalanceBase, kTrot, kJump };

std::string scenario_name(ScenarioKind kind);
/// Throws std::invalid_argument for an unknown name.
ScenarioKind parse_scenario_kind(std::string_view name);

struct Scenario {
  ScenarioKind kind = ScenarioKind::kBalanceBase;
  double duration = 5.0;  ///< [s]
  double dt_sim = 1e-3;   ///< [s] log and control period
  // Integration substeps per control period, torques held. Keeps the
  // integrator's constraint drift small during fast motions.
  int substeps = 8;

  // balance_base: base translation amplitude [m]; rotations use 5x this in rad.
  double base_amplitude = 0.02;

  // trot
  double step_period = 0.4;    ///< [s]
  double stance_ratio = 0.5;
  double forward_speed = 0.2;  ///< [m/s] after a 1 s ramp
  double step_height = 0.04;   ///< [m] swing foot apex

  // jump: CoM rise above its takeoff height [m]
  double jump_apex = 0.05;

  /// Throws ValidationError on duration <= 0, dt_sim <= 0,
  /// dt_sim > step_period / 4, or out-of-range gait parameters.
  void validate() const;

  static Scenario defaults(ScenarioKind kind);
};

/// Ballistic flight time for a CoM rise of `apex`: 2 sqrt(2 apex / g).
double flight_duration(double apex, double gravity);

/// Whole-body reference sampled on the simulation grid t_k = k dt_sim.
struct ReferenceTrajectory {
  Scenario scenario;
  std::vector<double> t;
  std::vector<Eigen::VectorXd> q;
  std::vector<Eigen::VectorXd> v;
  std::vector<Eigen::VectorXd> a;
  std::vector<ContactSet> contacts;
  /// Foot positions the schedule expects while in stance, per sample and
  /// foot (world frame).
  std::vector<std::vector<Eigen::Vector3d>> feet;

  std::size_t size() const { return t.size(); }
};

/// Requires a model whose feet each sit at the end of a 3-joint chain (the
/// shipped quadruped layout). Throws InfeasibleScenario when a target is out
/// of reach (inverse kinematics residual above 1e-3 m).
ReferenceTrajectory build_scenario(const RobotModel& model, const Scenario& scenario);

/// Default standing configuration: stance joints, feet on the z = 0 plane,
/// base at the origin in x and y.
Eigen::VectorXd standing_configuration(const RobotModel& model);

}  // namespace cekf

#endif  // CENTROIDAL_EKF_SCENARIO_HPP_

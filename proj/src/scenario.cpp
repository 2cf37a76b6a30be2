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

#include "centroidal_ekf/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/QR>

#include "centroidal_ekf/errors.hpp"
#include "centroidal_ekf/spatial.hpp"

namespace cekf {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxIkResidual = 1e-3;  // [m]
constexpr double kIkTolerance = 1e-12;
constexpr double kComTolerance = 1e-11;
// Time step of the central differences giving reference rates.
constexpr double kDiffStep = 1e-4;
// Guards schedule lookups against t = k dt landing a hair below a switch.
constexpr double kScheduleEps = 1e-9;

double clamp01(double s) { return std::clamp(s, 0.0, 1.0); }

// 10 s^3 - 15 s^4 + 6 s^5: zero rate and curvature at both ends.
double smoothstep(double s) {
  s = clamp01(s);
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

// 64 s^3 (1 - s)^3, peak 1 at s = 1/2.
double bump(double s) {
  s = clamp01(s);
  const double u = s * (1.0 - s);
  return 64.0 * u * u * u;
}

// Quintic polynomial on [0, T] with position, rate and acceleration set at
// both ends.
class Quintic {
 public:
  Quintic() = default;
  Quintic(double p0, double v0, double a0, double p1, double v1, double a1, double duration)
      : duration_(duration) {
    const double t = duration;
    c_[0] = p0;
    c_[1] = v0;
    c_[2] = a0 / 2.0;
    Eigen::Matrix3d m;
    m << t * t * t, t * t * t * t, t * t * t * t * t,
         3 * t * t, 4 * t * t * t, 5 * t * t * t * t,
         6 * t, 12 * t * t, 20 * t * t * t;
    const Eigen::Vector3d rhs(p1 - (p0 + v0 * t + c_[2] * t * t), v1 - (v0 + 2 * c_[2] * t),
                              a1 - a0);
    const Eigen::Vector3d x = m.colPivHouseholderQr().solve(rhs);
    c_[3] = x(0);
    c_[4] = x(1);
    c_[5] = x(2);
  }

  double operator()(double t) const {
    t = std::clamp(t, 0.0, duration_);
    double out = 0.0;
    for (int i = 5; i >= 0; --i) out = out * t + c_[i];
    return out;
  }
  double duration() const { return duration_; }

 private:
  std::array<double, 6> c_{};
  double duration_ = 1.0;
};

struct Targets {
  Eigen::Vector3d base = Eigen::Vector3d::Zero();      ///< position, or CoM if com_target
  Eigen::Vector3d rotation = Eigen::Vector3d::Zero();  ///< rotation vector, world
  bool com_target = false;
  std::vector<Eigen::Vector3d> feet;
  ContactSet contacts;
};

class Plan {
 public:
  virtual ~Plan() = default;
  virtual Targets at(double t) const = 0;
};

struct Nominal {
  Eigen::VectorXd q;                  // standing configuration
  std::vector<Eigen::Vector3d> feet;  // world foot positions at q
  Eigen::Vector3d com;
};

class BalancePlan : public Plan {
 public:
  BalancePlan(const Nominal& nominal, double amplitude) : nominal_(nominal), amplitude_(amplitude) {}

  Targets at(double t) const override {
    const double env = smoothstep(t / 0.5);
    const double w = 2.0 * kPi;
    Targets out;
    out.base = nominal_.q.head<3>() +
               env * amplitude_ *
                   Eigen::Vector3d(std::sin(w * 0.5 * t), 0.8 * std::sin(w * 0.7 * t),
                                   0.5 * std::sin(w * 0.9 * t));
    out.rotation = env * 5.0 * amplitude_ *
                   Eigen::Vector3d(std::sin(w * 0.6 * t), std::sin(w * 0.8 * t), std::sin(w * 0.4 * t));
    out.feet = nominal_.feet;
    out.contacts = ContactSet::all(static_cast<int>(nominal_.feet.size()));
    return out;
  }

 private:
  const Nominal& nominal_;
  double amplitude_;
};

// Diagonal-pair trot: FL and HR share a phase, FR and HL the opposite one.
class TrotPlan : public Plan {
 public:
  TrotPlan(const Nominal& nominal, const Scenario& s) : nominal_(nominal), s_(s) {}

  Targets at(double t) const override {
    Targets out;
    out.base = nominal_.q.head<3>();
    out.base.x() += base_x(t);
    std::vector<int> stance;
    for (int f = 0; f < static_cast<int>(nominal_.feet.size()); ++f) {
      bool in_stance = false;
      out.feet.push_back(foot(f, t, &in_stance));
      if (in_stance) stance.push_back(f);
    }
    out.contacts = ContactSet(std::move(stance));
    return out;
  }

 private:
  static constexpr double kRamp = 1.0;

  double speed(double t) const { return s_.forward_speed * smoothstep(t / kRamp); }

  double base_x(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= kRamp) return s_.forward_speed * (kRamp / 2.0 + (t - kRamp));
    const double u = t / kRamp;
    return s_.forward_speed * kRamp * u * u * u * u * (2.5 + u * (-3.0 + u));
  }

  double offset(int f) const { return (f == 0 || f == 3) ? 0.0 : 0.5; }

  // Raibert-style foothold: under the hip at mid-stance.
  Eigen::Vector3d foothold(int f, double touchdown) const {
    Eigen::Vector3d p = nominal_.feet[f];
    if (touchdown <= kScheduleEps) return p;
    p.x() += base_x(touchdown) + speed(touchdown) * s_.stance_ratio * s_.step_period / 2.0;
    return p;
  }

  Eigen::Vector3d foot(int f, double t, bool* in_stance) const {
    const double period = s_.step_period;
    const double u = (t + kScheduleEps) / period - offset(f);
    const double cycle = std::floor(u);
    const double phase = u - cycle;
    const double touchdown = (cycle + offset(f)) * period;
    if (phase < s_.stance_ratio || t < 0.0) {
      *in_stance = phase < s_.stance_ratio;
      if (t < 0.0 && !*in_stance) return nominal_.feet[f];
      return foothold(f, touchdown);
    }
    *in_stance = false;
    const Eigen::Vector3d from = foothold(f, touchdown);
    const Eigen::Vector3d to = foothold(f, touchdown + period);
    const double s = (phase - s_.stance_ratio) / (1.0 - s_.stance_ratio);
    Eigen::Vector3d p = from + smoothstep(s) * (to - from);
    p.z() = from.z() + s_.step_height * bump(s);
    return p;
  }

  const Nominal& nominal_;
  Scenario s_;
};

// Crouch, push, ballistic flight, absorb, recover. The CoM height is the
// planned quantity; the base follows from it.
class JumpPlan : public Plan {
 public:
  JumpPlan(const Nominal& nominal, const Scenario& s, double gravity) : nominal_(nominal) {
    const double z0 = nominal.com.z();
    const double crouch = z0 - kCrouchDepth;
    const double takeoff = z0 + kExtension;
    takeoff_speed_ = std::sqrt(2.0 * gravity * s.jump_apex);
    gravity_ = gravity;
    const double push = 2.0 * (takeoff - crouch) / takeoff_speed_;
    flight_ = flight_duration(s.jump_apex, gravity);

    t_crouch_ = kStand;
    t_push_ = t_crouch_ + kCrouch;
    t_takeoff_ = t_push_ + push;
    t_touchdown_ = t_takeoff_ + flight_;
    t_absorbed_ = t_touchdown_ + push;
    t_recovered_ = t_absorbed_ + kRecover;
    takeoff_height_ = takeoff;

    crouch_ = Quintic(z0, 0, 0, crouch, 0, 0, kCrouch);
    // The legs still push hard at the last stance sample and the ground
    // reaction steps to zero at takeoff (and back up at touchdown), so
    // contact changes are visible in the torques right away.
    push_ = Quintic(crouch, 0, 0, takeoff, takeoff_speed_, kEdgeAcceleration * gravity, push);
    absorb_ = Quintic(takeoff, -takeoff_speed_, kEdgeAcceleration * gravity, crouch, 0, 0, push);
    lift_height_ = s.jump_apex + kClearance;
    recover_ = Quintic(crouch, 0, 0, z0, 0, 0, kRecover);
  }

  Targets at(double t) const override {
    Targets out;
    out.com_target = true;
    out.base = nominal_.com;
    out.feet = nominal_.feet;
    const int n_feet = static_cast<int>(nominal_.feet.size());
    out.contacts = ContactSet::all(n_feet);
    double& z = out.base.z();
    if (t < t_crouch_) {
      // standing
    } else if (t < t_push_) {
      z = crouch_(t - t_crouch_);
    } else if (t < t_takeoff_) {
      z = push_(t - t_push_);
    } else if (t < t_touchdown_) {
      const double tau = t - t_takeoff_;
      z = takeoff_height_ + takeoff_speed_ * tau - 0.5 * gravity_ * tau * tau;
      out.contacts = ContactSet();
      // Feet leave and land at rest and peak a little above the body's rise.
      const double lift = lift_height_ * bump(tau / flight_);
      for (Eigen::Vector3d& p : out.feet) p.z() += lift;
    } else if (t < t_absorbed_) {
      z = absorb_(t - t_touchdown_);
    } else {
      z = recover_(t - t_absorbed_);
    }
    return out;
  }

 private:
  static constexpr double kCrouchDepth = 0.06;  // [m] below standing CoM height
  static constexpr double kExtension = 0.04;    // [m] above it at takeoff
  static constexpr double kEdgeAcceleration = 0.5;  // CoM accel at takeoff [g]
  static constexpr double kClearance = 0.02;        // [m] foot lift beyond the apex
  static constexpr double kStand = 0.5;
  static constexpr double kCrouch = 0.4;
  static constexpr double kRecover = 0.5;

  const Nominal& nominal_;
  double gravity_ = 9.81;
  double takeoff_speed_ = 0.0;
  double takeoff_height_ = 0.0;
  double flight_ = 0.0;
  double lift_height_ = 0.0;
  double t_crouch_ = 0, t_push_ = 0, t_takeoff_ = 0, t_touchdown_ = 0, t_absorbed_ = 0,
         t_recovered_ = 0;
  Quintic crouch_, push_, absorb_, recover_;
};

// Per-leg Newton inverse kinematics with the base pose held fixed.
class IkSolver {
 public:
  explicit IkSolver(const RobotModel& model) : model_(model) {
    for (int f = 0; f < model.n_feet(); ++f) {
      if (model.foot_chain(f).size() != 3) {
        throw InfeasibleScenario("scenario references need 3-joint legs; foot '" +
                                 model.feet()[f].name + "' has " +
                                 std::to_string(model.foot_chain(f).size()));
      }
    }
  }

  // Fills the joints of q so each foot reaches its target; returns the
  // largest residual.
  double solve_legs(Eigen::VectorXd& q, const std::vector<Eigen::Vector3d>& feet) const {
    double worst = 0.0;
    for (int f = 0; f < model_.n_feet(); ++f) {
      const std::vector<int>& chain = model_.foot_chain(f);
      const ContactSet one({f});
      double residual = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        const Eigen::Vector3d err = feet[f] - foot_position(model_, q, f);
        residual = err.norm();
        if (residual < kIkTolerance) break;
        const Eigen::MatrixXd jac = contact_jacobian(model_, q, one);
        Eigen::Matrix3d leg;
        for (int i = 0; i < 3; ++i) leg.col(i) = jac.col(chain[i]);
        // Levenberg-Marquardt step, damping only matters near singularity.
        const double lambda = 1e-10;
        Eigen::Vector3d step = (leg.transpose() * leg + lambda * Eigen::Matrix3d::Identity())
                                   .ldlt()
                                   .solve(leg.transpose() * err);
        const double norm = step.norm();
        if (norm > 0.3) step *= 0.3 / norm;
        for (int i = 0; i < 3; ++i) q(chain[i] + 1) += step(i);
      }
      worst = std::max(worst, residual);
    }
    return worst;
  }

  Eigen::VectorXd solve(const Targets& targets, const Eigen::VectorXd& warm, double t) const {
    Eigen::VectorXd q = warm;
    q.segment<4>(3) = Eigen::Quaterniond(exp_so3(targets.rotation)).coeffs();
    q.head<3>() = targets.base;
    if (targets.com_target) {
      q.head<3>() = warm.head<3>() + (targets.base - com_position(model_, warm));
    }
    double residual = solve_legs(q, targets.feet);
    if (targets.com_target) {
      for (int iter = 0; iter < 200; ++iter) {
        const Eigen::Vector3d err = targets.base - com_position(model_, q);
        if (err.norm() < kComTolerance) break;
        q.head<3>() += err;
        residual = solve_legs(q, targets.feet);
      }
    }
    if (!(residual <= kMaxIkResidual)) {
      throw InfeasibleScenario("foot targets out of reach at t = " + std::to_string(t) +
                               " s (residual " + std::to_string(residual) + " m)");
    }
    return q;
  }

 private:
  const RobotModel& model_;
};

Nominal make_nominal(const RobotModel& model) {
  Nominal n;
  n.q = standing_configuration(model);
  for (int f = 0; f < model.n_feet(); ++f) n.feet.push_back(foot_position(model, n.q, f));
  n.com = com_position(model, n.q);
  return n;
}

}  // namespace

std::string scenario_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kBalanceBase:
      return "balance_base";
    case ScenarioKind::kTrot:
      return "trot";
    case ScenarioKind::kJump:
      return "jump";
  }
  return "unknown";
}

ScenarioKind parse_scenario_kind(std::string_view name) {
  if (name == "balance_base") return ScenarioKind::kBalanceBase;
  if (name == "trot") return ScenarioKind::kTrot;
  if (name == "jump") return ScenarioKind::kJump;
  throw std::invalid_argument("unknown scenario '" + std::string(name) +
                              "' (expected balance_base, trot or jump)");
}

void Scenario::validate() const {
  if (!(duration > 0.0)) throw ValidationError("duration", "must be positive");
  if (!(dt_sim > 0.0)) throw ValidationError("dt_sim", "must be positive");
  if (substeps < 1) throw ValidationError("substeps", "must be at least 1");
  if (!(step_period > 0.0)) throw ValidationError("step_period", "must be positive");
  if (!(dt_sim <= 0.25 * step_period)) {
    throw ValidationError("dt_sim", "must not exceed a quarter of the step period");
  }
  if (!(stance_ratio > 0.0 && stance_ratio < 1.0)) {
    throw ValidationError("stance_ratio", "must lie in (0, 1)");
  }
  if (!(base_amplitude >= 0.0)) throw ValidationError("base_amplitude", "must be nonnegative");
  if (!(step_height >= 0.0)) throw ValidationError("step_height", "must be nonnegative");
  if (!(jump_apex > 0.0)) throw ValidationError("jump_apex", "must be positive");
  if (!std::isfinite(forward_speed)) throw ValidationError("forward_speed", "must be finite");
}

Scenario Scenario::defaults(ScenarioKind kind) {
  Scenario s;
  s.kind = kind;
  return s;
}

double flight_duration(double apex, double gravity) {
  return 2.0 * std::sqrt(2.0 * apex / gravity);
}

Eigen::VectorXd standing_configuration(const RobotModel& model) {
  Eigen::VectorXd q = neutral_configuration(model);
  if (model.n_joints() == 12) q.tail(12) = default_stance_joints();
  if (model.n_feet() > 0) {
    double z = 0.0;
    for (int f = 0; f < model.n_feet(); ++f) z += foot_position(model, q, f).z();
    q(2) = -z / model.n_feet();
  }
  return q;
}

ReferenceTrajectory build_scenario(const RobotModel& model, const Scenario& scenario) {
  scenario.validate();
  if (model.n_feet() != 4) {
    throw InfeasibleScenario("scripted scenarios need a four-footed model");
  }
  const Nominal nominal = make_nominal(model);
  const double g = model.gravity().norm();
  std::unique_ptr<Plan> plan;
  switch (scenario.kind) {
    case ScenarioKind::kBalanceBase:
      plan = std::make_unique<BalancePlan>(nominal, scenario.base_amplitude);
      break;
    case ScenarioKind::kTrot:
      plan = std::make_unique<TrotPlan>(nominal, scenario);
      break;
    case ScenarioKind::kJump:
      if (!(g > 0.0)) throw InfeasibleScenario("jump needs nonzero gravity");
      plan = std::make_unique<JumpPlan>(nominal, scenario, g);
      break;
  }
  const IkSolver ik(model);

  ReferenceTrajectory out;
  out.scenario = scenario;
  const auto steps = static_cast<std::size_t>(std::llround(scenario.duration / scenario.dt_sim));
  Eigen::VectorXd warm = nominal.q;
  const double h = kDiffStep;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * scenario.dt_sim;
    const Targets now = plan->at(t);
    const Eigen::VectorXd q = ik.solve(now, warm, t);
    const Eigen::VectorXd qm = ik.solve(plan->at(t - h), q, t - h);
    const Eigen::VectorXd qp = ik.solve(plan->at(t + h), q, t + h);
    const Eigen::VectorXd back = difference(model, qm, q);
    const Eigen::VectorXd fwd = difference(model, q, qp);
    out.t.push_back(t);
    out.q.push_back(q);
    out.v.push_back((back + fwd) / (2.0 * h));
    out.a.push_back((fwd - back) / (h * h));
    out.contacts.push_back(now.contacts);
    out.feet.push_back(now.feet);
    warm = q;
  }
  return out;
}

}  // namespace cekf

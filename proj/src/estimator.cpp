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

#include "centroidal_ekf/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "centroidal_ekf/constrained_dynamics.hpp"
#include "centroidal_ekf/errors.hpp"
#include "centroidal_ekf/logging.hpp"

namespace cekf {
namespace {

// Condition number of A_G's base block above which the momentum
// perturbation falls back to a damped inverse.
constexpr double kMaxPerturbationCondition = 1e8;

void check_covariance(const Matrix9d& m, const char* field) {
  if (!m.allFinite()) throw ValidationError(field, "non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ValidationError(field, "matrix is not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Matrix9d> eig(m, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
    throw ValidationError(field, "matrix is not positive semi-definite");
  }
}

// Symmetrize, then clamp negative eigenvalues produced by round-off.
Matrix9d clean_covariance(const Matrix9d& p) {
  Matrix9d out = symmetrized(p);
  const Eigen::SelfAdjointEigenSolver<Matrix9d> eig(out);
  if (eig.eigenvalues().minCoeff() < 0.0) {
    const Vector9d clamped = eig.eigenvalues().cwiseMax(0.0);
    out = symmetrized(Matrix9d(eig.eigenvectors() * clamped.asDiagonal() *
                               eig.eigenvectors().transpose()));
  }
  return out;
}

struct Linearization {
  Vector6d momentum_rate;
  Matrix9d F_c;
};

// Base-velocity change producing a unit momentum change, one column per
// momentum coordinate.
Matrix6d momentum_to_base_velocity(const Eigen::MatrixXd& centroidal_matrix) {
  const Matrix6d base = centroidal_matrix.leftCols<6>();
  const Eigen::JacobiSVD<Matrix6d> svd(base, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const double condition = sigma(0) / sigma(5);
  if (!(condition <= kMaxPerturbationCondition)) {
    log_warn("ill-conditioned momentum perturbation map (condition " +
             std::to_string(condition) + "); using a damped inverse");
    const double damping = sigma(0) * 1e-8;
    Vector6d inv;
    for (int i = 0; i < 6; ++i) inv(i) = sigma(i) / (sigma(i) * sigma(i) + damping * damping);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  }
  return base.partialPivLu().inverse();
}

Linearization linearize(const RobotModel& model, const Eigen::VectorXd& q,
                        const Eigen::VectorXd& v, const Eigen::VectorXd& tau,
                        const ContactSet& contacts, double step) {
  const ProjectedDynamics nominal = projected_dynamics(model, q, v, contacts);
  const Eigen::VectorXd& v0 = nominal.v;
  auto rate = [&](const Eigen::VectorXd& qq, const Eigen::VectorXd& vv) -> Vector6d {
    return momentum_rate(model, qq, vv, tau, contacts, VelocityProjection::kNever);
  };

  Linearization out;
  out.momentum_rate = nominal.A * tau + nominal.b;
  out.F_c.setZero();
  out.F_c.block<3, 3>(0, 3) = Eigen::Matrix3d::Identity() / model.total_mass();

  // CoM columns: a base translation moves the CoM by the same amount.
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd dq = Eigen::VectorXd::Zero(model.nv());
    dq(i) = step;
    out.F_c.block<6, 1>(3, i) =
        (rate(integrate(model, q, dq), v0) - rate(integrate(model, q, -dq), v0)) / (2 * step);
  }

  // Momentum columns.
  const Matrix6d to_velocity = momentum_to_base_velocity(cmm(model, q));
  for (int i = 0; i < 6; ++i) {
    Eigen::VectorXd dv = Eigen::VectorXd::Zero(model.nv());
    dv.head<6>() = to_velocity.col(i) * step;
    out.F_c.block<6, 1>(3, 3 + i) = (rate(q, v0 + dv) - rate(q, v0 - dv)) / (2 * step);
  }
  return out;
}

}  // namespace

void NoiseConfig::validate() const {
  check_covariance(Q_c, "Q_c");
  check_covariance(R_c, "R_c");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt", "must be positive");
}

NoiseConfig NoiseConfig::defaults() {
  NoiseConfig n;
  Vector9d q, r;
  // Measurement densities follow the "default" sensor-noise preset. Process
  // densities are inflated well past the true disturbance so the filter
  // absorbs model error at impacts; Q/R is about 2.5e4 1/s^2 on every block.
  q << 2.5e-5, 2.5e-5, 2.5e-5, 6.25e-2, 6.25e-2, 6.25e-2, 1.25e-4, 1.25e-4, 1.25e-4;
  r << 1e-9, 1e-9, 1e-9, 2.5e-6, 2.5e-6, 2.5e-6, 5e-9, 5e-9, 5e-9;
  n.Q_c = q.asDiagonal();
  n.R_c = r.asDiagonal();
  n.dt = 1e-3;
  return n;
}

CentroidalState measure(const RobotModel& model, const Eigen::VectorXd& q,
                        const Eigen::VectorXd& v) {
  return centroidal_momentum(model, q, v);
}

Matrix9d fd_process_jacobian(const RobotModel& model, const Eigen::VectorXd& q,
                             const Eigen::VectorXd& v, const Eigen::VectorXd& tau,
                             const ContactSet& contacts, double step) {
  check_state(model, q, v);
  return linearize(model, q, v, tau, contacts, step).F_c;
}

Discretization discretize(const Matrix9d& F_c, const NoiseConfig& noise) {
  Discretization d;
  d.F = Matrix9d::Identity() + F_c * noise.dt;
  d.Q = symmetrized(Matrix9d(d.F * noise.Q_c * d.F.transpose() * noise.dt));
  d.R = noise.R_c / noise.dt;
  return d;
}

Belief predict(const Belief& belief, const FilterInput& input, const NoiseConfig& noise,
               const RobotModel& model, const FilterOptions& options) {
  check_state(model, input.q, input.v);
  if (input.tau.size() != model.n_joints()) {
    throw std::invalid_argument("torque vector has wrong dimension");
  }
  const Linearization lin =
      linearize(model, input.q, input.v, input.tau, input.contacts, options.jacobian_step);
  const Discretization d = discretize(lin.F_c, noise);

  Belief out;
  out.mean.c = belief.mean.c + belief.mean.l / model.total_mass() * noise.dt;
  out.mean.l = belief.mean.l + lin.momentum_rate.head<3>() * noise.dt;
  out.mean.k = belief.mean.k + lin.momentum_rate.tail<3>() * noise.dt;
  out.cov = clean_covariance(d.F * belief.cov * d.F.transpose() + d.Q);
  return out;
}

UpdateResult update(const Belief& belief, const CentroidalState& z, const Matrix9d& R_k,
                    bool joseph_form) {
  UpdateResult out;
  out.innovation = z.vector() - belief.mean.vector();
  out.innovation_cov = symmetrized(Matrix9d(belief.cov + R_k));
  const Eigen::LLT<Matrix9d> llt(out.innovation_cov);
  if (llt.info() != Eigen::Success || !out.innovation_cov.allFinite()) {
    throw SingularInnovationError("innovation covariance P + R is not positive definite");
  }
  // K = P S^-1, with P and S symmetric.
  const Matrix9d gain = llt.solve(belief.cov).transpose();
  out.nis = out.innovation.dot(llt.solve(out.innovation));

  out.belief.mean = CentroidalState::from_vector(belief.mean.vector() + gain * out.innovation);
  const Matrix9d i_minus_k = Matrix9d::Identity() - gain;
  if (joseph_form) {
    out.belief.cov = i_minus_k * belief.cov * i_minus_k.transpose() + gain * R_k * gain.transpose();
  } else {
    out.belief.cov = i_minus_k * belief.cov;
  }
  out.belief.cov = clean_covariance(out.belief.cov);
  return out;
}

StepResult step(const Belief& belief, const FilterInput& process, const Eigen::VectorXd& q,
                const Eigen::VectorXd& v, const NoiseConfig& noise, const RobotModel& model,
                const FilterOptions& options) {
  StepResult out;
  out.diagnostics.prior = predict(belief, process, noise, model, options);
  check_state(model, q, v);
  out.diagnostics.measurement = measure(model, q, v);
  const UpdateResult u = update(out.diagnostics.prior, out.diagnostics.measurement,
                                noise.R_c / noise.dt, options.joseph_form);
  out.belief = u.belief;
  out.diagnostics.innovation = u.innovation;
  out.diagnostics.innovation_cov = u.innovation_cov;
  out.diagnostics.nis = u.nis;
  return out;
}

StepResult step(const Belief& belief, const FilterInput& input, const NoiseConfig& noise,
                const RobotModel& model, const FilterOptions& options) {
  return step(belief, input, input.q, input.v, noise, model, options);
}

double nees(const Belief& belief, const CentroidalState& truth) {
  const Vector9d e = truth.vector() - belief.mean.vector();
  return e.dot(belief.cov.ldlt().solve(e));
}

int observability_rank(const Eigen::MatrixXd& H) {
  if (H.size() == 0) return 0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(H);
  lu.setThreshold(1e-10);
  return static_cast<int>(lu.rank());
}

CentroidalEkf::CentroidalEkf(RobotModel model, NoiseConfig noise, FilterOptions options)
    : model_(std::move(model)), noise_(std::move(noise)), options_(std::move(options)) {
  noise_.validate();
  check_covariance(options_.initial_cov, "initial_cov");
}

void CentroidalEkf::reset() {
  previous_.reset();
  have_belief_ = false;
}

void CentroidalEkf::reset(const Belief& belief) {
  previous_.reset();
  belief_ = belief;
  have_belief_ = true;
}

StepResult CentroidalEkf::process(const FilterInput& sample) {
  StepResult out;
  if (!previous_) {
    check_state(model_, sample.q, sample.v);
    out.diagnostics.measurement = measure(model_, sample.q, sample.v);
    if (!have_belief_) {
      belief_.mean = out.diagnostics.measurement;
      belief_.cov = options_.initial_cov;
      have_belief_ = true;
    }
    out.diagnostics.prior = belief_;
    out.diagnostics.innovation = out.diagnostics.measurement.vector() - belief_.mean.vector();
    out.diagnostics.innovation_cov = belief_.cov + noise_.R_c / noise_.dt;
    out.belief = belief_;
  } else {
    out = step(belief_, *previous_, sample.q, sample.v, noise_, model_, options_);
    belief_ = out.belief;
  }
  previous_ = sample;
  return out;
}

}  // namespace cekf

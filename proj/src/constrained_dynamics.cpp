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

#include "centroidal_ekf/constrained_dynamics.hpp"

#include <limits>
#include <string>

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "centroidal_ekf/errors.hpp"
#include "centroidal_ekf/logging.hpp"

namespace cekf {

PseudoInverse pseudo_inverse(const Eigen::MatrixXd& a, double relative_tolerance) {
  PseudoInverse out;
  out.matrix = Eigen::MatrixXd::Zero(a.cols(), a.rows());
  if (a.size() == 0) return out;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double cutoff = relative_tolerance * sigma(0);
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff) {
      out.matrix.noalias() +=
          svd.matrixV().col(i) * (svd.matrixU().col(i).transpose() / sigma(i));
      ++out.rank;
    }
  }
  return out;
}

ProjectedDynamics projected_dynamics(const RobotModel& model, const Eigen::VectorXd& q,
                                     const Eigen::VectorXd& v, const ContactSet& contacts,
                                     VelocityProjection projection) {
  const int nv = model.nv();
  const int n = model.n_joints();
  ProjectedDynamics out;

  const Eigen::MatrixXd jac = contact_jacobian(model, q, contacts);
  const PseudoInverse pinv = pseudo_inverse(jac);
  out.contact_rank = pinv.rank;
  if (pinv.rank < jac.rows()) {
    log_warn("contact Jacobian is rank deficient (" + std::to_string(pinv.rank) + " of " +
             std::to_string(jac.rows()) + "); coincident contacts truncated");
  }
  out.N = Eigen::MatrixXd::Identity(nv, nv) - pinv.matrix * jac;

  out.v = v;
  if (projection == VelocityProjection::kIfInconsistent && contacts.size() > 0 &&
      (jac * v).norm() > kConstraintVelocityTolerance) {
    out.v = out.N * v;
  }

  if (contacts.empty()) {
    out.N_dot_v = Eigen::VectorXd::Zero(nv);
  } else {
    const Eigen::MatrixXd jac_rate = contact_jacobian_rate(model, q, out.v, contacts);
    out.N_dot_v = -(pinv.matrix * (jac_rate * (out.N * out.v)) +
                    out.N * (jac_rate.transpose() * (pinv.matrix.transpose() * out.v)));
  }

  const Eigen::MatrixXd mass = mass_matrix(model, q);
  const Eigen::VectorXd bias = nonlinear_terms(model, q, out.v);
  out.M_c = out.N * mass + Eigen::MatrixXd::Identity(nv, nv) - out.N;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(out.M_c);
  const double rcond = lu.rcond();
  out.mass_condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(out.mass_condition <= kMaxMassCondition)) {
    throw SingularMassError("constraint-consistent mass matrix condition number " +
                            std::to_string(out.mass_condition) + " exceeds 1e12");
  }
  log_debug("Mc condition number " + std::to_string(out.mass_condition));

  out.constrained_acceleration_gain = lu.solve(out.N.rightCols(n));
  out.constrained_acceleration_bias = lu.solve(out.N_dot_v - out.N * bias);

  const Eigen::MatrixXd centroidal = com_shift(com_offset_from_base(model, q)) * mass.topRows<6>();
  out.A = centroidal * out.constrained_acceleration_gain;
  out.b = centroidal * out.constrained_acceleration_bias + cmm_rate_bias(model, q, out.v);
  return out;
}

Eigen::MatrixXd nullspace_projector(const RobotModel& model, const Eigen::VectorXd& q,
                                    const ContactSet& contacts) {
  const Eigen::MatrixXd jac = contact_jacobian(model, q, contacts);
  return Eigen::MatrixXd::Identity(model.nv(), model.nv()) - pseudo_inverse(jac).matrix * jac;
}

Eigen::VectorXd projector_rate_times_v(const RobotModel& model, const Eigen::VectorXd& q,
                                       const Eigen::VectorXd& v, const ContactSet& contacts) {
  if (contacts.empty()) return Eigen::VectorXd::Zero(model.nv());
  const Eigen::MatrixXd jac = contact_jacobian(model, q, contacts);
  const Eigen::MatrixXd pinv = pseudo_inverse(jac).matrix;
  const Eigen::MatrixXd projector = Eigen::MatrixXd::Identity(model.nv(), model.nv()) - pinv * jac;
  const Eigen::MatrixXd jac_rate = contact_jacobian_rate(model, q, v, contacts);
  return -(pinv * (jac_rate * (projector * v)) +
           projector * (jac_rate.transpose() * (pinv.transpose() * v)));
}

Eigen::VectorXd constrained_acceleration(const RobotModel& model, const Eigen::VectorXd& q,
                                         const Eigen::VectorXd& v, const Eigen::VectorXd& tau,
                                         const ContactSet& contacts) {
  const ProjectedDynamics pd = projected_dynamics(model, q, v, contacts);
  return pd.constrained_acceleration_gain * tau + pd.constrained_acceleration_bias;
}

MomentumDynamics momentum_dynamics_coefficients(const RobotModel& model,
                                                const Eigen::VectorXd& q,
                                                const Eigen::VectorXd& v,
                                                const ContactSet& contacts) {
  ProjectedDynamics pd = projected_dynamics(model, q, v, contacts);
  return {std::move(pd.A), pd.b};
}

Vector6d momentum_rate(const RobotModel& model, const Eigen::VectorXd& q,
                       const Eigen::VectorXd& v, const Eigen::VectorXd& tau,
                       const ContactSet& contacts, VelocityProjection projection) {
  const ProjectedDynamics pd = projected_dynamics(model, q, v, contacts, projection);
  return pd.A * tau + pd.b;
}

KktSolution kkt_forward_dynamics(const RobotModel& model, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& v, const Eigen::VectorXd& tau,
                                 const ContactSet& contacts,
                                 const Eigen::VectorXd& stabilization) {
  const int nv = model.nv();
  const int nc = 3 * contacts.size();
  const Eigen::MatrixXd jac = contact_jacobian(model, q, contacts);

  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nv + nc, nv + nc);
  kkt.topLeftCorner(nv, nv) = mass_matrix(model, q);
  kkt.topRightCorner(nv, nc) = jac.transpose();
  kkt.bottomLeftCorner(nc, nv) = jac;

  Eigen::VectorXd rhs(nv + nc);
  rhs.head(nv) = model.selection_matrix() * tau - nonlinear_terms(model, q, v);
  if (nc > 0) {
    rhs.tail(nc) = -contact_jacobian_rate_bias(model, q, v, contacts);
    if (stabilization.size() == nc) rhs.tail(nc) -= stabilization;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(kkt);
  qr.setThreshold(1e-12);
  if (qr.rank() < nv + nc) {
    throw SingularKKTError("contact saddle-point system has rank " + std::to_string(qr.rank()) +
                           " of " + std::to_string(nv + nc));
  }
  const Eigen::VectorXd x = qr.solve(rhs);
  return {x.head(nv), -x.tail(nc)};
}

}  // namespace cekf

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

// Whole-body dynamics projected into the nullspace of rigid point contacts.
//
// With N = I - Jc^+ Jc and stationary feet, (I - N) dv = dN v, and the
// contact-force-free part of the dynamics becomes
//
//   Mc dv = dN v - N n + N B tau,     Mc = N M + I - N.
//
// Substituting into dh_G = A_G dv + dA_G v gives the torque-affine momentum
// rate dh_G = A tau + b with A = A_G Mc^-1 N B and
// b = A_G Mc^-1 (dN v - N n) + dA_G v.

#ifndef CENTROIDAL_EKF_CONSTRAINED_DYNAMICS_HPP_
#define CENTROIDAL_EKF_CONSTRAINED_DYNAMICS_HPP_

#include <Eigen/Core>

#include "centroidal_ekf/kinodynamics.hpp"
#include "centroidal_ekf/model.hpp"
#include "centroidal_ekf/spatial.hpp"

namespace cekf {

/// Relative singular-value cutoff for the contact Jacobian pseudoinverse.
inline constexpr double kPseudoInverseTolerance = 1e-10;
/// Mc condition number above which the stance is rejected.
inline constexpr double kMaxMassCondition = 1e12;
/// Contact velocity residual |Jc v| above which v is projected onto N v.
inline constexpr double kConstraintVelocityTolerance = 1e-6;

struct PseudoInverse {
  Eigen::MatrixXd matrix;
  int rank = 0;
};

/// Moore-Penrose inverse by SVD, dropping singular values below
/// `relative_tolerance * sigma_max`.
PseudoInverse pseudo_inverse(const Eigen::MatrixXd& a,
                             double relative_tolerance = kPseudoInverseTolerance);

enum class VelocityProjection {
  kIfInconsistent,  ///< v <- N v when |Jc v| > kConstraintVelocityTolerance
  kNever,
};

struct ProjectedDynamics {
  Eigen::MatrixXd N;        ///< (n+6) x (n+6)
  Eigen::VectorXd N_dot_v;  ///< (n+6)
  Eigen::MatrixXd M_c;      ///< (n+6) x (n+6)
  Eigen::MatrixXd A;        ///< 6 x n
  Vector6d b;
  Eigen::VectorXd v;        ///< velocity actually used (possibly projected)
  Eigen::VectorXd constrained_acceleration_bias;  ///< Mc^-1 (dN v - N n)
  Eigen::MatrixXd constrained_acceleration_gain;  ///< Mc^-1 N B
  double mass_condition = 1.0;
  int contact_rank = 0;
};

/// Everything above in one pass. Throws SingularMassError when
/// cond(Mc) > kMaxMassCondition.
ProjectedDynamics projected_dynamics(const RobotModel& model, const Eigen::VectorXd& q,
                                     const Eigen::VectorXd& v, const ContactSet& contacts,
                                     VelocityProjection projection = VelocityProjection::kIfInconsistent);

Eigen::MatrixXd nullspace_projector(const RobotModel& model, const Eigen::VectorXd& q,
                                    const ContactSet& contacts);

/// dN/dt v, from the derivative of the row-space projector Jc^+ Jc (constant
/// rank): dN = -(Jc^+ dJc N + N dJc^T Jc^+T).
Eigen::VectorXd projector_rate_times_v(const RobotModel& model, const Eigen::VectorXd& q,
                                       const Eigen::VectorXd& v, const ContactSet& contacts);

Eigen::VectorXd constrained_acceleration(const RobotModel& model, const Eigen::VectorXd& q,
                                         const Eigen::VectorXd& v, const Eigen::VectorXd& tau,
                                         const ContactSet& contacts);

struct MomentumDynamics {
  Eigen::MatrixXd A;  ///< 6 x n
  Vector6d b;
};

MomentumDynamics momentum_dynamics_coefficients(const RobotModel& model,
                                                const Eigen::VectorXd& q,
                                                const Eigen::VectorXd& v,
                                                const ContactSet& contacts);

/// A tau + b.
Vector6d momentum_rate(const RobotModel& model, const Eigen::VectorXd& q,
                       const Eigen::VectorXd& v, const Eigen::VectorXd& tau,
                       const ContactSet& contacts,
                       VelocityProjection projection = VelocityProjection::kIfInconsistent);

struct KktSolution {
  Eigen::VectorXd acceleration;  ///< n + 6
  Eigen::VectorXd force;         ///< 3 m, ground reaction on the robot, world axes
};

/// Solves [M Jc^T; Jc 0] [dv; -lambda] = [B tau - n; -dJc v - stabilization]
/// with a rank-revealing QR. `stabilization` (optional, 3 m) lets a simulator
/// add constraint-drift feedback to the contact acceleration. Throws
/// SingularKKTError when the system is rank deficient.
KktSolution kkt_forward_dynamics(const RobotModel& model, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& v, const Eigen::VectorXd& tau,
                                 const ContactSet& contacts,
                                 const Eigen::VectorXd& stabilization = Eigen::VectorXd());

}  // namespace cekf

#endif  // CENTROIDAL_EKF_CONSTRAINED_DYNAMICS_HPP_

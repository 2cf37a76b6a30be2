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

#ifndef CENTROIDAL_EKF_SPATIAL_HPP_
#define CENTROIDAL_EKF_SPATIAL_HPP_

#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace cekf {

using Vector9d = Eigen::Matrix<double, 9, 1>;
using Matrix9d = Eigen::Matrix<double, 9, 9>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

/// Cross-product matrix: skew(a) * b == a.cross(b).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 3, 3> skew(
    const Eigen::MatrixBase<Derived>& a) {
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(Derived, 3);
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, 3, 3> s;
  s << Scalar(0), -a(2), a(1),
       a(2), Scalar(0), -a(0),
       -a(1), a(0), Scalar(0);
  return s;
}

/// Rotation by the rotation vector `phi` (axis * angle).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 3, 3> exp_so3(
    const Eigen::MatrixBase<Derived>& phi) {
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(Derived, 3);
  using Scalar = typename Derived::Scalar;
  const Scalar angle = phi.norm();
  if (angle < Scalar(1e-12)) {
    return Eigen::Matrix<Scalar, 3, 3>::Identity() + skew(phi);
  }
  return Eigen::AngleAxis<Scalar>(angle, phi / angle).toRotationMatrix();
}

/// Rotation vector of `r` (inverse of exp_so3 for angles below pi).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 3, 1> log_so3(
    const Eigen::MatrixBase<Derived>& r) {
  using Scalar = typename Derived::Scalar;
  const Eigen::AngleAxis<Scalar> aa{Eigen::Matrix<Scalar, 3, 3>(r)};
  return aa.angle() * aa.axis();
}

/// Momentum transfer from a reference point to the CoM:
/// [l; k_com] = com_shift(c - p) * [l; k_p].
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 6, 6> com_shift(
    const Eigen::MatrixBase<Derived>& offset) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, 6, 6> x = Eigen::Matrix<Scalar, 6, 6>::Identity();
  x.template bottomLeftCorner<3, 3>() = -skew(offset);
  return x;
}

/// Inertia tensor about the CoM, rotated into world axes.
template <typename DerivedR, typename DerivedI>
Eigen::Matrix<typename DerivedR::Scalar, 3, 3> rotate_inertia(
    const Eigen::MatrixBase<DerivedR>& rotation,
    const Eigen::MatrixBase<DerivedI>& inertia) {
  return rotation * inertia * rotation.transpose();
}

/// Symmetric part, used to scrub round-off asymmetry from covariances.
template <typename Derived>
typename Derived::PlainObject symmetrized(const Eigen::MatrixBase<Derived>& m) {
  return (m + m.transpose()) / typename Derived::Scalar(2);
}

}  // namespace cekf

#endif  // CENTROIDAL_EKF_SPATIAL_HPP_

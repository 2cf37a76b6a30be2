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

// Extended Kalman filter over the centroidal state x = [c, l, k].
//
// Process model (continuous):  dc = l / m,  d[l, k] = A(q, v) tau + b(q, v),
// discretized with explicit Euler. The measurement is the centroidal state
// computed from (q, v) directly, so H = I.

#ifndef CENTROIDAL_EKF_ESTIMATOR_HPP_
#define CENTROIDAL_EKF_ESTIMATOR_HPP_

#include <optional>

#include <Eigen/Core>

#include "centroidal_ekf/kinodynamics.hpp"
#include "centroidal_ekf/model.hpp"
#include "centroidal_ekf/spatial.hpp"

namespace cekf {

struct Belief {
  CentroidalState mean;
  Matrix9d cov = Matrix9d::Identity();
};

struct NoiseConfig {
  Matrix9d Q_c = Matrix9d::Identity();  ///< continuous process covariance
  Matrix9d R_c = Matrix9d::Identity();  ///< continuous measurement covariance
  double dt = 1e-3;                     ///< filter period [s]

  /// Throws ValidationError unless both matrices are symmetric PSD and dt > 0.
  void validate() const;

  /// Default tuning for the shipped quadruped at 1 kHz.
  static NoiseConfig defaults();
};

struct FilterInput {
  Eigen::VectorXd tau;  ///< n
  Eigen::VectorXd q;    ///< n + 7
  Eigen::VectorXd v;    ///< n + 6
  ContactSet contacts;
};

struct FilterOptions {
  bool joseph_form = false;
  double jacobian_step = 1e-6;
  /// Covariance used when the filter initializes from its first measurement.
  Matrix9d initial_cov = Matrix9d::Identity() * 1e-2;
};

/// The measurement function: centroidal_momentum(q, v).
CentroidalState measure(const RobotModel& model, const Eigen::VectorXd& q,
                        const Eigen::VectorXd& v);

/// Continuous process Jacobian F_c. Columns realize unit state
/// perturbations: dc by a base translation, d[l, k] by a base velocity change
/// solving A_G,base dv_base = dh. Central differences of the momentum rate,
/// evaluated without re-projecting the perturbed velocity.
Matrix9d fd_process_jacobian(const RobotModel& model, const Eigen::VectorXd& q,
                             const Eigen::VectorXd& v, const Eigen::VectorXd& tau,
                             const ContactSet& contacts, double step = 1e-6);

struct Discretization {
  Matrix9d F;
  Matrix9d Q;
  Matrix9d R;
};

/// F = I + F_c dt,  Q = F Q_c F^T dt (symmetrized),  R = R_c / dt.
Discretization discretize(const Matrix9d& F_c, const NoiseConfig& noise);

Belief predict(const Belief& belief, const FilterInput& input, const NoiseConfig& noise,
               const RobotModel& model, const FilterOptions& options = {});

struct UpdateResult {
  Belief belief;
  Vector9d innovation;
  Matrix9d innovation_cov;
  double nis = 0.0;  ///< innovation^T S^-1 innovation
};

/// Kalman update with H = I. Throws SingularInnovationError when P + R is
/// not positive definite.
UpdateResult update(const Belief& belief, const CentroidalState& z, const Matrix9d& R_k,
                    bool joseph_form = false);

struct StepDiagnostics {
  CentroidalState measurement;
  Belief prior;
  Vector9d innovation = Vector9d::Zero();
  Matrix9d innovation_cov = Matrix9d::Zero();
  double nis = 0.0;
};

struct StepResult {
  Belief belief;
  StepDiagnostics diagnostics;
};

/// Predict with `process` (torques, state and contacts of the previous
/// sample), then update with the measurement computed from (q, v).
StepResult step(const Belief& belief, const FilterInput& process, const Eigen::VectorXd& q,
                const Eigen::VectorXd& v, const NoiseConfig& noise, const RobotModel& model,
                const FilterOptions& options = {});

/// Same-sample form: prediction and measurement both from `input`.
StepResult step(const Belief& belief, const FilterInput& input, const NoiseConfig& noise,
                const RobotModel& model, const FilterOptions& options = {});

/// Normalized estimation error squared of `belief` against a known state.
double nees(const Belief& belief, const CentroidalState& truth);

/// Rank of the first observability block (the measurement Jacobian).
int observability_rank(const Eigen::MatrixXd& H);

/// Sequential driver: feeds one sample at a time, carrying the previous
/// sample as process input. The first sample initializes the mean at its
/// measurement.
class CentroidalEkf {
 public:
  CentroidalEkf(RobotModel model, NoiseConfig noise, FilterOptions options = {});

  StepResult process(const FilterInput& sample);
  void reset();
  void reset(const Belief& belief);

  const Belief& belief() const { return belief_; }
  const NoiseConfig& noise() const { return noise_; }
  bool initialized() const { return previous_.has_value(); }

 private:
  RobotModel model_;
  NoiseConfig noise_;
  FilterOptions options_;
  Belief belief_;
  bool have_belief_ = false;
  std::optional<FilterInput> previous_;
};

}  // namespace cekf

#endif  // CENTROIDAL_EKF_ESTIMATOR_HPP_

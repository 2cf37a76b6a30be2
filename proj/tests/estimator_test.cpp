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

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "centroidal_ekf/constrained_dynamics.hpp"
#include "centroidal_ekf/errors.hpp"
#include "centroidal_ekf/scenario.hpp"
#include "centroidal_ekf/simulate.hpp"
#include "test_util.hpp"

namespace cekf {
namespace {

using testing::random_stance_configuration;
using testing::random_vector;

RobotModel rigid_body(const Eigen::Vector3d& gravity) {
  return single_rigid_body(2.0, Eigen::Vector3d(0.0, 0.0, 0.1),
                           Eigen::Vector3d(0.02, 0.03, 0.04).asDiagonal(), gravity);
}

NoiseConfig diagonal_noise(double q, double r, double dt = 1e-3) {
  NoiseConfig n;
  n.Q_c = Matrix9d::Identity() * q;
  n.R_c = Matrix9d::Identity() * r;
  n.dt = dt;
  return n;
}

FilterInput stance_input(const RobotModel& model, std::mt19937& rng) {
  FilterInput in;
  in.q = random_stance_configuration(model, rng);
  in.contacts = ContactSet::all(model.n_feet());
  in.v = nullspace_projector(model, in.q, in.contacts) * random_vector(model.nv(), rng, 0.3);
  in.tau = random_vector(model.n_joints(), rng, 0.5);
  return in;
}

double min_eigenvalue(const Matrix9d& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix9d>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

TEST(Measure, RestStateHasZeroMomentum) {
  const RobotModel model = default_quadruped();
  const Eigen::VectorXd q = standing_configuration(model);
  const CentroidalState x = measure(model, q, Eigen::VectorXd::Zero(model.nv()));
  EXPECT_EQ(x.c, com_position(model, q));
  EXPECT_EQ(x.l, Eigen::Vector3d::Zero());
  EXPECT_EQ(x.k, Eigen::Vector3d::Zero());
}

TEST(Measure, MatchesLinkSumOracle) {
  const RobotModel model = default_quadruped();
  std::mt19937 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd q = testing::random_configuration(model, rng);
    const Eigen::VectorXd v = random_vector(model.nv(), rng);
    const Vector9d got = measure(model, q, v).vector();
    const Vector9d want = testing::link_sum_momentum(model, q, v).vector();
    EXPECT_LE((got - want).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Measure, MomentaLinearInVelocity) {
  const RobotModel model = default_quadruped();
  std::mt19937 rng(22);
  const Eigen::VectorXd q = testing::random_configuration(model, rng);
  const Eigen::VectorXd v = random_vector(model.nv(), rng);
  const Vector6d h = measure(model, q, v).momentum();
  const Vector6d h3 = measure(model, q, -2.5 * v).momentum();
  EXPECT_LE((h3 + 2.5 * h).norm(), 1e-12 * (1.0 + h.norm()));
}

TEST(Predict, VanishingStepKeepsBelief) {
  const RobotModel model = default_quadruped();
  std::mt19937 rng(23);
  const FilterInput in = stance_input(model, rng);
  Belief b;
  b.mean = measure(model, in.q, in.v);
  b.cov = Matrix9d::Identity() * 1e-3;
  const Belief out = predict(b, in, diagonal_noise(1e-2, 1e-6, 1e-12), model);
  EXPECT_LE((out.mean.vector() - b.mean.vector()).norm(), 1e-9);
  EXPECT_LE((out.cov - b.cov).norm(), 1e-9);
}

TEST(Predict, FlightMomentumFallsWithGravityForAnyTorque) {
  const RobotModel model = default_quadruped();
  std::mt19937 rng(24);
  for (int trial = 0; trial < 5; ++trial) {
    FilterInput in;
    in.q = testing::random_configuration(model, rng);
    in.v = random_vector(model.nv(), rng);
    in.tau = random_vector(model.n_joints(), rng, 3.0);
    Belief b;
    b.mean = measure(model, in.q, in.v);
    const Belief out = predict(b, in, diagonal_noise(1e-4, 1e-6), model);
    const double drop = model.total_mass() * 9.81 * 1e-3;
    EXPECT_NEAR(b.mean.l.z() - out.mean.l.z(), drop, 1e-9);
    EXPECT_NEAR(out.mean.l.x(), b.mean.l.x(), 1e-9);
    EXPECT_LE((out.mean.k - b.mean.k).norm(), 1e-9);
  }
}

// Prediction from the true state vs a finely integrated true step. Euler on
// smooth dynamics leaves an O(dt^2) one-step error.
TEST(Predict, OneStepErrorIsSecondOrder) {
  const RobotModel model = default_quadruped();
  std::mt19937 rng(25);
  const FilterInput in = stance_input(model, rng);
  const GeneralizedState start{in.q, in.v};
  auto error = [&](double dt) {
    GeneralizedState s = start;
    const int fine = 400;
    for (int i = 0; i < fine; ++i) s = step_dynamics(model, s, in.tau, in.contacts, dt / fine);
    Belief b;
    b.mean = measure(model, in.q, in.v);
    const Belief p = predict(b, in, diagonal_noise(1e-4, 1e-6, dt), model);
    return (p.mean.vector() - measure(model, s.q, s.v).vector()).norm();
  };
  const double e1 = error(2e-3);
  const double e2 = error(1e-3);
  EXPECT_GT(e1 / e2, 3.0);
  EXPECT_LT(e1 / e2, 5.0);
}

TEST(ProcessJacobian, CoMRowIsExact) {
  const RobotModel model = default_quadruped();
  std::mt19937 rng(26);
  const FilterInput in = stance_input(model, rng);
  const Matrix9d f = fd_process_jacobian(model, in.q, in.v, in.tau, in.contacts);
  Matrix9d top = Matrix9d::Zero();
  top.block<3, 3>(0, 3) = Eigen::Matrix3d::Identity() / model.total_mass();
  EXPECT_EQ(Eigen::MatrixXd(f.topRows<3>()), Eigen::MatrixXd(top.topRows<3>()));
}

TEST(ProcessJacobian, FlightLinearRateIgnoresCoM) {
  const RobotModel model = default_quadruped();
  std::mt19937 rng(27);
  const Eigen::VectorXd q = testing::random_configuration(model, rng);
  const Eigen::VectorXd v = random_vector(model.nv(), rng);
  const Eigen::VectorXd tau = random_vector(model.n_joints(), rng);
  const Matrix9d f = fd_process_jacobian(model, q, v, tau, ContactSet());
  EXPECT_LE((f.block<3, 3>(3, 0).cwiseAbs().maxCoeff()), 1e-6);
}

// F_k delta against re-running the Euler prediction from (q, v) perturbed to
// realize delta. The momentum rate is evaluated without re-projecting the
// perturbed velocity, as in the Jacobian. The first-order residual shrinks
// like delta^2.
TEST(ProcessJacobian, PredictsPerturbedPredictionToFirstOrder) {
  const RobotModel model = default_quadruped();
  std::mt19937 rng(28);
  const FilterInput in = stance_input(model, rng);
  const NoiseConfig noise = diagonal_noise(1e-4, 1e-6);
  const Matrix9d fk = discretize(fd_process_jacobian(model, in.q, in.v, in.tau, in.contacts),
                                 noise).F;
  const Vector9d direction = random_vector(9, rng).normalized();

  auto predicted = [&](const Eigen::VectorXd& q, const Eigen::VectorXd& v) {
    const CentroidalState x = measure(model, q, v);
    const Vector6d rate =
        momentum_rate(model, q, v, in.tau, in.contacts, VelocityProjection::kNever);
    Vector9d out = x.vector();
    out.head<3>() += x.l / model.total_mass() * noise.dt;
    out.tail<6>() += rate * noise.dt;
    return out;
  };
  const Vector9d nominal = predicted(in.q, in.v);
  std::vector<double> ratios;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const Vector9d delta = eps * direction;
    Eigen::VectorXd dq = Eigen::VectorXd::Zero(model.nv());
    dq.head<3>() = delta.head<3>();
    const Eigen::VectorXd q = integrate(model, in.q, dq);
    Eigen::VectorXd v = in.v;
    const Vector6d shift = measure(model, q, in.v).momentum() - measure(model, in.q, in.v).momentum();
    v.head<6>() += cmm(model, q).leftCols<6>().inverse() * (delta.tail<6>() - shift);
    ratios.push_back((predicted(q, v) - nominal - fk * delta).norm() / eps);
  }
  // Each tenfold smaller delta cuts the relative residual about tenfold.
  EXPECT_LT(ratios[1], 0.2 * ratios[0]);
  EXPECT_LT(ratios[2], 0.2 * ratios[1]);
  EXPECT_LT(ratios[2], 1e-5);
}

TEST(Discretize, ZeroJacobian) {
  const NoiseConfig n = diagonal_noise(0.3, 0.2, 1e-3);
  const Discretization d = discretize(Matrix9d::Zero(), n);
  EXPECT_EQ(d.F, Matrix9d::Identity());
  EXPECT_LE((d.Q - n.Q_c * 1e-3).norm(), 1e-18);
}

TEST(Discretize, MeasurementCovarianceScalesWithRate) {
  const Discretization d = discretize(Matrix9d::Zero(), diagonal_noise(0.0, 1.0, 1e-3));
  EXPECT_LE((d.R - 1000.0 * Matrix9d::Identity()).norm(), 1e-9);
}

TEST(Discretize, ProcessCovarianceStaysPsd) {
  std::mt19937 rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd g = random_vector(81, rng).reshaped(9, 9);
    NoiseConfig n;
    n.Q_c = g * g.transpose();
    n.dt = 1e-3;
    const Discretization d = discretize(Matrix9d(random_vector(81, rng).reshaped(9, 9)), n);
    EXPECT_EQ(d.Q, d.Q.transpose());
    EXPECT_GE(min_eigenvalue(d.Q), -1e-12 * d.Q.norm());
  }
}

TEST(Update, TinyMeasurementNoiseTakesMeasurement) {
  Belief b;
  b.mean = CentroidalState::from_vector(Vector9d::Constant(1.0));
  b.cov = Matrix9d::Identity();
  const CentroidalState z = CentroidalState::from_vector(Vector9d::LinSpaced(9, -1.0, 1.0));
  const UpdateResult u = update(b, z, Matrix9d::Identity() * 1e-14);
  EXPECT_LE((u.belief.mean.vector() - z.vector()).norm(), 1e-12);
}

TEST(Update, HugeMeasurementNoiseKeepsPrior) {
  Belief b;
  b.mean = CentroidalState::from_vector(Vector9d::Constant(1.0));
  b.cov = Matrix9d::Identity() * 1e-2;
  const CentroidalState z = CentroidalState::from_vector(Vector9d::Constant(3.0));
  const Matrix9d r = Matrix9d::Identity() * 1e12;
  const UpdateResult u = update(b, z, r);
  const double bound = (z.vector() - b.mean.vector()).norm() * b.cov.norm() / r.norm();
  EXPECT_LE((u.belief.mean.vector() - b.mean.vector()).norm(), bound);
}

TEST(Update, EqualWeightsGiveMidpoint) {
  Belief b;
  b.mean = CentroidalState::from_vector(Vector9d::LinSpaced(9, 0.0, 8.0));
  b.cov = Matrix9d::Identity() * 0.04;
  const CentroidalState z = CentroidalState::from_vector(Vector9d::Constant(2.0));
  const UpdateResult u = update(b, z, Matrix9d::Identity() * 0.04);
  const Vector9d mid = 0.5 * (b.mean.vector() + z.vector());
  EXPECT_LE((u.belief.mean.vector() - mid).norm(), 1e-12);
  EXPECT_LE((u.belief.cov - Matrix9d::Identity() * 0.02).norm(), 1e-15);
}

TEST(Update, SingularInnovationThrows) {
  Belief b;
  b.cov = Matrix9d::Zero();
  EXPECT_THROW(update(b, CentroidalState(), Matrix9d::Zero()), SingularInnovationError);
}

TEST(Update, JosephFormAgreesWithSimpleForm) {
  std::mt19937 rng(30);
  const Eigen::MatrixXd g = random_vector(81, rng).reshaped(9, 9);
  Belief b;
  b.cov = symmetrized(Matrix9d(g * g.transpose() * 0.1));
  const CentroidalState z = CentroidalState::from_vector(random_vector(9, rng));
  const Matrix9d r = Matrix9d::Identity() * 0.5;
  const UpdateResult a = update(b, z, r, false);
  const UpdateResult j = update(b, z, r, true);
  EXPECT_LE((a.belief.cov - j.belief.cov).norm(), 1e-10);
  EXPECT_EQ(a.belief.mean.vector(), j.belief.mean.vector());
}

TEST(Step, ConstantMeasurementWithoutDynamicsConverges) {
  const RobotModel model = rigid_body(Eigen::Vector3d::Zero());
  FilterInput in;
  in.q = neutral_configuration(model);
  in.v = Eigen::VectorXd::Zero(6);
  in.tau = Eigen::VectorXd::Zero(0);
  Belief b;
  b.mean = CentroidalState::from_vector(Vector9d::Constant(0.5));
  b.cov = Matrix9d::Identity();
  const NoiseConfig noise = diagonal_noise(1e-2, 1e-6);
  for (int i = 0; i < 2000; ++i) b = step(b, in, noise, model).belief;
  EXPECT_LE((b.mean.vector() - measure(model, in.q, in.v).vector()).norm(), 1e-6);
}

TEST(Step, CovarianceStaysSymmetricPsdOverManySteps) {
  const RobotModel model = rigid_body(Eigen::Vector3d(0.0, 0.0, -9.81));
  std::mt19937 rng(31);
  NoiseConfig noise = diagonal_noise(1e-2, 1e-5);
  CentroidalEkf ekf(model, noise);
  FilterInput in;
  in.tau = Eigen::VectorXd::Zero(0);
  double worst_asym = 0.0;
  double worst_eig = 0.0;
  for (int i = 0; i < 100000; ++i) {
    in.q = testing::random_configuration(model, rng);
    in.v = random_vector(6, rng, 0.5);
    const Matrix9d& p = ekf.process(in).belief.cov;
    worst_asym = std::max(worst_asym, (p - p.transpose()).cwiseAbs().maxCoeff());
    if (i % 100 == 0) worst_eig = std::min(worst_eig, min_eigenvalue(p));
  }
  EXPECT_LE(worst_asym, 1e-10);
  EXPECT_GE(worst_eig, -1e-9);
}

// With Q = 0, zero initial covariance and exact inputs, the gain is exactly
// zero and the mean is the open-loop Euler integral.
TEST(Step, ReducesToOpenLoopIntegration) {
  const RobotModel model = default_quadruped();
  Scenario scenario = Scenario::defaults(ScenarioKind::kTrot);
  scenario.duration = 0.3;
  const SimulationLog sim = simulate(model, scenario);
  NoiseConfig noise = diagonal_noise(0.0, 1e6);
  CentroidalEkf ekf(model, noise);
  Belief start;
  start.mean = measure(model, sim.frames[0].q, sim.frames[0].v);
  start.cov = Matrix9d::Zero();
  ekf.reset(start);

  Vector9d x = start.mean.vector();
  const double m = model.total_mass();
  for (std::size_t k = 0; k < sim.frames.size(); ++k) {
    const LogFrame& f = sim.frames[k];
    const ContactSet contacts = ContactSet::from_flags(f.contacts);
    const StepResult r = ekf.process({f.tau, f.q, f.v, contacts});
    ASSERT_EQ(r.belief.mean.vector(), x) << "frame " << k;
    const ProjectedDynamics pd = projected_dynamics(model, f.q, f.v, contacts);
    const Vector6d rate = pd.A * f.tau + pd.b;
    CentroidalState next;
    next.c = x.head<3>() + Eigen::Vector3d(x.segment<3>(3)) / m * noise.dt;
    next.l = x.segment<3>(3) + rate.head<3>() * noise.dt;
    next.k = x.tail<3>() + rate.tail<3>() * noise.dt;
    x = next.vector();
  }
}

TEST(Observability, RankOfMeasurementJacobian) {
  EXPECT_EQ(observability_rank(Matrix9d::Identity()), 9);
  Matrix9d h = Matrix9d::Identity();
  h.row(4).setZero();
  EXPECT_EQ(observability_rank(h), 8);
  EXPECT_EQ(observability_rank(Matrix9d::Zero()), 0);
}

TEST(NoiseConfig, RejectsBadCovariances) {
  NoiseConfig n = NoiseConfig::defaults();
  EXPECT_NO_THROW(n.validate());
  n.Q_c(0, 1) = 1.0;
  EXPECT_THROW(n.validate(), ValidationError);
  n = NoiseConfig::defaults();
  n.R_c(2, 2) = -1.0;
  EXPECT_THROW(n.validate(), ValidationError);
  n = NoiseConfig::defaults();
  n.dt = 0.0;
  EXPECT_THROW(n.validate(), ValidationError);
}

}  // namespace
}  // namespace cekf

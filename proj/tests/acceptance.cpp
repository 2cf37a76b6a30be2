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

// Acceptance run. One line per criterion:
//   [PASS] 7 noiseless tracking: ... (12.3 s)
// Exit status is nonzero when any criterion fails. Pass criterion numbers as
// arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "centroidal_ekf/constrained_dynamics.hpp"
#include "centroidal_ekf/contact.hpp"
#include "centroidal_ekf/estimator.hpp"
#include "centroidal_ekf/kinodynamics.hpp"
#include "centroidal_ekf/metrics.hpp"
#include "centroidal_ekf/model.hpp"
#include "centroidal_ekf/pipeline.hpp"
#include "centroidal_ekf/scenario.hpp"
#include "centroidal_ekf/sensor_noise.hpp"
#include "centroidal_ekf/simulate.hpp"
#include "test_util.hpp"

namespace cekf {
namespace {

using testing::all_contact_sets;
using testing::random_configuration;
using testing::random_stance_configuration;
using testing::random_vector;

constexpr double kWarmup = 0.2;
constexpr std::uint64_t kNoiseSeed = 11;

struct Outcome {
  bool pass = true;
  std::string detail;
};

const RobotModel& model() {
  static const RobotModel m = default_quadruped();
  return m;
}

// Noise-free simulations, built once.
const SimulationLog& simulation(ScenarioKind kind) {
  static std::map<ScenarioKind, SimulationLog> cache;
  auto it = cache.find(kind);
  if (it == cache.end()) it = cache.emplace(kind, simulate(model(), Scenario::defaults(kind))).first;
  return it->second;
}

std::vector<LogFrame> noisy(ScenarioKind kind, std::uint64_t seed = kNoiseSeed) {
  NoiseInjection noise = NoiseInjection::preset("default");
  noise.seed = seed;
  return inject_noise(simulation(kind).frames, noise);
}

std::string fmt_e(double x) { return fmt::format("{:.2e}", x); }

// --- 1 ---
Outcome projector_suite() {
  std::mt19937 rng(101);
  double idem = 0.0, sym = 0.0, annihilate = 0.0;
  for (const ContactSet& contacts : all_contact_sets(model().n_feet())) {
    for (int t = 0; t < 100; ++t) {
      const Eigen::VectorXd q = random_configuration(model(), rng);
      const Eigen::MatrixXd n = nullspace_projector(model(), q, contacts);
      idem = std::max(idem, (n * n - n).cwiseAbs().maxCoeff());
      sym = std::max(sym, (n - n.transpose()).cwiseAbs().maxCoeff());
      if (!contacts.empty()) {
        const Eigen::MatrixXd jt = contact_jacobian(model(), q, contacts).transpose();
        annihilate = std::max(annihilate, (n * jt).cwiseAbs().maxCoeff());
      }
    }
  }
  const bool ok = idem <= 1e-8 && sym <= 1e-8 && annihilate <= 1e-8;
  return {ok, fmt::format("16 contact sets x 100 configs; |N^2-N| {} |N-N^T| {} |N Jc^T| {}",
                          fmt_e(idem), fmt_e(sym), fmt_e(annihilate))};
}

// --- 2 ---
Outcome oracle_equivalence() {
  std::mt19937 rng(102);
  double worst = 0.0;
  for (const ContactSet& contacts : all_contact_sets(model().n_feet())) {
    for (int t = 0; t < 100; ++t) {
      const Eigen::VectorXd q = random_configuration(model(), rng);
      const Eigen::VectorXd v =
          nullspace_projector(model(), q, contacts) * random_vector(model().nv(), rng);
      const Eigen::VectorXd tau = random_vector(model().n_joints(), rng, 2.0);
      const Eigen::VectorXd a = constrained_acceleration(model(), q, v, tau, contacts);
      const Eigen::VectorXd ref = kkt_forward_dynamics(model(), q, v, tau, contacts).acceleration;
      worst = std::max(worst, (a - ref).norm() / std::max(1.0, ref.norm()));
    }
  }
  return {worst <= 1e-7, fmt::format("1600 states; max relative deviation {}", fmt_e(worst))};
}

// --- 3 ---
Outcome momentum_identity() {
  std::mt19937 rng(103);
  double identity = 0.0;
  for (const ContactSet& contacts : all_contact_sets(model().n_feet())) {
    for (int t = 0; t < 20; ++t) {
      const Eigen::VectorXd q = random_stance_configuration(model(), rng);
      const Eigen::VectorXd v =
          nullspace_projector(model(), q, contacts) * random_vector(model().nv(), rng);
      const Eigen::VectorXd tau = random_vector(model().n_joints(), rng, 2.0);
      const MomentumDynamics md = momentum_dynamics_coefficients(model(), q, v, contacts);
      const Vector6d lhs = md.A * tau + md.b;
      const Vector6d rhs = cmm(model(), q) * constrained_acceleration(model(), q, v, tau, contacts) +
                           cmm_rate_bias(model(), q, v);
      identity = std::max(identity, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  }
  double flight = 0.0;
  const Eigen::Vector3d weight = model().total_mass() * model().gravity();
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd q = random_configuration(model(), rng);
    const Eigen::VectorXd v = random_vector(model().nv(), rng);
    const Eigen::VectorXd tau = random_vector(model().n_joints(), rng, 5.0);
    const Vector6d rate = momentum_rate(model(), q, v, tau, ContactSet());
    flight = std::max({flight, (rate.head<3>() - weight).cwiseAbs().maxCoeff(),
                       rate.tail<3>().cwiseAbs().maxCoeff()});
  }
  return {identity <= 1e-9 && flight <= 1e-7,
          fmt::format("|A tau + b - (A_G a + dA_G v)| {}; flight |rate - gravity wrench| {}",
                      fmt_e(identity), fmt_e(flight))};
}

// --- 4 ---
Outcome mass_and_cmm() {
  std::mt19937 rng(104);
  const int nv = model().nv();
  double crba = 0.0, link_sum = 0.0, from_mass = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd q = random_configuration(model(), rng);
    const Eigen::VectorXd v = random_vector(nv, rng);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(nv);
    const Eigen::MatrixXd mass = mass_matrix(model(), q);
    const Eigen::VectorXd rest = inverse_dynamics(model(), q, zero, zero);
    for (int i = 0; i < nv; ++i) {
      const Eigen::VectorXd col = inverse_dynamics(model(), q, zero, Eigen::VectorXd::Unit(nv, i)) - rest;
      crba = std::max(crba, (mass.col(i) - col).cwiseAbs().maxCoeff());
    }
    const Eigen::MatrixXd ag = cmm(model(), q);
    const CentroidalState oracle = testing::link_sum_momentum(model(), q, v);
    link_sum = std::max(link_sum, (ag * v - oracle.momentum()).cwiseAbs().maxCoeff());
    // Base rows of M are the momentum about the base origin; shift to the CoM.
    Matrix6d shift = Matrix6d::Identity();
    shift.bottomLeftCorner<3, 3>() = -skew(com_position(model(), q) - q.head<3>());
    from_mass = std::max(from_mass, (shift * mass.topRows<6>() - ag).cwiseAbs().maxCoeff());
  }
  return {crba <= 1e-10 && link_sum <= 1e-10 && from_mass <= 1e-10,
          fmt::format("CRBA vs unit-acceleration ID {}; A_G v vs link sum {}; A_G vs shifted M {}",
                      fmt_e(crba), fmt_e(link_sum), fmt_e(from_mass))};
}

// --- 5 ---
Outcome process_jacobian() {
  std::mt19937 rng(105);
  double worst = 0.0;
  int checked = 0;
  for (int t = 0; t < 50; ++t) {
    const Eigen::VectorXd q = random_stance_configuration(model(), rng);
    const ContactSet contacts = ContactSet::all(model().n_feet());
    const Eigen::VectorXd v =
        nullspace_projector(model(), q, contacts) * random_vector(model().nv(), rng, 0.5);
    const Eigen::VectorXd tau = random_vector(model().n_joints(), rng, 1.0);
    const Matrix9d f = fd_process_jacobian(model(), q, v, tau, contacts);
    // Richardson extrapolation of central differences at h and h/2.
    const double h = 1e-4;
    const Matrix9d coarse = fd_process_jacobian(model(), q, v, tau, contacts, h);
    const Matrix9d fine = fd_process_jacobian(model(), q, v, tau, contacts, h / 2);
    const Matrix9d oracle = (4.0 * fine - coarse) / 3.0;
    for (int i = 0; i < 9; ++i) {
      for (int j = 0; j < 9; ++j) {
        if (std::abs(oracle(i, j)) <= 1e-8) continue;
        worst = std::max(worst, std::abs(f(i, j) - oracle(i, j)) / std::abs(oracle(i, j)));
        ++checked;
      }
    }
  }
  return {worst <= 1e-4,
          fmt::format("50 stance states, {} entries; max relative error {}", checked, fmt_e(worst))};
}

// --- 6 ---
Outcome observability() {
  const int rank = observability_rank(Matrix9d::Identity());
  return {rank == 9, fmt::format("rank(I_9) = {}", rank)};
}

// --- 7 ---
Outcome noiseless_tracking() {
  Outcome out;
  for (ScenarioKind kind : {ScenarioKind::kBalanceBase, ScenarioKind::kTrot, ScenarioKind::kJump}) {
    const auto start = std::chrono::steady_clock::now();
    const SimulationLog& sim = simulation(kind);
    const auto trace = run_estimation(model(), sim.frames);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const Metrics m = compute_metrics(trace, sim.frames, kWarmup);
    const double worst = *std::max_element(m.rmse.begin(), m.rmse.end());
    out.pass = out.pass && worst <= 1e-3 && seconds < 60.0;
    out.detail += fmt::format("{}{} max RMSE {} in {:.1f} s", out.detail.empty() ? "" : "; ",
                              scenario_name(kind), fmt_e(worst), seconds);
  }
  return out;
}

// --- 8 ---
std::string lag_list(const Metrics& m) {
  std::string s;
  for (int i = 3; i < 9; ++i) s += fmt::format("{}{}", i == 3 ? "" : ",", m.lag[i]);
  return s;
}

Outcome noisy_benefit() {
  Outcome out;
  for (ScenarioKind kind : {ScenarioKind::kBalanceBase, ScenarioKind::kTrot}) {
    const auto frames = noisy(kind);
    const Metrics m = compute_metrics(run_estimation(model(), frames), simulation(kind).frames, kWarmup);
    const double min_nr = *std::min_element(m.noise_reduction.begin(), m.noise_reduction.end());
    int max_lag = 0;
    for (int lag : m.lag) max_lag = std::max(max_lag, std::abs(lag));
    out.pass = out.pass && min_nr >= 2.0 && max_lag <= 1;
    out.detail += fmt::format("{}{}: min noise_reduction {:.2f}, max |lag| {}",
                              out.detail.empty() ? "" : "; ", scenario_name(kind), min_nr, max_lag);
    out.detail += fmt::format(" [lag {}]", lag_list(m));
    if (kind == ScenarioKind::kTrot) {
      double ratio = 0.0;
      for (int i = 0; i < 6; ++i) ratio = std::max(ratio, m.max_step_filtered[i] / m.max_step_raw[i]);
      out.pass = out.pass && ratio <= 0.5;
      out.detail += fmt::format(", max step filtered/raw {:.3f}", ratio);
    }
  }
  return out;
}

// --- 9 ---
Outcome jump_robustness() {
  const auto& truth = simulation(ScenarioKind::kJump).frames;
  const auto trace = run_estimation(model(), noisy(ScenarioKind::kJump));
  double growth = 0.0;
  for (std::size_t k = 1; k < trace.size(); ++k) {
    growth = std::max(growth, trace[k].cov_diag.sum() / trace[k - 1].cov_diag.sum());
  }
  // Takeoff: first frame without contacts; touchdown: first frame after it
  // with contacts again.
  std::size_t takeoff = 0, touchdown = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const bool airborne = ContactSet::from_flags(truth[k].contacts).empty();
    if (airborne && takeoff == 0) takeoff = k;
    if (!airborne && takeoff != 0 && touchdown == 0) touchdown = k;
  }
  if (takeoff == 0 || touchdown == 0) return {false, "no flight phase in the jump log"};
  const std::size_t window = 100;  // samples
  auto block_rmse = [&](std::size_t from, int block) {
    double acc = 0.0;
    for (std::size_t k = from; k < from + window; ++k) {
      acc += (trace[k].mean.segment<3>(3 * block) - truth[k].truth.vector().segment<3>(3 * block))
                 .squaredNorm();
    }
    return std::sqrt(acc / window);
  };
  // Pre-flight level over the window before takeoff; recovery measured over
  // the window ending 0.3 s after touchdown.
  const std::size_t recovered = touchdown + 300 - window;
  double worst_ratio = 0.0;
  std::string blocks;
  for (int block = 0; block < 3; ++block) {
    const double pre = block_rmse(takeoff - window, block);
    const double post = block_rmse(recovered, block);
    worst_ratio = std::max(worst_ratio, post / pre);
    blocks += fmt::format(" {}:{:.2f}", "clk"[block], post / pre);
  }
  return {growth <= 10.0 && worst_ratio < 2.0,
          fmt::format("max per-step trace growth {:.3f}; post-landing/pre-flight RMSE{}", growth,
                      blocks)};
}

// --- 10 ---
// Noise matched to the log: full R from the measurement error and full Q
// from the one-step process residual, both calibrated on one noise seed and
// evaluated on another.
Outcome filter_consistency() {
  const ScenarioKind kind = ScenarioKind::kTrot;
  const auto& truth = simulation(kind).frames;
  const auto calib = noisy(kind, kNoiseSeed + 100);
  const double dt = truth[1].t - truth[0].t;
  const double mass = model().total_mass();
  Matrix9d r = Matrix9d::Zero(), q = Matrix9d::Zero();
  int n = 0;
  for (std::size_t k = 1; k < calib.size(); ++k) {
    const Vector9d e = measure(model(), calib[k].q, calib[k].v).vector() - truth[k].truth.vector();
    r += e * e.transpose();
    const LogFrame& p = calib[k - 1];
    const Vector6d rate =
        momentum_rate(model(), p.q, p.v, p.tau, ContactSet::from_flags(p.contacts));
    Vector9d w;
    w.head<3>() = truth[k].truth.c - truth[k - 1].truth.c - truth[k - 1].truth.l / mass * dt;
    w.tail<6>() = truth[k].truth.momentum() - truth[k - 1].truth.momentum() - rate * dt;
    q += w * w.transpose();
    ++n;
  }
  EstimationOptions options;
  options.contacts = ContactSource::kLog;
  options.noise.dt = dt;
  options.noise.R_c = symmetrized(Matrix9d(r / n * dt));
  options.noise.Q_c = symmetrized(Matrix9d(q / n / dt));
  const auto trace = run_estimation(model(), noisy(kind), options);
  const Metrics m = compute_metrics(trace, truth, kWarmup);
  const bool ok = m.samples >= 2000 && m.mean_nis >= 7.0 && m.mean_nis <= 11.2;
  return {ok, fmt::format("{} steps; mean NIS {:.2f} (band [7, 11.2]); mean NEES {:.2f}", m.samples,
                          m.mean_nis, m.mean_nees)};
}

// --- 11 ---
struct Agreement {
  double fraction = 0.0;
  int max_latency = 0;
  int unmatched = 0;
};

Agreement contact_agreement(const std::vector<LogFrame>& frames) {
  const int nf = model().n_feet();
  ContactDetector detector(model());
  std::vector<std::vector<bool>> detected;
  for (const LogFrame& f : frames) detected.push_back(detector.update(f.q, f.tau).flags(nf));
  Agreement a;
  std::size_t agree = 0;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    for (int f = 0; f < nf; ++f) agree += detected[k][f] == frames[k].contacts[f];
  }
  a.fraction = static_cast<double>(agree) / static_cast<double>(frames.size() * nf);
  // Every true edge must be matched by a detected edge of the same sense.
  for (int f = 0; f < nf; ++f) {
    std::vector<std::pair<long, bool>> truth_edges, detected_edges;
    for (std::size_t k = 1; k < frames.size(); ++k) {
      if (frames[k].contacts[f] != frames[k - 1].contacts[f]) {
        truth_edges.emplace_back(k, frames[k].contacts[f]);
      }
      if (detected[k][f] != detected[k - 1][f]) detected_edges.emplace_back(k, detected[k][f]);
    }
    for (const auto& [k, rising] : truth_edges) {
      long best = 1 << 20;
      for (const auto& [d, sense] : detected_edges) {
        if (sense == rising && std::abs(d - k) < std::abs(best)) best = d - k;
      }
      if (std::abs(best) > 50) {
        ++a.unmatched;
      } else {
        a.max_latency = std::max(a.max_latency, static_cast<int>(std::abs(best)));
      }
    }
    a.unmatched += static_cast<int>(std::max<long>(0, static_cast<long>(detected_edges.size()) -
                                                          static_cast<long>(truth_edges.size())));
  }
  return a;
}

Outcome contact_detection() {
  const Agreement clean = contact_agreement(simulation(ScenarioKind::kTrot).frames);
  const Agreement rough = contact_agreement(noisy(ScenarioKind::kTrot));
  auto ok = [](const Agreement& a) {
    return a.fraction >= 0.98 && a.max_latency <= 2 && a.unmatched == 0;
  };
  return {ok(clean) && ok(rough),
          fmt::format("noise-free: {:.2f}% agreement, max edge latency {}, unmatched edges {}; "
                      "noisy: {:.2f}%, {}, {}",
                      100.0 * clean.fraction, clean.max_latency, clean.unmatched,
                      100.0 * rough.fraction, rough.max_latency, rough.unmatched)};
}

struct Criterion {
  int id;
  const char* name;
  double budget;  ///< [s] wall-clock limit, 0 for none
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace cekf

int main(int argc, char** argv) {
  using namespace cekf;
  const std::vector<Criterion> criteria{
      {1, "projector invariants", 10.0, projector_suite},
      {2, "projected dynamics vs KKT", 30.0, oracle_equivalence},
      {3, "momentum-dynamics identity", 0.0, momentum_identity},
      {4, "mass matrix and CMM oracles", 0.0, mass_and_cmm},
      {5, "process Jacobian vs Richardson oracle", 0.0, process_jacobian},
      {6, "observability", 0.0, observability},
      {7, "noiseless tracking", 0.0, noiseless_tracking},
      {8, "noisy filtering without delay", 0.0, noisy_benefit},
      {9, "jump robustness", 0.0, jump_robustness},
      {10, "filter consistency (NIS)", 0.0, filter_consistency},
      {11, "contact detection on trot", 0.0, contact_detection},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget > 0.0 && seconds >= c.budget) {
      o.pass = false;
      o.detail += fmt::format("; over the {:.0f} s budget", c.budget);
    }
    failed += o.pass ? 0 : 1;
    std::printf("[%s] %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed,
              selected.empty() ? criteria.size() : selected.size());
  return failed == 0 ? 0 : 1;
}

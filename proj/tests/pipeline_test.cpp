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

// Log-to-trace driver and estimate-versus-truth metrics.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "centroidal_ekf/errors.hpp"
#include "centroidal_ekf/metrics.hpp"
#include "centroidal_ekf/pipeline.hpp"
#include "centroidal_ekf/scenario.hpp"
#include "centroidal_ekf/sensor_noise.hpp"
#include "centroidal_ekf/simulate.hpp"

namespace cekf {
namespace {

namespace fs = std::filesystem;

std::string temp_path(const std::string& name) {
  return (fs::temp_directory_path() / ("cekf_" + name)).string();
}

const SimulationLog& trot_log() {
  static const SimulationLog log = [] {
    Scenario s = Scenario::defaults(ScenarioKind::kTrot);
    s.duration = 1.5;
    return simulate(default_quadruped(), s);
  }();
  return log;
}

// A trace whose estimate is the truth delayed by `shift` samples, and whose
// raw column is the truth plus white noise.
std::vector<TraceRow> synthetic_trace(const std::vector<LogFrame>& truth, int shift,
                                      double noise = 0.0) {
  std::mt19937 rng(3);
  std::normal_distribution<double> normal(0.0, noise > 0.0 ? noise : 1.0);
  std::vector<TraceRow> trace;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    TraceRow r;
    r.t = truth[k].t;
    const long src = std::clamp(static_cast<long>(k) - shift, 0L, static_cast<long>(truth.size()) - 1);
    r.mean = truth[src].truth.vector();
    r.raw = truth[k].truth.vector();
    if (noise > 0.0) {
      for (int i = 0; i < 9; ++i) r.raw(i) += normal(rng);
    }
    r.contacts = truth[k].contacts;
    trace.push_back(r);
  }
  return trace;
}

// --- pipeline ---

TEST(Pipeline, ContactSourceNames) {
  EXPECT_EQ(parse_contact_source("detect"), ContactSource::kDetect);
  EXPECT_EQ(parse_contact_source("log"), ContactSource::kLog);
  EXPECT_THROW(parse_contact_source("sensor"), std::invalid_argument);
}

TEST(Pipeline, DimensionMismatchThrows) {
  const RobotModel body = single_rigid_body(2.0, Eigen::Vector3d::Zero(),
                                            Eigen::Matrix3d::Identity() * 0.1,
                                            Eigen::Vector3d(0, 0, -9.81));
  EXPECT_THROW(run_estimation(body, trot_log().frames), std::invalid_argument);
}

TEST(Pipeline, NoiselessTrotTracksTruth) {
  const auto trace = run_estimation(default_quadruped(), trot_log().frames);
  const Metrics m = compute_metrics(trace, trot_log().frames, 0.2);
  for (int i = 0; i < 9; ++i) EXPECT_LE(m.rmse[i], 1e-3) << "component " << i;
}

TEST(Pipeline, LogContactsPassThrough) {
  EstimationOptions options;
  options.contacts = ContactSource::kLog;
  const auto& frames = trot_log().frames;
  const auto trace = run_estimation(default_quadruped(), frames, options);
  for (std::size_t k = 0; k < frames.size(); ++k) EXPECT_EQ(trace[k].contacts, frames[k].contacts);
}

TEST(Pipeline, TinyMeasurementNoiseFollowsMeasurement) {
  NoiseInjection noise = NoiseInjection::preset("default");
  noise.seed = 12;
  const auto frames = inject_noise(trot_log().frames, noise);
  EstimationOptions options;
  options.noise.R_c = Matrix9d::Identity() * 1e-20;
  const auto trace = run_estimation(default_quadruped(), frames, options);
  double worst = 0.0;
  for (const TraceRow& r : trace) worst = std::max(worst, (r.mean - r.raw).cwiseAbs().maxCoeff());
  EXPECT_LE(worst, 1e-9);
}

TEST(Pipeline, CovarianceBoundedOverLongTrot) {
  Scenario s = Scenario::defaults(ScenarioKind::kTrot);
  s.duration = 10.0;
  const RobotModel model = default_quadruped();
  NoiseInjection noise = NoiseInjection::preset("default");
  noise.seed = 13;
  const auto frames = inject_noise(simulate(model, s).frames, noise);
  ASSERT_GE(frames.size(), 10000u);
  const auto trace = run_estimation(model, frames);
  const double settled = trace[1000].cov_diag.sum();
  double worst = 0.0;
  for (std::size_t k = 1000; k < trace.size(); ++k) worst = std::max(worst, trace[k].cov_diag.sum());
  EXPECT_TRUE(std::isfinite(worst));
  EXPECT_LE(worst, 2.0 * settled);
}

TEST(Pipeline, TraceRoundTrip) {
  const auto trace = run_estimation(default_quadruped(), trot_log().frames);
  const std::string path = temp_path("trace.csv");
  write_trace(trace, path);
  const auto back = read_trace(path);
  ASSERT_EQ(back.size(), trace.size());
  for (std::size_t k = 0; k < trace.size(); ++k) {
    EXPECT_EQ(back[k].t, trace[k].t);
    EXPECT_EQ(back[k].raw, trace[k].raw);
    EXPECT_EQ(back[k].mean, trace[k].mean);
    EXPECT_EQ(back[k].cov_diag, trace[k].cov_diag);
    EXPECT_EQ(back[k].innovation, trace[k].innovation);
    EXPECT_EQ(back[k].contacts, trace[k].contacts);
    EXPECT_EQ(back[k].nis, trace[k].nis);
    EXPECT_EQ(back[k].nees, trace[k].nees);
  }
  std::ofstream(path, std::ios::app) << "0.5,1,2\n";
  EXPECT_THROW(read_trace(path), FormatError);
  fs::remove(path);
}

TEST(Pipeline, CovarianceSpecs) {
  const Matrix9d a = parse_covariance_spec("1,2,3,4,5,6,7,8,9");
  EXPECT_EQ(a.diagonal(), Vector9d::LinSpaced(9, 1.0, 9.0));
  EXPECT_EQ(a.trace(), a.sum());
  const Matrix9d b = parse_covariance_spec("1e-9, 2.5e-6, 5e-9");
  EXPECT_EQ(b(0, 0), 1e-9);
  EXPECT_EQ(b(5, 5), 2.5e-6);
  EXPECT_EQ(b(8, 8), 5e-9);

  const std::string diag = temp_path("diag.json");
  std::ofstream(diag) << "[1,1,1,2,2,2,3,3,3]";
  EXPECT_EQ(parse_covariance_spec(diag)(4, 4), 2.0);
  const std::string full = temp_path("full.json");
  {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < 9; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int j = 0; j < 9; ++j) row.push_back(i == j ? 2.0 : (std::abs(i - j) == 1 ? 0.5 : 0.0));
      rows.push_back(row);
    }
    std::ofstream(full) << rows.dump();
  }
  EXPECT_EQ(parse_covariance_spec(full)(3, 4), 0.5);
  EXPECT_THROW(parse_covariance_spec("1,2"), ConfigError);
  EXPECT_THROW(parse_covariance_spec("1,x,3"), ConfigError);
  EXPECT_THROW(parse_covariance_spec(temp_path("absent.json")), ConfigError);
  fs::remove(diag);
  fs::remove(full);
}

// --- metrics ---

TEST(Metrics, PerfectTraceIsZeroErrorZeroLag) {
  const auto& frames = trot_log().frames;
  const Metrics m = compute_metrics(synthetic_trace(frames, 0), frames, 0.2);
  EXPECT_EQ(m.samples, frames.size() - 200);
  for (int i = 0; i < 9; ++i) {
    EXPECT_EQ(m.rmse[i], 0.0);
    EXPECT_EQ(m.lag[i], 0);
  }
  for (double r : m.noise_reduction) EXPECT_EQ(r, 1.0);
}

TEST(Metrics, DelayedTraceShowsLag) {
  const auto& frames = trot_log().frames;
  const Metrics m = compute_metrics(synthetic_trace(frames, 5), frames, 0.2);
  for (int i = 3; i < 9; ++i) EXPECT_EQ(m.lag[i], 5) << "component " << i;
  const Metrics lead = compute_metrics(synthetic_trace(frames, -3), frames, 0.2);
  for (int i = 3; i < 9; ++i) EXPECT_EQ(lead.lag[i], -3) << "component " << i;
}

TEST(Metrics, LagOfConstantSignalIsZero) {
  EXPECT_EQ(estimate_lag(std::vector<double>(100, 1.0), std::vector<double>(100, 2.0)), 0);
}

TEST(Metrics, ElementaryFormulas) {
  EXPECT_DOUBLE_EQ(rmse({1.0, 2.0, 3.0}, {1.0, 0.0, 3.0}), std::sqrt(4.0 / 3.0));
  EXPECT_THROW(rmse({1.0}, {1.0, 2.0}), std::invalid_argument);
  // Raw residual increments alternate +-2, filtered +-1.
  const std::vector<double> truth{0, 1, 2, 3, 4, 5};
  const std::vector<double> raw{1, 0, 3, 2, 5, 4};
  const std::vector<double> filtered{0.5, 0.5, 2.5, 2.5, 4.5, 4.5};
  EXPECT_NEAR(noise_reduction(raw, filtered, truth), 2.0, 1e-12);
  EXPECT_EQ(noise_reduction(raw, truth, truth), INFINITY);
}

TEST(Metrics, NoisyRawFilteredTruth) {
  const auto& frames = trot_log().frames;
  const Metrics m = compute_metrics(synthetic_trace(frames, 0, 0.01), frames, 0.2);
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(m.noise_reduction[i], INFINITY);
    EXPECT_GT(m.max_step_raw[i], m.max_step_filtered[i]);
  }
}

TEST(Metrics, LengthMismatchThrows) {
  const auto& frames = trot_log().frames;
  auto trace = synthetic_trace(frames, 0);
  trace.pop_back();
  EXPECT_THROW(compute_metrics(trace, frames, 0.2), std::invalid_argument);
  EXPECT_THROW(compute_metrics(synthetic_trace(frames, 0), frames, 10.0), std::invalid_argument);
}

TEST(Metrics, JsonCarriesEveryField) {
  const auto& frames = trot_log().frames;
  const Metrics m = compute_metrics(synthetic_trace(frames, 2, 0.01), frames, 0.2);
  const nlohmann::json doc = nlohmann::json::parse(metrics_to_json(m));
  EXPECT_EQ(doc["samples"].get<std::size_t>(), m.samples);
  EXPECT_EQ(doc["warmup_s"].get<double>(), 0.2);
  EXPECT_EQ(doc["rmse"]["kz"].get<double>(), m.rmse[8]);
  EXPECT_EQ(doc["lag_samples"]["lx"].get<int>(), 2);
  EXPECT_EQ(doc["rmse"].size(), 9u);
  EXPECT_EQ(doc["noise_reduction"].size(), 6u);
  EXPECT_TRUE(doc.contains("max_step_raw"));
  EXPECT_TRUE(doc.contains("max_step_filtered"));
  EXPECT_TRUE(doc.contains("mean_nees"));
  EXPECT_TRUE(doc.contains("mean_nis"));
}

}  // namespace
}  // namespace cekf

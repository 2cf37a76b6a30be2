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

#include "centroidal_ekf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace cekf {
namespace {

const char* const kStateNames[9] = {"cx", "cy", "cz", "lx", "ly", "lz", "kx", "ky", "kz"};

double mean(const std::vector<double>& x) {
  return x.empty() ? 0.0 : std::accumulate(x.begin(), x.end(), 0.0) / x.size();
}

double stddev(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return std::sqrt(acc / x.size());
}

std::vector<double> increments(const std::vector<double>& x) {
  std::vector<double> out;
  for (std::size_t i = 1; i < x.size(); ++i) out.push_back(x[i] - x[i - 1]);
  return out;
}

double max_abs_step(const std::vector<double>& x) {
  double out = 0.0;
  for (double d : increments(x)) out = std::max(out, std::abs(d));
  return out;
}

}  // namespace

double rmse(const std::vector<double>& estimate, const std::vector<double>& truth) {
  if (estimate.size() != truth.size()) throw std::invalid_argument("rmse: length mismatch");
  if (estimate.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    acc += (estimate[i] - truth[i]) * (estimate[i] - truth[i]);
  }
  return std::sqrt(acc / estimate.size());
}

int estimate_lag(const std::vector<double>& estimate, const std::vector<double>& truth,
                 int max_lag) {
  if (estimate.size() != truth.size()) throw std::invalid_argument("lag: length mismatch");
  const auto n = static_cast<long>(estimate.size());
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  // Visit 0, 1, -1, 2, -2, ... so a strict comparison keeps the tie rule.
  for (int k = 0; k <= 2 * max_lag; ++k) {
    const int lag = (k % 2 == 1) ? (k + 1) / 2 : -(k / 2);
    const long first = std::max(0L, static_cast<long>(lag));
    const long last = std::min(n, n + lag);  // exclusive
    const long count = last - first;
    if (count < 2) continue;
    double me = 0.0, mg = 0.0;
    for (long t = first; t < last; ++t) {
      me += estimate[t];
      mg += truth[t - lag];
    }
    me /= count;
    mg /= count;
    double cross = 0.0, ve = 0.0, vg = 0.0;
    for (long t = first; t < last; ++t) {
      const double de = estimate[t] - me;
      const double dg = truth[t - lag] - mg;
      cross += de * dg;
      ve += de * de;
      vg += dg * dg;
    }
    const double value = (ve > 0.0 && vg > 0.0) ? cross / std::sqrt(ve * vg) : 0.0;
    if (value > best_value) {
      best_value = value;
      best = lag;
    }
  }
  return best;
}

double noise_reduction(const std::vector<double>& raw, const std::vector<double>& filtered,
                       const std::vector<double>& truth) {
  if (raw.size() != truth.size() || filtered.size() != truth.size()) {
    throw std::invalid_argument("noise_reduction: length mismatch");
  }
  const std::vector<double> dg = increments(truth);
  std::vector<double> r_raw = increments(raw);
  std::vector<double> r_filt = increments(filtered);
  for (std::size_t i = 0; i < dg.size(); ++i) {
    r_raw[i] -= dg[i];
    r_filt[i] -= dg[i];
  }
  const double s_raw = stddev(r_raw);
  const double s_filt = stddev(r_filt);
  if (s_filt == 0.0) return s_raw == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return s_raw / s_filt;
}

Metrics compute_metrics(const std::vector<TraceRow>& trace, const std::vector<LogFrame>& truth,
                        double warmup) {
  if (trace.size() != truth.size()) {
    throw std::invalid_argument("trace has " + std::to_string(trace.size()) +
                                " frames but truth has " + std::to_string(truth.size()));
  }
  if (!(warmup >= 0.0)) throw std::invalid_argument("warmup must be nonnegative");
  std::size_t start = 0;
  if (!trace.empty()) {
    const double t0 = trace.front().t;
    while (start < trace.size() && trace[start].t - t0 < warmup - 1e-12) ++start;
  }
  if (trace.size() - start < 2) {
    throw std::invalid_argument("fewer than two frames after the warmup");
  }

  Metrics m;
  m.samples = trace.size() - start;
  m.warmup = warmup;
  double nees_sum = 0.0;
  double nis_sum = 0.0;
  for (std::size_t k = start; k < trace.size(); ++k) {
    nees_sum += trace[k].nees;
    nis_sum += trace[k].nis;
  }
  m.mean_nees = nees_sum / m.samples;
  m.mean_nis = nis_sum / m.samples;

  for (int i = 0; i < 9; ++i) {
    std::vector<double> est, raw, gt;
    for (std::size_t k = start; k < trace.size(); ++k) {
      est.push_back(trace[k].mean(i));
      raw.push_back(trace[k].raw(i));
      gt.push_back(truth[k].truth.vector()(i));
    }
    m.rmse[i] = rmse(est, gt);
    m.lag[i] = estimate_lag(est, gt);
    if (i >= 3) {
      m.noise_reduction[i - 3] = noise_reduction(raw, est, gt);
      m.max_step_raw[i - 3] = max_abs_step(raw);
      m.max_step_filtered[i - 3] = max_abs_step(est);
    }
  }
  return m;
}

std::string metrics_to_json(const Metrics& m) {
  nlohmann::ordered_json doc;
  doc["samples"] = m.samples;
  doc["warmup_s"] = m.warmup;
  auto per_component = [](const auto& values, int offset) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < values.size(); ++i) obj[kStateNames[i + offset]] = values[i];
    return obj;
  };
  doc["rmse"] = per_component(m.rmse, 0);
  doc["lag_samples"] = per_component(m.lag, 0);
  doc["noise_reduction"] = per_component(m.noise_reduction, 3);
  doc["max_step_raw"] = per_component(m.max_step_raw, 3);
  doc["max_step_filtered"] = per_component(m.max_step_filtered, 3);
  doc["mean_nees"] = m.mean_nees;
  doc["mean_nis"] = m.mean_nis;
  return doc.dump(2);
}

}  // namespace cekf

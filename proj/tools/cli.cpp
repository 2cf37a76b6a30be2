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

#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "centroidal_ekf/errors.hpp"
#include "centroidal_ekf/log_io.hpp"
#include "centroidal_ekf/metrics.hpp"
#include "centroidal_ekf/model.hpp"
#include "centroidal_ekf/pipeline.hpp"
#include "centroidal_ekf/scenario.hpp"
#include "centroidal_ekf/sensor_noise.hpp"
#include "centroidal_ekf/simulate.hpp"

namespace cekf::cli {
namespace {

struct SimulateArgs {
  std::string model;
  std::string scenario = "balance_base";
  std::optional<double> duration;
  std::string noise = "default";
  std::optional<std::uint64_t> seed;
  std::string out = "run";
};

struct EstimateArgs {
  std::string log;
  std::string model;
  std::string qc;
  std::string rc;
  std::optional<double> dt;
  std::string out;
  std::string contacts = "detect";
};

struct EvaluateArgs {
  std::string trace;
  std::string truth;
  double warmup = 0.2;
  std::string out;
};

RobotModel model_from(const std::string& path) {
  return path.empty() ? default_quadruped() : load_model(path);
}

NoiseInjection noise_from(const std::string& spec) {
  if (spec == "none" || spec == "default") return NoiseInjection::preset(spec);
  return NoiseInjection::load(spec);
}

void print_schedule(const RobotModel& model, const ReferenceTrajectory& ref, std::ostream& out) {
  const std::size_t frames = ref.size();
  out << fmt::format("scenario {}: {} frames, dt {} s, duration {} s\n",
                     scenario_name(ref.scenario.kind), frames, ref.scenario.dt_sim,
                     ref.scenario.duration);
  std::size_t flight = 0;
  for (const ContactSet& c : ref.contacts) flight += c.empty() ? 1 : 0;
  for (int f = 0; f < model.n_feet(); ++f) {
    std::size_t stance = 0;
    int touchdowns = 0;
    for (std::size_t k = 0; k < frames; ++k) {
      const bool in = ref.contacts[k].contains(f);
      stance += in ? 1 : 0;
      if (in && k > 0 && !ref.contacts[k - 1].contains(f)) ++touchdowns;
    }
    out << fmt::format("  {:<4} stance {:6.2f}%  touchdowns {}\n", model.feet()[f].name,
                       100.0 * static_cast<double>(stance) / static_cast<double>(frames),
                       touchdowns);
  }
  out << fmt::format("  flight frames {}\n", flight);
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  const RobotModel model = model_from(args.model);
  Scenario scenario = Scenario::defaults(parse_scenario_kind(args.scenario));
  if (args.duration) scenario.duration = *args.duration;
  NoiseInjection noise = noise_from(args.noise);
  if (args.seed) noise.seed = *args.seed;
  noise.validate();

  const ReferenceTrajectory ref = build_scenario(model, scenario);
  print_schedule(model, ref, out);
  const SimulationLog sim = simulate(model, ref);
  const std::string truth_path = args.out + ".truth.csv";
  const std::string noisy_path = args.out + ".noisy.csv";
  write_log(sim.frames, truth_path);
  write_log(inject_noise(sim.frames, noise), noisy_path);
  out << fmt::format("  max foot drift {:.3e} m\nwrote {}\nwrote {}\n", sim.max_foot_drift,
                     truth_path, noisy_path);
  return kExitOk;
}

int cmd_estimate(const EstimateArgs& args, std::ostream& out) {
  const RobotModel model = model_from(args.model);
  const std::vector<LogFrame> log = read_log(args.log, model);
  EstimationOptions options;
  options.contacts = parse_contact_source(args.contacts);
  if (!args.qc.empty()) options.noise.Q_c = parse_covariance_spec(args.qc);
  if (!args.rc.empty()) options.noise.R_c = parse_covariance_spec(args.rc);
  if (args.dt) {
    options.noise.dt = *args.dt;
  } else if (log.size() > 1) {
    options.noise.dt = log[1].t - log[0].t;
  }
  const std::vector<TraceRow> trace = run_estimation(model, log, options);
  write_trace(trace, args.out);
  out << fmt::format("estimated {} frames at dt {} s; wrote {}\n", trace.size(),
                     options.noise.dt, args.out);
  return kExitOk;
}

int cmd_evaluate(const EvaluateArgs& args, std::ostream& out) {
  const std::vector<TraceRow> trace = read_trace(args.trace);
  const std::vector<LogFrame> truth = read_log(args.truth);
  const std::string json = metrics_to_json(compute_metrics(trace, truth, args.warmup));
  if (!args.out.empty()) {
    std::ofstream file(args.out);
    if (!file) throw IoError("cannot write " + args.out);
    file << json << '\n';
    if (!file) throw IoError("write failed: " + args.out);
  }
  out << json << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Centroidal state estimation from joint torques"};
  app.name("centroidal_ekf");
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "Simulate a scripted scenario; write truth and noisy logs");
  simulate_cmd->add_option("--model", sim.model, "Model file (default: built-in quadruped)");
  simulate_cmd->add_option("--scenario", sim.scenario, "Scripted motion")
      ->check(CLI::IsMember({"balance_base", "trot", "jump"}))
      ->capture_default_str();
  simulate_cmd->add_option("--duration", sim.duration, "Duration [s]")
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--noise", sim.noise, "Noise preset (none|default) or JSON file")
      ->capture_default_str();
  simulate_cmd->add_option("--seed", sim.seed, "Noise seed (overrides the preset/file)");
  simulate_cmd->add_option("--out", sim.out, "Output prefix: PREFIX.truth.csv, PREFIX.noisy.csv")
      ->capture_default_str();

  EstimateArgs est;
  CLI::App* estimate_cmd = app.add_subcommand("estimate", "Run the filter over a log");
  estimate_cmd->add_option("--log", est.log, "Input log (CSV)")->required();
  estimate_cmd->add_option("--model", est.model, "Model file (default: built-in quadruped)");
  estimate_cmd->add_option("--qc", est.qc,
                           "Continuous process covariance: 9 or 3 comma-separated diagonal "
                           "values, or a JSON file (diagonal or 9x9)");
  estimate_cmd->add_option("--rc", est.rc, "Continuous measurement covariance, same forms as --qc");
  estimate_cmd->add_option("--dt", est.dt, "Filter period [s] (default: log spacing)")
      ->check(CLI::PositiveNumber);
  estimate_cmd->add_option("--out", est.out, "Output trace (CSV)")->required();
  estimate_cmd->add_option("--contacts", est.contacts, "Contact source")
      ->check(CLI::IsMember({"detect", "log"}))
      ->capture_default_str();

  EvaluateArgs eval;
  CLI::App* evaluate_cmd = app.add_subcommand(
      "evaluate",
      "Compare a trace with ground truth. noise_reduction = std(r_raw) / std(r_filtered), "
      "r_x[t] = (x[t] - x[t-1]) - (g[t] - g[t-1]); lag = correlation argmax over +-50 samples");
  evaluate_cmd->add_option("--trace", eval.trace, "Estimate trace (CSV)")->required();
  evaluate_cmd->add_option("--truth", eval.truth, "Ground-truth log (CSV)")->required();
  evaluate_cmd->add_option("--warmup", eval.warmup, "Samples before this time are skipped [s]")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  evaluate_cmd->add_option("--out", eval.out, "Also write the metrics JSON here");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate_cmd->parsed()) return cmd_simulate(sim, out);
    if (estimate_cmd->parsed()) return cmd_estimate(est, out);
    return cmd_evaluate(eval, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace cekf::cli

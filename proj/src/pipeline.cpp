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

#include "centroidal_ekf/pipeline.hpp"

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "centroidal_ekf/errors.hpp"
#include "csv_table.hpp"
#include "text_util.hpp"

namespace cekf {
namespace {

const char* const kStateNames[9] = {"cx", "cy", "cz", "lx", "ly", "lz", "kx", "ky", "kz"};

std::optional<std::vector<double>> number_list(std::string_view spec) {
  std::vector<double> out;
  for (std::string_view token : detail::split(spec, ',')) {
    const auto value = detail::parse_double(detail::trim(token));
    if (!value) return std::nullopt;
    out.push_back(*value);
  }
  return out;
}

Matrix9d diagonal_from(const std::vector<double>& values, const std::string& where) {
  Vector9d d;
  if (values.size() == 9) {
    for (int i = 0; i < 9; ++i) d(i) = values[i];
  } else if (values.size() == 3) {
    for (int i = 0; i < 9; ++i) d(i) = values[i / 3];
  } else {
    throw ConfigError(where + ": expected 3 or 9 values, got " + std::to_string(values.size()));
  }
  return d.asDiagonal();
}

}  // namespace

ContactSource parse_contact_source(std::string_view name) {
  if (name == "detect") return ContactSource::kDetect;
  if (name == "log") return ContactSource::kLog;
  throw std::invalid_argument("unknown contact source '" + std::string(name) +
                              "' (expected detect or log)");
}

std::vector<TraceRow> run_estimation(const RobotModel& model, const std::vector<LogFrame>& log,
                                     const EstimationOptions& options) {
  CentroidalEkf ekf(model, options.noise, options.filter);
  ContactDetector detector(model, options.detector);
  std::vector<TraceRow> trace;
  trace.reserve(log.size());
  for (const LogFrame& frame : log) {
    if (frame.q.size() != model.nq() || frame.v.size() != model.nv() ||
        frame.tau.size() != model.n_joints() ||
        static_cast<int>(frame.contacts.size()) != model.n_feet()) {
      throw std::invalid_argument("log dimensions do not match the model");
    }
    FilterInput input{frame.tau, frame.q, frame.v, ContactSet()};
    input.contacts = options.contacts == ContactSource::kLog
                         ? ContactSet::from_flags(frame.contacts)
                         : detector.update(frame.q, frame.tau);
    const StepResult r = ekf.process(input);

    TraceRow row;
    row.t = frame.t;
    row.raw = r.diagnostics.measurement.vector();
    row.mean = r.belief.mean.vector();
    row.cov_diag = r.belief.cov.diagonal();
    row.innovation = r.diagnostics.innovation;
    row.contacts = input.contacts.flags(model.n_feet());
    row.nis = r.diagnostics.nis;
    row.nees = nees(r.belief, frame.truth);
    trace.push_back(std::move(row));
  }
  return trace;
}

std::vector<std::string> trace_header(int n_feet) {
  std::vector<std::string> h{"t"};
  for (const char* prefix : {"y_", "x_", "P_", "nu_"}) {
    for (const char* name : kStateNames) h.push_back(std::string(prefix) + name);
  }
  for (int i = 0; i < n_feet; ++i) h.push_back("c" + std::to_string(i));
  h.push_back("nis");
  h.push_back("nees");
  return h;
}

void write_trace(const std::vector<TraceRow>& trace, const std::string& path) {
  const int nf = trace.empty() ? 0 : static_cast<int>(trace.front().contacts.size());
  detail::TableWriter out(path, "trace", trace_header(nf));
  std::vector<double> row;
  for (const TraceRow& r : trace) {
    if (static_cast<int>(r.contacts.size()) != nf) {
      throw std::invalid_argument("trace rows have inconsistent contact counts");
    }
    row.clear();
    row.push_back(r.t);
    for (const Vector9d* v : {&r.raw, &r.mean, &r.cov_diag, &r.innovation}) {
      row.insert(row.end(), v->data(), v->data() + 9);
    }
    for (bool c : r.contacts) row.push_back(c ? 1.0 : 0.0);
    row.push_back(r.nis);
    row.push_back(r.nees);
    out.row(row);
  }
  out.close();
}

std::vector<TraceRow> read_trace(const std::string& path) {
  const detail::Table table = detail::read_table(path, "trace");
  const int nf = static_cast<int>(table.header.size()) - 1 - 36 - 2;
  if (nf < 0 || table.header != trace_header(nf)) {
    throw FormatError("trace file '" + path + "': unexpected header", 0);
  }
  std::vector<TraceRow> trace;
  trace.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::vector<double>& row = table.rows[r];
    TraceRow out;
    std::size_t i = 0;
    out.t = row[i++];
    for (Vector9d* v : {&out.raw, &out.mean, &out.cov_diag, &out.innovation}) {
      *v = Eigen::Map<const Vector9d>(row.data() + i);
      i += 9;
    }
    for (int c = 0; c < nf; ++c) {
      const double flag = row[i++];
      if (flag != 0.0 && flag != 1.0) {
        const int line = static_cast<int>(r) + 2;
        throw FormatError("trace line " + std::to_string(line) + ": contact flag must be 0 or 1",
                          line - 1);
      }
      out.contacts.push_back(flag == 1.0);
    }
    out.nis = row[i++];
    out.nees = row[i++];
    trace.push_back(std::move(out));
  }
  return trace;
}

Matrix9d parse_covariance_spec(std::string_view spec) {
  if (const auto values = number_list(spec)) return diagonal_from(*values, "covariance spec");

  const std::string path(spec);
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("covariance spec '" + path +
                      "' is neither a number list nor a readable file");
  }
  std::ostringstream text;
  text << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.str());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("covariance file '" + path + "': " + e.what());
  }
  try {
    if (doc.is_array() && !doc.empty() && doc.front().is_array()) {
      if (doc.size() != 9) throw ConfigError("covariance file '" + path + "': need 9 rows");
      Matrix9d m;
      for (int i = 0; i < 9; ++i) {
        if (doc[i].size() != 9) {
          throw ConfigError("covariance file '" + path + "': row " + std::to_string(i) +
                            " needs 9 entries");
        }
        for (int j = 0; j < 9; ++j) m(i, j) = doc[i][j].get<double>();
      }
      return m;
    }
    if (doc.is_array()) return diagonal_from(doc.get<std::vector<double>>(), path);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("covariance file '" + path + "': " + e.what());
  }
  throw ConfigError("covariance file '" + path + "': expected an array");
}

}  // namespace cekf

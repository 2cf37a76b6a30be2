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

// Numeric CSV tables with a single header line.

#ifndef CENTROIDAL_EKF_SRC_CSV_TABLE_HPP_
#define CENTROIDAL_EKF_SRC_CSV_TABLE_HPP_

#include <fstream>
#include <string>
#include <vector>

#include "centroidal_ekf/errors.hpp"
#include "text_util.hpp"

namespace cekf::detail {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline std::string join_header(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += ',';
    out += names[i];
  }
  return out;
}

/// Every data row must have as many fields as the header and parse fully.
/// FormatError carries the last line (1-based) that was read correctly.
inline Table read_table(const std::string& path, const std::string& kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + kind + " file '" + path + "'");
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw FormatError(kind + " file '" + path + "' is empty", 0);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  for (std::string_view name : split(line, ',')) table.header.emplace_back(name);

  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    const std::vector<std::string_view> fields = split(line, ',');
    if (fields.size() != table.header.size()) {
      throw FormatError(kind + " line " + std::to_string(number) + ": expected " +
                            std::to_string(table.header.size()) + " fields, got " +
                            std::to_string(fields.size()),
                        number - 1);
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto value = parse_double(fields[i]);
      if (!value) {
        throw FormatError(kind + " line " + std::to_string(number) + ": bad number '" +
                              std::string(fields[i]) + "' in column " + table.header[i],
                          number - 1);
      }
      row.push_back(*value);
    }
    table.rows.push_back(std::move(row));
  }
  if (in.bad()) throw IoError("read failed for '" + path + "'");
  return table;
}

class TableWriter {
 public:
  TableWriter(const std::string& path, const std::string& kind,
              const std::vector<std::string>& header)
      : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot write " + kind + " file '" + path + "'");
    out_ << join_header(header) << '\n';
  }

  void row(const std::vector<double>& values) {
    std::string line;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i > 0) line += ',';
      line += format_double(values[i]);
    }
    line += '\n';
    out_ << line;
  }

  void close() {
    out_.close();
    if (!out_) throw IoError("write failed for '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace cekf::detail

#endif  // CENTROIDAL_EKF_SRC_CSV_TABLE_HPP_

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

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "centroidal_ekf/errors.hpp"
#include "centroidal_ekf/model.hpp"
#include "text_util.hpp"

namespace cekf {

namespace {

using detail::format_double;
using detail::parse_double;
using detail::split_ws;
using detail::trim;

struct Section {
  enum class Kind { kLink, kJoint, kFeet, kGravity } kind;
  std::string name;
  int line = 0;
  // key -> (values, line)
  std::vector<std::pair<std::string, std::pair<std::string, int>>> entries;
};

std::vector<double> numbers(const std::string& text, std::size_t count, int line,
                            const std::string& key) {
  std::vector<double> out;
  for (const std::string& token : split_ws(text)) {
    const std::optional<double> value = parse_double(token);
    if (!value) throw ParseError("'" + key + "': bad number '" + token + "'", line);
    out.push_back(*value);
  }
  if (out.size() != count) {
    throw ParseError("'" + key + "' expects " + std::to_string(count) + " numbers, got " +
                         std::to_string(out.size()),
                     line);
  }
  return out;
}

class EntryMap {
 public:
  explicit EntryMap(const Section& section) : section_(section) {
    for (const auto& [key, value] : section.entries) {
      if (!map_.emplace(key, value).second) {
        throw ParseError("duplicate key '" + key + "'", value.second);
      }
    }
  }

  const std::pair<std::string, int>& require(const std::string& key) const {
    auto it = map_.find(key);
    if (it == map_.end()) {
      throw ParseError("section '" + section_.name + "' is missing '" + key + "'",
                       section_.line);
    }
    used_.insert(key);
    return it->second;
  }

  const std::pair<std::string, int>* optional(const std::string& key) const {
    auto it = map_.find(key);
    if (it == map_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : map_) {
      if (!used_.count(key)) throw ParseError("unknown key '" + key + "'", value.second);
    }
  }

 private:
  const Section& section_;
  std::map<std::string, std::pair<std::string, int>> map_;
  mutable std::set<std::string> used_;
};

LinkSpec parse_link(const Section& s) {
  EntryMap entries(s);
  LinkSpec link;
  link.name = s.name;
  const auto& mass = entries.require("mass");
  link.mass = numbers(mass.first, 1, mass.second, "mass")[0];
  const auto& com = entries.require("com");
  const auto c = numbers(com.first, 3, com.second, "com");
  link.com_offset = Eigen::Vector3d(c[0], c[1], c[2]);
  const auto& inertia = entries.require("inertia");
  const auto i = numbers(inertia.first, 9, inertia.second, "inertia");
  link.rotational_inertia = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(i.data());
  entries.reject_unknown();
  return link;
}

JointSpec parse_joint(const Section& s) {
  EntryMap entries(s);
  JointSpec joint;
  joint.name = s.name;
  const std::string type = trim(entries.require("type").first);
  if (type == "floating") {
    joint.type = JointType::kFloating;
  } else if (type == "revolute") {
    joint.type = JointType::kRevolute;
  } else {
    // e.g. prismatic: parsed fine, but not a supported joint class
    throw ValidationError(joint.name, "unsupported joint type '" + type + "'");
  }
  joint.parent = trim(entries.require("parent").first);
  joint.child = trim(entries.require("child").first);
  if (const auto* axis = entries.optional("axis")) {
    const auto a = numbers(axis->first, 3, axis->second, "axis");
    joint.axis = Eigen::Vector3d(a[0], a[1], a[2]);
  } else if (joint.type == JointType::kRevolute) {
    entries.require("axis");
  }
  if (const auto* placement = entries.optional("placement")) {
    const auto p = numbers(placement->first, 7, placement->second, "placement");
    joint.translation = Eigen::Vector3d(p[0], p[1], p[2]);
    joint.rotation = Eigen::Quaterniond(p[6], p[3], p[4], p[5]);
  }
  entries.reject_unknown();
  return joint;
}

}  // namespace

RobotModel parse_model(std::string_view text) {
  std::vector<Section> sections;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw.substr(0, raw.find('#'));
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no);
      const auto words = split_ws(line.substr(1, line.size() - 2));
      if (words.empty()) throw ParseError("empty section header", line_no);
      Section section;
      section.line = line_no;
      if (words[0] == "link" || words[0] == "joint") {
        if (words.size() != 2) throw ParseError("expected '[" + words[0] + " <name>]'", line_no);
        section.kind = words[0] == "link" ? Section::Kind::kLink : Section::Kind::kJoint;
        section.name = words[1];
      } else if (words[0] == "feet" || words[0] == "gravity") {
        if (words.size() != 1) throw ParseError("'[" + words[0] + "]' takes no name", line_no);
        section.kind = words[0] == "feet" ? Section::Kind::kFeet : Section::Kind::kGravity;
        section.name = words[0];
      } else {
        throw ParseError("unknown section '" + words[0] + "'", line_no);
      }
      sections.push_back(std::move(section));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    if (sections.empty()) throw ParseError("entry outside of any section", line_no);
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("empty key", line_no);
    sections.back().entries.push_back({key, {trim(line.substr(eq + 1)), line_no}});
  }

  std::vector<LinkSpec> links;
  std::vector<JointSpec> joints;
  std::vector<FootFrame> feet;
  std::optional<Eigen::Vector3d> gravity;
  bool have_feet = false;
  for (const Section& s : sections) {
    switch (s.kind) {
      case Section::Kind::kLink:
        links.push_back(parse_link(s));
        break;
      case Section::Kind::kJoint:
        joints.push_back(parse_joint(s));
        break;
      case Section::Kind::kFeet:
        if (have_feet) throw ParseError("duplicate [feet] section", s.line);
        have_feet = true;
        for (const auto& [name, value] : s.entries) {
          const auto words = split_ws(value.first);
          if (words.size() != 4) {
            throw ParseError("foot '" + name + "' expects '<link> x y z'", value.second);
          }
          std::string rest = words[1] + " " + words[2] + " " + words[3];
          const auto o = numbers(rest, 3, value.second, name);
          feet.push_back({name, words[0], Eigen::Vector3d(o[0], o[1], o[2])});
        }
        break;
      case Section::Kind::kGravity: {
        if (gravity) throw ParseError("duplicate [gravity] section", s.line);
        EntryMap entries(s);
        const auto& value = entries.require("value");
        const auto g = numbers(value.first, 3, value.second, "value");
        gravity = Eigen::Vector3d(g[0], g[1], g[2]);
        entries.reject_unknown();
        break;
      }
    }
  }
  if (!gravity) throw ParseError("missing [gravity] section", line_no);
  return RobotModel(std::move(links), std::move(joints), std::move(feet), *gravity);
}

RobotModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_model(buffer.str());
}

std::string write_model(const RobotModel& model) {
  std::ostringstream out;
  auto vec = [](const auto& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (i) s += ' ';
      s += format_double(v(i));
    }
    return s;
  };
  out << "# centroidal-ekf robot model\n";
  for (const LinkSpec& link : model.links()) {
    const Eigen::Matrix<double, 3, 3, Eigen::RowMajor> inertia = link.rotational_inertia;
    out << "\n[link " << link.name << "]\n"
        << "mass = " << format_double(link.mass) << "\n"
        << "com = " << vec(link.com_offset) << "\n"
        << "inertia = " << vec(Eigen::Map<const Eigen::Matrix<double, 9, 1>>(inertia.data()))
        << "\n";
  }
  for (const JointSpec& joint : model.joints()) {
    out << "\n[joint " << joint.name << "]\n"
        << "type = " << (joint.type == JointType::kFloating ? "floating" : "revolute") << "\n"
        << "parent = " << joint.parent << "\n"
        << "child = " << joint.child << "\n"
        << "axis = " << vec(joint.axis) << "\n"
        << "placement = " << vec(joint.translation) << ' ' << vec(joint.rotation.coeffs())
        << "\n";
  }
  out << "\n[feet]\n";
  for (const FootFrame& foot : model.feet()) {
    out << foot.name << " = " << foot.link << ' ' << vec(foot.offset) << "\n";
  }
  out << "\n[gravity]\nvalue = " << vec(model.gravity()) << "\n";
  return out.str();
}

void save_model(const RobotModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file '" + path + "'");
  out << write_model(model);
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace cekf

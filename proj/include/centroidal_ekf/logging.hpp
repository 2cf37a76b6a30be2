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

#ifndef CENTROIDAL_EKF_LOGGING_HPP_
#define CENTROIDAL_EKF_LOGGING_HPP_

#include <optional>
#include <string>
#include <string_view>

namespace cekf {

enum class LogLevel { kError, kWarn, kInfo, kDebug };

std::optional<LogLevel> parse_log_level(std::string_view name);

/// Applies CENTROIDAL_EKF_LOG if set; returns false on an unrecognized value.
bool init_logging_from_env();
void set_log_level(LogLevel level);
void log_message(LogLevel level, std::string_view message);

inline void log_warn(std::string_view message) { log_message(LogLevel::kWarn, message); }
inline void log_info(std::string_view message) { log_message(LogLevel::kInfo, message); }
inline void log_debug(std::string_view message) { log_message(LogLevel::kDebug, message); }

}  // namespace cekf

#endif  // CENTROIDAL_EKF_LOGGING_HPP_

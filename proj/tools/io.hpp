/*
 * Copyright 2026 The nicperf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// File helpers shared by the subcommands.

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace nicperf::cli {

std::string read_text(const std::string& path);
nlohmann::json read_json(const std::string& path);
void write_text(const std::string& path, const std::string& text);

/// Pretty-printed with a trailing newline.
void write_json(const std::string& path, const nlohmann::json& j);

using CsvRow = std::vector<std::string>;

/// RFC-4180 rendering; fields with commas, quotes or line breaks are quoted.
std::string render_csv(const CsvRow& header, const std::vector<CsvRow>& rows);
std::vector<CsvRow> parse_csv(const std::string& text);

std::string fmt(double v, int precision = 9);

}  // namespace nicperf::cli

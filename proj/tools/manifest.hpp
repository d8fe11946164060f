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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace nicperf::cli {

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

/// Reproducibility envelope written next to every output.
struct RunManifest {
    std::string command;
    std::optional<std::string> config;
    std::map<std::string, std::uint64_t> seeds;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;

    /// Digests are taken when called, so outputs must already be written.
    nlohmann::json to_json() const;
};

std::string sidecar_path(const std::string& output);

/// Writes `m` (plus `extra` keys) beside `output`.
void write_sidecar(const std::string& output, const RunManifest& m, const nlohmann::json& extra = nlohmann::json::object());

}  // namespace nicperf::cli

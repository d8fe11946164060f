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

#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <memory>

#include "io.hpp"
#include "nicperf/core.hpp"
#include "nicperf/error.hpp"

namespace nicperf::cli {

std::string sha256_file(const std::string& path) {
    const std::string bytes = read_text(path);
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1)
        fail(ErrorKind::Io, "sha256 failed for " + path);
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

nlohmann::json RunManifest::to_json() const {
    auto files = [](const std::vector<std::string>& paths) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& p : paths) out.push_back({{"path", p}, {"sha256", sha256_file(p)}});
        return out;
    };
    return {{"format", "nicperf-run"},
            {"version", 1},
            {"command", command},
            {"tool_version", std::string(kVersion)},
            {"config", config ? nlohmann::json(*config) : nlohmann::json()},
            {"seeds", seeds},
            {"inputs", files(inputs)},
            {"outputs", files(outputs)}};
}

std::string sidecar_path(const std::string& output) { return output + ".manifest.json"; }

void write_sidecar(const std::string& output, const RunManifest& m, const nlohmann::json& extra) {
    auto j = extra;
    j["run"] = m.to_json();
    write_json(sidecar_path(output), j);
}

}  // namespace nicperf::cli

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

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace nicperf {

enum class ErrorKind {
    InvalidInput,
    Convergence,
    Inference,
    AmbiguousPattern,
    OutOfDomain,
    QuotaExhausted,
    GridTooLarge,
    Io,
};

std::string_view to_string(ErrorKind kind);

// Every domain failure in the library is reported through this type. `details`
// carries machine-readable context (offending configuration, residuals, ...)
// and is what the CLI prints on stderr.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, nlohmann::json details = nlohmann::json::object())
        : std::runtime_error(message), kind_(kind), details_(std::move(details)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const nlohmann::json& details() const noexcept { return details_; }

    // Prefix the message with a stage tag, keeping kind and details.
    Error tagged(std::string_view stage) const;

    nlohmann::json to_json() const;

private:
    ErrorKind kind_;
    nlohmann::json details_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message,
                              nlohmann::json details = nlohmann::json::object()) {
    throw Error(kind, message, std::move(details));
}

inline void require(bool condition, const std::string& message) {
    if (!condition) fail(ErrorKind::InvalidInput, message);
}

}  // namespace nicperf

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
#include <optional>
#include <string>
#include <vector>

namespace nicperf::cli {

/// Flags every subcommand accepts.
struct Common {
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    std::optional<std::string> env;  ///< testbed environment JSON
};

int simulate(const Common& c, const std::string& scenario, const std::string& out);
int profile(const Common& c, const std::string& nf, const std::string& strategy, const std::optional<std::string>& config,
            const std::string& out);
int train(const Common& c, const std::string& nf, const std::string& dataset, const std::string& out);
int predict(const Common& c, const std::string& bundle, const std::string& traffic, const std::string& contention,
            const std::optional<std::string>& out);
int evaluate(const Common& c, const std::string& bundle, const std::string& testgrid, const std::string& out,
             const std::optional<std::string>& detail);
int schedule(const Common& c, const std::string& arrivals, const std::string& strategy,
             const std::vector<std::string>& bundles, const std::string& out);
int schedule_eval(const Common& c, const std::string& fleet, const std::optional<std::string>& out,
                  std::size_t exact_limit);
int diagnose(const Common& c, const std::string& bundle, const std::string& sweep, const std::optional<std::string>& out);
int report(const Common& c, const std::vector<std::string>& inputs, const std::string& out_dir);

}  // namespace nicperf::cli

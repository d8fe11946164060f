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

#include <string>
#include <string_view>
#include <vector>

#include "nicperf/simulator.hpp"

namespace nicperf::sim {

// Synthetic benchmark NFs. Each stresses exactly one resource and is
// parameterized by a contention level in [0, 1].

inline constexpr std::string_view kMemBenchName = "mem-bench";
inline constexpr std::string_view kRegexBenchName = "regex-bench";
inline constexpr std::string_view kCompressionBenchName = "compression-bench";

/// mem-bench runs at a fixed packet rate; its CAR knob sets the cache
/// accesses made per packet, up to kMemBenchMaxRefs (400 M accesses/s).
inline constexpr double kMemBenchRate = 2e6;
inline constexpr double kMemBenchMaxRefs = 200.0;
inline constexpr double kMemBenchMaxWss = 12.0 * 1024 * 1024;

/// Known accelerator parameters of an accelerator benchmark (t = t0 + a * x).
struct AccelBenchConfig {
    int queue_count = 1;
    double t0 = 0.5e-6;
    double a = 2.5e-9;
};

/// mem-bench with independent cache-access-rate and working-set knobs.
NfSpec make_mem_bench(double car_level, double wss_level);

/// Accelerator bench. Levels below 1 offer level * (solo request rate at the
/// default traffic); level 1 keeps every queue backlogged.
NfSpec make_accel_bench(ResourceKind kind, double level, const AccelBenchConfig& config = {});

/// Single-stage benchmark NF realizing `level` on the given resource.
NfSpec make_benchmark_nf(ResourceKind kind, double level);
NfSpec make_benchmark_nf(std::string_view kind, double level);

/// Analogues of common on-NIC network functions.
/// Names: acl, iprouter, flowstats, flowtracker, flowclassifier, nat, iptunnel,
/// flowmonitor, nids, ipcomp.
NfSpec catalog_nf(std::string_view name);
std::vector<std::string> catalog_names();

/// Two-resource synthetic NFs (memory + one accelerator) used to characterize
/// composition, in pipeline or run-to-completion form.
NfSpec make_two_resource_nf(ExecutionPattern pattern, ResourceKind accelerator = ResourceKind::RegexAccel);

}  // namespace nicperf::sim

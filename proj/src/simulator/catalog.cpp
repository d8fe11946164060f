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

#include "nicperf/catalog.hpp"

namespace nicperf::sim {

namespace {

constexpr double kKiB = 1024.0;
constexpr double kMiB = 1024.0 * 1024.0;

void check_level(double level) {
    if (!(level >= 0.0 && level <= 1.0)) fail(ErrorKind::InvalidInput, "contention level must be within [0, 1]", {{"level", level}});
}

NfStage memory_stage(double base, double per_byte = 0.0) {
    NfStage s{ResourceKind::Memory, base, {}};
    if (per_byte > 0.0) s.traffic_coeffs["per_byte"] = per_byte;
    return s;
}

NfStage regex_stage(double t0, double a) { return {ResourceKind::RegexAccel, t0, {{"per_mtbr", a}}}; }

NfStage compression_stage(double t0, double per_byte) {
    return {ResourceKind::CompressionAccel, t0, {{"per_byte", per_byte}}};
}

struct MemoryNf {
    const char* name;
    double base;
    double per_byte;
    WssModel wss;
    double refs;
    double instructions;
};

// Memory-only analogues. The flow-count breakpoint sits where the working set
// reaches its cap. iptunnel keeps no per-flow state; its cost grows with payload.
constexpr MemoryNf kMemoryNfs[] = {
    {"acl", 0.8e-6, 0.0, {512 * kKiB, 0.0, 0.0}, 60.0, 900.0},
    {"iprouter", 1.0e-6, 0.0, {1 * kMiB, 0.0, 0.0}, 100.0, 1100.0},
    {"flowstats", 1.2e-6, 0.0, {256 * kKiB, 300.0, 6 * kMiB}, 150.0, 1400.0},
    {"flowtracker", 1.0e-6, 0.0, {256 * kKiB, 160.0, 6 * kMiB}, 120.0, 1200.0},
    {"flowclassifier", 0.9e-6, 0.0, {128 * kKiB, 600.0, 6 * kMiB}, 180.0, 1300.0},
    {"nat", 1.1e-6, 0.0, {256 * kKiB, 400.0, 8 * kMiB}, 140.0, 1300.0},
    {"iptunnel", 0.6e-6, 0.8e-9, {1536 * kKiB, 0.0, 0.0}, 100.0, 1600.0},
};

}  // namespace

NfSpec make_mem_bench(double car_level, double wss_level) {
    check_level(car_level);
    check_level(wss_level);
    NfSpec nf;
    nf.name = std::string(kMemBenchName);
    nf.pattern = ExecutionPattern::Pipeline;
    nf.stages = {memory_stage(2e-8)};
    nf.offered_rate = kMemBenchRate;
    nf.wss = {wss_level * kMemBenchMaxWss, 0.0, 0.0};
    nf.intensity = {car_level * kMemBenchMaxRefs, 0.6, 200.0};
    return nf;
}

NfSpec make_accel_bench(ResourceKind kind, double level, const AccelBenchConfig& config) {
    check_level(level);
    require(is_accelerator(kind), "accelerator bench needs an accelerator resource");
    require(config.queue_count >= 1 && config.t0 > 0.0 && config.a >= 0.0, "invalid accelerator bench config");
    NfSpec nf;
    nf.pattern = ExecutionPattern::Pipeline;
    nf.queue_count = config.queue_count;
    if (kind == ResourceKind::RegexAccel) {
        nf.name = std::string(kRegexBenchName);
        nf.stages = {regex_stage(config.t0, config.a)};
    } else {
        nf.name = std::string(kCompressionBenchName);
        nf.stages = {compression_stage(config.t0, config.a)};
    }
    if (level < 1.0) {
        const double solo = 1.0 / (config.queue_count * nf.stages.front().time_at(TrafficProfile{}));
        nf.offered_rate = level * solo;
    }
    nf.wss = {64 * kKiB, 0.0, 0.0};
    nf.intensity = {0.0, 0.7, 300.0};
    return nf;
}

NfSpec make_benchmark_nf(ResourceKind kind, double level) {
    if (kind == ResourceKind::Memory) return make_mem_bench(level, level);
    return make_accel_bench(kind, level);
}

NfSpec make_benchmark_nf(std::string_view kind, double level) {
    return make_benchmark_nf(resource_kind_from_string(kind), level);
}

NfSpec catalog_nf(std::string_view name) {
    for (const auto& m : kMemoryNfs) {
        if (name != m.name) continue;
        NfSpec nf;
        nf.name = m.name;
        nf.pattern = ExecutionPattern::RunToCompletion;
        nf.stages = {memory_stage(m.base, m.per_byte)};
        nf.wss = m.wss;
        nf.intensity = {m.refs, 0.7, m.instructions};
        return nf;
    }
    NfSpec nf;
    nf.name = std::string(name);
    nf.intensity = {120.0, 0.7, 1800.0};
    if (name == "flowmonitor") {
        nf.pattern = ExecutionPattern::Pipeline;
        nf.stages = {memory_stage(1.5e-6), regex_stage(0.6e-6, 1.6e-9)};
        nf.wss = {256 * kKiB, 200.0, 4 * kMiB};
        return nf;
    }
    if (name == "nids") {
        nf.pattern = ExecutionPattern::RunToCompletion;
        nf.stages = {memory_stage(0.7e-6, 0.1e-9), regex_stage(0.4e-6, 1.0e-9)};
        nf.wss = {2 * kMiB, 20.0, 3 * kMiB};
        nf.intensity.refs_per_packet = 100.0;
        return nf;
    }
    if (name == "ipcomp") {
        nf.pattern = ExecutionPattern::Pipeline;
        nf.stages = {memory_stage(1.2e-6), compression_stage(0.5e-6, 1.0e-9)};
        nf.wss = {1 * kMiB, 50.0, 3 * kMiB};
        return nf;
    }
    fail(ErrorKind::InvalidInput, "unknown NF '" + std::string(name) + "'", {{"known", catalog_names()}});
}

std::vector<std::string> catalog_names() {
    std::vector<std::string> names;
    for (const auto& m : kMemoryNfs) names.emplace_back(m.name);
    names.insert(names.end(), {"flowmonitor", "nids", "ipcomp"});
    return names;
}

NfSpec make_two_resource_nf(ExecutionPattern pattern, ResourceKind accelerator) {
    require(is_accelerator(accelerator), "second resource must be an accelerator");
    NfSpec nf;
    nf.name = pattern == ExecutionPattern::Pipeline ? "nf1-pipeline" : "nf1-rtc";
    nf.pattern = pattern;
    nf.stages = {memory_stage(2.0e-6),
                 accelerator == ResourceKind::RegexAccel ? regex_stage(0.8e-6, 2.0e-9) : compression_stage(0.5e-6, 1.0e-9)};
    nf.wss = {2 * kMiB, 0.0, 0.0};
    nf.intensity = {120.0, 0.7, 1500.0};
    return nf;
}

}  // namespace nicperf::sim

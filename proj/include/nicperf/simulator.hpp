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

/**
 * @file simulator.hpp
 * @brief Deterministic SmartNIC contention simulator used as ground truth.
 *
 * Co-located NFs share round-robin scheduled accelerators and a memory
 * subsystem whose capacity degrades piece-wise linearly with cache pressure
 * and competing cache access rate. A scenario run resolves the coupling
 * between NFs (competitor rates depend on each other's throughput) with a
 * damped fixed-point iteration, then measures accelerator stages with the
 * discrete-event round-robin server.
 *
 * Accelerator queue convention: an NF with n request queues and per-request
 * time t occupies the server for n*t per served request. With every queue
 * backlogged an NF therefore receives n_i / sum_j(n_j^2 t_j) requests/s.
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nicperf/core.hpp"

namespace nicperf::sim {

/// One processing block of an NF; uses exactly one resource.
///
/// Per-packet time on the stage:
///  - Memory: (base_time + per_byte * packet_size) * (1 + miss_penalty * miss_ratio)
///  - RegexAccel: base_time + per_mtbr * mtbr            (t0 + a*m)
///  - CompressionAccel: base_time + per_byte * packet_size
struct NfStage {
    ResourceKind resource = ResourceKind::Memory;
    double base_time = 1e-6;
    std::map<std::string, double> traffic_coeffs;

    double coeff(const std::string& key) const {
        auto it = traffic_coeffs.find(key);
        return it == traffic_coeffs.end() ? 0.0 : it->second;
    }

    /// Uncontended per-packet (per-request) time at `traffic`, before cache misses.
    double time_at(const TrafficProfile& traffic) const;

    friend bool operator==(const NfStage&, const NfStage&) = default;
};

/// Working set: base_bytes + bytes_per_flow * flow_count, capped at cap_bytes.
struct WssModel {
    double base_bytes = 0.0;
    double bytes_per_flow = 0.0;
    double cap_bytes = 0.0;  ///< 0 means uncapped

    double bytes(std::int64_t flow_count) const;

    friend bool operator==(const WssModel&, const WssModel&) = default;
};

/// How hard an NF drives the cache and the cores, per packet.
struct MemoryIntensity {
    double refs_per_packet = 0.0;  ///< L2 accesses per packet
    double read_fraction = 0.7;
    double instructions_per_packet = 1000.0;

    friend bool operator==(const MemoryIntensity&, const MemoryIntensity&) = default;
};

struct NfSpec {
    std::string name;
    ExecutionPattern pattern = ExecutionPattern::Pipeline;
    std::vector<NfStage> stages;
    int queue_count = 1;
    std::optional<double> offered_rate;  ///< packets/s; nullopt = line rate (always backlogged)
    WssModel wss;
    MemoryIntensity intensity;

    void validate() const;
    const NfStage* stage(ResourceKind kind) const;
    bool uses(ResourceKind kind) const { return stage(kind) != nullptr; }

    friend bool operator==(const NfSpec&, const NfSpec&) = default;
};

/// Piece-wise linear memory subsystem.
///
/// Miss ratio ramps linearly from miss_base to miss_sat while the combined
/// working set moves from ramp_lo*llc to ramp_hi*llc. Capacity is scaled by
/// 1 - car_slope * max(0, car - car_knee), floored at car_floor.
struct MemoryParams {
    double miss_base = 0.05;
    double miss_sat = 0.6;
    double ramp_lo = 0.0;
    double ramp_hi = 2.5;
    double miss_penalty = 1.5;
    double car_knee = 50e6;
    double car_slope = 0.3 / 300e6;
    double car_floor = 0.7;

    void validate() const;
    double miss_ratio(double total_wss, double llc_bytes) const;
    double car_factor(double competitor_car) const;

    friend bool operator==(const MemoryParams&, const MemoryParams&) = default;
};

struct ScenarioEntry {
    NfSpec nf;
    TrafficProfile traffic;

    friend bool operator==(const ScenarioEntry&, const ScenarioEntry&) = default;
};

struct ContentionScenario {
    std::vector<ScenarioEntry> nfs;
    std::uint64_t seed = 0;
    double llc_bytes = 6.0 * 1024 * 1024;
    MemoryParams memory;
    double noise_pct = 0.0;        ///< Gaussian counter noise, sigma as % of value
    std::int64_t accel_rounds = 20000;  ///< round-robin cycles simulated per accelerator measurement

    static constexpr std::size_t kMaxNfs = 4;

    void validate() const;

    friend bool operator==(const ContentionScenario&, const ContentionScenario&) = default;
};

struct SimulationResult {
    std::map<std::string, double> per_nf_throughput;
    std::map<std::string, CounterSnapshot> per_nf_counters;
    std::map<std::string, std::map<ResourceKind, double>> per_nf_stage_throughput;
    std::map<std::string, ResourceKind> bottleneck;
    int iterations = 0;

    /// Elementwise sum of every NF's counters except `target`.
    CounterSnapshot competitor_counters(const std::string& target) const;

    friend bool operator==(const SimulationResult&, const SimulationResult&) = default;
};

// ---------------------------------------------------------------------------
// Round-robin accelerator

struct RrQueueSpec {
    int queue_count = 1;
    double per_request_time = 1e-6;
    std::optional<double> offered_rate;  ///< requests/s, nullopt = saturating
};

struct RrResult {
    std::vector<double> throughput;  ///< requests/s per NF, post warm-up
    std::vector<double> first_half;  ///< estimate over the first half of the measured window
    std::vector<double> second_half;
    bool converged = true;
};

/// Discrete-event simulation of one server cycling over all request queues.
/// Each visit to a non-empty queue serves up to `batch` requests. The first 10%
/// of the horizon is discarded; the remainder must agree across its two halves
/// within 0.5% (or one round-robin cycle of quantization), else converged=false.
RrResult simulate_accelerator_rr(const std::vector<RrQueueSpec>& specs, double horizon, int batch = 1);

/// Long-run rates of the same server from the fluid (water-filling) solution.
std::vector<double> rr_fluid_rates(const std::vector<RrQueueSpec>& specs);

// ---------------------------------------------------------------------------
// Memory subsystem

struct MemoryStageLoad {
    double stage_time = 1e-6;  ///< uncontended per-packet time before misses
    double own_wss = 0.0;
    double competitor_car = 0.0;
    double competitor_wss = 0.0;
    double llc_bytes = 6.0 * 1024 * 1024;
};

/// Packets/s capacity of a memory stage under the given contention.
double memory_throughput(const MemoryStageLoad& load, const MemoryParams& params);

// ---------------------------------------------------------------------------

/// Runs one co-location scenario to its steady state.
/// Throws Error{Convergence} if the fixed point or an accelerator measurement
/// does not settle.
SimulationResult run_scenario(const ContentionScenario& scenario);

/// Solo steady state of a single NF under default memory parameters.
SimulationResult run_solo(const NfSpec& nf, const TrafficProfile& traffic, const MemoryParams& memory = {},
                          double llc_bytes = 6.0 * 1024 * 1024);

void to_json(nlohmann::json& j, const NfStage& s);
void from_json(const nlohmann::json& j, NfStage& s);
void to_json(nlohmann::json& j, const NfSpec& s);
void from_json(const nlohmann::json& j, NfSpec& s);
void to_json(nlohmann::json& j, const MemoryParams& p);
void from_json(const nlohmann::json& j, MemoryParams& p);
void to_json(nlohmann::json& j, const ContentionScenario& s);
void from_json(const nlohmann::json& j, ContentionScenario& s);
void to_json(nlohmann::json& j, const SimulationResult& r);
void from_json(const nlohmann::json& j, SimulationResult& r);

}  // namespace nicperf::sim

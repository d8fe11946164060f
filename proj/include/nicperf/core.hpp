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
 * @file core.hpp
 * @brief Domain values shared by every nicperf module.
 *
 * Units: throughput is always packets per second, times are seconds, sizes
 * are bytes, counter rates are events per second. Display layers rescale.
 */

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "nicperf/error.hpp"

namespace nicperf {

inline constexpr std::string_view kVersion = "0.1.0";

/// Attributes of the input traffic seen by one NF.
struct TrafficProfile {
    std::int64_t flow_count = 16000;
    std::int64_t packet_size = 1500;
    double mtbr = 600.0;  ///< regex matches per MB of payload

    static constexpr std::int64_t kMinPacketSize = 64;
    static constexpr std::int64_t kMaxPacketSize = 1500;

    /// Throws InvalidInput if any invariant is violated.
    void validate() const;

    friend bool operator==(const TrafficProfile&, const TrafficProfile&) = default;
};

/// Index order used whenever a traffic profile is treated as a vector.
enum class TrafficAttribute { FlowCount = 0, PacketSize = 1, Mtbr = 2 };
inline constexpr std::array<TrafficAttribute, 3> kTrafficAttributes{
    TrafficAttribute::FlowCount, TrafficAttribute::PacketSize, TrafficAttribute::Mtbr};

std::string_view to_string(TrafficAttribute attribute);
TrafficAttribute traffic_attribute_from_string(std::string_view name);
double get(const TrafficProfile& traffic, TrafficAttribute attribute);
// Integral attributes are rounded to the nearest integer.
void set(TrafficProfile& traffic, TrafficAttribute attribute, double value);

enum class ResourceKind { Memory, RegexAccel, CompressionAccel };
inline constexpr std::array<ResourceKind, 3> kResourceKinds{
    ResourceKind::Memory, ResourceKind::RegexAccel, ResourceKind::CompressionAccel};

std::string_view to_string(ResourceKind kind);
ResourceKind resource_kind_from_string(std::string_view name);
inline bool is_accelerator(ResourceKind kind) { return kind != ResourceKind::Memory; }

enum class ExecutionPattern { Pipeline, RunToCompletion };

std::string_view to_string(ExecutionPattern pattern);
ExecutionPattern execution_pattern_from_string(std::string_view name);

/// The seven memory-subsystem counters observed for a workload.
struct CounterSnapshot {
    double ipc = 0.0;    ///< instructions per cycle
    double irt = 0.0;    ///< instructions retired per second
    double l2crd = 0.0;  ///< L2 data cache reads per second
    double l2cwr = 0.0;  ///< L2 data cache writes per second
    double memrd = 0.0;  ///< memory reads per second
    double memwr = 0.0;  ///< memory writes per second
    double wss = 0.0;    ///< working set size, bytes

    static constexpr std::size_t kSize = 7;

    /// Cache access rate.
    double car() const { return l2crd + l2cwr; }

    std::array<double, kSize> to_array() const { return {ipc, irt, l2crd, l2cwr, memrd, memwr, wss}; }

    void validate() const;

    CounterSnapshot& operator+=(const CounterSnapshot& other);
    friend CounterSnapshot operator+(CounterSnapshot a, const CounterSnapshot& b) { return a += b; }
    friend bool operator==(const CounterSnapshot&, const CounterSnapshot&) = default;
};

inline constexpr std::array<std::string_view, CounterSnapshot::kSize> kCounterNames{
    "ipc", "irt", "l2crd", "l2cwr", "memrd", "memwr", "wss"};

/// Elementwise sum over competitors (WSS included).
CounterSnapshot aggregate(std::span<const CounterSnapshot> snapshots);

/// One row of a profiling dataset.
struct ThroughputSample {
    std::string scenario_id;
    std::string target_nf;
    TrafficProfile traffic;
    CounterSnapshot competitor_counters;
    double competitor_match_rate = 0.0;  ///< matches/s offered by accelerator competitors
    double observed_throughput = 0.0;

    void validate() const;

    friend bool operator==(const ThroughputSample&, const ThroughputSample&) = default;
};

/// Mean absolute percentage error, in percent.
double mape(std::span<const double> predicted, std::span<const double> actual);

/// Percentage of samples whose relative error is within `band` (0.05 = ±5%).
double band_accuracy(std::span<const double> predicted, std::span<const double> actual, double band);

// JSON bindings. Field names are part of the on-disk schemas (docs/schemas.md).
void to_json(nlohmann::json& j, const TrafficProfile& t);
void from_json(const nlohmann::json& j, TrafficProfile& t);
void to_json(nlohmann::json& j, const CounterSnapshot& c);
void from_json(const nlohmann::json& j, CounterSnapshot& c);
void to_json(nlohmann::json& j, const ThroughputSample& s);
void from_json(const nlohmann::json& j, ThroughputSample& s);

}  // namespace nicperf

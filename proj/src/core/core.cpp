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

#include "nicperf/core.hpp"

#include <cmath>

namespace nicperf {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidInput: return "invalid-input";
        case ErrorKind::Convergence: return "convergence";
        case ErrorKind::Inference: return "inference";
        case ErrorKind::AmbiguousPattern: return "ambiguous-pattern";
        case ErrorKind::OutOfDomain: return "out-of-domain";
        case ErrorKind::QuotaExhausted: return "quota-exhausted";
        case ErrorKind::GridTooLarge: return "grid-too-large";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

Error Error::tagged(std::string_view stage) const {
    auto details = details_;
    details["stage"] = std::string(stage);
    return Error(kind_, std::string(stage) + ": " + what(), std::move(details));
}

nlohmann::json Error::to_json() const {
    return {{"error", std::string(to_string(kind_))}, {"message", what()}, {"details", details_}};
}

void TrafficProfile::validate() const {
    if (flow_count < 1) fail(ErrorKind::InvalidInput, "flow_count must be >= 1", {{"flow_count", flow_count}});
    if (packet_size < kMinPacketSize || packet_size > kMaxPacketSize)
        fail(ErrorKind::InvalidInput, "packet_size must be within [64, 1500]", {{"packet_size", packet_size}});
    if (!(mtbr >= 0.0) || !std::isfinite(mtbr)) fail(ErrorKind::InvalidInput, "mtbr must be >= 0", {{"mtbr", mtbr}});
}

std::string_view to_string(TrafficAttribute attribute) {
    switch (attribute) {
        case TrafficAttribute::FlowCount: return "flow_count";
        case TrafficAttribute::PacketSize: return "packet_size";
        case TrafficAttribute::Mtbr: return "mtbr";
    }
    return "unknown";
}

TrafficAttribute traffic_attribute_from_string(std::string_view name) {
    for (auto a : kTrafficAttributes)
        if (to_string(a) == name) return a;
    fail(ErrorKind::InvalidInput, "unknown traffic attribute '" + std::string(name) + "'");
}

double get(const TrafficProfile& traffic, TrafficAttribute attribute) {
    switch (attribute) {
        case TrafficAttribute::FlowCount: return static_cast<double>(traffic.flow_count);
        case TrafficAttribute::PacketSize: return static_cast<double>(traffic.packet_size);
        case TrafficAttribute::Mtbr: return traffic.mtbr;
    }
    return 0.0;
}

void set(TrafficProfile& traffic, TrafficAttribute attribute, double value) {
    switch (attribute) {
        case TrafficAttribute::FlowCount: traffic.flow_count = std::llround(value); break;
        case TrafficAttribute::PacketSize: traffic.packet_size = std::llround(value); break;
        case TrafficAttribute::Mtbr: traffic.mtbr = value; break;
    }
}

std::string_view to_string(ResourceKind kind) {
    switch (kind) {
        case ResourceKind::Memory: return "memory";
        case ResourceKind::RegexAccel: return "regex";
        case ResourceKind::CompressionAccel: return "compression";
    }
    return "unknown";
}

ResourceKind resource_kind_from_string(std::string_view name) {
    for (auto k : kResourceKinds)
        if (to_string(k) == name) return k;
    fail(ErrorKind::InvalidInput, "unknown resource kind '" + std::string(name) + "'");
}

std::string_view to_string(ExecutionPattern pattern) {
    return pattern == ExecutionPattern::Pipeline ? "pipeline" : "run_to_completion";
}

ExecutionPattern execution_pattern_from_string(std::string_view name) {
    if (name == "pipeline") return ExecutionPattern::Pipeline;
    if (name == "run_to_completion") return ExecutionPattern::RunToCompletion;
    fail(ErrorKind::InvalidInput, "unknown execution pattern '" + std::string(name) + "'");
}

void CounterSnapshot::validate() const {
    for (std::size_t i = 0; i < kSize; ++i) {
        double v = to_array()[i];
        if (!std::isfinite(v) || v < 0.0)
            fail(ErrorKind::InvalidInput, "counter must be finite and non-negative",
                 {{"counter", std::string(kCounterNames[i])}, {"value", v}});
    }
}

CounterSnapshot& CounterSnapshot::operator+=(const CounterSnapshot& o) {
    ipc += o.ipc;
    irt += o.irt;
    l2crd += o.l2crd;
    l2cwr += o.l2cwr;
    memrd += o.memrd;
    memwr += o.memwr;
    wss += o.wss;
    return *this;
}

CounterSnapshot aggregate(std::span<const CounterSnapshot> snapshots) {
    CounterSnapshot total;
    for (const auto& s : snapshots) total += s;
    return total;
}

void ThroughputSample::validate() const {
    traffic.validate();
    competitor_counters.validate();
    if (!(observed_throughput > 0.0))
        fail(ErrorKind::InvalidInput, "observed_throughput must be positive", {{"scenario_id", scenario_id}});
}

namespace {

void check_metric_inputs(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size() || actual.empty())
        fail(ErrorKind::InvalidInput, "metric inputs must have equal non-zero lengths",
             {{"predicted", predicted.size()}, {"actual", actual.size()}});
    for (double a : actual)
        if (!(a > 0.0)) fail(ErrorKind::InvalidInput, "actual values must be positive", {{"actual", a}});
}

}  // namespace

double mape(std::span<const double> predicted, std::span<const double> actual) {
    check_metric_inputs(predicted, actual);
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) sum += std::abs(predicted[i] - actual[i]) / actual[i];
    return 100.0 * sum / static_cast<double>(actual.size());
}

double band_accuracy(std::span<const double> predicted, std::span<const double> actual, double band) {
    check_metric_inputs(predicted, actual);
    require(band > 0.0, "band must be positive");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < actual.size(); ++i)
        if (std::abs(predicted[i] - actual[i]) / actual[i] <= band) ++hits;
    return 100.0 * static_cast<double>(hits) / static_cast<double>(actual.size());
}

void to_json(nlohmann::json& j, const TrafficProfile& t) {
    j = {{"flow_count", t.flow_count}, {"packet_size", t.packet_size}, {"mtbr", t.mtbr}};
}

void from_json(const nlohmann::json& j, TrafficProfile& t) {
    TrafficProfile d;
    t.flow_count = j.value("flow_count", d.flow_count);
    t.packet_size = j.value("packet_size", d.packet_size);
    t.mtbr = j.value("mtbr", d.mtbr);
}

void to_json(nlohmann::json& j, const CounterSnapshot& c) {
    j = {{"ipc", c.ipc},     {"irt", c.irt},     {"l2crd", c.l2crd}, {"l2cwr", c.l2cwr},
         {"memrd", c.memrd}, {"memwr", c.memwr}, {"wss", c.wss}};
}

void from_json(const nlohmann::json& j, CounterSnapshot& c) {
    c.ipc = j.value("ipc", 0.0);
    c.irt = j.value("irt", 0.0);
    c.l2crd = j.value("l2crd", 0.0);
    c.l2cwr = j.value("l2cwr", 0.0);
    c.memrd = j.value("memrd", 0.0);
    c.memwr = j.value("memwr", 0.0);
    c.wss = j.value("wss", 0.0);
}

void to_json(nlohmann::json& j, const ThroughputSample& s) {
    j = {{"scenario_id", s.scenario_id},
         {"target_nf", s.target_nf},
         {"traffic", s.traffic},
         {"competitor_counters", s.competitor_counters},
         {"competitor_match_rate", s.competitor_match_rate},
         {"observed_throughput", s.observed_throughput}};
}

void from_json(const nlohmann::json& j, ThroughputSample& s) {
    s.scenario_id = j.at("scenario_id").get<std::string>();
    s.target_nf = j.at("target_nf").get<std::string>();
    s.traffic = j.at("traffic").get<TrafficProfile>();
    s.competitor_counters = j.at("competitor_counters").get<CounterSnapshot>();
    s.competitor_match_rate = j.value("competitor_match_rate", 0.0);
    s.observed_throughput = j.at("observed_throughput").get<double>();
}

}  // namespace nicperf

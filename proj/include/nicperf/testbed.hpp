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
 * @file testbed.hpp
 * @brief The measurement surface model builders see.
 *
 * Profiling, parameter inference and pattern detection never look inside
 * the target NF; they only co-run it with benchmark NFs through a Testbed
 * and read back throughputs and counters, as on real hardware.
 */

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "nicperf/catalog.hpp"
#include "nicperf/core.hpp"
#include "nicperf/simulator.hpp"

namespace nicperf {

/// Benchmark knob settings applied against a target. Zero means the bench is absent.
struct ContentionLevel {
    double mem_car = 0.0;
    double mem_wss = 0.0;
    double regex = 0.0;
    double compression = 0.0;

    bool is_zero() const { return mem_car == 0.0 && mem_wss == 0.0 && regex == 0.0 && compression == 0.0; }

    friend auto operator<=>(const ContentionLevel&, const ContentionLevel&) = default;
};

void to_json(nlohmann::json& j, const ContentionLevel& c);
void from_json(const nlohmann::json& j, ContentionLevel& c);

/// Executes one scenario. The default runner is sim::run_scenario.
using Runner = std::function<sim::SimulationResult(const sim::ContentionScenario&)>;

/// Shared environment for every co-run on a testbed.
struct TestbedEnvironment {
    sim::MemoryParams memory;
    double llc_bytes = 6.0 * 1024 * 1024;
    std::int64_t accel_rounds = 20000;
    double noise_pct = 0.0;
    std::uint64_t seed = 0;
    TrafficProfile bench_traffic;
    sim::AccelBenchConfig regex_bench;
    sim::AccelBenchConfig compression_bench{1, 0.5e-6, 1.0e-9};
};

void to_json(nlohmann::json& j, const TestbedEnvironment& e);
void from_json(const nlohmann::json& j, TestbedEnvironment& e);

struct Observation {
    sim::SimulationResult result;
    ThroughputSample sample;  ///< the target's row
};

class Testbed {
public:
    explicit Testbed(sim::NfSpec target, TestbedEnvironment env = {}, Runner runner = {});

    const sim::NfSpec& target() const { return target_; }
    const std::string& name() const { return target_.name; }
    const TestbedEnvironment& environment() const { return env_; }

    /// Scenario with the target (first entry) and the benches `level` asks for.
    sim::ContentionScenario scenario(const TrafficProfile& traffic, const ContentionLevel& level) const;

    /// Scenario with the target and arbitrary competitors.
    sim::ContentionScenario scenario(const TrafficProfile& traffic, std::vector<sim::ScenarioEntry> competitors) const;

    Observation observe(const sim::ContentionScenario& scenario, const std::string& scenario_id) const;
    Observation corun(const TrafficProfile& traffic, const ContentionLevel& level) const;
    double solo(const TrafficProfile& traffic) const;

    /// Number of scenarios executed so far.
    std::uint64_t runs() const { return runs_->load(); }

private:
    sim::NfSpec target_;
    TestbedEnvironment env_;
    Runner runner_;
    std::shared_ptr<std::atomic<std::uint64_t>> runs_;
};

/// Stable identifier of a (target, traffic, contention) configuration.
std::string configuration_id(const std::string& nf, const TrafficProfile& traffic, const ContentionLevel& level);

/// Matches/s the regex users among `competitors` push through the accelerator.
double competitor_match_rate(const sim::SimulationResult& result, const sim::ContentionScenario& scenario,
                             const std::string& target);

}  // namespace nicperf

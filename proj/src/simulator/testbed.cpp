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

#include "nicperf/testbed.hpp"

#include <cstdio>

namespace nicperf {

void to_json(nlohmann::json& j, const ContentionLevel& c) {
    j = {{"mem_car", c.mem_car}, {"mem_wss", c.mem_wss}, {"regex", c.regex}, {"compression", c.compression}};
}

void from_json(const nlohmann::json& j, ContentionLevel& c) {
    c.mem_car = j.value("mem_car", 0.0);
    c.mem_wss = j.value("mem_wss", 0.0);
    c.regex = j.value("regex", 0.0);
    c.compression = j.value("compression", 0.0);
}

namespace {

nlohmann::json bench_json(const sim::AccelBenchConfig& b) {
    return {{"queue_count", b.queue_count}, {"t0", b.t0}, {"a", b.a}};
}

sim::AccelBenchConfig bench_from_json(const nlohmann::json& j, sim::AccelBenchConfig d) {
    d.queue_count = j.value("queue_count", d.queue_count);
    d.t0 = j.value("t0", d.t0);
    d.a = j.value("a", d.a);
    return d;
}

}  // namespace

void to_json(nlohmann::json& j, const TestbedEnvironment& e) {
    j = {{"memory", e.memory},
         {"llc_bytes", e.llc_bytes},
         {"accel_rounds", e.accel_rounds},
         {"noise_pct", e.noise_pct},
         {"seed", e.seed},
         {"bench_traffic", e.bench_traffic},
         {"regex_bench", bench_json(e.regex_bench)},
         {"compression_bench", bench_json(e.compression_bench)}};
}

void from_json(const nlohmann::json& j, TestbedEnvironment& e) {
    TestbedEnvironment d;
    e.memory = j.contains("memory") ? j.at("memory").get<sim::MemoryParams>() : d.memory;
    e.llc_bytes = j.value("llc_bytes", d.llc_bytes);
    e.accel_rounds = j.value("accel_rounds", d.accel_rounds);
    e.noise_pct = j.value("noise_pct", d.noise_pct);
    e.seed = j.value("seed", d.seed);
    e.bench_traffic = j.contains("bench_traffic") ? j.at("bench_traffic").get<TrafficProfile>() : d.bench_traffic;
    e.regex_bench = j.contains("regex_bench") ? bench_from_json(j.at("regex_bench"), d.regex_bench) : d.regex_bench;
    e.compression_bench = j.contains("compression_bench") ? bench_from_json(j.at("compression_bench"), d.compression_bench)
                                                          : d.compression_bench;
}

Testbed::Testbed(sim::NfSpec target, TestbedEnvironment env, Runner runner)
    : target_(std::move(target)),
      env_(std::move(env)),
      runner_(runner ? std::move(runner) : Runner(sim::run_scenario)),
      runs_(std::make_shared<std::atomic<std::uint64_t>>(0)) {
    target_.validate();
}

sim::ContentionScenario Testbed::scenario(const TrafficProfile& traffic, std::vector<sim::ScenarioEntry> competitors) const {
    sim::ContentionScenario s;
    s.seed = env_.seed;
    s.llc_bytes = env_.llc_bytes;
    s.memory = env_.memory;
    s.noise_pct = env_.noise_pct;
    s.accel_rounds = env_.accel_rounds;
    s.nfs.push_back({target_, traffic});
    for (auto& c : competitors) s.nfs.push_back(std::move(c));
    return s;
}

sim::ContentionScenario Testbed::scenario(const TrafficProfile& traffic, const ContentionLevel& level) const {
    std::vector<sim::ScenarioEntry> benches;
    if (level.mem_car > 0.0 || level.mem_wss > 0.0)
        benches.push_back({sim::make_mem_bench(level.mem_car, level.mem_wss), env_.bench_traffic});
    if (level.regex > 0.0)
        benches.push_back({sim::make_accel_bench(ResourceKind::RegexAccel, level.regex, env_.regex_bench), env_.bench_traffic});
    if (level.compression > 0.0)
        benches.push_back({sim::make_accel_bench(ResourceKind::CompressionAccel, level.compression, env_.compression_bench),
                           env_.bench_traffic});
    return scenario(traffic, std::move(benches));
}

Observation Testbed::observe(const sim::ContentionScenario& scenario, const std::string& scenario_id) const {
    runs_->fetch_add(1);
    Observation obs;
    obs.result = runner_(scenario);
    const auto& name = target_.name;
    obs.sample.scenario_id = scenario_id;
    obs.sample.target_nf = name;
    obs.sample.traffic = scenario.nfs.front().traffic;
    obs.sample.competitor_counters = obs.result.competitor_counters(name);
    obs.sample.competitor_match_rate = competitor_match_rate(obs.result, scenario, name);
    obs.sample.observed_throughput = obs.result.per_nf_throughput.at(name);
    return obs;
}

Observation Testbed::corun(const TrafficProfile& traffic, const ContentionLevel& level) const {
    return observe(scenario(traffic, level), configuration_id(target_.name, traffic, level));
}

double Testbed::solo(const TrafficProfile& traffic) const { return corun(traffic, {}).sample.observed_throughput; }

std::string configuration_id(const std::string& nf, const TrafficProfile& traffic, const ContentionLevel& level) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s|f%lld|p%lld|m%.6g|c%.6g|w%.6g|r%.6g|z%.6g", nf.c_str(),
                  static_cast<long long>(traffic.flow_count), static_cast<long long>(traffic.packet_size), traffic.mtbr,
                  level.mem_car, level.mem_wss, level.regex, level.compression);
    return buf;
}

double competitor_match_rate(const sim::SimulationResult& result, const sim::ContentionScenario& scenario,
                             const std::string& target) {
    double rate = 0.0;
    for (const auto& e : scenario.nfs) {
        if (e.nf.name == target || !e.nf.uses(ResourceKind::RegexAccel)) continue;
        const double payload_mb = static_cast<double>(e.traffic.packet_size) / 1e6;
        rate += result.per_nf_throughput.at(e.nf.name) * e.traffic.mtbr * payload_mb;
    }
    return rate;
}

}  // namespace nicperf

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

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "nicperf/simulator.hpp"

namespace nicperf::sim {

namespace {

constexpr double kCoresPerNf = 2.0;
constexpr double kCoreHz = 2.5e9;
constexpr double kDamping = 0.5;
constexpr double kTolerance = 1e-3;
constexpr int kMaxIterations = 100;

}  // namespace

double NfStage::time_at(const TrafficProfile& traffic) const {
    switch (resource) {
        case ResourceKind::Memory:
        case ResourceKind::CompressionAccel:
            return base_time + coeff("per_byte") * static_cast<double>(traffic.packet_size);
        case ResourceKind::RegexAccel:
            return base_time + coeff("per_mtbr") * traffic.mtbr;
    }
    return base_time;
}

double WssModel::bytes(std::int64_t flow_count) const {
    double b = base_bytes + bytes_per_flow * static_cast<double>(flow_count);
    return cap_bytes > 0.0 ? std::min(b, cap_bytes) : b;
}

void NfSpec::validate() const {
    require(!name.empty(), "NF name must not be empty");
    require(!stages.empty(), "NF '" + name + "' needs at least one stage");
    require(queue_count >= 1, "NF '" + name + "': queue_count must be >= 1");
    std::set<ResourceKind> seen;
    for (const auto& s : stages) {
        require(s.base_time > 0.0 && std::isfinite(s.base_time), "NF '" + name + "': base_time must be > 0");
        require(seen.insert(s.resource).second, "NF '" + name + "': at most one stage per resource");
        for (const auto& [k, v] : s.traffic_coeffs)
            require(std::isfinite(v) && v >= 0.0, "NF '" + name + "': traffic coefficient '" + k + "' must be >= 0");
    }
    if (offered_rate) require(*offered_rate >= 0.0 && std::isfinite(*offered_rate), "offered_rate must be >= 0");
    require(wss.base_bytes >= 0.0 && wss.bytes_per_flow >= 0.0 && wss.cap_bytes >= 0.0, "wss model must be >= 0");
    require(intensity.refs_per_packet >= 0.0 && intensity.instructions_per_packet >= 0.0,
            "memory intensity must be >= 0");
    require(intensity.read_fraction >= 0.0 && intensity.read_fraction <= 1.0, "read_fraction must be in [0,1]");
}

const NfStage* NfSpec::stage(ResourceKind kind) const {
    for (const auto& s : stages)
        if (s.resource == kind) return &s;
    return nullptr;
}

void MemoryParams::validate() const {
    require(miss_base >= 0.0 && miss_sat >= miss_base && miss_sat <= 1.0, "miss ratios must satisfy 0<=base<=sat<=1");
    require(ramp_lo >= 0.0 && ramp_hi > ramp_lo, "ramp_hi must exceed ramp_lo");
    require(miss_penalty >= 0.0, "miss_penalty must be >= 0");
    require(car_knee >= 0.0 && car_slope >= 0.0, "car knee/slope must be >= 0");
    require(car_floor > 0.0 && car_floor <= 1.0, "car_floor must be in (0,1]");
}

double MemoryParams::miss_ratio(double total_wss, double llc_bytes) const {
    const double lo = ramp_lo * llc_bytes, hi = ramp_hi * llc_bytes;
    if (total_wss <= lo) return miss_base;
    if (total_wss >= hi) return miss_sat;
    return miss_base + (miss_sat - miss_base) * (total_wss - lo) / (hi - lo);
}

double MemoryParams::car_factor(double competitor_car) const {
    return std::max(car_floor, 1.0 - car_slope * std::max(0.0, competitor_car - car_knee));
}

double memory_throughput(const MemoryStageLoad& load, const MemoryParams& params) {
    const double miss = params.miss_ratio(load.own_wss + load.competitor_wss, load.llc_bytes);
    const double time = load.stage_time * (1.0 + params.miss_penalty * miss);
    return params.car_factor(load.competitor_car) / time;
}

void ContentionScenario::validate() const {
    if (nfs.empty() || nfs.size() > kMaxNfs)
        fail(ErrorKind::InvalidInput, "scenario must hold 1..4 NFs", {{"nfs", nfs.size()}});
    require(llc_bytes > 0.0, "llc_bytes must be positive");
    require(noise_pct >= 0.0, "noise_pct must be >= 0");
    require(accel_rounds >= 100, "accel_rounds must be >= 100");
    memory.validate();
    std::set<std::string> names;
    for (const auto& e : nfs) {
        e.nf.validate();
        e.traffic.validate();
        require(names.insert(e.nf.name).second, "duplicate NF name '" + e.nf.name + "' in scenario");
    }
}

CounterSnapshot SimulationResult::competitor_counters(const std::string& target) const {
    CounterSnapshot total;
    for (const auto& [name, c] : per_nf_counters)
        if (name != target) total += c;
    return total;
}

namespace {

struct NfState {
    const NfSpec* nf = nullptr;
    TrafficProfile traffic;
    double own_wss = 0.0;
    double throughput = 0.0;
    std::map<ResourceKind, double> caps;
};

double compose(ExecutionPattern pattern, const std::map<ResourceKind, double>& caps) {
    if (pattern == ExecutionPattern::Pipeline) {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& [k, c] : caps) m = std::min(m, c);
        return m;
    }
    double sojourn = 0.0;
    for (const auto& [k, c] : caps) sojourn += 1.0 / c;
    return 1.0 / sojourn;
}

double offered_cap(const NfSpec& nf, double capacity) {
    return nf.offered_rate ? std::min(*nf.offered_rate, capacity) : capacity;
}

class ScenarioSolver {
public:
    explicit ScenarioSolver(const ContentionScenario& s) : scenario_(s) {
        for (const auto& e : s.nfs) {
            NfState st;
            st.nf = &e.nf;
            st.traffic = e.traffic;
            st.own_wss = e.nf.wss.bytes(e.traffic.flow_count);
            states_.push_back(st);
        }
    }

    SimulationResult solve() {
        // Start from uncontended capacities.
        for (std::size_t i = 0; i < states_.size(); ++i) {
            std::map<ResourceKind, double> caps;
            for (const auto& stg : states_[i].nf->stages) {
                const double t = stg.time_at(states_[i].traffic);
                if (stg.resource == ResourceKind::Memory)
                    caps[stg.resource] = memory_throughput(
                        {t, states_[i].own_wss, 0.0, 0.0, scenario_.llc_bytes}, scenario_.memory);
                else
                    caps[stg.resource] = 1.0 / (states_[i].nf->queue_count * t);
            }
            states_[i].throughput = offered_cap(*states_[i].nf, compose(states_[i].nf->pattern, caps));
        }

        int iterations = 0;
        double delta = 0.0;
        for (iterations = 1; iterations <= kMaxIterations; ++iterations) {
            update_caps(false);
            delta = 0.0;
            for (auto& st : states_) {
                const double next = offered_cap(*st.nf, compose(st.nf->pattern, st.caps));
                const double scale = std::max(st.throughput, 1e-9);
                delta = std::max(delta, std::abs(next - st.throughput) / scale);
                st.throughput = kDamping * st.throughput + (1.0 - kDamping) * next;
            }
            if (delta <= kTolerance) break;
        }
        if (iterations > kMaxIterations) {
            nlohmann::json diag = nlohmann::json::object();
            for (const auto& st : states_) diag[st.nf->name] = st.throughput;
            fail(ErrorKind::Convergence, "scenario fixed point did not converge",
                 {{"iterations", kMaxIterations}, {"last_delta", delta}, {"throughput", diag}});
        }

        update_caps(true);
        SimulationResult result;
        result.iterations = iterations;
        for (auto& st : states_) {
            st.throughput = offered_cap(*st.nf, compose(st.nf->pattern, st.caps));
            const auto& name = st.nf->name;
            result.per_nf_throughput[name] = st.throughput;
            result.per_nf_stage_throughput[name] = st.caps;
            auto bottleneck = st.caps.begin();
            for (auto it = st.caps.begin(); it != st.caps.end(); ++it)
                if (it->second < bottleneck->second) bottleneck = it;
            result.bottleneck[name] = bottleneck->first;
        }
        emit_counters(result);
        return result;
    }

private:
    double competitor_car(std::size_t i) const {
        double car = 0.0;
        for (std::size_t j = 0; j < states_.size(); ++j)
            if (j != i) car += states_[j].nf->intensity.refs_per_packet * states_[j].throughput;
        return car;
    }

    double competitor_wss(std::size_t i) const {
        double w = 0.0;
        for (std::size_t j = 0; j < states_.size(); ++j)
            if (j != i) w += states_[j].own_wss;
        return w;
    }

    void update_caps(bool discrete) {
        std::vector<std::map<ResourceKind, double>> caps(states_.size());
        for (std::size_t i = 0; i < states_.size(); ++i) {
            if (const auto* stg = states_[i].nf->stage(ResourceKind::Memory)) {
                caps[i][ResourceKind::Memory] =
                    memory_throughput({stg->time_at(states_[i].traffic), states_[i].own_wss, competitor_car(i),
                                       competitor_wss(i), scenario_.llc_bytes},
                                      scenario_.memory);
            }
        }
        for (auto kind : kResourceKinds) {
            if (!is_accelerator(kind)) continue;
            std::vector<std::size_t> users;
            for (std::size_t i = 0; i < states_.size(); ++i)
                if (states_[i].nf->uses(kind)) users.push_back(i);
            for (std::size_t target : users) caps[target][kind] = accelerator_capacity(kind, users, target, discrete);
        }
        for (std::size_t i = 0; i < states_.size(); ++i) states_[i].caps = std::move(caps[i]);
    }

    // Rate the target could sustain on the accelerator if it kept its queues
    // backlogged while competitors offer their current throughput.
    double accelerator_capacity(ResourceKind kind, const std::vector<std::size_t>& users, std::size_t target,
                                bool discrete) const {
        std::vector<RrQueueSpec> specs;
        std::size_t target_index = 0;
        double cycle = 0.0;
        for (std::size_t u : users) {
            const auto& st = states_[u];
            RrQueueSpec q;
            q.queue_count = st.nf->queue_count;
            q.per_request_time = st.nf->stage(kind)->time_at(st.traffic);
            if (u == target)
                target_index = specs.size();
            else
                q.offered_rate = st.throughput;
            cycle += q.queue_count * q.queue_count * q.per_request_time;
            specs.push_back(q);
        }
        if (!discrete) return rr_fluid_rates(specs)[target_index];
        const double horizon = static_cast<double>(scenario_.accel_rounds) * cycle;
        auto rr = simulate_accelerator_rr(specs, horizon);
        if (!rr.converged)
            fail(ErrorKind::Convergence, "accelerator throughput did not stabilize",
                 {{"resource", std::string(to_string(kind))},
                  {"nf", states_[target].nf->name},
                  {"first_half", rr.first_half},
                  {"second_half", rr.second_half}});
        return rr.throughput[target_index];
    }

    void emit_counters(SimulationResult& result) const {
        std::mt19937_64 rng(scenario_.seed);
        std::normal_distribution<double> noise(0.0, scenario_.noise_pct / 100.0);
        auto jitter = [&](double v) {
            if (scenario_.noise_pct <= 0.0) return v;
            return std::max(0.0, v * (1.0 + noise(rng)));
        };
        for (std::size_t i = 0; i < states_.size(); ++i) {
            const auto& st = states_[i];
            const auto& in = st.nf->intensity;
            const double car = in.refs_per_packet * st.throughput;
            const double miss = scenario_.memory.miss_ratio(st.own_wss + competitor_wss(i), scenario_.llc_bytes);
            CounterSnapshot c;
            c.irt = jitter(in.instructions_per_packet * st.throughput);
            c.ipc = jitter(in.instructions_per_packet * st.throughput / (kCoresPerNf * kCoreHz));
            c.l2crd = jitter(car * in.read_fraction);
            c.l2cwr = jitter(car * (1.0 - in.read_fraction));
            c.memrd = jitter(miss * car * in.read_fraction);
            c.memwr = jitter(miss * car * (1.0 - in.read_fraction));
            c.wss = jitter(st.own_wss);
            result.per_nf_counters[st.nf->name] = c;
        }
    }

    const ContentionScenario& scenario_;
    std::vector<NfState> states_;
};

}  // namespace

SimulationResult run_scenario(const ContentionScenario& scenario) {
    scenario.validate();
    return ScenarioSolver(scenario).solve();
}

SimulationResult run_solo(const NfSpec& nf, const TrafficProfile& traffic, const MemoryParams& memory,
                          double llc_bytes) {
    ContentionScenario s;
    s.nfs.push_back({nf, traffic});
    s.memory = memory;
    s.llc_bytes = llc_bytes;
    return run_scenario(s);
}

// ---------------------------------------------------------------------------
// JSON

void to_json(nlohmann::json& j, const NfStage& s) {
    j = {{"resource", std::string(to_string(s.resource))}, {"base_time", s.base_time}, {"traffic_coeffs", s.traffic_coeffs}};
}

void from_json(const nlohmann::json& j, NfStage& s) {
    s.resource = resource_kind_from_string(j.at("resource").get<std::string>());
    s.base_time = j.at("base_time").get<double>();
    s.traffic_coeffs = j.value("traffic_coeffs", std::map<std::string, double>{});
}

void to_json(nlohmann::json& j, const NfSpec& s) {
    j = {{"name", s.name},
         {"pattern", std::string(to_string(s.pattern))},
         {"stages", s.stages},
         {"queue_count", s.queue_count},
         {"offered_rate", s.offered_rate ? nlohmann::json(*s.offered_rate) : nlohmann::json(nullptr)},
         {"wss", {{"base_bytes", s.wss.base_bytes}, {"bytes_per_flow", s.wss.bytes_per_flow}, {"cap_bytes", s.wss.cap_bytes}}},
         {"intensity",
          {{"refs_per_packet", s.intensity.refs_per_packet},
           {"read_fraction", s.intensity.read_fraction},
           {"instructions_per_packet", s.intensity.instructions_per_packet}}}};
}

void from_json(const nlohmann::json& j, NfSpec& s) {
    s.name = j.at("name").get<std::string>();
    s.pattern = execution_pattern_from_string(j.value("pattern", std::string("pipeline")));
    s.stages = j.at("stages").get<std::vector<NfStage>>();
    s.queue_count = j.value("queue_count", 1);
    s.offered_rate.reset();
    if (j.contains("offered_rate") && !j.at("offered_rate").is_null()) s.offered_rate = j.at("offered_rate").get<double>();
    s.wss = {};
    if (j.contains("wss")) {
        const auto& w = j.at("wss");
        s.wss.base_bytes = w.value("base_bytes", 0.0);
        s.wss.bytes_per_flow = w.value("bytes_per_flow", 0.0);
        s.wss.cap_bytes = w.value("cap_bytes", 0.0);
    }
    s.intensity = {};
    if (j.contains("intensity")) {
        const auto& in = j.at("intensity");
        s.intensity.refs_per_packet = in.value("refs_per_packet", 0.0);
        s.intensity.read_fraction = in.value("read_fraction", 0.7);
        s.intensity.instructions_per_packet = in.value("instructions_per_packet", 1000.0);
    }
}

void to_json(nlohmann::json& j, const MemoryParams& p) {
    j = {{"miss_base", p.miss_base},       {"miss_sat", p.miss_sat}, {"ramp_lo", p.ramp_lo},
         {"ramp_hi", p.ramp_hi},           {"miss_penalty", p.miss_penalty}, {"car_knee", p.car_knee},
         {"car_slope", p.car_slope},       {"car_floor", p.car_floor}};
}

void from_json(const nlohmann::json& j, MemoryParams& p) {
    MemoryParams d;
    p.miss_base = j.value("miss_base", d.miss_base);
    p.miss_sat = j.value("miss_sat", d.miss_sat);
    p.ramp_lo = j.value("ramp_lo", d.ramp_lo);
    p.ramp_hi = j.value("ramp_hi", d.ramp_hi);
    p.miss_penalty = j.value("miss_penalty", d.miss_penalty);
    p.car_knee = j.value("car_knee", d.car_knee);
    p.car_slope = j.value("car_slope", d.car_slope);
    p.car_floor = j.value("car_floor", d.car_floor);
}

void to_json(nlohmann::json& j, const ContentionScenario& s) {
    nlohmann::json nfs = nlohmann::json::array();
    for (const auto& e : s.nfs) nfs.push_back({{"nf", e.nf}, {"traffic", e.traffic}});
    j = {{"seed", s.seed},
         {"llc_bytes", s.llc_bytes},
         {"memory", s.memory},
         {"noise_pct", s.noise_pct},
         {"accel_rounds", s.accel_rounds},
         {"nfs", nfs}};
}

void from_json(const nlohmann::json& j, ContentionScenario& s) {
    ContentionScenario d;
    s.seed = j.value("seed", d.seed);
    s.llc_bytes = j.value("llc_bytes", d.llc_bytes);
    s.memory = j.contains("memory") ? j.at("memory").get<MemoryParams>() : d.memory;
    s.noise_pct = j.value("noise_pct", d.noise_pct);
    s.accel_rounds = j.value("accel_rounds", d.accel_rounds);
    s.nfs.clear();
    for (const auto& e : j.at("nfs"))
        s.nfs.push_back({e.at("nf").get<NfSpec>(), e.contains("traffic") ? e.at("traffic").get<TrafficProfile>() : TrafficProfile{}});
}

void to_json(nlohmann::json& j, const SimulationResult& r) {
    nlohmann::json nfs = nlohmann::json::object();
    for (const auto& [name, tput] : r.per_nf_throughput) {
        nlohmann::json stages = nlohmann::json::object();
        for (const auto& [k, v] : r.per_nf_stage_throughput.at(name)) stages[std::string(to_string(k))] = v;
        nfs[name] = {{"throughput", tput},
                     {"counters", r.per_nf_counters.at(name)},
                     {"stage_throughput", stages},
                     {"bottleneck", std::string(to_string(r.bottleneck.at(name)))}};
    }
    j = {{"iterations", r.iterations}, {"nfs", nfs}};
}

void from_json(const nlohmann::json& j, SimulationResult& r) {
    r = {};
    r.iterations = j.value("iterations", 0);
    for (const auto& [name, v] : j.at("nfs").items()) {
        r.per_nf_throughput[name] = v.at("throughput").get<double>();
        r.per_nf_counters[name] = v.at("counters").get<CounterSnapshot>();
        for (const auto& [k, x] : v.at("stage_throughput").items())
            r.per_nf_stage_throughput[name][resource_kind_from_string(k)] = x.get<double>();
        r.bottleneck[name] = resource_kind_from_string(v.at("bottleneck").get<std::string>());
    }
}

}  // namespace nicperf::sim

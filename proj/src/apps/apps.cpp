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

#include "nicperf/apps.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "nicperf/catalog.hpp"
#include "nicperf/parallel.hpp"

namespace nicperf::apps {

void SlaSpec::validate() const {
    if (!(max_drop_ratio > 0.0 && max_drop_ratio <= 1.0))
        fail(ErrorKind::InvalidInput, "max_drop_ratio must be in (0, 1]", {{"max_drop_ratio", max_drop_ratio}});
}

std::string Resident::instance() const { return arrival.nf + "#" + std::to_string(id); }

std::size_t Fleet::nf_count() const {
    std::size_t n = 0;
    for (const auto& nic : nics) n += nic.residents.size();
    return n;
}

void Fleet::validate() const {
    if (core_budget < 1 || cores_per_nf < 1 || slots() < 1)
        fail(ErrorKind::InvalidInput, "fleet needs at least one NF slot per NIC",
             {{"core_budget", core_budget}, {"cores_per_nf", cores_per_nf}});
    for (std::size_t i = 0; i < nics.size(); ++i)
        if (nics[i].residents.size() > static_cast<std::size_t>(slots()))
            fail(ErrorKind::InvalidInput, "NIC holds more NFs than its core budget allows",
                 {{"nic", i}, {"residents", nics[i].residents.size()}, {"slots", slots()}});
}

std::string_view to_string(PlacementStrategy s) {
    switch (s) {
        case PlacementStrategy::Monopolization: return "monopolization";
        case PlacementStrategy::Greedy: return "greedy";
        case PlacementStrategy::ContentionAware: return "contention_aware";
    }
    return "unknown";
}

PlacementStrategy placement_strategy_from_string(std::string_view name) {
    for (auto s : {PlacementStrategy::Monopolization, PlacementStrategy::Greedy, PlacementStrategy::ContentionAware})
        if (name == to_string(s)) return s;
    fail(ErrorKind::InvalidInput, "unknown placement strategy '" + std::string(name) + "'");
}

namespace {

const predict::NfPredictor& bundle_for(const PredictorSet& predictors, const std::string& nf) {
    auto it = predictors.find(nf);
    if (it == predictors.end()) fail(ErrorKind::InvalidInput, "no predictor bundle for NF '" + nf + "'");
    return it->second;
}

}  // namespace

predict::ContentionDescriptor neighbours(const std::vector<Resident>& group, std::size_t target,
                                         const PredictorSet& predictors, const std::vector<double>& load) {
    require(load.empty() || load.size() == group.size(), "neighbours: one load per group member");
    const auto& self = bundle_for(predictors, group.at(target).arrival.nf);
    predict::ContentionDescriptor d;
    for (const auto& [kind, params] : self.accelerators) d.accelerators[kind];
    for (std::size_t j = 0; j < group.size(); ++j) {
        if (j == target) continue;
        const auto& other = bundle_for(predictors, group[j].arrival.nf);
        const auto& traffic = group[j].arrival.traffic;
        const double f = load.empty() ? 1.0 : load[j];
        auto c = other.own_counters(traffic);
        for (double* v : {&c.ipc, &c.irt, &c.l2crd, &c.l2cwr, &c.memrd, &c.memwr}) *v *= f;
        d.counters += c;
        for (const auto& [kind, params] : other.accelerators) {
            auto it = d.accelerators.find(kind);
            if (it == d.accelerators.end()) continue;
            it->second.push_back({params, traffic, f * other.solo(traffic)});
        }
    }
    return d;
}

std::vector<predict::Prediction> predict_group(const std::vector<Resident>& group, const PredictorSet& predictors,
                                               int rounds) {
    require(rounds >= 1, "predict_group: rounds must be >= 1");
    std::vector<double> load(group.size(), 1.0);
    std::vector<predict::Prediction> out(group.size());
    for (int round = 0; round < rounds; ++round) {
        for (std::size_t i = 0; i < group.size(); ++i) {
            const auto& a = group[i].arrival;
            out[i] = bundle_for(predictors, a.nf).predict(a.traffic, neighbours(group, i, predictors, load));
        }
        for (std::size_t i = 0; i < group.size(); ++i) load[i] = out[i].throughput / out[i].t_solo;
    }
    return out;
}

bool predicted_feasible(const std::vector<Resident>& group, const PredictorSet& predictors) {
    const auto predictions = predict_group(group, predictors);
    for (std::size_t i = 0; i < group.size(); ++i) {
        const auto& p = predictions[i];
        if (p.saturated || 1.0 - p.throughput / p.t_solo > group[i].arrival.sla.max_drop_ratio) return false;
    }
    return true;
}

Decision place(Fleet& fleet, const Arrival& arrival, PlacementStrategy strategy, const PredictorSet* predictors) {
    fleet.validate();
    arrival.sla.validate();
    const Resident resident{fleet.next_id, arrival};
    const auto slots = static_cast<std::size_t>(fleet.slots());

    std::optional<std::size_t> chosen;
    if (strategy == PlacementStrategy::Greedy) {
        std::size_t best_free = 0;
        for (std::size_t i = 0; i < fleet.nics.size(); ++i) {
            const auto free = slots - fleet.nics[i].residents.size();
            if (free > best_free) {
                best_free = free;
                chosen = i;
            }
        }
    } else if (strategy == PlacementStrategy::ContentionAware) {
        require(predictors != nullptr, "contention-aware placement needs predictor bundles");
        for (std::size_t i = 0; i < fleet.nics.size() && !chosen; ++i) {
            if (fleet.nics[i].residents.size() >= slots) continue;
            auto group = fleet.nics[i].residents;
            group.push_back(resident);
            if (predicted_feasible(group, *predictors)) chosen = i;
        }
    }

    Decision d;
    if (!chosen) {
        fleet.nics.emplace_back();
        chosen = fleet.nics.size() - 1;
        d.provisioned = true;
    }
    fleet.nics[*chosen].residents.push_back(resident);
    ++fleet.next_id;
    d.nic = *chosen;
    return d;
}

// ---------------------------------------------------------------------------

double Oracle::solo(const std::string& nf, const TrafficProfile& traffic) const {
    auto it = specs.find(nf);
    if (it == specs.end()) fail(ErrorKind::InvalidInput, "oracle has no spec for NF '" + nf + "'");
    return Testbed(it->second, env).solo(traffic);
}

std::vector<double> Oracle::drops(const std::vector<Resident>& group) const {
    require(!group.empty(), "oracle: empty group");
    sim::ContentionScenario s;
    s.seed = env.seed;
    s.llc_bytes = env.llc_bytes;
    s.memory = env.memory;
    s.noise_pct = env.noise_pct;
    s.accel_rounds = env.accel_rounds;
    for (const auto& r : group) {
        auto it = specs.find(r.arrival.nf);
        if (it == specs.end()) fail(ErrorKind::InvalidInput, "oracle has no spec for NF '" + r.arrival.nf + "'");
        auto spec = it->second;
        spec.name = r.instance();
        s.nfs.push_back({std::move(spec), r.arrival.traffic});
    }
    const auto result = sim::run_scenario(s);
    std::vector<double> out;
    for (const auto& r : group) {
        const double alone = solo(r.arrival.nf, r.arrival.traffic);
        out.push_back(1.0 - result.per_nf_throughput.at(r.instance()) / alone);
    }
    return out;
}

Oracle catalog_oracle(const TestbedEnvironment& env, int jobs) {
    Oracle o;
    for (const auto& name : sim::catalog_names()) o.specs.emplace(name, sim::catalog_nf(name));
    o.env = env;
    o.jobs = jobs;
    return o;
}

std::size_t optimal_nic_count(const std::vector<Resident>& residents, const Oracle& oracle, int slots) {
    const std::size_t n = residents.size();
    require(n <= 20, "exact optimum is limited to 20 NFs");
    if (n == 0) return 0;
    const std::uint32_t full = (std::uint32_t{1} << n) - 1;

    // Oracle feasibility of every group of up to `slots` NFs. A group is only
    // simulated when all its one-smaller subgroups passed: adding a neighbour
    // never helps anyone.
    std::vector<char> feasible(std::size_t{full} + 1, 0);
    for (std::uint32_t m = 1; m <= full; m <<= 1) feasible[m] = 1;
    for (int size = 2; size <= slots && size <= static_cast<int>(n); ++size) {
        std::vector<std::uint32_t> todo;
        for (std::uint32_t m = 1; m <= full; ++m) {
            if (std::popcount(m) != size) continue;
            bool ok = true;
            for (std::uint32_t rest = m; rest && ok; rest &= rest - 1)
                ok = feasible[m & ~(rest & -rest)];
            if (ok) todo.push_back(m);
        }
        const auto verdicts = parallel_map(todo.size(), oracle.jobs, [&](std::size_t i) {
            std::vector<Resident> group;
            for (std::size_t k = 0; k < n; ++k)
                if (todo[i] >> k & 1U) group.push_back(residents[k]);
            const auto d = oracle.drops(group);
            for (std::size_t k = 0; k < group.size(); ++k)
                if (d[k] > group[k].arrival.sla.max_drop_ratio) return char{0};
            return char{1};
        });
        for (std::size_t i = 0; i < todo.size(); ++i) feasible[todo[i]] = verdicts[i];
    }

    // Set partition into feasible groups; the group holding the lowest
    // remaining NF is chosen first so each partition is counted once.
    std::vector<std::uint8_t> best(std::size_t{full} + 1, 0xff);
    best[0] = 0;
    for (std::uint32_t m = 1; m <= full; ++m) {
        const std::uint32_t low = m & -m;
        const std::uint32_t rest = m ^ low;
        for (std::uint32_t sub = rest;; sub = (sub - 1) & rest) {
            const std::uint32_t group = sub | low;
            if (feasible[group] && best[m ^ group] != 0xff)
                best[m] = std::min<std::uint8_t>(best[m], static_cast<std::uint8_t>(best[m ^ group] + 1));
            if (sub == 0) break;
        }
    }
    return best[full];
}

PlacementReport evaluate_placement(const Fleet& fleet, const Oracle& oracle, std::size_t exact_limit) {
    fleet.validate();
    PlacementReport r;
    r.nfs = fleet.nf_count();
    r.nics = fleet.nics.size();
    const auto per_nic = parallel_map(fleet.nics.size(), oracle.jobs, [&](std::size_t i) {
        return fleet.nics[i].residents.empty() ? std::vector<double>{} : oracle.drops(fleet.nics[i].residents);
    });
    std::vector<Resident> all;
    for (std::size_t i = 0; i < fleet.nics.size(); ++i) {
        const auto& residents = fleet.nics[i].residents;
        for (std::size_t k = 0; k < residents.size(); ++k) {
            r.drops.push_back(per_nic[i][k]);
            if (per_nic[i][k] > residents[k].arrival.sla.max_drop_ratio) ++r.violations;
            all.push_back(residents[k]);
        }
    }
    r.violation_pct = r.nfs ? 100.0 * static_cast<double>(r.violations) / static_cast<double>(r.nfs) : 0.0;
    const auto slots = static_cast<std::size_t>(fleet.slots());
    if (r.nfs <= exact_limit) {
        r.optimum = optimal_nic_count(all, oracle, fleet.slots());
        r.optimum_exact = true;
    } else {
        r.optimum = (r.nfs + slots - 1) / slots;
    }
    r.wastage_pct = r.optimum ? 100.0 * (static_cast<double>(r.nics) - static_cast<double>(r.optimum)) /
                                    static_cast<double>(r.optimum)
                              : 0.0;
    return r;
}

std::vector<Arrival> random_arrivals(const PredictorSet& predictors, std::size_t count, std::uint64_t seed,
                                     double sla_min, double sla_max) {
    require(!predictors.empty(), "random arrivals need at least one bundle");
    require(sla_min > 0.0 && sla_min <= sla_max && sla_max <= 1.0, "invalid SLA range");
    std::vector<const predict::NfPredictor*> pool;
    for (const auto& [name, p] : predictors) pool.push_back(&p);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Arrival> out;
    for (std::size_t i = 0; i < count; ++i) {
        const auto& p = *pool[std::min(pool.size() - 1, static_cast<std::size_t>(u(rng) * pool.size()))];
        Arrival a;
        a.nf = p.nf_name;
        a.traffic = p.domain.defaults;
        for (const auto& range : p.domain.attributes) set(a.traffic, range.attribute, range.min + u(rng) * (range.max - range.min));
        a.sla.max_drop_ratio = sla_min + u(rng) * (sla_max - sla_min);
        out.push_back(std::move(a));
    }
    return out;
}

// ---------------------------------------------------------------------------

Diagnosis diagnose(const predict::NfPredictor& p, const TrafficProfile& traffic,
                   const predict::ContentionDescriptor& contention, double tie_tolerance) {
    const auto resources = p.resources();
    require(!resources.empty(), "diagnose: bundle has no resource model");
    const auto pred = p.predict(traffic, contention);
    Diagnosis d;
    if (resources.size() == 1) {
        d.bottleneck = resources.front();
        d.trivial = true;
        d.scores = pred.drops;
        return d;
    }

    if (p.pattern == ExecutionPattern::Pipeline) {
        d.scores = pred.drops;
        double top = -1.0;
        for (const auto& [k, v] : d.scores)
            if (v > top) {
                top = v;
                d.bottleneck = k;
            }
        std::vector<ResourceKind> tied;
        for (const auto& [k, v] : d.scores)
            if (top - v <= tie_tolerance * pred.t_solo) tied.push_back(k);
        if (tied.size() > 1) {
            // The stage whose capacity sits at the predicted throughput binds.
            d.bottleneck = ResourceKind::Memory;
            double lowest = pred.throughput * (1.0 + tie_tolerance);
            for (auto k : tied) {
                auto it = pred.accel_capacity.find(k);
                if (it != pred.accel_capacity.end() && it->second <= lowest) {
                    lowest = it->second;
                    d.bottleneck = k;
                }
            }
        }
        return d;
    }

    double accel_time = 0.0;
    for (const auto& [k, params] : p.accelerators) {
        accel_time += 1.0 / params.solo_rate(traffic);
        d.scores[k] = 1.0 / pred.accel_capacity.at(k);
    }
    if (p.memory) {
        const double drop = pred.drops.count(ResourceKind::Memory) ? pred.drops.at(ResourceKind::Memory) : 0.0;
        const double base = std::max(0.0, 1.0 / pred.t_solo - accel_time);
        d.scores[ResourceKind::Memory] = base + 1.0 / (pred.t_solo - drop) - 1.0 / pred.t_solo;
    }
    double top = -1.0;
    for (const auto& [k, v] : d.scores)
        if (v > top) {
            top = v;
            d.bottleneck = k;
        }
    return d;
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const SlaSpec& s) { j = {{"max_drop_ratio", s.max_drop_ratio}}; }

void from_json(const nlohmann::json& j, SlaSpec& s) {
    s.max_drop_ratio = j.at("max_drop_ratio").get<double>();
    s.validate();
}

void to_json(nlohmann::json& j, const Arrival& a) { j = {{"nf", a.nf}, {"traffic", a.traffic}, {"sla", a.sla}}; }

void from_json(const nlohmann::json& j, Arrival& a) {
    a.nf = j.at("nf").get<std::string>();
    a.traffic = j.contains("traffic") ? j.at("traffic").get<TrafficProfile>() : TrafficProfile{};
    a.traffic.validate();
    a.sla = j.at("sla").get<SlaSpec>();
}

void to_json(nlohmann::json& j, const Fleet& f) {
    nlohmann::json nics = nlohmann::json::array();
    for (const auto& nic : f.nics) {
        nlohmann::json residents = nlohmann::json::array();
        for (const auto& r : nic.residents) residents.push_back({{"id", r.id}, {"arrival", r.arrival}});
        nics.push_back({{"residents", residents}});
    }
    j = {{"format", "nicperf-fleet"},
         {"version", 1},
         {"core_budget", f.core_budget},
         {"cores_per_nf", f.cores_per_nf},
         {"next_id", f.next_id},
         {"nics", nics}};
}

void from_json(const nlohmann::json& j, Fleet& f) {
    if (j.value("format", std::string()) != "nicperf-fleet") fail(ErrorKind::InvalidInput, "not a fleet file");
    f = {};
    f.core_budget = j.value("core_budget", f.core_budget);
    f.cores_per_nf = j.value("cores_per_nf", f.cores_per_nf);
    f.next_id = j.value("next_id", std::size_t{0});
    for (const auto& nic : j.at("nics")) {
        Nic n;
        for (const auto& r : nic.at("residents")) n.residents.push_back({r.at("id").get<std::size_t>(), r.at("arrival").get<Arrival>()});
        f.nics.push_back(std::move(n));
    }
    f.validate();
}

void to_json(nlohmann::json& j, const PlacementReport& r) {
    j = {{"nfs", r.nfs},
         {"nics", r.nics},
         {"violations", r.violations},
         {"violation_pct", r.violation_pct},
         {"optimum", r.optimum},
         {"optimum_exact", r.optimum_exact},
         {"wastage_pct", r.wastage_pct},
         {"drops", r.drops}};
}

void to_json(nlohmann::json& j, const Diagnosis& d) {
    nlohmann::json scores = nlohmann::json::object();
    for (const auto& [k, v] : d.scores) scores[std::string(to_string(k))] = v;
    j = {{"bottleneck", std::string(to_string(d.bottleneck))}, {"trivial", d.trivial}, {"scores", scores}};
}

}  // namespace nicperf::apps

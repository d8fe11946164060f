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

#include "nicperf/profiler.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "nicperf/parallel.hpp"

namespace nicperf::profile {

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Full: return "full";
        case Strategy::Random: return "random";
        case Strategy::Adaptive: return "adaptive";
    }
    return "adaptive";
}

Strategy strategy_from_string(std::string_view name) {
    if (name == "full") return Strategy::Full;
    if (name == "random") return Strategy::Random;
    if (name == "adaptive") return Strategy::Adaptive;
    fail(ErrorKind::InvalidInput, "unknown profiling strategy '" + std::string(name) + "'");
}

std::vector<AttributeRange> ProfilingConfig::default_attributes() {
    return {{TrafficAttribute::FlowCount, 1.0, 65536.0},
            {TrafficAttribute::PacketSize, 64.0, 1500.0},
            {TrafficAttribute::Mtbr, 0.0, 1100.0}};
}

void ProfilingConfig::validate() const {
    require(quota >= 1, "quota must be >= 1");
    require(m >= 1, "m must be >= 1");
    require(quota >= m, "quota must be >= m");
    if (eps0) require(*eps0 > 0.0, "eps0 must be > 0");
    if (eps1) require(*eps1 > 0.0, "eps1 must be > 0");
    require(min_box_fraction > 0.0 && min_box_fraction <= 1.0, "min_box_fraction must be in (0, 1]");
    require(jobs >= 1, "jobs must be >= 1");
    defaults.validate();
    std::set<TrafficAttribute> seen;
    for (const auto& a : attributes) {
        require(seen.insert(a.attribute).second, "attribute listed twice");
        if (!(a.min < a.max))
            fail(ErrorKind::InvalidInput, "attribute range needs min < max",
                 {{"attribute", std::string(to_string(a.attribute))}, {"min", a.min}, {"max", a.max}});
        TrafficProfile lo = defaults, hi = defaults;
        set(lo, a.attribute, a.min);
        set(hi, a.attribute, a.max);
        lo.validate();
        hi.validate();
    }
}

// ---------------------------------------------------------------------------

Sampler::Sampler(const Testbed& testbed, std::size_t quota) : testbed_(testbed), quota_(quota) {}

bool Sampler::seen(const TrafficProfile& traffic, const ContentionLevel& level) const {
    return memo_.count(configuration_id(testbed_.name(), traffic, level)) != 0;
}

double Sampler::profile_one(const TrafficProfile& traffic, const ContentionLevel& level) {
    const auto id = configuration_id(testbed_.name(), traffic, level);
    if (auto it = memo_.find(id); it != memo_.end()) return it->second;
    if (count_ >= quota_)
        fail(ErrorKind::QuotaExhausted, "sample quota exhausted", {{"quota", quota_}, {"configuration", id}});
    Observation obs;
    try {
        obs = testbed_.observe(testbed_.scenario(traffic, level), id);
    } catch (const Error& e) {
        auto details = e.details();
        details["configuration"] = id;
        throw Error(e.kind(), e.what(), details);
    }
    ++count_;
    memo_[id] = obs.sample.observed_throughput;
    rows_.push_back(obs.sample);
    return obs.sample.observed_throughput;
}

std::size_t Sampler::profile_batch(const std::vector<std::pair<TrafficProfile, ContentionLevel>>& batch, int jobs) {
    std::vector<std::size_t> fresh;
    std::set<std::string> ids;
    std::size_t done = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto id = configuration_id(testbed_.name(), batch[i].first, batch[i].second);
        if (memo_.count(id) || ids.count(id)) {
            ++done;
            continue;
        }
        if (count_ + fresh.size() >= quota_) break;
        ids.insert(id);
        fresh.push_back(i);
        ++done;
    }
    auto obs = parallel_map(fresh.size(), jobs, [&](std::size_t k) {
        const auto& [traffic, level] = batch[fresh[k]];
        return testbed_.observe(testbed_.scenario(traffic, level), configuration_id(testbed_.name(), traffic, level));
    });
    for (auto& o : obs) {
        ++count_;
        memo_[o.sample.scenario_id] = o.sample.observed_throughput;
        rows_.push_back(std::move(o.sample));
    }
    return done;
}

ContentionLevel random_level(const ContentionSpace& space, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ContentionLevel c;
    if (space.memory) {
        c.mem_car = u(rng);
        c.mem_wss = u(rng);
    }
    if (space.regex) c.regex = u(rng);
    if (space.compression) c.compression = u(rng);
    return c;
}

double default_epsilon(const Testbed& testbed, const ProfilingConfig& config) {
    return 0.05 * testbed.solo(config.defaults);
}

namespace {

ProfilingDataset finish(const Testbed& testbed, const Sampler& sampler, Strategy strategy, const ProfilingConfig& config,
                        std::vector<TrafficAttribute> pruned) {
    ProfilingDataset d;
    d.nf = testbed.name();
    d.strategy = strategy;
    d.rows = sampler.rows();
    d.pruned_attributes = std::move(pruned);
    d.samples_used = sampler.count();
    d.config = config;
    return d;
}

class AdaptiveRun {
public:
    AdaptiveRun(const Testbed& testbed, const ProfilingConfig& config, double eps1)
        : config_(config), eps1_(eps1), sampler_(testbed, static_cast<std::size_t>(config.quota)), rng_(config.seed) {}

    Sampler& sampler() { return sampler_; }

    void run(const std::vector<AttributeRange>& active) {
        active_ = active;
        if (active_.empty()) return;
        std::vector<double> lo, hi;
        for (const auto& a : active_) {
            lo.push_back(a.min);
            hi.push_back(a.max);
        }
        range_profile(lo, hi);
    }

private:
    TrafficProfile at(const std::vector<double>& x) const {
        TrafficProfile t = config_.defaults;
        for (std::size_t i = 0; i < active_.size(); ++i) set(t, active_[i].attribute, x[i]);
        return t;
    }

    bool too_small(const std::vector<double>& lo, const std::vector<double>& hi) const {
        for (std::size_t i = 0; i < active_.size(); ++i)
            if (hi[i] - lo[i] >= config_.min_box_fraction * (active_[i].max - active_[i].min)) return false;
        return true;
    }

    void range_profile(const std::vector<double>& lo, const std::vector<double>& hi) {
        if (sampler_.exhausted()) return;
        const auto tlo = at(lo), thi = at(hi);
        const double s_lo = probe(tlo);
        if (sampler_.exhausted() && !sampler_.seen(thi, {})) return;
        const double s_hi = probe(thi);
        if (sampler_.exhausted()) return;
        if (std::abs(s_hi - s_lo) < eps1_ || too_small(lo, hi)) return;

        std::vector<double> mid(lo.size());
        for (std::size_t i = 0; i < lo.size(); ++i) mid[i] = 0.5 * (lo[i] + hi[i]);
        const auto tmid = at(mid);
        std::vector<std::pair<TrafficProfile, ContentionLevel>> batch;
        for (int k = 0; k < config_.m; ++k) batch.emplace_back(tmid, random_level(config_.contention, rng_));
        sampler_.profile_batch(batch, config_.jobs);

        if (config_.per_attribute_split) {
            // Halve only the widest attribute (relative to its range).
            std::size_t w = 0;
            double widest = -1.0;
            for (std::size_t i = 0; i < lo.size(); ++i) {
                const double rel = (hi[i] - lo[i]) / (active_[i].max - active_[i].min);
                if (rel > widest) {
                    widest = rel;
                    w = i;
                }
            }
            auto upper_lo = lo, lower_hi = hi;
            upper_lo[w] = mid[w];
            lower_hi[w] = mid[w];
            range_profile(upper_lo, hi);
            range_profile(lo, lower_hi);
            return;
        }
        range_profile(mid, hi);
        range_profile(lo, mid);
    }

    double probe(const TrafficProfile& t) {
        if (!sampler_.seen(t, {}) && sampler_.exhausted()) return 0.0;
        return sampler_.profile_one(t, {});
    }

    const ProfilingConfig& config_;
    double eps1_;
    Sampler sampler_;
    std::mt19937_64 rng_;
    std::vector<AttributeRange> active_;
};

// Cycles the visited traffic points (split midpoints first, else probes) with
// fresh contention draws until the quota is spent.
void fill_remaining(Sampler& sampler, const ProfilingConfig& config) {
    std::vector<TrafficProfile> points;
    auto add = [&](bool contended) {
        for (const auto& r : sampler.rows()) {
            if ((r.competitor_counters != CounterSnapshot{}) != contended) continue;
            if (std::find(points.begin(), points.end(), r.traffic) == points.end()) points.push_back(r.traffic);
        }
    };
    add(true);
    if (points.empty()) add(false);
    if (points.empty()) points.push_back(config.defaults);
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::size_t attempts = 0;
    const auto limit = static_cast<std::size_t>(config.quota) * 20;
    while (!sampler.exhausted() && attempts < limit) {
        std::vector<std::pair<TrafficProfile, ContentionLevel>> batch;
        const auto need = sampler.quota() - sampler.count();
        for (std::size_t k = 0; k < need; ++k, ++attempts)
            batch.emplace_back(points[attempts % points.size()], random_level(config.contention, rng));
        sampler.profile_batch(batch, config.jobs);
    }
}

}  // namespace

ProfilingDataset adaptive_profile(const Testbed& testbed, const ProfilingConfig& config) {
    config.validate();
    const double eps0 = config.eps0 ? *config.eps0 : default_epsilon(testbed, config);
    const double eps1 = config.eps1 ? *config.eps1 : default_epsilon(testbed, config);

    AdaptiveRun run(testbed, config, eps1);
    auto& sampler = run.sampler();
    std::vector<AttributeRange> active;
    std::vector<TrafficAttribute> pruned;
    for (const auto& a : config.attributes) {
        TrafficProfile lo = config.defaults, hi = config.defaults;
        set(lo, a.attribute, a.min);
        set(hi, a.attribute, a.max);
        double t_lo = 0.0, t_hi = 0.0;
        try {
            t_lo = sampler.profile_one(lo, {});
            t_hi = sampler.profile_one(hi, {});
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::QuotaExhausted) throw;
            fail(ErrorKind::QuotaExhausted, "quota does not cover the attribute pruning probes",
                 {{"quota", config.quota}, {"attributes", config.attributes.size()}});
        }
        if (std::abs(t_hi - t_lo) < eps0)
            pruned.push_back(a.attribute);
        else
            active.push_back(a);
    }
    run.run(active);
    if (config.fill_quota) fill_remaining(sampler, config);
    return finish(testbed, sampler, Strategy::Adaptive, config, std::move(pruned));
}

ProfilingDataset random_profile(const Testbed& testbed, const ProfilingConfig& config) {
    config.validate();
    Sampler sampler(testbed, static_cast<std::size_t>(config.quota));
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // Draw more candidates than needed; duplicates after rounding are skipped.
    std::size_t attempts = 0;
    while (!sampler.exhausted() && attempts < static_cast<std::size_t>(config.quota) * 20) {
        std::vector<std::pair<TrafficProfile, ContentionLevel>> batch;
        const auto need = static_cast<std::size_t>(config.quota) - sampler.count();
        for (std::size_t k = 0; k < need; ++k, ++attempts) {
            TrafficProfile t = config.defaults;
            for (const auto& a : config.attributes) set(t, a.attribute, a.min + u(rng) * (a.max - a.min));
            batch.emplace_back(t, random_level(config.contention, rng));
        }
        sampler.profile_batch(batch, config.jobs);
    }
    return finish(testbed, sampler, Strategy::Random, config, {});
}

std::vector<double> grid_values(const AttributeRange& range, int points) {
    require(points >= 1, "grid needs at least one point per attribute");
    std::vector<double> v;
    if (points == 1) return {0.5 * (range.min + range.max)};
    for (int i = 0; i < points; ++i) v.push_back(range.min + (range.max - range.min) * i / (points - 1));
    return v;
}

ProfilingDataset full_profile(const Testbed& testbed, const FullGridSpec& grid, const ProfilingConfig& config) {
    config.validate();
    require(grid.draws_per_cell >= 1, "draws_per_cell must be >= 1");
    std::vector<std::pair<TrafficAttribute, std::vector<double>>> axes;
    double size = grid.draws_per_cell;
    for (const auto& [attr, points] : grid.points) {
        auto range = std::find_if(config.attributes.begin(), config.attributes.end(),
                                  [&](const AttributeRange& r) { return r.attribute == attr; });
        if (range == config.attributes.end())
            fail(ErrorKind::InvalidInput, "grid attribute has no range", {{"attribute", std::string(to_string(attr))}});
        axes.emplace_back(attr, grid_values(*range, points));
        size *= points;
    }
    if (size > static_cast<double>(grid.hard_cap))
        fail(ErrorKind::GridTooLarge, "full grid exceeds the configured cap",
             {{"configurations", size}, {"hard_cap", grid.hard_cap}});

    std::mt19937_64 rng(config.seed);
    std::vector<std::pair<TrafficProfile, ContentionLevel>> batch;
    std::size_t cells = 1;
    for (const auto& axis : axes) cells *= axis.second.size();
    for (std::size_t cell = 0; cell < cells; ++cell) {
        TrafficProfile t = config.defaults;
        std::size_t rest = cell;
        for (std::size_t a = axes.size(); a-- > 0;) {
            const auto& values = axes[a].second;
            set(t, axes[a].first, values[rest % values.size()]);
            rest /= values.size();
        }
        for (int d = 0; d < grid.draws_per_cell; ++d) batch.emplace_back(t, random_level(config.contention, rng));
    }
    Sampler sampler(testbed, grid.hard_cap);
    sampler.profile_batch(batch, config.jobs);
    return finish(testbed, sampler, Strategy::Full, config, {});
}

// ---------------------------------------------------------------------------

void write_jsonl(std::ostream& out, const std::vector<ThroughputSample>& rows) {
    for (const auto& r : rows) out << nlohmann::json(r).dump() << '\n';
}

std::vector<ThroughputSample> read_jsonl(std::istream& in) {
    std::vector<ThroughputSample> rows;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            rows.push_back(nlohmann::json::parse(line).get<ThroughputSample>());
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::InvalidInput, "malformed dataset line", {{"line", n}, {"error", e.what()}});
        }
    }
    return rows;
}

void to_json(nlohmann::json& j, const ProfilingConfig& c) {
    nlohmann::json attrs = nlohmann::json::array();
    for (const auto& a : c.attributes)
        attrs.push_back({{"name", std::string(to_string(a.attribute))}, {"min", a.min}, {"max", a.max}});
    j = {{"attributes", attrs},
         {"quota", c.quota},
         {"m", c.m},
         {"seed", c.seed},
         {"min_box_fraction", c.min_box_fraction},
         {"per_attribute_split", c.per_attribute_split},
         {"fill_quota", c.fill_quota},
         {"contention", {{"memory", c.contention.memory}, {"regex", c.contention.regex}, {"compression", c.contention.compression}}},
         {"defaults", c.defaults}};
    j["eps0"] = c.eps0 ? nlohmann::json(*c.eps0) : nlohmann::json(nullptr);
    j["eps1"] = c.eps1 ? nlohmann::json(*c.eps1) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, ProfilingConfig& c) {
    ProfilingConfig d;
    if (j.contains("attributes")) {
        c.attributes.clear();
        for (const auto& a : j.at("attributes"))
            c.attributes.push_back({traffic_attribute_from_string(a.at("name").get<std::string>()),
                                    a.at("min").get<double>(), a.at("max").get<double>()});
    } else {
        c.attributes = d.attributes;
    }
    c.quota = j.value("quota", d.quota);
    c.m = j.value("m", d.m);
    c.seed = j.value("seed", d.seed);
    c.min_box_fraction = j.value("min_box_fraction", d.min_box_fraction);
    c.per_attribute_split = j.value("per_attribute_split", d.per_attribute_split);
    c.fill_quota = j.value("fill_quota", d.fill_quota);
    c.contention = d.contention;
    if (j.contains("contention")) {
        const auto& k = j.at("contention");
        c.contention.memory = k.value("memory", d.contention.memory);
        c.contention.regex = k.value("regex", d.contention.regex);
        c.contention.compression = k.value("compression", d.contention.compression);
    }
    c.defaults = j.contains("defaults") ? j.at("defaults").get<TrafficProfile>() : d.defaults;
    c.eps0 = j.contains("eps0") && !j.at("eps0").is_null() ? std::optional<double>(j.at("eps0").get<double>()) : std::nullopt;
    c.eps1 = j.contains("eps1") && !j.at("eps1").is_null() ? std::optional<double>(j.at("eps1").get<double>()) : std::nullopt;
    c.jobs = 1;
    c.validate();
}

nlohmann::json manifest(const ProfilingDataset& d) {
    std::vector<std::string> pruned;
    for (auto a : d.pruned_attributes) pruned.emplace_back(to_string(a));
    return {{"format", "nicperf-dataset"},
            {"version", 1},
            {"nf", d.nf},
            {"strategy", std::string(to_string(d.strategy))},
            {"config", d.config},
            {"pruned_attributes", pruned},
            {"samples_used", d.samples_used},
            {"rows", d.rows.size()}};
}

ProfilingDataset dataset_from(const nlohmann::json& m, std::vector<ThroughputSample> rows) {
    if (m.value("format", std::string()) != "nicperf-dataset") fail(ErrorKind::InvalidInput, "not a dataset manifest");
    ProfilingDataset d;
    d.nf = m.at("nf").get<std::string>();
    d.strategy = strategy_from_string(m.at("strategy").get<std::string>());
    d.config = m.at("config").get<ProfilingConfig>();
    for (const auto& a : m.at("pruned_attributes")) d.pruned_attributes.push_back(traffic_attribute_from_string(a.get<std::string>()));
    d.samples_used = m.at("samples_used").get<std::size_t>();
    if (m.at("rows").get<std::size_t>() != rows.size())
        fail(ErrorKind::InvalidInput, "dataset row count does not match its manifest",
             {{"manifest", m.at("rows")}, {"actual", rows.size()}});
    d.rows = std::move(rows);
    return d;
}

}  // namespace nicperf::profile

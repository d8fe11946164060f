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

#include "nicperf/predictor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>

#include "nicperf/parallel.hpp"

namespace nicperf::predict {

namespace {

constexpr TrafficAttribute kAllAttributes[] = {TrafficAttribute::FlowCount, TrafficAttribute::PacketSize,
                                               TrafficAttribute::Mtbr};

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        throw e.tagged(name);
    }
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

const profile::AttributeRange* find_range(const std::vector<profile::AttributeRange>& ranges, TrafficAttribute a) {
    for (const auto& r : ranges)
        if (r.attribute == a) return &r;
    return nullptr;
}

// Keeps both ends and evenly spread interior points.
std::vector<double> thin(const std::vector<double>& v, std::size_t limit) {
    if (v.size() <= limit || limit < 2) return v;
    std::vector<double> out;
    for (std::size_t i = 0; i < limit; ++i) {
        const auto idx = static_cast<std::size_t>(std::llround(static_cast<double>(i) * (v.size() - 1) / (limit - 1)));
        if (out.empty() || out.back() != v[idx]) out.push_back(v[idx]);
    }
    return out;
}

SoloTable solo_table(const Testbed& testbed, const profile::ProfilingDataset& dataset, const BuildConfig& config,
                     std::size_t& extra_runs) {
    const auto& pc = dataset.config;
    SoloTable table;
    std::map<std::string, double> known;
    for (const auto& r : dataset.rows)
        if (r.competitor_counters == CounterSnapshot{})
            known.emplace(configuration_id(testbed.name(), r.traffic, {}), r.observed_throughput);

    for (const auto& range : pc.attributes) {
        if (std::find(dataset.pruned_attributes.begin(), dataset.pruned_attributes.end(), range.attribute) !=
            dataset.pruned_attributes.end())
            continue;
        std::set<double> values;
        for (const auto& r : dataset.rows)
            if (r.competitor_counters == CounterSnapshot{}) values.insert(get(r.traffic, range.attribute));
        if (values.size() < 2)
            for (double v : profile::grid_values(range, 9)) {
                TrafficProfile t = pc.defaults;
                set(t, range.attribute, v);
                values.insert(get(t, range.attribute));
            }
        table.axes.push_back(range.attribute);
        table.coords.push_back(thin({values.begin(), values.end()}, config.max_axis_points));
    }

    std::size_t cells = 1;
    for (const auto& c : table.coords) cells *= c.size();
    std::vector<TrafficProfile> points(cells, pc.defaults);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        std::size_t rest = cell;
        for (std::size_t a = table.axes.size(); a-- > 0;) {
            set(points[cell], table.axes[a], table.coords[a][rest % table.coords[a].size()]);
            rest /= table.coords[a].size();
        }
    }
    auto runs = parallel_map(cells, config.profiling.jobs, [&](std::size_t i) {
        auto obs = testbed.corun(points[i], {});
        return std::make_pair(obs.sample.observed_throughput, obs.result.per_nf_counters.at(testbed.name()));
    });
    std::size_t missing = 0;
    for (std::size_t cell = 0; cell < cells; ++cell) {
        table.values.push_back(runs[cell].first);
        table.counters.push_back(runs[cell].second);
        if (!known.count(configuration_id(testbed.name(), points[cell], {}))) ++missing;
    }
    extra_runs = missing;
    table.validate();
    return table;
}

nlohmann::json drops_json(const std::map<ResourceKind, double>& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : m) j[std::string(to_string(k))] = v;
    return j;
}

// Grid indices and weights of the corners surrounding a point.
std::vector<std::pair<std::size_t, double>> corners(const SoloTable& table, const TrafficProfile& traffic) {
    const auto& axes = table.axes;
    const auto& coords = table.coords;
    if (axes.empty()) return {{0, 1.0}};
    std::vector<std::size_t> lo(axes.size());
    std::vector<double> w(axes.size());
    for (std::size_t a = 0; a < axes.size(); ++a) {
        const auto& c = coords[a];
        const double v = std::clamp(get(traffic, axes[a]), c.front(), c.back());
        if (c.size() == 1) {
            lo[a] = 0;
            w[a] = 0.0;
            continue;
        }
        auto hi = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), v) - c.begin());
        hi = std::clamp<std::size_t>(hi, 1, c.size() - 1);
        lo[a] = hi - 1;
        w[a] = (v - c[lo[a]]) / (c[hi] - c[lo[a]]);
    }
    std::vector<std::pair<std::size_t, double>> out;
    for (std::size_t corner = 0; corner < (std::size_t{1} << axes.size()); ++corner) {
        double weight = 1.0;
        std::size_t index = 0;
        for (std::size_t a = 0; a < axes.size(); ++a) {
            const bool up = (corner >> a) & 1U;
            if (up && coords[a].size() == 1) {
                weight = 0.0;
                break;
            }
            weight *= up ? w[a] : 1.0 - w[a];
            index = index * coords[a].size() + lo[a] + (up ? 1 : 0);
        }
        if (weight != 0.0) out.emplace_back(index, weight);
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

double SoloTable::operator()(const TrafficProfile& traffic) const {
    double out = 0.0;
    for (const auto& [i, w] : corners(*this, traffic)) out += w * values.at(i);
    return out;
}

CounterSnapshot SoloTable::counters_at(const TrafficProfile& traffic) const {
    std::array<double, CounterSnapshot::kSize> acc{};
    for (const auto& [i, w] : corners(*this, traffic)) {
        const auto c = counters.at(i).to_array();
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += w * c[k];
    }
    return {acc[0], acc[1], acc[2], acc[3], acc[4], acc[5], acc[6]};
}

void SoloTable::validate() const {
    require(axes.size() == coords.size(), "solo table: one coordinate list per axis");
    std::size_t cells = 1;
    for (const auto& c : coords) {
        require(!c.empty(), "solo table: empty axis");
        require(std::is_sorted(c.begin(), c.end()) && std::adjacent_find(c.begin(), c.end()) == c.end(),
                "solo table: axis coordinates must be strictly ascending");
        cells *= c.size();
    }
    if (values.size() != cells || counters.size() != cells)
        fail(ErrorKind::InvalidInput, "solo table: value count does not match the grid",
             {{"values", values.size()}, {"counters", counters.size()}, {"cells", cells}});
    for (double v : values)
        if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorKind::InvalidInput, "solo table: non-positive value", {{"value", v}});
}

bool TrafficDomain::contains(const TrafficProfile& traffic) const {
    for (auto a : kAllAttributes) {
        const double v = get(traffic, a);
        if (const auto* r = find_range(attributes, a)) {
            if (v < r->min && !near(v, r->min)) return false;
            if (v > r->max && !near(v, r->max)) return false;
        } else if (!near(v, get(defaults, a))) {
            return false;
        }
    }
    return true;
}

void TrafficDomain::check(const TrafficProfile& traffic) const {
    traffic.validate();
    for (auto a : kAllAttributes) {
        const double v = get(traffic, a);
        const std::string name(to_string(a));
        if (const auto* r = find_range(attributes, a)) {
            if ((v < r->min && !near(v, r->min)) || (v > r->max && !near(v, r->max)))
                fail(ErrorKind::OutOfDomain, "traffic outside the profiled box",
                     {{"attribute", name}, {"value", v}, {"min", r->min}, {"max", r->max}});
        } else if (!near(v, get(defaults, a))) {
            fail(ErrorKind::OutOfDomain, "attribute was fixed during profiling",
                 {{"attribute", name}, {"value", v}, {"profiled_value", get(defaults, a)}});
        }
    }
}

// ---------------------------------------------------------------------------

std::vector<ResourceKind> NfPredictor::resources() const {
    std::vector<ResourceKind> out;
    if (memory) out.push_back(ResourceKind::Memory);
    for (const auto& [k, p] : accelerators) out.push_back(k);
    return out;
}

double NfPredictor::solo(const TrafficProfile& traffic) const {
    domain.check(traffic);
    return t_solo(traffic);
}

CounterSnapshot NfPredictor::own_counters(const TrafficProfile& traffic) const {
    domain.check(traffic);
    return t_solo.counters_at(traffic);
}

Prediction NfPredictor::predict(const TrafficProfile& traffic, const ContentionDescriptor& contention) const {
    Prediction out;
    out.t_solo = solo(traffic);
    out.pattern = pattern;

    compose::PerResourceDrops d;
    d.t_solo = out.t_solo;
    if (memory) {
        const double base = memory->predict(mem::make_features(CounterSnapshot{}, traffic));
        const double loaded = memory->predict(mem::make_features(contention.counters, traffic));
        d.drops[ResourceKind::Memory] = std::max(0.0, base - loaded);
    }
    for (const auto& [kind, params] : accelerators) {
        auto it = contention.accelerators.find(kind);
        if (it == contention.accelerators.end())
            fail(ErrorKind::InvalidInput, "missing contention descriptor for a modeled accelerator",
                 {{"resource", std::string(to_string(kind))}});
        const double c_solo = params.solo_rate(traffic);
        const double c = accel::predict_throughput(params, traffic, it->second);
        out.accel_capacity[kind] = c;
        double drop = 0.0;
        if (pattern == ExecutionPattern::Pipeline) {
            drop = std::min(out.t_solo, c_solo) - std::min(out.t_solo, c);
        } else {
            // Time per packet outside this accelerator stays fixed.
            const double other = std::max(0.0, 1.0 / out.t_solo - 1.0 / c_solo);
            drop = 1.0 / (other + 1.0 / c_solo) - 1.0 / (other + 1.0 / c);
        }
        d.drops[kind] = std::max(0.0, drop);
    }
    if (d.drops.empty()) {
        out.throughput = out.t_solo;
        return out;
    }
    auto clamped = compose::clamp(d);
    out.saturated = clamped.saturated;
    out.drops = clamped.drops.drops;
    out.throughput = compose::compose(pattern, clamped.drops);
    return out;
}

NfPredictor NfPredictor::memory_only() const {
    NfPredictor p = *this;
    p.accelerators.clear();
    p.pattern = ExecutionPattern::RunToCompletion;
    p.metadata["ablation"] = "memory_only";
    return p;
}

nlohmann::json NfPredictor::to_json() const {
    nlohmann::json attrs = nlohmann::json::array();
    for (const auto& a : domain.attributes)
        attrs.push_back({{"name", std::string(to_string(a.attribute))}, {"min", a.min}, {"max", a.max}});
    std::vector<std::string> axes;
    for (auto a : t_solo.axes) axes.emplace_back(to_string(a));
    nlohmann::json models = nlohmann::json::object();
    if (memory) models["memory"] = memory->to_json();
    for (const auto& [k, p] : accelerators) models[std::string(to_string(k))] = p;
    return {{"format", "nicperf-bundle"},
            {"version", 1},
            {"nf", nf_name},
            {"pattern", std::string(to_string(pattern))},
            {"domain", {{"attributes", attrs}, {"defaults", domain.defaults}}},
            {"t_solo", {{"axes", axes}, {"coords", t_solo.coords}, {"values", t_solo.values}, {"counters", t_solo.counters}}},
            {"resource_models", models},
            {"metadata", metadata}};
}

NfPredictor NfPredictor::from_json(const nlohmann::json& j) {
    if (j.value("format", std::string()) != "nicperf-bundle") fail(ErrorKind::InvalidInput, "not a predictor bundle");
    if (j.value("version", 0) != 1)
        fail(ErrorKind::InvalidInput, "unsupported bundle version", {{"version", j.value("version", 0)}});
    try {
        NfPredictor p;
        p.nf_name = j.at("nf").get<std::string>();
        p.pattern = execution_pattern_from_string(j.at("pattern").get<std::string>());
        for (const auto& a : j.at("domain").at("attributes"))
            p.domain.attributes.push_back({traffic_attribute_from_string(a.at("name").get<std::string>()),
                                           a.at("min").get<double>(), a.at("max").get<double>()});
        p.domain.defaults = j.at("domain").at("defaults").get<TrafficProfile>();
        for (const auto& a : j.at("t_solo").at("axes"))
            p.t_solo.axes.push_back(traffic_attribute_from_string(a.get<std::string>()));
        p.t_solo.coords = j.at("t_solo").at("coords").get<std::vector<std::vector<double>>>();
        p.t_solo.values = j.at("t_solo").at("values").get<std::vector<double>>();
        p.t_solo.counters = j.at("t_solo").at("counters").get<std::vector<CounterSnapshot>>();
        p.t_solo.validate();
        for (const auto& [name, model] : j.at("resource_models").items()) {
            const auto kind = resource_kind_from_string(name);
            if (kind == ResourceKind::Memory)
                p.memory = mem::GbrModel::from_json(model);
            else
                p.accelerators[kind] = model.get<accel::AccelModelParams>();
        }
        p.metadata = j.at("metadata");
        return p;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::InvalidInput, "malformed predictor bundle", {{"error", e.what()}});
    }
}

// ---------------------------------------------------------------------------

profile::ProfilingConfig BuildConfig::default_profiling() {
    profile::ProfilingConfig c;
    c.fill_quota = true;
    return c;
}

NfPredictor build(const Testbed& testbed, const BuildConfig& config) {
    auto dataset = stage("profile", [&] { return profile::adaptive_profile(testbed, config.profiling); });
    return build(testbed, dataset, config);
}

NfPredictor build(const Testbed& testbed, const profile::ProfilingDataset& dataset, const BuildConfig& config) {
    if (dataset.nf != testbed.name())
        fail(ErrorKind::InvalidInput, "dataset belongs to another NF", {{"dataset_nf", dataset.nf}, {"nf", testbed.name()}});
    const auto& pc = dataset.config;
    const auto defaults = pc.defaults;

    NfPredictor p;
    p.nf_name = testbed.name();
    p.domain = {pc.attributes, defaults};
    p.memory = stage("train", [&] { return mem::train(dataset.rows, config.gbr); });

    const double solo_default = testbed.solo(defaults);
    const double eps0 = pc.eps0 ? *pc.eps0 : 0.05 * solo_default;

    nlohmann::json touch = nlohmann::json::object();
    std::vector<ResourceKind> touched;
    stage("touch", [&] {
        for (auto kind : config.candidate_accelerators) {
            require(is_accelerator(kind), "touch detection: accelerator expected");
            ContentionLevel level;
            (kind == ResourceKind::RegexAccel ? level.regex : level.compression) = 1.0;
            const double drop = solo_default - testbed.corun(defaults, level).sample.observed_throughput;
            touch[std::string(to_string(kind))] = drop;
            if (drop > eps0) touched.push_back(kind);
        }
        return 0;
    });

    nlohmann::json inference = nlohmann::json::object();
    for (auto kind : touched) {
        accel::InferenceConfig ic;
        ic.resource = kind;
        ic.base_traffic = defaults;
        const auto report = stage("infer", [&] { return accel::infer_params(testbed, ic); });
        p.accelerators[kind] = report.params;
        inference[std::string(to_string(kind))] = {{"queue_count_estimate", report.queue_count_estimate},
                                                   {"solo_rate", report.solo_rate},
                                                   {"fit_r2", report.fit_r2},
                                                   {"warning", report.warning ? nlohmann::json(*report.warning) : nlohmann::json(nullptr)}};
    }

    nlohmann::json pattern_meta = {{"detected", false}};
    if (!touched.empty()) {
        auto dc = config.detect;
        dc.accelerators = touched;
        dc.traffic = defaults;
        const auto report = stage("detect", [&] { return compose::detect_pattern(testbed, dc); });
        p.pattern = report.pattern;
        pattern_meta = {{"detected", true},
                        {"pipeline_residual", report.pipeline_residual},
                        {"rtc_residual", report.rtc_residual}};
    }

    std::size_t extra = 0;
    p.t_solo = stage("solo_table", [&] { return solo_table(testbed, dataset, config, extra); });

    p.metadata = {{"version", std::string(kVersion)},
                  {"dataset", profile::manifest(dataset)},
                  {"eps0", eps0},
                  {"touch_drops", touch},
                  {"inference", inference},
                  {"pattern", pattern_meta},
                  {"solo_table_extra_runs", extra}};
    return p;
}

accel::Competitor bench_competitor(ResourceKind kind, double level, const TestbedEnvironment& env) {
    require(is_accelerator(kind), "bench competitor: accelerator expected");
    require(level > 0.0 && level <= 1.0, "bench competitor: level must be in (0, 1]");
    const auto& cfg = kind == ResourceKind::RegexAccel ? env.regex_bench : env.compression_bench;
    accel::Competitor c;
    c.params = {kind, cfg.queue_count, cfg.t0, cfg.a, accel::default_attribute(kind)};
    c.traffic = env.bench_traffic;
    // The bench paces itself against its solo rate at default traffic.
    if (level < 1.0) c.offered_rate = level * c.params.solo_rate(TrafficProfile{});
    return c;
}

ContentionDescriptor describe(const Observation& observation, const ContentionLevel& level, const TestbedEnvironment& env,
                              const NfPredictor& predictor) {
    ContentionDescriptor d;
    d.counters = observation.sample.competitor_counters;
    for (const auto& [kind, params] : predictor.accelerators) {
        auto& list = d.accelerators[kind];
        const double l = kind == ResourceKind::RegexAccel ? level.regex : level.compression;
        if (l > 0.0) list.push_back(bench_competitor(kind, l, env));
    }
    return d;
}

std::vector<TestPoint> random_test_grid(const TrafficDomain& domain, const profile::ContentionSpace& space,
                                        std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<TestPoint> points(count);
    for (auto& p : points) {
        p.traffic = domain.defaults;
        for (const auto& r : domain.attributes) set(p.traffic, r.attribute, r.min + u(rng) * (r.max - r.min));
        p.level = profile::random_level(space, rng);
    }
    return points;
}

Evaluation evaluate(const NfPredictor& predictor, const Testbed& testbed, const std::vector<TestPoint>& points,
                    int jobs) {
    require(!points.empty(), "evaluate: empty test grid");
    Evaluation e;
    e.points = points;
    const auto pairs = parallel_map(points.size(), jobs, [&](std::size_t i) {
        const auto& p = points[i];
        const auto observation = testbed.corun(p.traffic, p.level);
        const auto contention = describe(observation, p.level, testbed.environment(), predictor);
        return std::pair{predictor.predict(p.traffic, contention).throughput, observation.sample.observed_throughput};
    });
    for (const auto& [predicted, observed] : pairs) {
        e.predicted.push_back(predicted);
        e.observed.push_back(observed);
    }
    e.mape = mape(e.predicted, e.observed);
    e.acc5 = band_accuracy(e.predicted, e.observed, 0.05);
    e.acc10 = band_accuracy(e.predicted, e.observed, 0.10);
    return e;
}

void to_json(nlohmann::json& j, const TestPoint& p) { j = {{"traffic", p.traffic}, {"level", p.level}}; }

void from_json(const nlohmann::json& j, TestPoint& p) {
    p.traffic = j.at("traffic").get<TrafficProfile>();
    p.level = j.value("level", ContentionLevel{});
}

void to_json(nlohmann::json& j, const ContentionDescriptor& d) {
    nlohmann::json acc = nlohmann::json::object();
    for (const auto& [k, list] : d.accelerators) acc[std::string(to_string(k))] = list;
    j = {{"counters", d.counters}, {"accelerators", acc}};
}

void from_json(const nlohmann::json& j, ContentionDescriptor& d) {
    d = {};
    d.counters = j.value("counters", CounterSnapshot{});
    if (j.contains("accelerators"))
        for (const auto& [name, list] : j.at("accelerators").items()) {
            const auto kind = resource_kind_from_string(name);
            require(is_accelerator(kind), "contention descriptor: accelerator expected");
            d.accelerators[kind] = list.get<std::vector<accel::Competitor>>();
        }
}

void to_json(nlohmann::json& j, const Prediction& p) {
    j = {{"throughput", p.throughput},
         {"t_solo", p.t_solo},
         {"pattern", std::string(to_string(p.pattern))},
         {"saturated", p.saturated},
         {"drops", drops_json(p.drops)},
         {"accel_capacity", drops_json(p.accel_capacity)}};
}

}  // namespace nicperf::predict

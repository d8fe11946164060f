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

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "io.hpp"
#include "manifest.hpp"
#include "nicperf/apps.hpp"
#include "nicperf/catalog.hpp"
#include "nicperf/composer.hpp"
#include "nicperf/error.hpp"
#include "nicperf/parallel.hpp"
#include "nicperf/predictor.hpp"
#include "nicperf/profiler.hpp"
#include "nicperf/simulator.hpp"

namespace nicperf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

TestbedEnvironment load_env(const Common& c, std::vector<std::string>& inputs) {
    TestbedEnvironment env;
    if (c.env) {
        env = read_json(*c.env).get<TestbedEnvironment>();
        inputs.push_back(*c.env);
    }
    return env;
}

/// A catalog name, or a path to an NF spec JSON file.
sim::NfSpec load_nf(const std::string& nf, std::vector<std::string>& inputs) {
    if (fs::is_regular_file(nf)) {
        inputs.push_back(nf);
        auto spec = read_json(nf).get<sim::NfSpec>();
        spec.validate();
        return spec;
    }
    return sim::catalog_nf(nf);
}

/// The NF a grid or sweep runs against; must be the one the bundle models.
sim::NfSpec bundle_target(const predict::NfPredictor& bundle, const json& j, std::vector<std::string>& inputs) {
    auto nf = load_nf(j.value("nf", bundle.nf_name), inputs);
    if (nf.name != bundle.nf_name)
        fail(ErrorKind::InvalidInput, "input targets another NF than the bundle", {{"input_nf", nf.name}, {"bundle_nf", bundle.nf_name}});
    return nf;
}

predict::NfPredictor load_bundle(const std::string& path, std::vector<std::string>& inputs) {
    inputs.push_back(path);
    return predict::NfPredictor::from_json(read_json(path));
}

/// The environment a bundle was trained under, unless --env overrides it.
TestbedEnvironment bundle_env(const Common& c, const predict::NfPredictor& p, std::vector<std::string>& inputs) {
    if (c.env || !p.metadata.contains("environment")) return load_env(c, inputs);
    return p.metadata.at("environment").get<TestbedEnvironment>();
}

std::map<std::string, std::uint64_t> seeds_of(std::uint64_t seed) { return {{"seed", seed}}; }

}  // namespace

int simulate(const Common& c, const std::string& scenario_path, const std::string& out) {
    auto j = read_json(scenario_path);
    if (j.contains("nfs"))
        for (auto& e : j.at("nfs"))
            if (e.contains("nf") && e.at("nf").is_string()) e["nf"] = sim::catalog_nf(e.at("nf").get<std::string>());
    auto scenario = j.get<sim::ContentionScenario>();
    if (c.seed) scenario.seed = *c.seed;
    const auto result = sim::run_scenario(scenario);
    write_json(out, result);
    write_sidecar(out, {"simulate", std::nullopt, seeds_of(scenario.seed), {scenario_path}, {out}});
    return 0;
}

int profile(const Common& c, const std::string& nf, const std::string& strategy_name,
            const std::optional<std::string>& config_path, const std::string& out) {
    std::vector<std::string> inputs;
    const auto strategy = profile::strategy_from_string(strategy_name);
    json cfg = predict::BuildConfig::default_profiling();
    if (config_path) {
        inputs.push_back(*config_path);
        cfg.merge_patch(read_json(*config_path));
    }
    auto config = cfg.get<profile::ProfilingConfig>();
    if (c.seed) config.seed = *c.seed;
    config.jobs = c.jobs;
    const auto env = load_env(c, inputs);
    const Testbed testbed(load_nf(nf, inputs), env);

    profile::ProfilingDataset d;
    switch (strategy) {
        case profile::Strategy::Adaptive: d = profile::adaptive_profile(testbed, config); break;
        case profile::Strategy::Random: d = profile::random_profile(testbed, config); break;
        case profile::Strategy::Full: d = profile::full_profile(testbed, {}, config); break;
    }
    std::ostringstream rows;
    profile::write_jsonl(rows, d.rows);
    write_text(out, rows.str());
    auto extra = profile::manifest(d);
    extra["environment"] = env;
    write_sidecar(out, {"profile", config_path, seeds_of(config.seed), inputs, {out}}, extra);
    return 0;
}

int train(const Common& c, const std::string& nf, const std::string& dataset_path, const std::string& out) {
    std::vector<std::string> inputs{dataset_path, sidecar_path(dataset_path)};
    const auto sidecar = read_json(sidecar_path(dataset_path));
    std::istringstream rows(read_text(dataset_path));
    const auto dataset = profile::dataset_from(sidecar, profile::read_jsonl(rows));

    TestbedEnvironment env;
    if (c.env)
        env = load_env(c, inputs);
    else if (sidecar.contains("environment"))
        env = sidecar.at("environment").get<TestbedEnvironment>();
    const Testbed testbed(load_nf(nf, inputs), env);
    if (dataset.nf != testbed.name())
        fail(ErrorKind::InvalidInput, "dataset was profiled on a different NF",
             {{"dataset", dataset.nf}, {"nf", testbed.name()}});

    predict::BuildConfig config;
    config.profiling = dataset.config;
    config.profiling.jobs = c.jobs;
    if (c.seed) config.profiling.seed = *c.seed;
    auto bundle = predict::build(testbed, dataset, config);
    bundle.metadata["environment"] = env;
    write_json(out, bundle.to_json());
    write_sidecar(out, {"train", std::nullopt, seeds_of(config.profiling.seed), inputs, {out}});
    return 0;
}

int predict(const Common&, const std::string& bundle_path, const std::string& traffic_path,
            const std::string& contention_path, const std::optional<std::string>& out) {
    std::vector<std::string> inputs;
    const auto bundle = load_bundle(bundle_path, inputs);
    const auto traffic = read_json(traffic_path).get<TrafficProfile>();
    const auto contention = read_json(contention_path).get<predict::ContentionDescriptor>();
    inputs.insert(inputs.end(), {traffic_path, contention_path});
    const json result = {{"nf", bundle.nf_name}, {"traffic", traffic}, {"prediction", bundle.predict(traffic, contention)}};
    if (!out) {
        std::cout << result.dump(2) << "\n";
        return 0;
    }
    write_json(*out, result);
    write_sidecar(*out, {"predict", std::nullopt, {}, inputs, {*out}});
    return 0;
}

int evaluate(const Common& c, const std::string& bundle_path, const std::string& grid_path, const std::string& out,
             const std::optional<std::string>& detail) {
    std::vector<std::string> inputs;
    const auto bundle = load_bundle(bundle_path, inputs);
    inputs.push_back(grid_path);
    const auto grid = read_json(grid_path);
    const auto env = bundle_env(c, bundle, inputs);
    const Testbed testbed(bundle_target(bundle, grid, inputs), env);

    std::uint64_t seed = c.seed.value_or(0);
    std::vector<predict::TestPoint> points;
    if (grid.contains("points")) {
        points = grid.at("points").get<std::vector<predict::TestPoint>>();
    } else if (grid.contains("random")) {
        const auto& r = grid.at("random");
        if (!c.seed) seed = r.value("seed", std::uint64_t{0});
        profile::ContentionSpace space{r.value("memory", true), r.value("regex", false), r.value("compression", false)};
        points = predict::random_test_grid(bundle.domain, space, r.at("count").get<std::size_t>(), seed);
    } else {
        fail(ErrorKind::InvalidInput, "test grid needs 'points' or 'random'");
    }

    std::vector<std::pair<std::string, predict::Evaluation>> variants{
        {"full", predict::evaluate(bundle, testbed, points, c.jobs)}};
    if (!bundle.accelerators.empty())
        variants.emplace_back("memory_only", predict::evaluate(bundle.memory_only(), testbed, points, c.jobs));

    std::vector<CsvRow> rows;
    for (const auto& [name, e] : variants)
        rows.push_back({bundle.nf_name, name, std::to_string(e.points.size()), fmt(e.mape, 6), fmt(e.acc5, 6),
                        fmt(e.acc10, 6)});
    write_text(out, render_csv({"nf", "variant", "points", "mape_pct", "acc5_pct", "acc10_pct"}, rows));
    std::vector<std::string> outputs{out};

    if (detail) {
        CsvRow header{"index", "flow_count", "packet_size", "mtbr", "mem_car", "mem_wss", "regex", "compression", "observed"};
        for (const auto& [name, e] : variants) header.push_back("predicted_" + name);
        std::vector<CsvRow> lines;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& p = points[i];
            CsvRow r{std::to_string(i),          std::to_string(p.traffic.flow_count), std::to_string(p.traffic.packet_size),
                     fmt(p.traffic.mtbr),        fmt(p.level.mem_car),                 fmt(p.level.mem_wss),
                     fmt(p.level.regex),         fmt(p.level.compression),             fmt(variants[0].second.observed[i])};
            for (const auto& [name, e] : variants) r.push_back(fmt(e.predicted[i]));
            lines.push_back(std::move(r));
        }
        write_text(*detail, render_csv(header, lines));
        outputs.push_back(*detail);
    }
    write_sidecar(out, {"evaluate", std::nullopt, seeds_of(seed), inputs, outputs});
    return 0;
}

int schedule(const Common& c, const std::string& arrivals_path, const std::string& strategy_name,
             const std::vector<std::string>& bundle_paths, const std::string& out) {
    std::vector<std::string> inputs{arrivals_path};
    const auto strategy = apps::placement_strategy_from_string(strategy_name);
    apps::PredictorSet predictors;
    for (const auto& path : bundle_paths) {
        auto b = load_bundle(path, inputs);
        const auto name = b.nf_name;
        predictors.emplace(name, std::move(b));
    }
    const auto spec = read_json(arrivals_path);
    apps::Fleet fleet;
    fleet.core_budget = spec.value("core_budget", fleet.core_budget);
    fleet.cores_per_nf = spec.value("cores_per_nf", fleet.cores_per_nf);

    std::uint64_t seed = c.seed.value_or(0);
    std::vector<apps::Arrival> arrivals;
    if (spec.contains("arrivals")) {
        arrivals = spec.at("arrivals").get<std::vector<apps::Arrival>>();
    } else if (spec.contains("random")) {
        const auto& r = spec.at("random");
        if (!c.seed) seed = r.value("seed", std::uint64_t{0});
        require(!predictors.empty(), "random arrivals are drawn over the given bundles; pass --bundle");
        arrivals = apps::random_arrivals(predictors, r.at("count").get<std::size_t>(), seed, r.value("sla_min", 0.05),
                                         r.value("sla_max", 0.20));
    } else {
        fail(ErrorKind::InvalidInput, "arrivals file needs 'arrivals' or 'random'");
    }
    for (const auto& a : arrivals) apps::place(fleet, a, strategy, predictors.empty() ? nullptr : &predictors);
    write_json(out, fleet);
    write_sidecar(out, {"schedule", std::nullopt, seeds_of(seed), inputs, {out}},
                  {{"strategy", std::string(apps::to_string(strategy))}});
    return 0;
}

int schedule_eval(const Common& c, const std::string& fleet_path, const std::optional<std::string>& out,
                  std::size_t exact_limit) {
    std::vector<std::string> inputs{fleet_path};
    const auto fleet = read_json(fleet_path).get<apps::Fleet>();
    const auto oracle = apps::catalog_oracle(load_env(c, inputs), c.jobs);
    const json report = apps::evaluate_placement(fleet, oracle, exact_limit);
    if (!out) {
        std::cout << report.dump(2) << "\n";
        return 0;
    }
    write_json(*out, report);
    write_sidecar(*out, {"schedule-eval", std::nullopt, {}, inputs, {*out}});
    return 0;
}

namespace {

std::vector<double> sweep_values(const json& w) {
    if (w.contains("values")) return w.at("values").get<std::vector<double>>();
    const auto& r = w.at("range");
    const int n = r.at("points").get<int>();
    require(n >= 2, "sweep range needs at least 2 points");
    const double lo = r.at("min").get<double>(), hi = r.at("max").get<double>();
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
    return v;
}

/// Relative gap between the two tightest stages (0 for single-stage NFs).
double stage_gap(const std::map<ResourceKind, double>& stages) {
    std::vector<double> caps;
    for (const auto& [k, v] : stages) caps.push_back(v);
    if (caps.size() < 2) return 0.0;
    std::sort(caps.begin(), caps.end());
    return (caps[1] - caps[0]) / caps[0];
}

}  // namespace

int diagnose(const Common& c, const std::string& bundle_path, const std::string& sweep_path,
             const std::optional<std::string>& out) {
    std::vector<std::string> inputs;
    const auto bundle = load_bundle(bundle_path, inputs);
    inputs.push_back(sweep_path);
    const auto w = read_json(sweep_path);
    const auto env = bundle_env(c, bundle, inputs);
    const Testbed testbed(bundle_target(bundle, w, inputs), env);
    const auto attribute = traffic_attribute_from_string(w.value("attribute", std::string("mtbr")));
    const auto base = w.value("traffic", bundle.domain.defaults);
    const auto level = w.value("level", ContentionLevel{});
    const double min_gap = w.value("min_gap", 0.10);
    const auto ablation = bundle.memory_only();

    std::vector<double> values = sweep_values(w);
    struct Row {
        ResourceKind simulated, full, memory_only;
        double gap;
    };
    const auto results = parallel_map(values.size(), c.jobs, [&](std::size_t i) {
        auto traffic = base;
        set(traffic, attribute, values[i]);
        const auto obs = testbed.corun(traffic, level);
        const auto contention = predict::describe(obs, level, env, bundle);
        return Row{obs.result.bottleneck.at(testbed.name()), apps::diagnose(bundle, traffic, contention).bottleneck,
                   apps::diagnose(ablation, traffic, contention).bottleneck,
                   stage_gap(obs.result.per_nf_stage_throughput.at(testbed.name()))};
    });

    std::vector<CsvRow> rows;
    std::size_t decisive = 0, agree = 0, agree_ablation = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto& r = results[i];
        const bool counted = r.gap >= min_gap;
        if (counted) {
            ++decisive;
            agree += r.full == r.simulated;
            agree_ablation += r.memory_only == r.simulated;
        }
        rows.push_back({fmt(values[i]), std::string(to_string(r.simulated)), std::string(to_string(r.full)),
                        std::string(to_string(r.memory_only)), fmt(100 * r.gap, 6), std::string(counted ? "1" : "0"),
                        std::string(r.full == r.simulated ? "1" : "0"), std::string(r.memory_only == r.simulated ? "1" : "0")});
    }
    const auto pct = [&](std::size_t k) { return decisive ? 100.0 * k / decisive : 0.0; };
    const json summary = {{"nf", bundle.nf_name},
                          {"attribute", std::string(to_string(attribute))},
                          {"points", values.size()},
                          {"decisive_points", decisive},
                          {"agreement_pct", pct(agree)},
                          {"agreement_memory_only_pct", pct(agree_ablation)}};
    std::cout << summary.dump(2) << "\n";
    if (out) {
        write_text(*out, render_csv({"value", "simulated", "predicted", "predicted_memory_only", "gap_pct", "decisive",
                                     "agree", "agree_memory_only"},
                                    rows));
        write_sidecar(*out, {"diagnose", std::nullopt, {}, inputs, {*out}}, {{"summary", summary}});
    }
    return 0;
}

namespace {

constexpr int kReportSchema = 1;

CsvRow header_of(const std::vector<CsvRow>& rows) { return rows.empty() ? CsvRow{} : rows.front(); }

/// Target accelerator rate against one competitor's offered load, simulated and closed form.
std::vector<CsvRow> equilibrium_curve() {
    std::vector<CsvRow> rows;
    const double t = 10e-6;
    for (int nc : {1, 2, 4}) {
        const std::vector<sim::RrQueueSpec> saturated{{1, t, std::nullopt}, {nc, t, std::nullopt}};
        const double eq = sim::rr_fluid_rates(saturated)[1];
        accel::AccelModelParams target{ResourceKind::RegexAccel, 1, t, 0.0, TrafficAttribute::Mtbr};
        accel::AccelModelParams other{ResourceKind::RegexAccel, nc, t, 0.0, TrafficAttribute::Mtbr};
        for (int k = 0; k <= 12; ++k) {
            const double offered = eq * 1.2 * k / 12;
            const auto des = sim::simulate_accelerator_rr({{1, t, std::nullopt}, {nc, t, offered}}, 2.0);
            const double model = accel::predict_throughput(target, {}, {{other, {}, offered}});
            rows.push_back({std::to_string(nc), fmt(offered), fmt(des.throughput[0]), fmt(model)});
        }
    }
    return rows;
}

/// Observed vs composed throughput of the synthetic two-resource NFs.
std::vector<CsvRow> composition_points() {
    std::vector<CsvRow> rows;
    for (auto pattern : {ExecutionPattern::Pipeline, ExecutionPattern::RunToCompletion}) {
        const Testbed testbed(sim::make_two_resource_nf(pattern));
        compose::DetectConfig config;
        config.ambiguity_margin = 0.0;
        const auto report = compose::detect_pattern(testbed, config);
        for (const auto& p : report.points) {
            rows.push_back({std::string(to_string(pattern)), fmt(p.level.mem_car), fmt(p.level.regex), fmt(p.observed),
                            fmt(compose::compose_pipeline(p.drops)), fmt(compose::compose_rtc(p.drops)),
                            fmt(compose::compose_sum(p.drops))});
        }
    }
    return rows;
}

}  // namespace

int report(const Common&, const std::vector<std::string>& inputs, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const CsvRow accuracy_header{"source", "nf", "variant", "points", "mape_pct", "acc5_pct", "acc10_pct"};
    const CsvRow scheduling_header{"source", "nfs", "nics", "violations", "violation_pct", "optimum", "optimum_exact",
                                   "wastage_pct"};
    const CsvRow diagnosis_header{"source", "points", "decisive_points", "agreement_pct", "agreement_memory_only_pct"};
    std::vector<CsvRow> accuracy, scheduling, diagnosis;

    for (const auto& path : inputs) {
        const auto source = fs::path(path).filename().string();
        if (fs::path(path).extension() == ".json") {
            const auto j = read_json(path);
            require(j.contains("violation_pct"), "report: unrecognised JSON input " + path);
            scheduling.push_back({source, j.at("nfs").dump(), j.at("nics").dump(), j.at("violations").dump(),
                                  fmt(j.at("violation_pct").get<double>(), 6), j.at("optimum").dump(),
                                  j.at("optimum_exact").get<bool>() ? "1" : "0",
                                  fmt(j.at("wastage_pct").get<double>(), 6)});
            continue;
        }
        const auto rows = parse_csv(read_text(path));
        const auto header = header_of(rows);
        if (header == CsvRow{"nf", "variant", "points", "mape_pct", "acc5_pct", "acc10_pct"}) {
            for (std::size_t i = 1; i < rows.size(); ++i) {
                CsvRow r{source};
                r.insert(r.end(), rows[i].begin(), rows[i].end());
                accuracy.push_back(std::move(r));
            }
        } else if (!header.empty() && header[0] == "value" && header.size() == 8) {
            std::size_t decisive = 0, agree = 0, agree_ablation = 0;
            for (std::size_t i = 1; i < rows.size(); ++i) {
                if (rows[i][5] != "1") continue;
                ++decisive;
                agree += rows[i][6] == "1";
                agree_ablation += rows[i][7] == "1";
            }
            const auto pct = [&](std::size_t k) { return fmt(decisive ? 100.0 * k / decisive : 0.0, 6); };
            diagnosis.push_back({source, std::to_string(rows.size() - 1), std::to_string(decisive), pct(agree),
                                 pct(agree_ablation)});
        } else {
            fail(ErrorKind::InvalidInput, "report: unrecognised CSV input " + path);
        }
    }

    const std::vector<std::pair<std::string, std::pair<CsvRow, std::vector<CsvRow>>>> tables{
        {"accuracy.csv", {accuracy_header, accuracy}},
        {"scheduling.csv", {scheduling_header, scheduling}},
        {"diagnosis.csv", {diagnosis_header, diagnosis}},
        {"fig_rr_equilibrium.csv", {{"competitor_queues", "offered_rate", "simulated", "predicted"}, equilibrium_curve()}},
        {"fig_composition.csv",
         {{"pattern", "mem_level", "accel_level", "observed", "pipeline", "rtc", "sum"}, composition_points()}},
    };
    std::vector<std::string> outputs;
    json index = json::object();
    for (const auto& [name, table] : tables) {
        const auto path = (fs::path(out_dir) / name).string();
        write_text(path, render_csv(table.first, table.second));
        outputs.push_back(path);
        index[name] = table.first;
    }
    const auto manifest_path = (fs::path(out_dir) / "manifest.json").string();
    write_json(manifest_path, {{"format", "nicperf-report"},
                               {"schema_version", kReportSchema},
                               {"tables", index},
                               {"run", RunManifest{"report", std::nullopt, {}, inputs, outputs}.to_json()}});
    return 0;
}

}  // namespace nicperf::cli

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

// nicperf command-line entry point.
//
// Exit codes: 0 success, 1 usage error, 2 domain error. Domain errors print a
// JSON object {"error", "message", "details"} on stderr.

#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"
#include "nicperf/core.hpp"
#include "nicperf/error.hpp"

namespace {

using namespace nicperf::cli;

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "Seed for every random draw of the command");
    sub->add_option("--jobs", c.jobs, "Concurrent scenario runs")->check(CLI::PositiveNumber);
    sub->add_option("--env", c.env, "Testbed environment JSON")->check(CLI::ExistingFile);
}

int domain_error(const nicperf::Error& e) {
    std::cerr << e.to_json().dump() << "\n";
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Throughput prediction for network functions sharing a SmartNIC"};
    app.set_version_flag("--version", std::string(nicperf::kVersion));
    app.require_subcommand(1);

    Common common;
    std::string scenario, out, nf, strategy, dataset, bundle, traffic, contention, testgrid, arrivals, fleet, sweep;
    std::optional<std::string> config, opt_out, detail;
    std::vector<std::string> bundles, inputs;
    std::size_t exact_limit = 12;
    std::function<int()> run;

    auto* sim = app.add_subcommand("simulate", "Run one scenario on the simulator");
    sim->add_option("--scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", out, "Result JSON")->required();
    add_common(sim, common);
    sim->callback([&] { run = [&] { return simulate(common, scenario, out); }; });

    auto* prof = app.add_subcommand("profile", "Produce a profiling dataset");
    prof->add_option("--nf", nf, "Catalog NF name or NF spec JSON")->required();
    prof->add_option("--strategy", strategy, "Sampling strategy")
        ->required()
        ->check(CLI::IsMember({"adaptive", "random", "full"}));
    prof->add_option("--config", config, "Profiling config JSON")->check(CLI::ExistingFile);
    prof->add_option("--out", out, "Dataset JSONL")->required();
    add_common(prof, common);
    prof->callback([&] { run = [&] { return profile(common, nf, strategy, config, out); }; });

    auto* tr = app.add_subcommand("train", "Build a predictor bundle from a dataset");
    tr->add_option("--nf", nf, "Catalog NF name or NF spec JSON")->required();
    tr->add_option("--dataset", dataset, "Dataset JSONL with its manifest beside it")->required()->check(CLI::ExistingFile);
    tr->add_option("--out", out, "Bundle JSON")->required();
    add_common(tr, common);
    tr->callback([&] { run = [&] { return train(common, nf, dataset, out); }; });

    auto* pr = app.add_subcommand("predict", "Predict throughput under a contention descriptor");
    pr->add_option("--bundle", bundle, "Bundle JSON")->required()->check(CLI::ExistingFile);
    pr->add_option("--traffic", traffic, "Traffic JSON")->required()->check(CLI::ExistingFile);
    pr->add_option("--contention", contention, "Contention descriptor JSON")->required()->check(CLI::ExistingFile);
    pr->add_option("--out", opt_out, "Write here instead of stdout");
    add_common(pr, common);
    pr->callback([&] { run = [&] { return predict(common, bundle, traffic, contention, opt_out); }; });

    auto* ev = app.add_subcommand("evaluate", "Accuracy of a bundle on a test grid");
    ev->add_option("--bundle", bundle, "Bundle JSON")->required()->check(CLI::ExistingFile);
    ev->add_option("--testgrid", testgrid, "Test grid JSON")->required()->check(CLI::ExistingFile);
    ev->add_option("--out", out, "Summary CSV")->required();
    ev->add_option("--detail", detail, "Per-point CSV");
    add_common(ev, common);
    ev->callback([&] { run = [&] { return evaluate(common, bundle, testgrid, out, detail); }; });

    auto* sc = app.add_subcommand("schedule", "Place an arrival sequence onto SmartNICs");
    sc->add_option("--arrivals", arrivals, "Arrivals JSON")->required()->check(CLI::ExistingFile);
    sc->add_option("--strategy", strategy, "Placement strategy")
        ->required()
        ->check(CLI::IsMember({"monopolization", "greedy", "contention_aware"}));
    sc->add_option("--bundle", bundles, "Bundle JSON (repeatable)")->check(CLI::ExistingFile);
    sc->add_option("--out", out, "Fleet JSON")->required();
    add_common(sc, common);
    sc->callback([&] { run = [&] { return schedule(common, arrivals, strategy, bundles, out); }; });

    auto* se = app.add_subcommand("schedule-eval", "Simulate a fleet and compare with the optimum");
    se->add_option("--fleet", fleet, "Fleet JSON")->required()->check(CLI::ExistingFile);
    se->add_option("--out", opt_out, "Write here instead of stdout");
    se->add_option("--exact-limit", exact_limit, "Largest NF count solved exactly");
    add_common(se, common);
    se->callback([&] { run = [&] { return schedule_eval(common, fleet, opt_out, exact_limit); }; });

    auto* dg = app.add_subcommand("diagnose", "Bottleneck diagnosis over a traffic sweep");
    dg->add_option("--bundle", bundle, "Bundle JSON")->required()->check(CLI::ExistingFile);
    dg->add_option("--sweep", sweep, "Sweep JSON")->required()->check(CLI::ExistingFile);
    dg->add_option("--out", opt_out, "Per-point CSV");
    add_common(dg, common);
    dg->callback([&] { run = [&] { return diagnose(common, bundle, sweep, opt_out); }; });

    auto* rp = app.add_subcommand("report", "Collect results into CSV tables and figure data");
    rp->add_option("--inputs", inputs, "evaluate/diagnose CSVs and schedule-eval JSONs")->check(CLI::ExistingFile);
    rp->add_option("--out", out, "Output directory")->required();
    add_common(rp, common);
    rp->callback([&] { run = [&] { return report(common, inputs, out); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        return run();
    } catch (const nicperf::Error& e) {
        return domain_error(e);
    } catch (const nlohmann::json::exception& e) {
        return domain_error(nicperf::Error(nicperf::ErrorKind::InvalidInput, e.what()));
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", "internal"}, {"message", e.what()}, {"details", nlohmann::json::object()}}.dump()
                  << "\n";
        return 2;
    }
}

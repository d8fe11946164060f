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

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "nicperf/catalog.hpp"
#include "nicperf/error.hpp"
#include "nicperf/simulator.hpp"

using namespace nicperf;
using namespace nicperf::sim;

namespace {

// T_i = n_i / sum_j n_j^2 t_j, every queue backlogged.
std::vector<double> closed_form(const std::vector<RrQueueSpec>& specs) {
    double denom = 0.0;
    for (const auto& s : specs) denom += s.queue_count * s.queue_count * s.per_request_time;
    std::vector<double> out;
    for (const auto& s : specs) out.push_back(s.queue_count / denom);
    return out;
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy * sxy / (sxx * syy);
}

NfStage stage(ResourceKind r, double t) { return {r, t, {}}; }

NfSpec two_stage(ExecutionPattern pattern, double mem_time, double regex_time) {
    NfSpec nf;
    nf.name = "target";
    nf.pattern = pattern;
    nf.stages = {stage(ResourceKind::Memory, mem_time), stage(ResourceKind::RegexAccel, regex_time)};
    nf.wss = {1 << 20, 0, 0};
    nf.intensity = {20, 0.7, 1000};
    return nf;
}

ContentionScenario with(NfSpec target, std::vector<NfSpec> others) {
    ContentionScenario s;
    s.nfs.push_back({std::move(target), {}});
    for (auto& o : others) s.nfs.push_back({std::move(o), {}});
    return s;
}

}  // namespace

TEST_CASE("round-robin examples") {
    auto r = simulate_accelerator_rr({{1, 0.01, {}}, {1, 0.02, {}}}, 600.0);
    CHECK(r.converged);
    CHECK(r.throughput[0] == doctest::Approx(33.33).epsilon(0.01));
    CHECK(r.throughput[1] == doctest::Approx(33.33).epsilon(0.01));

    r = simulate_accelerator_rr({{2, 0.01, {}}, {1, 0.01, {}}}, 600.0);
    CHECK(r.throughput[0] == doctest::Approx(40.0).epsilon(0.01));
    CHECK(r.throughput[1] == doctest::Approx(20.0).epsilon(0.01));

    r = simulate_accelerator_rr({{1, 0.01, {}}}, 600.0);
    CHECK(r.throughput[0] == doctest::Approx(100.0).epsilon(1e-3));
}

TEST_CASE("round-robin rejects bad input") {
    CHECK_THROWS_AS(simulate_accelerator_rr({{1, 0.01, {}}}, 0.0), Error);
    CHECK_THROWS_AS(simulate_accelerator_rr({{1, 0.0, {}}}, 1.0), Error);
    CHECK_THROWS_AS(simulate_accelerator_rr({{0, 0.01, {}}}, 1.0), Error);
}

TEST_CASE("equal queue counts share the server equally") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> t(1e-6, 100e-6);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + trial % 4;
        std::vector<RrQueueSpec> specs;
        for (int i = 0; i < 2 + trial % 3; ++i) specs.push_back({n, t(rng), {}});
        const auto r = simulate_accelerator_rr(specs, 20000 * 4 * 100e-6);
        const auto [lo, hi] = std::minmax_element(r.throughput.begin(), r.throughput.end());
        CHECK((*hi - *lo) / *hi <= 0.01);
    }
}

TEST_CASE("discrete-event rates match the closed form") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> t(1e-6, 100e-6);
    std::uniform_int_distribution<int> n(1, 4), count(1, 4);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<RrQueueSpec> specs;
        for (int i = count(rng); i > 0; --i) specs.push_back({n(rng), t(rng), {}});
        const auto expect = closed_form(specs);
        const auto r = simulate_accelerator_rr(specs, 5.0);
        for (std::size_t i = 0; i < specs.size(); ++i) CHECK(r.throughput[i] == doctest::Approx(expect[i]).epsilon(0.02));
        const auto fluid = rr_fluid_rates(specs);
        for (std::size_t i = 0; i < specs.size(); ++i) CHECK(fluid[i] == doctest::Approx(expect[i]).epsilon(1e-9));
    }
}

TEST_CASE("equilibrium does not depend on batch size") {
    const std::vector<RrQueueSpec> specs{{1, 10e-6, {}}, {3, 25e-6, {}}, {2, 4e-6, {}}};
    const auto expect = closed_form(specs);
    for (int batch : {1, 4, 16}) {
        const auto r = simulate_accelerator_rr(specs, 10.0, batch);
        for (std::size_t i = 0; i < specs.size(); ++i) CHECK(r.throughput[i] == doctest::Approx(expect[i]).epsilon(0.01));
    }
}

TEST_CASE("throughput falls linearly below equilibrium") {
    const double t = 10e-6, eq = 1.0 / (2 * t);
    std::vector<double> offered, target;
    for (int k = 0; k <= 10; ++k) {
        const double rate = eq * 0.95 * k / 10;
        const auto r = simulate_accelerator_rr({{1, t, {}}, {1, t, rate}}, 4.0);
        offered.push_back(rate);
        target.push_back(r.throughput[0]);
    }
    CHECK(r_squared(offered, target) >= 0.99);
    CHECK(target.front() > target.back());
}

TEST_CASE("memory capacity without contention is the solo stage capacity") {
    const MemoryParams p;
    MemoryStageLoad load{2e-6, 1024.0, 0.0, 0.0, 6.0 * 1024 * 1024};
    const double miss = p.miss_base + (p.miss_sat - p.miss_base) * 1024.0 / (p.ramp_hi * load.llc_bytes);
    CHECK(memory_throughput(load, p) == doctest::Approx(1.0 / (2e-6 * (1 + p.miss_penalty * miss))));

    NfSpec nf;
    nf.name = "m";
    nf.pattern = ExecutionPattern::RunToCompletion;
    nf.stages = {stage(ResourceKind::Memory, 2e-6)};
    nf.wss = {1024.0, 0, 0};
    const auto solo = run_solo(nf, {});
    CHECK(solo.per_nf_throughput.at("m") == doctest::Approx(memory_throughput(load, p)));
}

TEST_CASE("memory capacity against competitor CAR is flat, linear, flat") {
    const MemoryParams p;
    MemoryStageLoad load{1e-6, 1e6, 0.0, 1e6, 6.0 * 1024 * 1024};
    auto cap = [&](double car) {
        load.competitor_car = car;
        return memory_throughput(load, p);
    };
    const double solo = cap(0.0);
    const double floor_at = p.car_knee + (1.0 - p.car_floor) / p.car_slope;
    CHECK(cap(p.car_knee * 0.5) == doctest::Approx(solo));
    CHECK(cap(p.car_knee) == doctest::Approx(solo));
    const double mid = (p.car_knee + floor_at) / 2;
    CHECK(cap(mid) == doctest::Approx((solo + solo * p.car_floor) / 2));
    CHECK(cap(floor_at) == doctest::Approx(solo * p.car_floor));
    CHECK(cap(floor_at * 2) == doctest::Approx(solo * p.car_floor));
    double prev = solo;
    for (double car = 0; car <= 1e9; car += 1e7) {
        CHECK(cap(car) <= prev + 1e-9);
        prev = cap(car);
    }
}

TEST_CASE("single NF runs at its solo rate with the slowest stage as bottleneck") {
    const auto nf = two_stage(ExecutionPattern::Pipeline, 1e-6, 2e-6);
    const auto r = run_scenario(with(nf, {}));
    const auto& stages = r.per_nf_stage_throughput.at("target");
    CHECK(r.per_nf_throughput.at("target") == doctest::Approx(500000.0).epsilon(1e-3));
    CHECK(r.bottleneck.at("target") == ResourceKind::RegexAccel);
    CHECK(stages.at(ResourceKind::RegexAccel) < stages.at(ResourceKind::Memory));
}

TEST_CASE("pipeline NF bound by regex ignores light memory contention") {
    const auto nf = two_stage(ExecutionPattern::Pipeline, 1e-6, 2e-6);
    const double solo = run_scenario(with(nf, {})).per_nf_throughput.at("target");
    const auto r = run_scenario(with(nf, {make_mem_bench(0.2, 0.2)}));
    CHECK(r.per_nf_stage_throughput.at("target").at(ResourceKind::Memory) < 1e6);
    CHECK(r.per_nf_throughput.at("target") == doctest::Approx(solo).epsilon(1e-6));
}

TEST_CASE("run-to-completion NF slows with either kind of contention") {
    const auto nf = two_stage(ExecutionPattern::RunToCompletion, 1e-6, 1e-6);
    double prev = run_scenario(with(nf, {})).per_nf_throughput.at("target");
    for (double level : {0.2, 0.4, 0.6, 0.8, 1.0}) {
        const double t = run_scenario(with(nf, {make_mem_bench(level, 0.5)})).per_nf_throughput.at("target");
        CHECK(t < prev);
        prev = t;
    }
    // A saturated bench stops pushing more matches; only compare while its rate grows.
    prev = run_scenario(with(nf, {})).per_nf_throughput.at("target");
    double prev_rate = 0.0;
    int compared = 0;
    for (double level : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0}) {
        const auto bench = make_accel_bench(ResourceKind::RegexAccel, level);
        const auto r = run_scenario(with(nf, {bench}));
        const double rate = r.per_nf_throughput.at(bench.name);
        if (rate > prev_rate * (1 + 1e-9)) {
            CHECK(r.per_nf_throughput.at("target") < prev);
            ++compared;
        }
        prev = r.per_nf_throughput.at("target");
        prev_rate = rate;
    }
    CHECK(compared >= 3);
}

TEST_CASE("composition rules hold exactly in results") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto names = catalog_names();
    for (int trial = 0; trial < 40; ++trial) {
        ContentionScenario s;
        s.nfs.push_back({catalog_nf(names[trial % names.size()]),
                         {1 + static_cast<std::int64_t>(u(rng) * 60000), 64 + static_cast<std::int64_t>(u(rng) * 1400),
                          u(rng) * 1100}});
        s.nfs.push_back({make_mem_bench(u(rng), u(rng)), {}});
        s.nfs.push_back({make_accel_bench(ResourceKind::RegexAccel, u(rng)), {}});
        const auto r = run_scenario(s);
        for (const auto& e : s.nfs) {
            const auto& stages = r.per_nf_stage_throughput.at(e.nf.name);
            const double t = r.per_nf_throughput.at(e.nf.name);
            double expect = 0.0;
            if (e.nf.pattern == ExecutionPattern::Pipeline) {
                expect = 1e300;
                for (const auto& [k, v] : stages) expect = std::min(expect, v);
            } else {
                double sojourn = 0.0;
                for (const auto& [k, v] : stages) sojourn += 1.0 / v;
                expect = 1.0 / sojourn;
            }
            // Benches never exceed what they offer.
            if (e.nf.offered_rate) expect = std::min(expect, *e.nf.offered_rate);
            CHECK(t == doctest::Approx(expect).epsilon(1e-12));
            // Cache accesses per packet are fixed by the spec.
            const auto& c = r.per_nf_counters.at(e.nf.name);
            CHECK(c.car() == doctest::Approx(e.nf.intensity.refs_per_packet * t).epsilon(1e-9));
        }
    }
}

TEST_CASE("runs are deterministic") {
    ContentionScenario s = with(catalog_nf("flowmonitor"), {make_mem_bench(0.5, 0.5), make_accel_bench(ResourceKind::RegexAccel, 0.7)});
    CHECK(run_scenario(s) == run_scenario(s));
    s.noise_pct = 3.0;
    s.seed = 99;
    const auto a = run_scenario(s);
    CHECK(a == run_scenario(s));
    s.seed = 100;
    CHECK(!(a.per_nf_counters == run_scenario(s).per_nf_counters));
}

TEST_CASE("benchmark NFs") {
    const auto idle = make_benchmark_nf(ResourceKind::Memory, 0.0);
    const auto r = run_scenario(with(idle, {}));
    CHECK(r.per_nf_counters.at(idle.name).car() == 0.0);

    const auto sat = make_benchmark_nf(ResourceKind::RegexAccel, 1.0);
    CHECK(!sat.offered_rate.has_value());
    const auto& st = *sat.stage(ResourceKind::RegexAccel);
    const auto rr = simulate_accelerator_rr({{sat.queue_count, st.time_at({}), {}}, {1, 1e-6, {}}}, 1.0);
    CHECK(rr.throughput[0] == doctest::Approx(closed_form({{sat.queue_count, st.time_at({}), {}}, {1, 1e-6, {}}})[0]).epsilon(0.02));

    CHECK_THROWS_AS(make_benchmark_nf("gpu", 0.5), Error);
    CHECK(make_benchmark_nf(ResourceKind::CompressionAccel, 0.5).offered_rate.has_value());
}

TEST_CASE("mid-level compression bench causes a linear drop") {
    NfSpec target;
    target.name = "target";
    target.stages = {stage(ResourceKind::CompressionAccel, 1e-6)};
    std::vector<double> level, tput;
    for (double l : {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3}) {
        const auto r = run_scenario(with(target, {make_benchmark_nf(ResourceKind::CompressionAccel, l)}));
        level.push_back(l);
        tput.push_back(r.per_nf_throughput.at("target"));
    }
    CHECK(tput.back() < tput.front());
    CHECK(r_squared(level, tput) >= 0.99);
}

TEST_CASE("scenario JSON round-trips") {
    ContentionScenario s = with(catalog_nf("nids"), {make_mem_bench(0.3, 0.7), make_accel_bench(ResourceKind::RegexAccel, 0.4)});
    s.seed = 42;
    s.noise_pct = 1.5;
    s.nfs[0].traffic = {123, 777, 321.5};
    const nlohmann::json j = s;
    const auto back = j.get<ContentionScenario>();
    CHECK(back == s);
    CHECK(nlohmann::json(back).dump() == j.dump());
    const nlohmann::json r = run_scenario(s);
    CHECK(nlohmann::json(r.get<SimulationResult>()).dump() == r.dump());
}

TEST_CASE("scenario validation") {
    ContentionScenario s;
    CHECK_THROWS_AS(run_scenario(s), Error);
    for (int i = 0; i < 5; ++i) s.nfs.push_back({make_mem_bench(0.1, 0.1), {}});
    for (int i = 0; i < 5; ++i) s.nfs[i].nf.name += std::to_string(i);
    CHECK_THROWS_AS(run_scenario(s), Error);
}

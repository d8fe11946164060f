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
#include <cmath>
#include <map>
#include <random>

#include "nicperf/catalog.hpp"
#include "nicperf/error.hpp"
#include "nicperf/predictor.hpp"

using namespace nicperf;
using namespace nicperf::predict;

namespace {

const NfPredictor& bundle(const std::string& name) {
    static std::map<std::string, NfPredictor> cache;
    auto it = cache.find(name);
    if (it == cache.end()) it = cache.emplace(name, build(Testbed(sim::catalog_nf(name)))).first;
    return it->second;
}

profile::ContentionSpace memory_and_regex() { return {true, true, false}; }

double median_abs_error(const std::vector<double>& p, const std::vector<double>& a) {
    std::vector<double> e;
    for (std::size_t i = 0; i < p.size(); ++i) e.push_back(std::abs(p[i] - a[i]) / a[i]);
    std::nth_element(e.begin(), e.begin() + e.size() / 2, e.end());
    return e[e.size() / 2];
}

}  // namespace

TEST_CASE("memory-only NF gets a single memory model") {
    const auto& p = bundle("flowstats");
    CHECK(p.memory.has_value());
    CHECK(p.accelerators.empty());
    CHECK(p.pattern == ExecutionPattern::RunToCompletion);
    CHECK(p.metadata["pattern"]["detected"] == false);
    CHECK(p.resources() == std::vector<ResourceKind>{ResourceKind::Memory});
}

TEST_CASE("memory+regex NF: both models, held-out error within 5%") {
    const auto& p = bundle("nids");
    CHECK(p.memory.has_value());
    REQUIRE(p.accelerators.count(ResourceKind::RegexAccel) == 1);
    CHECK(p.accelerators.count(ResourceKind::CompressionAccel) == 0);
    CHECK(p.pattern == ExecutionPattern::RunToCompletion);
    const Testbed tb(sim::catalog_nf("nids"));
    const auto ev = evaluate(p, tb, random_test_grid(p.domain, memory_and_regex(), 120, 11));
    MESSAGE("nids MAPE " << ev.mape << "% acc10 " << ev.acc10 << "%");
    CHECK(ev.mape <= 5.0);
}

TEST_CASE("rebuild with the same seeds is byte-identical") {
    const auto again = build(Testbed(sim::catalog_nf("flowstats")));
    CHECK(again.to_json().dump() == bundle("flowstats").to_json().dump());
}

TEST_CASE("zero contention predicts solo throughput") {
    for (const char* name : {"flowstats", "nids", "flowmonitor"}) {
        const auto& p = bundle(name);
        const Testbed tb(sim::catalog_nf(name));
        for (const auto& pt : random_test_grid(p.domain, memory_and_regex(), 10, 5)) {
            const auto obs = tb.corun(pt.traffic, ContentionLevel{});
            const auto pred = p.predict(pt.traffic, describe(obs, ContentionLevel{}, tb.environment(), p));
            CHECK(pred.throughput == doctest::Approx(p.solo(pt.traffic)).epsilon(0.05));
        }
    }
}

TEST_CASE("flowmonitor mixed contention grid") {
    const auto& p = bundle("flowmonitor");
    CHECK(p.pattern == ExecutionPattern::Pipeline);
    const Testbed tb(sim::catalog_nf("flowmonitor"));
    auto points = random_test_grid(p.domain, memory_and_regex(), 150, 42);
    for (auto& pt : points) pt.traffic = p.domain.defaults;
    const auto full = evaluate(p, tb, points);
    MESSAGE("flowmonitor MAPE " << full.mape << "%");
    CHECK(full.mape <= 6.0);

    // Ablation: under high regex contention the memory-only bundle is worse.
    std::vector<TestPoint> high;
    for (auto pt : points) {
        pt.level.regex = 0.7 + 0.3 * pt.level.regex;
        high.push_back(pt);
    }
    const auto hi_full = evaluate(p, tb, high);
    const auto hi_mem = evaluate(p.memory_only(), tb, high);
    MESSAGE("high regex: full " << hi_full.mape << "% memory-only " << hi_mem.mape << "%");
    CHECK(hi_mem.mape > hi_full.mape);
    CHECK(median_abs_error(hi_mem.predicted, hi_mem.observed) > median_abs_error(hi_full.predicted, hi_full.observed));
}

TEST_CASE("prediction never exceeds solo by more than 1%") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const char* name : {"flowstats", "nids", "flowmonitor"}) {
        const auto& p = bundle(name);
        for (const auto& pt : random_test_grid(p.domain, memory_and_regex(), 200, 17)) {
            ContentionDescriptor d;
            d.counters = {u(rng) * 2, u(rng) * 4e9, u(rng) * 4e8, u(rng) * 1e8, u(rng) * 5e7, u(rng) * 2e7, u(rng) * 16e6};
            for (const auto& [kind, params] : p.accelerators) {
                d.accelerators[kind] = {{params, pt.traffic, std::nullopt}};
                if (u(rng) < 0.5) d.accelerators[kind].clear();
            }
            const auto pred = p.predict(pt.traffic, d);
            CHECK(pred.throughput <= 1.01 * p.solo(pt.traffic));
            CHECK(pred.throughput > 0.0);
        }
    }
}

TEST_CASE("run-to-completion predictions are monotone in regex contention") {
    const auto& p = bundle("nids");
    REQUIRE(p.pattern == ExecutionPattern::RunToCompletion);
    const Testbed tb(sim::catalog_nf("nids"));
    for (const auto& pt : random_test_grid(p.domain, {true, false, false}, 20, 23)) {
        const auto base = describe(tb.corun(pt.traffic, pt.level), pt.level, tb.environment(), p);
        double prev = p.predict(pt.traffic, base).throughput;
        for (double level : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
            auto d = base;
            d.accelerators[ResourceKind::RegexAccel] = {bench_competitor(ResourceKind::RegexAccel, level, tb.environment())};
            const double t = p.predict(pt.traffic, d).throughput;
            CHECK(t <= prev * (1 + 1e-12));
            prev = t;
        }
        // A second backlogged competitor only lowers the share further.
        auto d = base;
        d.accelerators[ResourceKind::RegexAccel] = {bench_competitor(ResourceKind::RegexAccel, 1.0, tb.environment()),
                                                    bench_competitor(ResourceKind::RegexAccel, 1.0, tb.environment())};
        CHECK(p.predict(pt.traffic, d).throughput <= prev * (1 + 1e-12));
    }
}

TEST_CASE("bundle round-trip predicts bit-identically") {
    for (const char* name : {"flowstats", "nids", "flowmonitor"}) {
        const auto& p = bundle(name);
        const auto text = p.to_json().dump(2);
        const auto back = NfPredictor::from_json(nlohmann::json::parse(text));
        CHECK(back == p);
        CHECK(back.to_json().dump(2) == text);
        const Testbed tb(sim::catalog_nf(name));
        for (const auto& pt : random_test_grid(p.domain, memory_and_regex(), 25, 3)) {
            const auto d = describe(tb.corun(pt.traffic, pt.level), pt.level, tb.environment(), p);
            CHECK(back.predict(pt.traffic, d).throughput == p.predict(pt.traffic, d).throughput);
        }
    }
}

TEST_CASE("out-of-domain traffic is rejected") {
    const auto& p = bundle("flowmonitor");
    auto t = p.domain.defaults;
    t.mtbr = 5000;
    CHECK_FALSE(p.domain.contains(t));
    ContentionDescriptor d;
    d.accelerators[ResourceKind::RegexAccel] = {};
    try {
        p.predict(t, d);
        FAIL("expected out-of-domain");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::OutOfDomain);
        CHECK(e.details().contains("attribute"));
    }
}

TEST_CASE("missing accelerator descriptor is invalid input") {
    const auto& p = bundle("flowmonitor");
    try {
        p.predict(p.domain.defaults, ContentionDescriptor{});
        FAIL("expected invalid-input");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidInput);
    }
}

TEST_CASE("stage errors carry their stage tag") {
    int calls = 0;
    const Runner flaky = [&](const sim::ContentionScenario& s) {
        if (++calls > 3) fail(ErrorKind::Convergence, "runner gave up");
        return sim::run_scenario(s);
    };
    const Testbed tb(sim::catalog_nf("flowmonitor"), {}, flaky);
    try {
        build(tb);
        FAIL("expected a convergence error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Convergence);
        CHECK(e.details()["stage"] == "profile");
        CHECK(std::string(e.what()).rfind("profile: ", 0) == 0);
    }
}

TEST_CASE("dataset for another NF is rejected") {
    const Testbed tb(sim::catalog_nf("acl"));
    profile::ProfilingDataset d;
    d.nf = "nat";
    CHECK_THROWS_AS(build(tb, d), Error);
}

TEST_CASE("solo table interpolates its grid points exactly") {
    const auto& p = bundle("flowstats");
    const auto& s = p.t_solo;
    REQUIRE(!s.axes.empty());
    std::size_t stride = 1;
    for (std::size_t a = 1; a < s.axes.size(); ++a) stride *= s.coords[a].size();
    for (std::size_t i = 0; i < s.coords[0].size(); ++i) {
        auto t = p.domain.defaults;
        set(t, s.axes[0], s.coords[0][i]);
        for (std::size_t a = 1; a < s.axes.size(); ++a) set(t, s.axes[a], s.coords[a][0]);
        CHECK(s(t) == doctest::Approx(s.values[i * stride]).epsilon(1e-12));
    }
}

TEST_CASE("test point JSON round-trip") {
    const auto& p = bundle("nids");
    for (const auto& pt : random_test_grid(p.domain, memory_and_regex(), 20, 1)) {
        const nlohmann::json j = pt;
        CHECK(j.get<TestPoint>() == pt);
        CHECK(p.domain.contains(pt.traffic));
    }
    CHECK(random_test_grid(p.domain, memory_and_regex(), 20, 1) == random_test_grid(p.domain, memory_and_regex(), 20, 1));
}

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

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "nicperf/catalog.hpp"
#include "nicperf/error.hpp"
#include "nicperf/mem_model.hpp"
#include "nicperf/testbed.hpp"

using namespace nicperf;
using namespace nicperf::mem;

namespace {

ThroughputSample row(double car, double y) {
    ThroughputSample s;
    s.scenario_id = "s";
    s.target_nf = "t";
    s.competitor_counters = {car / 4e8, car * 5, car * 0.7, car * 0.3, car * 0.1, car * 0.05, 1e6};
    s.observed_throughput = y;
    return s;
}

// Flat until 1e8, linear down to 60% at 3e8, flat after.
double pwl(double car) {
    if (car <= 1e8) return 1e6;
    if (car >= 3e8) return 6e5;
    return 1e6 - 4e5 * (car - 1e8) / 2e8;
}

std::vector<ThroughputSample> simulated(const Testbed& tb, std::size_t count, std::uint64_t seed, bool vary_flows,
                                        std::int64_t max_flows = 500000) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ThroughputSample> rows;
    for (std::size_t i = 0; i < count; ++i) {
        TrafficProfile t;
        if (vary_flows) t.flow_count = 1 + static_cast<std::int64_t>(u(rng) * (max_flows - 1));
        ContentionLevel l;
        if (i % 10 != 0) l = {u(rng), u(rng), 0.0, 0.0};
        rows.push_back(tb.corun(t, l).sample);
    }
    return rows;
}

std::vector<double> predictions(const GbrModel& m, const std::vector<ThroughputSample>& rows) {
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(m.predict(make_features(r)));
    return out;
}

std::vector<double> observed(const std::vector<ThroughputSample>& rows) {
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r.observed_throughput);
    return out;
}

}  // namespace

TEST_CASE("fits a piece-wise linear target in sample") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> car(0.0, 4e8);
    std::vector<ThroughputSample> rows;
    for (int i = 0; i < 500; ++i) {
        const double c = car(rng);
        rows.push_back(row(c, pwl(c)));
    }
    const auto m = train(rows);
    CHECK(mape(predictions(m, rows), observed(rows)) <= 1.0);
    CHECK(!m.warning());
}

TEST_CASE("constant target gives a constant model") {
    std::vector<ThroughputSample> rows;
    for (int i = 0; i < 40; ++i) rows.push_back(row(i * 1e7, 777.0));
    const auto m = train(rows);
    CHECK(m.warning());
    for (double c : {0.0, 1e8, 1e12}) CHECK(m.predict(make_features(row(c, 1).competitor_counters, {})) == doctest::Approx(777.0));
}

TEST_CASE("training input errors") {
    std::vector<ThroughputSample> rows;
    for (int i = 0; i < 29; ++i) rows.push_back(row(i * 1e7, 1e6 - i));
    CHECK_THROWS_AS(train(rows), Error);
    rows.push_back(row(3e8, 5e5));
    CHECK_NOTHROW(train(rows));
    rows[3].competitor_counters.ipc = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(train(rows), Error);
    rows[3] = row(1, 1);
    const auto m = train(rows);
    const std::vector<double> short_row(3, 0.0);
    CHECK_THROWS_AS(m.predict(std::span<const double>(short_row)), Error);
}

TEST_CASE("simulated memory-only NF") {
    const Testbed tb(sim::catalog_nf("nat"));
    const auto train_rows = simulated(tb, 300, 1, false);
    const auto test_rows = simulated(tb, 100, 2, false);
    const auto m = train(train_rows);
    CHECK(mape(predictions(m, test_rows), observed(test_rows)) <= 10.0);

    const double solo = tb.solo({});
    CHECK(m.predict(make_features(CounterSnapshot{}, {})) == doctest::Approx(solo).epsilon(0.05));

    // Same input, same answer.
    const auto x = make_features(test_rows[7]);
    CHECK(m.predict(x) == m.predict(x));

    // More competitor cache traffic, nothing else changed: no sizeable gain.
    for (const auto& r : test_rows) {
        auto more = r.competitor_counters;
        more.l2crd *= 1.5;
        more.l2cwr *= 1.5;
        CHECK(m.predict(make_features(more, r.traffic)) <= m.predict(make_features(r)) + 0.05 * solo);
    }
}

TEST_CASE("serialization and training are deterministic") {
    const Testbed tb(sim::catalog_nf("flowmonitor"));
    const auto rows = simulated(tb, 200, 3, true, 65536);
    GbrHyper h;
    h.subsample = 0.8;
    h.seed = 9;
    const auto m = train(rows, h);
    const auto text = m.to_json().dump();
    CHECK(train(rows, h).to_json().dump() == text);
    const auto back = GbrModel::from_json(nlohmann::json::parse(text));
    CHECK(back == m);
    CHECK(back.to_json().dump() == text);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        MemFeatureVector x;
        for (auto& v : x) v = u(rng) * 1e8;
        CHECK(back.predict(x) == m.predict(x));
    }
}

TEST_CASE("traffic features beat a fixed-traffic model when flows vary") {
    const Testbed tb(sim::catalog_nf("flowstats"));
    const auto test_rows = simulated(tb, 150, 6, true);
    const auto augmented = train(simulated(tb, 400, 5, true));
    const auto fixed = train(simulated(tb, 400, 5, false), {}, FeatureSet::CountersOnly);
    const double e_aug = mape(predictions(augmented, test_rows), observed(test_rows));
    const double e_fixed = mape(predictions(fixed, test_rows), observed(test_rows));
    CHECK(e_aug < e_fixed);
    CHECK(e_aug <= 10.0);
}

TEST_CASE("feature vector layout") {
    const CounterSnapshot c{1, 2, 3, 4, 5, 6, 7};
    const auto x = make_features(c, {11, 222, 33.5});
    const MemFeatureVector expect{1, 2, 3, 4, 5, 6, 7, 11, 222, 33.5};
    CHECK(x == expect);
    CHECK(kFeatureNames[7] == "flow_count");
}

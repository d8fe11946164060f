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
#include <random>

#include "nicperf/apps.hpp"
#include "nicperf/catalog.hpp"
#include "nicperf/error.hpp"

using namespace nicperf;
using namespace nicperf::apps;

namespace {

const PredictorSet& bundles() {
    static const PredictorSet set = [] {
        PredictorSet s;
        for (const char* name : {"acl", "flowstats", "nat", "nids", "flowmonitor", "ipcomp"})
            s.emplace(name, predict::build(Testbed(sim::catalog_nf(name))));
        return s;
    }();
    return set;
}

PredictorSet memory_only(const PredictorSet& set) {
    PredictorSet out;
    for (const auto& [name, p] : set) out.emplace(name, p.memory_only());
    return out;
}

Fleet run(const std::vector<Arrival>& arrivals, PlacementStrategy s, const PredictorSet* p) {
    Fleet f;
    for (const auto& a : arrivals) place(f, a, s, p);
    return f;
}

Arrival arrival(const std::string& nf, double sla = 0.1) {
    return {nf, bundles().at(nf).domain.defaults, {sla}};
}

// Relative gap between the two tightest stages of the target.
double stage_gap(const sim::SimulationResult& r, const std::string& nf) {
    std::vector<double> caps;
    for (const auto& [k, v] : r.per_nf_stage_throughput.at(nf)) caps.push_back(v);
    std::sort(caps.begin(), caps.end());
    return caps.size() < 2 ? 0.0 : (caps[1] - caps[0]) / caps[0];
}

struct DiagnosisRun {
    ResourceKind simulated, predicted, memory_only;
    double gap;
};

DiagnosisRun diagnose_at(const std::string& nf, const TrafficProfile& t, const ContentionLevel& level) {
    const auto& p = bundles().at(nf);
    const Testbed tb(sim::catalog_nf(nf));
    const auto obs = tb.corun(t, level);
    const auto d = predict::describe(obs, level, tb.environment(), p);
    return {obs.result.bottleneck.at(nf), diagnose(p, t, d).bottleneck, diagnose(p.memory_only(), t, d).bottleneck,
            stage_gap(obs.result, nf)};
}

}  // namespace

TEST_CASE("empty fleet places on NIC 0 for every strategy") {
    for (auto s : {PlacementStrategy::Monopolization, PlacementStrategy::Greedy, PlacementStrategy::ContentionAware}) {
        Fleet f;
        const auto d = place(f, arrival("acl"), s, &bundles());
        CHECK(d.nic == 0);
        CHECK(d.provisioned);
        CHECK(f.nics.size() == 1);
    }
}

TEST_CASE("contention-aware provisions when every NIC would violate") {
    Fleet f;
    place(f, arrival("nids", 0.05), PlacementStrategy::ContentionAware, &bundles());
    // A second regex-heavy NF with a tight SLA cannot share the accelerator.
    const auto d = place(f, arrival("nids", 0.05), PlacementStrategy::ContentionAware, &bundles());
    CHECK(d.provisioned);
    CHECK(d.nic == 1);
    CHECK(f.nics.size() == 2);
}

TEST_CASE("greedy picks most free slots, ties to lowest id") {
    Fleet f;
    f.nics.resize(3);
    f.nics[0].residents.push_back({0, arrival("acl")});
    f.nics[1].residents.push_back({1, arrival("acl")});
    f.next_id = 2;
    CHECK(place(f, arrival("nat"), PlacementStrategy::Greedy).nic == 2);
    CHECK(place(f, arrival("nat"), PlacementStrategy::Greedy).nic == 0);
    Fleet full;
    full.nics.resize(1);
    for (std::size_t i = 0; i < 4; ++i) full.nics[0].residents.push_back({i, arrival("acl")});
    full.next_id = 4;
    const auto d = place(full, arrival("acl"), PlacementStrategy::Greedy);
    CHECK(d.provisioned);
    CHECK(d.nic == 1);
}

TEST_CASE("monopolization never violates") {
    const auto arrivals = random_arrivals(bundles(), 20, 4);
    const auto f = run(arrivals, PlacementStrategy::Monopolization, nullptr);
    CHECK(f.nics.size() == arrivals.size());
    const auto r = evaluate_placement(f, catalog_oracle());
    CHECK(r.violations == 0);
    CHECK(r.violation_pct == 0.0);
}

TEST_CASE("a fleet matching the optimum has no wastage") {
    Fleet f;
    f.nics.resize(1);
    for (std::size_t i = 0; i < 2; ++i) f.nics[0].residents.push_back({i, arrival("acl", 0.2)});
    f.next_id = 2;
    const auto r = evaluate_placement(f, catalog_oracle());
    CHECK(r.violations == 0);
    CHECK(r.optimum_exact);
    CHECK(r.optimum == 1);
    CHECK(r.wastage_pct == 0.0);
}

TEST_CASE("an overpacked fleet shows violations") {
    // Four regex users on one accelerator: at equilibrium each gets about a
    // quarter of the engine, far past a 5% SLA.
    Fleet f;
    f.nics.resize(1);
    for (std::size_t i = 0; i < 4; ++i) f.nics[0].residents.push_back({i, arrival("nids", 0.05)});
    f.next_id = 4;
    const auto r = evaluate_placement(f, catalog_oracle());
    CHECK(r.violations > 0);
    CHECK(r.wastage_pct < 0.0);
    CHECK_FALSE(predicted_feasible(f.nics[0].residents, bundles()));
}

TEST_CASE("contention-aware never lands on a predicted violation") {
    Fleet f;
    for (const auto& a : random_arrivals(bundles(), 40, 8)) {
        const auto d = place(f, a, PlacementStrategy::ContentionAware, &bundles());
        CHECK(predicted_feasible(f.nics[d.nic].residents, bundles()));
        // Replay: every earlier NIC rejects this arrival.
        for (std::size_t n = 0; n < d.nic; ++n) {
            auto group = f.nics[n].residents;
            if (group.size() >= static_cast<std::size_t>(f.slots())) continue;
            group.push_back({f.next_id, a});
            CHECK_FALSE(predicted_feasible(group, bundles()));
        }
    }
    f.validate();
}

TEST_CASE("placement is deterministic and permutations keep fleet invariants") {
    auto arrivals = random_arrivals(bundles(), 24, 2);
    for (auto s : {PlacementStrategy::Greedy, PlacementStrategy::ContentionAware}) {
        CHECK(run(arrivals, s, &bundles()) == run(arrivals, s, &bundles()));
    }
    std::mt19937_64 rng(5);
    for (int k = 0; k < 5; ++k) {
        std::shuffle(arrivals.begin(), arrivals.end(), rng);
        for (auto s : {PlacementStrategy::Greedy, PlacementStrategy::ContentionAware}) {
            const auto f = run(arrivals, s, &bundles());
            CHECK_NOTHROW(f.validate());
            CHECK(f.nf_count() == arrivals.size());
            for (const auto& nic : f.nics) CHECK(nic.residents.size() <= static_cast<std::size_t>(f.slots()));
        }
    }
}

TEST_CASE("contention-aware beats greedy and memory-only bundles on violations") {
    const auto oracle = catalog_oracle();
    const auto mem = memory_only(bundles());
    std::size_t greedy = 0, ca = 0, ca_mem = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto arrivals = random_arrivals(bundles(), 40, 100 + seed);
        total += arrivals.size();
        greedy += evaluate_placement(run(arrivals, PlacementStrategy::Greedy, nullptr), oracle, 0).violations;
        ca += evaluate_placement(run(arrivals, PlacementStrategy::ContentionAware, &bundles()), oracle, 0).violations;
        ca_mem += evaluate_placement(run(arrivals, PlacementStrategy::ContentionAware, &mem), oracle, 0).violations;
    }
    MESSAGE("violations of " << total << ": greedy " << greedy << ", memory-only " << ca_mem << ", full " << ca);
    CHECK(ca < greedy);
    CHECK(ca < ca_mem);
    CHECK(5 * ca <= greedy);
}

TEST_CASE("optimal NIC count matches a hand-checked instance") {
    const auto oracle = catalog_oracle();
    std::vector<Resident> rs;
    for (std::size_t i = 0; i < 3; ++i) rs.push_back({i, arrival("nids", 0.05)});
    // No two nids share a regex engine within 5%.
    CHECK(optimal_nic_count(rs, oracle, 4) == 3);
    std::vector<Resident> light;
    for (std::size_t i = 0; i < 5; ++i) light.push_back({i, arrival("acl", 0.2)});
    CHECK(optimal_nic_count(light, oracle, 4) >= 2);
}

TEST_CASE("diagnose flowmonitor across match rates") {
    auto t = bundles().at("flowmonitor").domain.defaults;
    const ContentionLevel level{0.2, 0.2, 0.0, 0.0};
    t.mtbr = 80;
    const auto low = diagnose_at("flowmonitor", t, level);
    CHECK(low.simulated == ResourceKind::Memory);
    CHECK(low.predicted == ResourceKind::Memory);
    t.mtbr = 1000;
    const auto high = diagnose_at("flowmonitor", t, level);
    CHECK(high.simulated == ResourceKind::RegexAccel);
    CHECK(high.predicted == ResourceKind::RegexAccel);
    CHECK(high.memory_only == ResourceKind::Memory);
}

TEST_CASE("MTBR sweep: full bundle agrees, memory-only mislabels") {
    auto t = bundles().at("flowmonitor").domain.defaults;
    const ContentionLevel level{0.1, 0.1, 0.0, 0.0};
    int decisive = 0, full = 0, mem = 0;
    for (int i = 0; i <= 22; ++i) {
        t.mtbr = 50.0 * i;
        const auto r = diagnose_at("flowmonitor", t, level);
        if (r.gap < 0.10) continue;
        ++decisive;
        full += r.predicted == r.simulated;
        mem += r.memory_only == r.simulated;
    }
    MESSAGE("decisive " << decisive << " full " << full << " memory-only " << mem);
    REQUIRE(decisive > 0);
    CHECK(full == decisive);
    CHECK(mem < full);
}

TEST_CASE("random battery: diagnosis agrees where the gap is decisive") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int decisive = 0, agree = 0;
    for (const char* nf : {"flowmonitor", "nids"}) {
        const auto& p = bundles().at(nf);
        for (const auto& pt : predict::random_test_grid(p.domain, {true, true, false}, 100, 31)) {
            const auto r = diagnose_at(nf, pt.traffic, pt.level);
            if (r.gap < 0.10) continue;
            ++decisive;
            agree += r.predicted == r.simulated;
        }
    }
    MESSAGE("agreement " << agree << "/" << decisive);
    REQUIRE(decisive >= 50);
    CHECK(agree >= 0.95 * decisive);
}

TEST_CASE("single-resource bundle gives a trivial diagnosis") {
    const auto& p = bundles().at("nat");
    const auto d = diagnose(p, p.domain.defaults, {});
    CHECK(d.trivial);
    CHECK(d.bottleneck == ResourceKind::Memory);
}

TEST_CASE("placement types round-trip through JSON") {
    const auto arrivals = random_arrivals(bundles(), 10, 3);
    for (const auto& a : arrivals) {
        const nlohmann::json j = a;
        CHECK(j.get<Arrival>() == a);
    }
    const auto f = run(arrivals, PlacementStrategy::ContentionAware, &bundles());
    const nlohmann::json j = f;
    CHECK(j.get<Fleet>() == f);
    CHECK(nlohmann::json(j.get<Fleet>()).dump() == j.dump());
}

TEST_CASE("SLA and fleet validation") {
    CHECK_THROWS_AS(SlaSpec{0.0}.validate(), Error);
    CHECK_THROWS_AS(SlaSpec{1.5}.validate(), Error);
    CHECK_NOTHROW(SlaSpec{1.0}.validate());
    Fleet f;
    f.nics.resize(1);
    for (std::size_t i = 0; i < 5; ++i) f.nics[0].residents.push_back({i, arrival("acl")});
    f.next_id = 5;
    CHECK_THROWS_AS(f.validate(), Error);
    Fleet missing;
    CHECK_THROWS_AS(place(missing, arrival("acl"), PlacementStrategy::ContentionAware, nullptr), Error);
}

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

/**
 * @file apps.hpp
 * @brief Online NF placement across SmartNICs and bottleneck diagnosis.
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nicperf/predictor.hpp"
#include "nicperf/simulator.hpp"
#include "nicperf/testbed.hpp"

namespace nicperf::apps {

/// Largest tolerated throughput drop relative to solo.
struct SlaSpec {
    double max_drop_ratio = 0.1;

    void validate() const;

    friend bool operator==(const SlaSpec&, const SlaSpec&) = default;
};

struct Arrival {
    std::string nf;
    TrafficProfile traffic;
    SlaSpec sla;

    friend bool operator==(const Arrival&, const Arrival&) = default;
};

struct Resident {
    std::size_t id = 0;  ///< arrival index, unique within a fleet
    Arrival arrival;

    /// Name of this instance inside a simulated scenario.
    std::string instance() const;

    friend bool operator==(const Resident&, const Resident&) = default;
};

struct Nic {
    std::vector<Resident> residents;

    friend bool operator==(const Nic&, const Nic&) = default;
};

struct Fleet {
    int core_budget = 8;
    int cores_per_nf = 2;
    std::vector<Nic> nics;
    std::size_t next_id = 0;

    int slots() const { return core_budget / cores_per_nf; }
    std::size_t nf_count() const;
    void validate() const;

    friend bool operator==(const Fleet&, const Fleet&) = default;
};

enum class PlacementStrategy { Monopolization, Greedy, ContentionAware };
std::string_view to_string(PlacementStrategy s);
PlacementStrategy placement_strategy_from_string(std::string_view name);

/// Bundles by NF name.
using PredictorSet = std::map<std::string, predict::NfPredictor>;

struct Decision {
    std::size_t nic = 0;
    bool provisioned = false;
};

/// Places one arrival. ContentionAware needs a bundle for every NF involved.
Decision place(Fleet& fleet, const Arrival& arrival, PlacementStrategy strategy, const PredictorSet* predictors = nullptr);

/// Whether the models predict every member of `group` meets its SLA together.
bool predicted_feasible(const std::vector<Resident>& group, const PredictorSet& predictors);

/// Descriptor of what `group[target]` competes with, from its neighbours'
/// bundles. `load[j]` scales neighbour j's rate counters and offered rate
/// relative to running alone (1 when empty).
predict::ContentionDescriptor neighbours(const std::vector<Resident>& group, std::size_t target,
                                         const PredictorSet& predictors, const std::vector<double>& load = {});

/// Predictions for every member of a co-located group. Neighbours slow each
/// other down, so their loads are refined over `rounds` passes.
std::vector<predict::Prediction> predict_group(const std::vector<Resident>& group, const PredictorSet& predictors,
                                               int rounds = 3);

/// Ground truth: NF specs by name and the shared environment.
struct Oracle {
    std::map<std::string, sim::NfSpec> specs;
    TestbedEnvironment env;
    int jobs = 1;

    /// Observed throughput drop ratio of each member when co-located.
    std::vector<double> drops(const std::vector<Resident>& group) const;
    double solo(const std::string& nf, const TrafficProfile& traffic) const;
};

/// Oracle with every catalog NF.
Oracle catalog_oracle(const TestbedEnvironment& env = {}, int jobs = 1);

struct PlacementReport {
    std::size_t nfs = 0;
    std::size_t nics = 0;
    std::size_t violations = 0;
    double violation_pct = 0.0;
    std::size_t optimum = 0;  ///< exact when optimum_exact, else a lower bound
    bool optimum_exact = false;
    double wastage_pct = 0.0;  ///< extra NICs relative to `optimum`
    std::vector<double> drops;  ///< per resident, in NIC then slot order
};

/// Simulates every NIC and compares the NIC count with the optimum, which is
/// computed exactly for up to `exact_limit` NFs and bounded by ceil(N/slots) above.
PlacementReport evaluate_placement(const Fleet& fleet, const Oracle& oracle, std::size_t exact_limit = 12);

/// Fewest NICs that host `residents` with every SLA met on the oracle.
std::size_t optimal_nic_count(const std::vector<Resident>& residents, const Oracle& oracle, int slots);

/// Random arrivals over the bundles' NFs, traffic uniform inside each bundle's box.
std::vector<Arrival> random_arrivals(const PredictorSet& predictors, std::size_t count, std::uint64_t seed,
                                     double sla_min = 0.05, double sla_max = 0.20);

struct Diagnosis {
    ResourceKind bottleneck = ResourceKind::Memory;
    bool trivial = false;  ///< single-resource bundle
    std::map<ResourceKind, double> scores;  ///< drops (pipeline) or contended sojourn times (run-to-completion)
};

/// Predicted bottleneck. Pipeline bundles pick the largest drop; drops within
/// `tie_tolerance` x T_solo of each other count as a tie, settled by whichever
/// stage bounds the predicted throughput. Run-to-completion bundles pick the
/// longest contended sojourn time.
Diagnosis diagnose(const predict::NfPredictor& p, const TrafficProfile& traffic,
                   const predict::ContentionDescriptor& contention, double tie_tolerance = 0.01);

void to_json(nlohmann::json& j, const SlaSpec& s);
void from_json(const nlohmann::json& j, SlaSpec& s);
void to_json(nlohmann::json& j, const Arrival& a);
void from_json(const nlohmann::json& j, Arrival& a);
void to_json(nlohmann::json& j, const Fleet& f);
void from_json(const nlohmann::json& j, Fleet& f);
void to_json(nlohmann::json& j, const PlacementReport& r);
void to_json(nlohmann::json& j, const Diagnosis& d);

}  // namespace nicperf::apps

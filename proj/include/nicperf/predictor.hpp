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
 * @file predictor.hpp
 * @brief Per-NF predictor bundles: build, predict, serialize.
 *
 * A bundle holds a solo-throughput table over the profiled traffic box, a
 * memory model, one queueing model per accelerator the NF uses, and the
 * NF's execution pattern. Prediction turns each model's output into a
 * throughput drop and composes the drops.
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nicperf/accel_model.hpp"
#include "nicperf/composer.hpp"
#include "nicperf/core.hpp"
#include "nicperf/mem_model.hpp"
#include "nicperf/profiler.hpp"
#include "nicperf/testbed.hpp"

namespace nicperf::predict {

/// Multilinear interpolation of solo throughput, and of the NF's own
/// counters, over a rectilinear grid. Attributes without an axis are
/// constant within the profiled box.
struct SoloTable {
    std::vector<TrafficAttribute> axes;
    std::vector<std::vector<double>> coords;  ///< ascending, one list per axis
    std::vector<double> values;               ///< row-major, last axis fastest
    std::vector<CounterSnapshot> counters;    ///< same layout as values

    double operator()(const TrafficProfile& traffic) const;
    CounterSnapshot counters_at(const TrafficProfile& traffic) const;
    void validate() const;

    friend bool operator==(const SoloTable&, const SoloTable&) = default;
};

/// The traffic box a bundle was profiled over.
struct TrafficDomain {
    std::vector<profile::AttributeRange> attributes;
    TrafficProfile defaults;  ///< fixed values of attributes outside the box

    bool contains(const TrafficProfile& traffic) const;
    /// Throws Error{OutOfDomain} naming the first offending attribute.
    void check(const TrafficProfile& traffic) const;

    friend bool operator==(const TrafficDomain&, const TrafficDomain&) = default;
};

/// What the target shares its NIC with.
struct ContentionDescriptor {
    CounterSnapshot counters;  ///< summed competitor memory counters
    /// Competitors per accelerator. Every accelerator the bundle models needs
    /// an entry; an empty list means no competitor.
    std::map<ResourceKind, std::vector<accel::Competitor>> accelerators;

    friend bool operator==(const ContentionDescriptor&, const ContentionDescriptor&) = default;
};

struct Prediction {
    double throughput = 0.0;
    double t_solo = 0.0;
    ExecutionPattern pattern = ExecutionPattern::RunToCompletion;
    bool saturated = false;
    std::map<ResourceKind, double> drops;          ///< after clamping
    std::map<ResourceKind, double> accel_capacity;  ///< predicted accelerator rate under contention
};

class NfPredictor {
public:
    std::string nf_name;
    ExecutionPattern pattern = ExecutionPattern::RunToCompletion;
    TrafficDomain domain;
    SoloTable t_solo;
    std::optional<mem::GbrModel> memory;
    std::map<ResourceKind, accel::AccelModelParams> accelerators;
    nlohmann::json metadata = nlohmann::json::object();

    std::vector<ResourceKind> resources() const;

    double solo(const TrafficProfile& traffic) const;
    /// The NF's own counters when running alone, as seen by its neighbours.
    CounterSnapshot own_counters(const TrafficProfile& traffic) const;
    Prediction predict(const TrafficProfile& traffic, const ContentionDescriptor& contention) const;

    /// Copy that keeps only the memory model (single-resource ablation).
    NfPredictor memory_only() const;

    nlohmann::json to_json() const;
    static NfPredictor from_json(const nlohmann::json& j);

    friend bool operator==(const NfPredictor&, const NfPredictor&) = default;
};

struct BuildConfig {
    profile::ProfilingConfig profiling = default_profiling();
    mem::GbrHyper gbr;
    std::vector<ResourceKind> candidate_accelerators{ResourceKind::RegexAccel, ResourceKind::CompressionAccel};
    compose::DetectConfig detect;  ///< accelerators and traffic are filled in by build
    std::size_t max_axis_points = 17;

    /// Adaptive profiling with quota fill enabled.
    static profile::ProfilingConfig default_profiling();
};

/// Profiles the testbed's target and builds its bundle.
NfPredictor build(const Testbed& testbed, const BuildConfig& config = {});

/// Builds from an existing memory dataset; accelerator inference, pattern
/// detection and the solo table still run on the testbed.
NfPredictor build(const Testbed& testbed, const profile::ProfilingDataset& dataset, const BuildConfig& config = {});

/// Competitor entry for a benchmark at `level` on `kind`, as a testbed runs it.
accel::Competitor bench_competitor(ResourceKind kind, double level, const TestbedEnvironment& env);

/// Descriptor of the contention a testbed level applies.
ContentionDescriptor describe(const Observation& observation, const ContentionLevel& level, const TestbedEnvironment& env,
                              const NfPredictor& predictor);

/// A held-out configuration: target traffic and the bench knobs around it.
struct TestPoint {
    TrafficProfile traffic;
    ContentionLevel level;

    friend bool operator==(const TestPoint&, const TestPoint&) = default;
};

/// `count` points with traffic uniform inside `domain` and knobs uniform over `space`.
std::vector<TestPoint> random_test_grid(const TrafficDomain& domain, const profile::ContentionSpace& space,
                                        std::size_t count, std::uint64_t seed);

struct Evaluation {
    std::vector<TestPoint> points;
    std::vector<double> predicted;
    std::vector<double> observed;
    double mape = 0.0;
    double acc5 = 0.0;   ///< percent within +-5%
    double acc10 = 0.0;  ///< percent within +-10%
};

/// Runs every point on the testbed and compares with the bundle's prediction.
Evaluation evaluate(const NfPredictor& predictor, const Testbed& testbed, const std::vector<TestPoint>& points,
                    int jobs = 1);

void to_json(nlohmann::json& j, const TestPoint& p);
void from_json(const nlohmann::json& j, TestPoint& p);
void to_json(nlohmann::json& j, const ContentionDescriptor& d);
void from_json(const nlohmann::json& j, ContentionDescriptor& d);
void to_json(nlohmann::json& j, const Prediction& p);

}  // namespace nicperf::predict

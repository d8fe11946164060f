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
 * @file profiler.hpp
 * @brief Offline collection of (contention, traffic) -> throughput datasets.
 *
 * Three strategies share one memoizing sampler:
 *  - full: a Cartesian traffic grid with random contention draws per cell;
 *  - random: uniformly random traffic and contention, up to the quota;
 *  - adaptive: prune attributes whose solo throughput barely moves across
 *    their range, then binary-split the remaining box wherever the solo
 *    throughput gap between its corners is large, sampling the midpoint.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "nicperf/core.hpp"
#include "nicperf/testbed.hpp"

namespace nicperf::profile {

struct AttributeRange {
    TrafficAttribute attribute = TrafficAttribute::FlowCount;
    double min = 0.0;
    double max = 1.0;

    friend bool operator==(const AttributeRange&, const AttributeRange&) = default;
};

/// Which benchmark knobs random contention draws cover.
struct ContentionSpace {
    bool memory = true;
    bool regex = false;
    bool compression = false;

    friend bool operator==(const ContentionSpace&, const ContentionSpace&) = default;
};

enum class Strategy { Full, Random, Adaptive };
std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view name);

struct ProfilingConfig {
    std::vector<AttributeRange> attributes = default_attributes();
    int quota = 200;
    std::optional<double> eps0;  ///< packets/s; default 5% of default-traffic solo throughput
    std::optional<double> eps1;
    int m = 10;
    std::uint64_t seed = 0;
    double min_box_fraction = 1.0 / 64.0;
    bool per_attribute_split = false;  ///< split one attribute at a time instead of the diagonal
    /// Adaptive only: once the recursion stops, spend the unused quota on random
    /// contention at the traffic points it already visited.
    bool fill_quota = false;
    ContentionSpace contention;
    TrafficProfile defaults;  ///< values of attributes outside the box or pruned
    int jobs = 1;

    static std::vector<AttributeRange> default_attributes();
    void validate() const;

    friend bool operator==(const ProfilingConfig&, const ProfilingConfig&) = default;
};

struct FullGridSpec {
    std::map<TrafficAttribute, int> points{{TrafficAttribute::FlowCount, 200}, {TrafficAttribute::PacketSize, 16}};
    int draws_per_cell = 1;
    std::size_t hard_cap = 20000;
};

struct ProfilingDataset {
    std::string nf;
    Strategy strategy = Strategy::Adaptive;
    std::vector<ThroughputSample> rows;
    std::vector<TrafficAttribute> pruned_attributes;
    std::size_t samples_used = 0;
    ProfilingConfig config;

    friend bool operator==(const ProfilingDataset&, const ProfilingDataset&) = default;
};

/// Memoizing sampler over one testbed. Counts unique configurations only.
class Sampler {
public:
    Sampler(const Testbed& testbed, std::size_t quota);

    /// Observed throughput at (traffic, level). Runs the configuration once and
    /// appends its row; repeats return the stored value without counting.
    /// Throws Error{QuotaExhausted} if a new configuration would exceed the quota.
    double profile_one(const TrafficProfile& traffic, const ContentionLevel& level);

    /// Runs all unseen configurations of a batch (concurrently up to `jobs`),
    /// in order, stopping at the quota. Returns how many were evaluated or recalled.
    std::size_t profile_batch(const std::vector<std::pair<TrafficProfile, ContentionLevel>>& batch, int jobs);

    bool seen(const TrafficProfile& traffic, const ContentionLevel& level) const;
    bool exhausted() const { return count_ >= quota_; }
    std::size_t count() const { return count_; }
    std::size_t quota() const { return quota_; }
    const std::vector<ThroughputSample>& rows() const { return rows_; }

private:
    const Testbed& testbed_;
    std::size_t quota_;
    std::size_t count_ = 0;
    std::map<std::string, double> memo_;
    std::vector<ThroughputSample> rows_;
};

/// A uniformly random contention level over the enabled knobs.
ContentionLevel random_level(const ContentionSpace& space, std::mt19937_64& rng);

/// Default-traffic solo throughput times 5%, the default for eps0/eps1.
double default_epsilon(const Testbed& testbed, const ProfilingConfig& config);

ProfilingDataset adaptive_profile(const Testbed& testbed, const ProfilingConfig& config = {});
ProfilingDataset random_profile(const Testbed& testbed, const ProfilingConfig& config = {});
ProfilingDataset full_profile(const Testbed& testbed, const FullGridSpec& grid = {}, const ProfilingConfig& config = {});

/// Grid coordinates used by full profiling along one attribute.
std::vector<double> grid_values(const AttributeRange& range, int points);

// Persistence: JSONL rows plus a JSON sidecar manifest.
void write_jsonl(std::ostream& out, const std::vector<ThroughputSample>& rows);
std::vector<ThroughputSample> read_jsonl(std::istream& in);
nlohmann::json manifest(const ProfilingDataset& d);
ProfilingDataset dataset_from(const nlohmann::json& manifest, std::vector<ThroughputSample> rows);

void to_json(nlohmann::json& j, const ProfilingConfig& c);
void from_json(const nlohmann::json& j, ProfilingConfig& c);

}  // namespace nicperf::profile

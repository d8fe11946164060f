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
 * @file composer.hpp
 * @brief Composition of per-resource throughput drops into end-to-end throughput.
 *
 * Pipeline:          T = T_solo - max_k dT_k
 * Run-to-completion: T = 1 / (sum_k 1/(T_solo - dT_k) - (r-1)/T_solo)
 */

#pragma once

#include <map>
#include <vector>

#include "nicperf/core.hpp"
#include "nicperf/testbed.hpp"

namespace nicperf::compose {

struct PerResourceDrops {
    double t_solo = 0.0;
    std::map<ResourceKind, double> drops;

    std::size_t r() const { return drops.size(); }

    /// Throws InvalidInput unless t_solo > 0, r >= 1 and 0 <= dT_k < t_solo.
    void validate() const;
};

/// Drops clamped to [0, 0.99 t_solo]; `saturated` is set when any was capped.
struct ClampedDrops {
    PerResourceDrops drops;
    bool saturated = false;
};
ClampedDrops clamp(PerResourceDrops d);

double compose_pipeline(const PerResourceDrops& d);
double compose_rtc(const PerResourceDrops& d);
double compose(ExecutionPattern pattern, const PerResourceDrops& d);

/// Naive baseline: T_solo minus the sum of drops (may go negative).
double compose_sum(const PerResourceDrops& d);

struct DetectConfig {
    std::vector<ResourceKind> accelerators{ResourceKind::RegexAccel};
    std::vector<double> memory_levels{0.3, 0.6, 1.0};
    std::vector<double> accel_levels{0.2, 0.45, 1.0};
    TrafficProfile traffic;
    double ambiguity_margin = 1.0;  ///< percentage points
};

struct DetectPoint {
    ContentionLevel level;
    double observed = 0.0;
    PerResourceDrops drops;
};

struct PatternReport {
    ExecutionPattern pattern = ExecutionPattern::Pipeline;
    double pipeline_residual = 0.0;  ///< MAPE of the pipeline rule, percent
    double rtc_residual = 0.0;       ///< MAPE of the run-to-completion rule, percent
    std::vector<DetectPoint> points;
};

/// Co-runs the target on a memory x accelerator contention grid (>= 9 points),
/// derives per-resource drops from single-resource probes and keeps the rule
/// that fits better. Throws Error{AmbiguousPattern} when the two residuals are
/// within `ambiguity_margin` of each other.
PatternReport detect_pattern(const Testbed& testbed, const DetectConfig& config = {});

}  // namespace nicperf::compose

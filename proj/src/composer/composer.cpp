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

#include "nicperf/composer.hpp"

#include <algorithm>
#include <cmath>

namespace nicperf::compose {

void PerResourceDrops::validate() const {
    if (!(t_solo > 0.0) || !std::isfinite(t_solo))
        fail(ErrorKind::InvalidInput, "t_solo must be positive", {{"t_solo", t_solo}});
    require(!drops.empty(), "at least one resource drop is required");
    for (const auto& [k, d] : drops) {
        if (!(d >= 0.0 && d < t_solo))
            fail(ErrorKind::InvalidInput, "drop must satisfy 0 <= dT < t_solo",
                 {{"resource", std::string(to_string(k))}, {"drop", d}, {"t_solo", t_solo}});
    }
}

ClampedDrops clamp(PerResourceDrops d) {
    ClampedDrops out;
    const double cap = 0.99 * d.t_solo;
    for (auto& [k, v] : d.drops) {
        if (!std::isfinite(v) || v > cap) {
            v = cap;
            out.saturated = true;
        }
        v = std::max(0.0, v);
    }
    out.drops = std::move(d);
    return out;
}

double compose_pipeline(const PerResourceDrops& d) {
    d.validate();
    double worst = 0.0;
    for (const auto& [k, v] : d.drops) worst = std::max(worst, v);
    return d.t_solo - worst;
}

double compose_rtc(const PerResourceDrops& d) {
    d.validate();
    double inv = 0.0;
    for (const auto& [k, v] : d.drops) inv += 1.0 / (d.t_solo - v);
    inv -= static_cast<double>(d.r() - 1) / d.t_solo;
    return 1.0 / inv;
}

double compose(ExecutionPattern pattern, const PerResourceDrops& d) {
    return pattern == ExecutionPattern::Pipeline ? compose_pipeline(d) : compose_rtc(d);
}

double compose_sum(const PerResourceDrops& d) {
    d.validate();
    double total = 0.0;
    for (const auto& [k, v] : d.drops) total += v;
    return d.t_solo - total;
}

namespace {

ContentionLevel accel_only(const std::vector<ResourceKind>& accelerators, double level) {
    ContentionLevel c;
    for (auto k : accelerators) (k == ResourceKind::RegexAccel ? c.regex : c.compression) = level;
    return c;
}

}  // namespace

PatternReport detect_pattern(const Testbed& testbed, const DetectConfig& config) {
    require(!config.accelerators.empty(), "pattern detection needs at least one accelerator");
    for (auto k : config.accelerators) require(is_accelerator(k), "detect_pattern: accelerator expected");
    if (config.memory_levels.size() * config.accel_levels.size() < 9)
        fail(ErrorKind::InvalidInput, "pattern detection needs a grid of at least 9 points",
             {{"memory_levels", config.memory_levels.size()}, {"accel_levels", config.accel_levels.size()}});

    const double t_solo = testbed.solo(config.traffic);
    std::map<double, double> mem_only, acc_only;
    for (double m : config.memory_levels)
        mem_only[m] = testbed.corun(config.traffic, ContentionLevel{m, m, 0.0, 0.0}).sample.observed_throughput;
    for (double a : config.accel_levels)
        acc_only[a] = testbed.corun(config.traffic, accel_only(config.accelerators, a)).sample.observed_throughput;

    PatternReport report;
    std::vector<double> observed, pipe, rtc;
    for (double m : config.memory_levels) {
        for (double a : config.accel_levels) {
            ContentionLevel level = accel_only(config.accelerators, a);
            level.mem_car = level.mem_wss = m;
            DetectPoint p;
            p.level = level;
            p.observed = testbed.corun(config.traffic, level).sample.observed_throughput;
            p.drops.t_solo = t_solo;
            // All accelerators move together, so their joint drop is one probe.
            p.drops.drops[ResourceKind::Memory] = t_solo - mem_only[m];
            p.drops.drops[config.accelerators.front()] = t_solo - acc_only[a];
            auto clamped = clamp(p.drops).drops;
            observed.push_back(p.observed);
            pipe.push_back(compose_pipeline(clamped));
            rtc.push_back(compose_rtc(clamped));
            report.points.push_back(std::move(p));
        }
    }
    report.pipeline_residual = mape(pipe, observed);
    report.rtc_residual = mape(rtc, observed);
    report.pattern =
        report.pipeline_residual <= report.rtc_residual ? ExecutionPattern::Pipeline : ExecutionPattern::RunToCompletion;
    if (std::abs(report.pipeline_residual - report.rtc_residual) <= config.ambiguity_margin)
        fail(ErrorKind::AmbiguousPattern, "pipeline and run-to-completion fit equally well",
             {{"nf", testbed.name()},
              {"pipeline_residual", report.pipeline_residual},
              {"rtc_residual", report.rtc_residual}});
    return report;
}

}  // namespace nicperf::compose

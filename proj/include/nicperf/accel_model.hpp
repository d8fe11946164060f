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
 * @file accel_model.hpp
 * @brief White-box round-robin queueing model of accelerator contention.
 *
 * An NF j with n_j request queues and per-request time t_j = t0_j + a_j * x_j
 * (x_j = MTBR for regex, payload bytes for compression) receives, when every
 * NF sharing the accelerator keeps its queues backlogged,
 *
 *     T_i = n_i / sum_j n_j^2 (t0_j + a_j x_j).
 *
 * Its solo accelerator rate is 1 / (n_i t_i).
 */

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nicperf/core.hpp"
#include "nicperf/testbed.hpp"

namespace nicperf::accel {

struct AccelModelParams {
    ResourceKind resource = ResourceKind::RegexAccel;
    int queue_count = 1;
    double t0 = 1e-6;  ///< seconds
    double a = 0.0;    ///< seconds per unit of the bound traffic attribute
    TrafficAttribute attribute = TrafficAttribute::Mtbr;

    void validate() const;
    double request_time(double attribute_value) const { return t0 + a * attribute_value; }
    double request_time(const TrafficProfile& traffic) const { return request_time(get(traffic, attribute)); }
    double solo_rate(const TrafficProfile& traffic) const { return 1.0 / (queue_count * request_time(traffic)); }

    friend bool operator==(const AccelModelParams&, const AccelModelParams&) = default;
};

/// Traffic attribute an accelerator's request time depends on.
TrafficAttribute default_attribute(ResourceKind accelerator);

/// A competing NF on the same accelerator.
struct Competitor {
    AccelModelParams params;
    TrafficProfile traffic;
    std::optional<double> offered_rate;  ///< packets/s; nullopt = always backlogged

    friend bool operator==(const Competitor&, const Competitor&) = default;
};

/// Equilibrium accelerator throughput of the target with every competitor backlogged.
double predict_equilibrium(const AccelModelParams& target, const TrafficProfile& target_traffic,
                           const std::vector<Competitor>& competitors);

/// Accelerator throughput of a backlogged target. Competitors offering less than
/// their round-robin share only take the server time they use, so the target's
/// rate falls linearly from its solo rate (no load) to the equilibrium value
/// (competitors at their equilibrium rate).
double predict_throughput(const AccelModelParams& target, const TrafficProfile& target_traffic,
                          const std::vector<Competitor>& competitors);

struct InferenceConfig {
    ResourceKind resource = ResourceKind::RegexAccel;
    /// Two known, saturating bench settings with distinct n_b^2 t_b.
    sim::AccelBenchConfig bench_a{1, 0.5e-6, 2.5e-9};
    sim::AccelBenchConfig bench_b{2, 0.5e-6, 2.5e-9};
    /// Attribute values for the request-time regression (>= 3 distinct).
    std::vector<double> sweep;  ///< empty: five evenly spaced points over the attribute range
    TrafficProfile base_traffic;
};

struct InferenceReport {
    AccelModelParams params;
    double queue_count_estimate = 0.0;  ///< real-valued n before rounding
    double solo_rate = 0.0;             ///< 1 / (n t) at the base traffic
    double fit_r2 = 1.0;
    std::optional<std::string> warning;
};

/// Recovers n, t0 and a of the testbed's target from accelerator measurements.
/// Two co-runs against known saturating benches pin n and the solo rate; solo
/// runs across the sweep give t(x) for the least-squares fit t = t0 + a x.
/// Throws Error{Inference} on an inconsistent system.
InferenceReport infer_params(const Testbed& testbed, const InferenceConfig& config = {});

/// Ordinary least squares y = intercept + slope * x, with R^2 (1 for exact constant data).
struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r2 = 1.0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

void to_json(nlohmann::json& j, const AccelModelParams& p);
void from_json(const nlohmann::json& j, AccelModelParams& p);
void to_json(nlohmann::json& j, const Competitor& c);
void from_json(const nlohmann::json& j, Competitor& c);

}  // namespace nicperf::accel

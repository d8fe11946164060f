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

#include "nicperf/accel_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace nicperf::accel {

void AccelModelParams::validate() const {
    require(is_accelerator(resource), "accelerator model needs an accelerator resource");
    require(queue_count >= 1, "queue_count must be >= 1");
    require(t0 > 0.0 && std::isfinite(t0), "t0 must be > 0");
    require(a >= 0.0 && std::isfinite(a), "a must be >= 0");
}

TrafficAttribute default_attribute(ResourceKind accelerator) {
    require(is_accelerator(accelerator), "no traffic attribute for a non-accelerator resource");
    return accelerator == ResourceKind::RegexAccel ? TrafficAttribute::Mtbr : TrafficAttribute::PacketSize;
}

namespace {

// Server-time weight of one backlogged NF per round-robin cycle.
double cycle_weight(const AccelModelParams& p, const TrafficProfile& traffic) {
    return p.queue_count * p.queue_count * p.request_time(traffic);
}

}  // namespace

double predict_equilibrium(const AccelModelParams& target, const TrafficProfile& target_traffic,
                           const std::vector<Competitor>& competitors) {
    target.validate();
    double denom = cycle_weight(target, target_traffic);
    for (const auto& c : competitors) {
        c.params.validate();
        denom += cycle_weight(c.params, c.traffic);
    }
    return target.queue_count / denom;
}

double predict_throughput(const AccelModelParams& target, const TrafficProfile& target_traffic,
                          const std::vector<Competitor>& competitors) {
    target.validate();
    // Progressive filling: competitors whose offered rate is below their share
    // are served in full; backlogged NFs split the remaining server time in
    // proportion to n^2 t. With one competitor this is the straight line from
    // the solo rate to the equilibrium rate.
    std::vector<bool> limited(competitors.size(), false);
    for (;;) {
        double used = 0.0;
        double weight = cycle_weight(target, target_traffic);
        for (std::size_t j = 0; j < competitors.size(); ++j) {
            const auto& c = competitors[j];
            c.params.validate();
            if (limited[j])
                used += *c.offered_rate * c.params.queue_count * c.params.request_time(c.traffic);
            else
                weight += cycle_weight(c.params, c.traffic);
        }
        const double free_time = std::max(0.0, 1.0 - used);
        bool changed = false;
        for (std::size_t j = 0; j < competitors.size(); ++j) {
            const auto& c = competitors[j];
            if (limited[j] || !c.offered_rate) continue;
            const double share = c.params.queue_count * free_time / weight;
            if (*c.offered_rate <= share) {
                limited[j] = true;
                changed = true;
            }
        }
        if (!changed) return target.queue_count * free_time / weight;
    }
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size(), "fit_line: length mismatch");
    require(x.size() >= 2, "fit_line: need at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    require(sxx > 0.0, "fit_line: x values must not all be equal");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        sse += r * r;
    }
    // Relative tolerance so constant data (up to rounding) counts as a perfect fit.
    fit.r2 = syy <= 1e-18 * std::max(1.0, my * my) ? 1.0 : 1.0 - sse / syy;
    return fit;
}

namespace {

std::vector<double> default_sweep(TrafficAttribute attribute) {
    if (attribute == TrafficAttribute::PacketSize) return {64.0, 423.0, 782.0, 1141.0, 1500.0};
    return {0.0, 275.0, 550.0, 825.0, 1100.0};
}

double accelerator_rate(const Observation& obs, const std::string& nf, ResourceKind kind) {
    const auto& stages = obs.result.per_nf_stage_throughput.at(nf);
    auto it = stages.find(kind);
    if (it == stages.end())
        fail(ErrorKind::Inference, "target does not use the accelerator", {{"resource", std::string(to_string(kind))}});
    return it->second;
}

}  // namespace

InferenceReport infer_params(const Testbed& testbed, const InferenceConfig& config) {
    const ResourceKind kind = config.resource;
    require(is_accelerator(kind), "inference needs an accelerator resource");
    const auto attribute = default_attribute(kind);
    const auto& name = testbed.name();
    const auto& bench_traffic = testbed.environment().bench_traffic;

    // Co-runs against two saturating benches: 1/C_k = u + w_k v, where
    // u = n t = 1/T_solo, v = 1/n and w_k = n_b^2 t_b.
    auto bench_weight = [&](const sim::AccelBenchConfig& b) {
        const auto bench = sim::make_accel_bench(kind, 1.0, b);
        return b.queue_count * b.queue_count * bench.stages.front().time_at(bench_traffic);
    };
    auto co_rate = [&](const sim::AccelBenchConfig& b, const std::string& id) {
        auto s = testbed.scenario(config.base_traffic, {{sim::make_accel_bench(kind, 1.0, b), bench_traffic}});
        return accelerator_rate(testbed.observe(s, id), name, kind);
    };
    const double wa = bench_weight(config.bench_a), wb = bench_weight(config.bench_b);
    if (std::abs(wa - wb) <= 1e-9 * std::max(wa, wb))
        fail(ErrorKind::InvalidInput, "bench settings must differ in n^2 t", {{"w_a", wa}, {"w_b", wb}});
    const double ca = co_rate(config.bench_a, name + "|infer|bench-a");
    const double cb = co_rate(config.bench_b, name + "|infer|bench-b");
    const double v = (1.0 / ca - 1.0 / cb) / (wa - wb);
    const double u = 1.0 / ca - wa * v;
    const nlohmann::json system = {{"rate_a", ca}, {"rate_b", cb}, {"w_a", wa}, {"w_b", wb}, {"u", u}, {"v", v}};
    if (!std::isfinite(u) || !std::isfinite(v) || u <= 0.0 || v <= 0.0)
        fail(ErrorKind::Inference, "inconsistent equilibrium measurements", system);
    const double n_real = 1.0 / v;
    const int n = std::max(1, static_cast<int>(std::lround(n_real)));
    if (std::abs(n_real - n) > 0.25)
        fail(ErrorKind::Inference, "queue count is not close to an integer", {{"n", n_real}, {"system", system}});

    // Solo accelerator rate across the attribute sweep gives t(x) = 1 / (n C(x)).
    std::vector<double> xs = config.sweep.empty() ? default_sweep(attribute) : config.sweep;
    if (std::set<double>(xs.begin(), xs.end()).size() < 3)
        fail(ErrorKind::InvalidInput, "attribute sweep needs at least 3 distinct values", {{"sweep", xs}});
    std::vector<double> ts;
    for (double x : xs) {
        TrafficProfile traffic = config.base_traffic;
        set(traffic, attribute, x);
        auto obs = testbed.corun(traffic, {});
        ts.push_back(1.0 / (n * accelerator_rate(obs, name, kind)));
    }
    const auto fit = fit_line(xs, ts);

    InferenceReport report;
    report.queue_count_estimate = n_real;
    report.solo_rate = 1.0 / u;
    report.fit_r2 = fit.r2;
    report.params.resource = kind;
    report.params.attribute = attribute;
    report.params.queue_count = n;
    report.params.a = std::max(0.0, fit.slope);
    report.params.t0 = fit.intercept;
    if (!(report.params.t0 > 0.0)) {
        // Fall back to the smallest measured request time when the intercept is not positive.
        report.params.t0 = *std::min_element(ts.begin(), ts.end());
        report.warning = "non-positive intercept; t0 set to the smallest measured request time";
    }
    if (fit.r2 < 0.95) report.warning = "poor linear fit of request time (R^2 " + std::to_string(fit.r2) + ")";
    return report;
}

void to_json(nlohmann::json& j, const AccelModelParams& p) {
    j = {{"resource", std::string(to_string(p.resource))},
         {"queue_count", p.queue_count},
         {"t0", p.t0},
         {"a", p.a},
         {"attribute", std::string(to_string(p.attribute))}};
}

void from_json(const nlohmann::json& j, AccelModelParams& p) {
    p.resource = resource_kind_from_string(j.at("resource").get<std::string>());
    p.queue_count = j.at("queue_count").get<int>();
    p.t0 = j.at("t0").get<double>();
    p.a = j.at("a").get<double>();
    p.attribute = j.contains("attribute") ? traffic_attribute_from_string(j.at("attribute").get<std::string>())
                                          : default_attribute(p.resource);
    p.validate();
}

void to_json(nlohmann::json& j, const Competitor& c) {
    j = {{"params", c.params}, {"traffic", c.traffic}};
    j["offered_rate"] = c.offered_rate ? nlohmann::json(*c.offered_rate) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, Competitor& c) {
    c.params = j.at("params").get<AccelModelParams>();
    c.traffic = j.contains("traffic") ? j.at("traffic").get<TrafficProfile>() : TrafficProfile{};
    if (j.contains("offered_rate") && !j.at("offered_rate").is_null())
        c.offered_rate = j.at("offered_rate").get<double>();
    else
        c.offered_rate.reset();
}

}  // namespace nicperf::accel

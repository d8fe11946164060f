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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "nicperf/simulator.hpp"

namespace nicperf::sim {

namespace {

void validate_specs(const std::vector<RrQueueSpec>& specs) {
    require(!specs.empty(), "round-robin server needs at least one NF");
    for (const auto& s : specs) {
        require(s.queue_count >= 1, "queue_count must be >= 1");
        require(s.per_request_time > 0.0 && std::isfinite(s.per_request_time), "per_request_time must be > 0");
        if (s.offered_rate) require(*s.offered_rate >= 0.0 && std::isfinite(*s.offered_rate), "offered_rate must be >= 0");
    }
}

struct Queue {
    std::size_t nf = 0;
    std::int64_t backlog = 0;
    bool saturating = false;
};

// Deterministic arrivals: request k of an NF arrives at (k + 0.5) / rate and is
// placed on the NF's queues in round-robin order.
struct ArrivalStream {
    double rate = 0.0;
    double next = 0.0;
    std::int64_t k = 0;
    std::size_t first_queue = 0;
    int queue_count = 1;
    int cursor = 0;

    void advance() {
        ++k;
        next = (static_cast<double>(k) + 0.5) / rate;
    }
};

}  // namespace

RrResult simulate_accelerator_rr(const std::vector<RrQueueSpec>& specs, double horizon, int batch) {
    validate_specs(specs);
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        fail(ErrorKind::InvalidInput, "horizon must be positive", {{"horizon", horizon}});
    require(batch >= 1, "batch must be >= 1");

    std::vector<Queue> queues;
    std::vector<ArrivalStream> streams;
    std::vector<double> service(specs.size());
    for (std::size_t j = 0; j < specs.size(); ++j) {
        const auto& s = specs[j];
        service[j] = s.queue_count * s.per_request_time;
        const bool saturating = !s.offered_rate.has_value();
        if (!saturating && *s.offered_rate > 0.0) {
            ArrivalStream st;
            st.rate = *s.offered_rate;
            st.next = 0.5 / st.rate;
            st.first_queue = queues.size();
            st.queue_count = s.queue_count;
            streams.push_back(st);
        }
        for (int q = 0; q < s.queue_count; ++q) queues.push_back({j, 0, saturating});
    }

    const double warm = 0.1 * horizon;
    const double mid = 0.55 * horizon;
    std::vector<std::int64_t> first(specs.size(), 0), second(specs.size(), 0);

    auto deliver = [&](double now) {
        for (auto& st : streams) {
            while (st.next <= now) {
                queues[st.first_queue + static_cast<std::size_t>(st.cursor)].backlog++;
                st.cursor = (st.cursor + 1) % st.queue_count;
                st.advance();
            }
        }
    };

    const std::size_t nq = queues.size();
    std::size_t pos = 0;
    double t = 0.0;
    while (t < horizon) {
        deliver(t);
        std::size_t found = nq;
        for (std::size_t i = 0; i < nq; ++i) {
            const auto& q = queues[(pos + i) % nq];
            if (q.saturating || q.backlog > 0) {
                found = (pos + i) % nq;
                break;
            }
        }
        if (found == nq) {
            double next = std::numeric_limits<double>::infinity();
            for (const auto& st : streams) next = std::min(next, st.next);
            if (!std::isfinite(next)) break;
            t = next;
            continue;
        }
        auto& q = queues[found];
        for (int b = 0; b < batch; ++b) {
            if (!q.saturating) {
                if (q.backlog == 0) break;
                --q.backlog;
            }
            t += service[q.nf];
            if (t > horizon) break;
            if (t > warm) (t <= mid ? first : second)[q.nf]++;
            if (b + 1 < batch) deliver(t);
        }
        pos = (found + 1) % nq;
    }

    RrResult result;
    const double half = mid - warm;
    for (std::size_t j = 0; j < specs.size(); ++j) {
        result.throughput.push_back(static_cast<double>(first[j] + second[j]) / (horizon - warm));
        result.first_half.push_back(static_cast<double>(first[j]) / half);
        result.second_half.push_back(static_cast<double>(second[j]) / (horizon - mid));
        const auto diff = std::llabs(first[j] - second[j]);
        const auto larger = std::max(first[j], second[j]);
        // One full round-robin cycle of the NF is allowed as quantization slack.
        const std::int64_t slack = 2 * static_cast<std::int64_t>(specs[j].queue_count) * batch + 2;
        if (static_cast<double>(diff) > 0.005 * static_cast<double>(larger) && diff > slack) result.converged = false;
    }
    return result;
}

std::vector<double> rr_fluid_rates(const std::vector<RrQueueSpec>& specs) {
    validate_specs(specs);
    const std::size_t n = specs.size();
    std::vector<bool> limited(n, false);  // served at its offered rate
    std::vector<double> rates(n, 0.0);
    for (;;) {
        double used = 0.0, weight = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double s = specs[j].queue_count * specs[j].per_request_time;
            if (limited[j])
                used += *specs[j].offered_rate * s;
            else
                weight += specs[j].queue_count * s;
        }
        const double per_queue = weight > 0.0 ? std::max(0.0, 1.0 - used) / weight : 0.0;
        bool changed = false;
        for (std::size_t j = 0; j < n; ++j) {
            if (limited[j] || !specs[j].offered_rate) continue;
            if (*specs[j].offered_rate <= specs[j].queue_count * per_queue) {
                limited[j] = true;
                changed = true;
            }
        }
        if (changed) continue;
        for (std::size_t j = 0; j < n; ++j)
            rates[j] = limited[j] ? *specs[j].offered_rate : specs[j].queue_count * per_queue;
        return rates;
    }
}

}  // namespace nicperf::sim

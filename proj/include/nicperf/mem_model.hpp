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
 * @file mem_model.hpp
 * @brief Gradient-boosted regression trees over competitor counters and traffic.
 *
 * Features are the seven competitor counters followed by the target's
 * flow_count, packet_size and mtbr. The counters-only feature set drops the
 * traffic columns and serves as the fixed-traffic baseline.
 */

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nicperf/core.hpp"

namespace nicperf::mem {

inline constexpr std::size_t kFeatureCount = 10;
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{
    "ipc", "irt", "l2crd", "l2cwr", "memrd", "memwr", "wss", "flow_count", "packet_size", "mtbr"};

using MemFeatureVector = std::array<double, kFeatureCount>;

MemFeatureVector make_features(const CounterSnapshot& competitors, const TrafficProfile& traffic);
inline MemFeatureVector make_features(const ThroughputSample& s) {
    return make_features(s.competitor_counters, s.traffic);
}

enum class FeatureSet {
    Augmented,     ///< counters + traffic (10 columns)
    CountersOnly,  ///< counters only (7 columns), blind to traffic
};

std::string_view to_string(FeatureSet set);
FeatureSet feature_set_from_string(std::string_view name);

struct GbrHyper {
    int trees = 200;
    int depth = 4;
    double learning_rate = 0.1;
    double subsample = 1.0;  ///< fraction of rows per tree, drawn without replacement
    int max_bins = 256;      ///< split candidates per feature
    int min_samples_leaf = 1;
    std::size_t min_samples = 30;
    std::uint64_t seed = 0;

    void validate() const;

    friend bool operator==(const GbrHyper&, const GbrHyper&) = default;
};

/// Flattened binary regression tree. Node i is a leaf when feature[i] < 0.
/// Rows with x[feature] <= threshold go left.
struct RegressionTree {
    std::vector<int> feature;
    std::vector<double> threshold;
    std::vector<int> left;
    std::vector<int> right;
    std::vector<double> value;

    double predict(std::span<const double> x) const;

    friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

class GbrModel {
public:
    GbrModel() = default;

    /// Fits `y` from feature rows. Every row must have the same width as `feature_names`.
    static GbrModel fit(const std::vector<std::vector<double>>& rows, const std::vector<double>& y,
                        std::vector<std::string> feature_names, const GbrHyper& hyper = {});

    /// Raw prediction, clamped below at 0.
    double predict(std::span<const double> x) const;

    /// Prediction from named features; the model picks the columns it was trained on.
    double predict(const MemFeatureVector& features) const;

    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::vector<RegressionTree>& trees() const { return trees_; }
    const GbrHyper& hyper() const { return hyper_; }
    double base_score() const { return base_score_; }
    const std::optional<std::string>& warning() const { return warning_; }

    nlohmann::json to_json() const;
    static GbrModel from_json(const nlohmann::json& j);

    friend bool operator==(const GbrModel&, const GbrModel&) = default;

private:
    std::vector<std::string> feature_names_;
    std::vector<std::size_t> columns_;  ///< index into MemFeatureVector per model feature
    GbrHyper hyper_;
    double base_score_ = 0.0;
    std::vector<RegressionTree> trees_;
    std::optional<std::string> warning_;

    void bind_columns();
};

/// Trains on profiling rows using the chosen feature set.
GbrModel train(std::span<const ThroughputSample> samples, const GbrHyper& hyper = {},
               FeatureSet features = FeatureSet::Augmented);

/// Model prediction for a sample row.
inline double predict(const GbrModel& model, const MemFeatureVector& features) { return model.predict(features); }

}  // namespace nicperf::mem

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

#include "nicperf/mem_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace nicperf::mem {

MemFeatureVector make_features(const CounterSnapshot& competitors, const TrafficProfile& traffic) {
    const auto c = competitors.to_array();
    return {c[0], c[1], c[2], c[3], c[4], c[5], c[6], static_cast<double>(traffic.flow_count),
            static_cast<double>(traffic.packet_size), traffic.mtbr};
}

std::string_view to_string(FeatureSet set) { return set == FeatureSet::Augmented ? "augmented" : "counters_only"; }

FeatureSet feature_set_from_string(std::string_view name) {
    if (name == "augmented") return FeatureSet::Augmented;
    if (name == "counters_only") return FeatureSet::CountersOnly;
    fail(ErrorKind::InvalidInput, "unknown feature set '" + std::string(name) + "'");
}

void GbrHyper::validate() const {
    require(trees >= 0, "trees must be >= 0");
    require(depth >= 1 && depth <= 16, "depth must be in [1, 16]");
    require(learning_rate > 0.0 && learning_rate <= 1.0, "learning_rate must be in (0, 1]");
    require(subsample > 0.0 && subsample <= 1.0, "subsample must be in (0, 1]");
    require(max_bins >= 2 && max_bins <= 65535, "max_bins must be in [2, 65535]");
    require(min_samples_leaf >= 1, "min_samples_leaf must be >= 1");
}

double RegressionTree::predict(std::span<const double> x) const {
    int node = 0;
    while (feature[static_cast<std::size_t>(node)] >= 0) {
        const auto i = static_cast<std::size_t>(node);
        node = x[static_cast<std::size_t>(feature[i])] <= threshold[i] ? left[i] : right[i];
    }
    return value[static_cast<std::size_t>(node)];
}

namespace {

// Split candidates of one feature and each row's bin under them.
// Bin b holds rows with cut[b-1] < x <= cut[b].
struct BinnedFeature {
    std::vector<double> cuts;
    std::vector<std::uint16_t> bin;
};

BinnedFeature bin_feature(const std::vector<std::vector<double>>& rows, std::size_t f, int max_bins) {
    std::vector<double> values;
    values.reserve(rows.size());
    for (const auto& r : rows) values.push_back(r[f]);
    std::vector<double> uniq = values;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

    BinnedFeature out;
    if (uniq.size() <= static_cast<std::size_t>(max_bins)) {
        for (std::size_t i = 0; i + 1 < uniq.size(); ++i) out.cuts.push_back(0.5 * (uniq[i] + uniq[i + 1]));
    } else {
        // Quantile edges, snapped to midpoints between neighbouring unique values.
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        for (int q = 1; q < max_bins; ++q) {
            const auto idx = static_cast<std::size_t>(static_cast<double>(q) / max_bins * (sorted.size() - 1));
            const double v = sorted[idx];
            auto it = std::upper_bound(uniq.begin(), uniq.end(), v);
            if (it == uniq.end()) continue;
            const double cut = 0.5 * (v + *it);
            if (out.cuts.empty() || cut > out.cuts.back()) out.cuts.push_back(cut);
        }
    }
    out.bin.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto pos = std::lower_bound(out.cuts.begin(), out.cuts.end(), values[i]) - out.cuts.begin();
        out.bin[i] = static_cast<std::uint16_t>(pos);
    }
    return out;
}

class TreeBuilder {
public:
    TreeBuilder(const std::vector<BinnedFeature>& bins, const std::vector<double>& residual, const GbrHyper& hyper)
        : bins_(bins), residual_(residual), hyper_(hyper) {}

    RegressionTree build(std::vector<std::size_t> rows) {
        tree_ = {};
        grow(std::move(rows), 0);
        return std::move(tree_);
    }

private:
    int add_leaf(const std::vector<std::size_t>& rows) {
        double sum = 0.0;
        for (auto r : rows) sum += residual_[r];
        const double v = rows.empty() ? 0.0 : hyper_.learning_rate * sum / static_cast<double>(rows.size());
        return add_node(-1, 0.0, v);
    }

    int add_node(int feature, double threshold, double value) {
        tree_.feature.push_back(feature);
        tree_.threshold.push_back(threshold);
        tree_.left.push_back(-1);
        tree_.right.push_back(-1);
        tree_.value.push_back(value);
        return static_cast<int>(tree_.feature.size()) - 1;
    }

    int grow(std::vector<std::size_t> rows, int depth) {
        const std::size_t n = rows.size();
        const auto min_leaf = static_cast<std::size_t>(hyper_.min_samples_leaf);
        if (depth >= hyper_.depth || n < 2 * min_leaf) return add_leaf(rows);

        double total = 0.0;
        for (auto r : rows) total += residual_[r];
        const double parent = total * total / static_cast<double>(n);

        double best_gain = 0.0;
        int best_feature = -1;
        std::size_t best_cut = 0;
        std::vector<double> hsum;
        std::vector<std::size_t> hcount;
        for (std::size_t f = 0; f < bins_.size(); ++f) {
            const auto& bf = bins_[f];
            if (bf.cuts.empty()) continue;
            const std::size_t nb = bf.cuts.size() + 1;
            hsum.assign(nb, 0.0);
            hcount.assign(nb, 0);
            for (auto r : rows) {
                hsum[bf.bin[r]] += residual_[r];
                hcount[bf.bin[r]]++;
            }
            double lsum = 0.0;
            std::size_t lcount = 0;
            for (std::size_t b = 0; b + 1 < nb; ++b) {
                lsum += hsum[b];
                lcount += hcount[b];
                if (hcount[b] == 0) continue;  // same partition as the previous cut
                if (lcount < min_leaf || n - lcount < min_leaf) continue;
                const double rsum = total - lsum;
                const double gain = lsum * lsum / static_cast<double>(lcount) +
                                    rsum * rsum / static_cast<double>(n - lcount) - parent;
                if (gain > best_gain * (1.0 + 1e-12) + 1e-300) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_cut = b;
                }
            }
        }
        if (best_feature < 0) return add_leaf(rows);

        const auto& bf = bins_[static_cast<std::size_t>(best_feature)];
        std::vector<std::size_t> lrows, rrows;
        for (auto r : rows) (bf.bin[r] <= best_cut ? lrows : rrows).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        const int node = add_node(best_feature, bf.cuts[best_cut], 0.0);
        const int l = grow(std::move(lrows), depth + 1);
        const int r = grow(std::move(rrows), depth + 1);
        tree_.left[static_cast<std::size_t>(node)] = l;
        tree_.right[static_cast<std::size_t>(node)] = r;
        return node;
    }

    const std::vector<BinnedFeature>& bins_;
    const std::vector<double>& residual_;
    const GbrHyper& hyper_;
    RegressionTree tree_;
};

}  // namespace

GbrModel GbrModel::fit(const std::vector<std::vector<double>>& rows, const std::vector<double>& y,
                       std::vector<std::string> feature_names, const GbrHyper& hyper) {
    hyper.validate();
    require(rows.size() == y.size(), "feature rows and targets differ in length");
    if (rows.size() < hyper.min_samples)
        fail(ErrorKind::InvalidInput, "too few training samples",
             {{"samples", rows.size()}, {"required", hyper.min_samples}});
    const std::size_t width = feature_names.size();
    require(width >= 1, "at least one feature is required");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != width)
            fail(ErrorKind::InvalidInput, "feature row has wrong width", {{"row", i}, {"width", rows[i].size()}});
        for (double v : rows[i])
            if (!std::isfinite(v)) fail(ErrorKind::InvalidInput, "non-finite feature value", {{"row", i}});
        if (!std::isfinite(y[i])) fail(ErrorKind::InvalidInput, "non-finite target value", {{"row", i}});
    }

    GbrModel model;
    model.feature_names_ = std::move(feature_names);
    model.hyper_ = hyper;
    model.bind_columns();
    model.base_score_ = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    if (*hi - *lo <= 1e-12 * std::max(1.0, std::abs(model.base_score_))) {
        model.warning_ = "constant target; model predicts the mean";
        return model;
    }

    std::vector<BinnedFeature> bins;
    for (std::size_t f = 0; f < width; ++f) bins.push_back(bin_feature(rows, f, hyper.max_bins));

    std::vector<double> pred(y.size(), model.base_score_);
    std::vector<double> residual(y.size());
    std::vector<std::size_t> all(y.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::mt19937_64 rng(hyper.seed);
    const auto draw = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(hyper.subsample * static_cast<double>(y.size()))));

    TreeBuilder builder(bins, residual, hyper);
    for (int t = 0; t < hyper.trees; ++t) {
        for (std::size_t i = 0; i < y.size(); ++i) residual[i] = y[i] - pred[i];
        std::vector<std::size_t> rows_t = all;
        if (draw < all.size()) {
            std::shuffle(rows_t.begin(), rows_t.end(), rng);
            rows_t.resize(draw);
            std::sort(rows_t.begin(), rows_t.end());
        }
        auto tree = builder.build(std::move(rows_t));
        for (std::size_t i = 0; i < y.size(); ++i) pred[i] += tree.predict(rows[i]);
        model.trees_.push_back(std::move(tree));
    }
    return model;
}

void GbrModel::bind_columns() {
    columns_.clear();
    for (const auto& name : feature_names_) {
        auto it = std::find(kFeatureNames.begin(), kFeatureNames.end(), name);
        columns_.push_back(it == kFeatureNames.end() ? kFeatureCount
                                                     : static_cast<std::size_t>(it - kFeatureNames.begin()));
    }
}

double GbrModel::predict(std::span<const double> x) const {
    if (x.size() != feature_names_.size())
        fail(ErrorKind::InvalidInput, "feature vector has wrong dimensionality",
             {{"expected", feature_names_.size()}, {"got", x.size()}});
    double y = base_score_;
    for (const auto& t : trees_) y += t.predict(x);
    return std::max(0.0, y);
}

double GbrModel::predict(const MemFeatureVector& features) const {
    std::vector<double> x;
    x.reserve(columns_.size());
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i] >= kFeatureCount)
            fail(ErrorKind::InvalidInput, "model feature is not a memory feature", {{"feature", feature_names_[i]}});
        x.push_back(features[columns_[i]]);
    }
    return predict(x);
}

nlohmann::json GbrModel::to_json() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_)
        trees.push_back({{"feature", t.feature},
                         {"threshold", t.threshold},
                         {"left", t.left},
                         {"right", t.right},
                         {"value", t.value}});
    nlohmann::json j = {{"format", "nicperf-gbr"},
                        {"version", 1},
                        {"features", feature_names_},
                        {"hyper",
                         {{"trees", hyper_.trees},
                          {"depth", hyper_.depth},
                          {"learning_rate", hyper_.learning_rate},
                          {"subsample", hyper_.subsample},
                          {"max_bins", hyper_.max_bins},
                          {"min_samples_leaf", hyper_.min_samples_leaf},
                          {"min_samples", hyper_.min_samples},
                          {"seed", hyper_.seed}}},
                        {"base_score", base_score_},
                        {"trees", std::move(trees)}};
    j["warning"] = warning_ ? nlohmann::json(*warning_) : nlohmann::json(nullptr);
    return j;
}

GbrModel GbrModel::from_json(const nlohmann::json& j) {
    if (j.value("format", std::string()) != "nicperf-gbr")
        fail(ErrorKind::InvalidInput, "not a GBR model document");
    if (j.value("version", 0) != 1) fail(ErrorKind::InvalidInput, "unsupported GBR model version", {{"version", j.value("version", 0)}});
    GbrModel m;
    m.feature_names_ = j.at("features").get<std::vector<std::string>>();
    const auto& h = j.at("hyper");
    m.hyper_.trees = h.at("trees").get<int>();
    m.hyper_.depth = h.at("depth").get<int>();
    m.hyper_.learning_rate = h.at("learning_rate").get<double>();
    m.hyper_.subsample = h.at("subsample").get<double>();
    m.hyper_.max_bins = h.at("max_bins").get<int>();
    m.hyper_.min_samples_leaf = h.at("min_samples_leaf").get<int>();
    m.hyper_.min_samples = h.at("min_samples").get<std::size_t>();
    m.hyper_.seed = h.at("seed").get<std::uint64_t>();
    m.base_score_ = j.at("base_score").get<double>();
    for (const auto& t : j.at("trees")) {
        RegressionTree tree;
        tree.feature = t.at("feature").get<std::vector<int>>();
        tree.threshold = t.at("threshold").get<std::vector<double>>();
        tree.left = t.at("left").get<std::vector<int>>();
        tree.right = t.at("right").get<std::vector<int>>();
        tree.value = t.at("value").get<std::vector<double>>();
        const auto n = tree.feature.size();
        require(n >= 1 && tree.threshold.size() == n && tree.left.size() == n && tree.right.size() == n &&
                    tree.value.size() == n,
                "malformed tree in GBR model");
        for (std::size_t i = 0; i < n; ++i) {
            if (tree.feature[i] < 0) continue;
            require(tree.feature[i] < static_cast<int>(m.feature_names_.size()), "tree references unknown feature");
            require(tree.left[i] > static_cast<int>(i) && tree.left[i] < static_cast<int>(n) &&
                        tree.right[i] > static_cast<int>(i) && tree.right[i] < static_cast<int>(n),
                    "tree child index out of range");
        }
        m.trees_.push_back(std::move(tree));
    }
    if (j.contains("warning") && !j.at("warning").is_null()) m.warning_ = j.at("warning").get<std::string>();
    m.bind_columns();
    return m;
}

GbrModel train(std::span<const ThroughputSample> samples, const GbrHyper& hyper, FeatureSet features) {
    const std::size_t width = features == FeatureSet::Augmented ? kFeatureCount : CounterSnapshot::kSize;
    std::vector<std::string> names(kFeatureNames.begin(), kFeatureNames.begin() + static_cast<std::ptrdiff_t>(width));
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    rows.reserve(samples.size());
    for (const auto& s : samples) {
        const auto f = make_features(s);
        rows.emplace_back(f.begin(), f.begin() + static_cast<std::ptrdiff_t>(width));
        y.push_back(s.observed_throughput);
    }
    return GbrModel::fit(rows, y, std::move(names), hyper);
}

}  // namespace nicperf::mem

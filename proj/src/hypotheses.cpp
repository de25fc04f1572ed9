#include "batchrisk/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "batchrisk/accumulate.hpp"
#include "batchrisk/errors.hpp"
#include "batchrisk/rng.hpp"

namespace batchrisk {

namespace {

constexpr std::string_view kGenerateStream = "hypotheses::generate";
constexpr std::string_view kLookupStream = "hypotheses::lookup_fallback";

// Bitwise FNV-1a over the feature doubles; exact-match semantics.
std::uint64_t feature_hash(std::span<const double> features) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : features) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffULL;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

Dataset generate_split(const SyntheticConfig& config, std::string_view split, int count) {
    auto gen = rng::substream(config.seed, kGenerateStream, rng::stream_tag(split));
    Dataset data;
    data.features.resize(static_cast<std::size_t>(count));
    data.labels.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        auto& x = data.features[static_cast<std::size_t>(i)];
        x.resize(static_cast<std::size_t>(config.feature_dim));
        for (auto& coord : x) coord = gen.uniform01();
        if (config.task == Task::kRegressionUnit) {
            const double u = 2.0 * gen.uniform01() - 1.0;
            const double y = 0.25 + 0.5 * x[0] + config.noise * u;
            data.labels[static_cast<std::size_t>(i)] = std::clamp(y, 0.0, 1.0);
        } else {
            double y = x[0] >= 0.5 ? 1.0 : -1.0;
            if (gen.uniform01() < config.noise) y = -y;
            data.labels[static_cast<std::size_t>(i)] = y;
        }
    }
    return data;
}

Hypothesis fit_constant(const Dataset& train, Task task) {
    const double mean = stable_mean(train.labels);
    if (task == Task::kRegressionUnit) return Hypothesis::constant(mean, task);
    // Mean of {-1,+1} labels is not itself a valid prediction; the in-domain
    // constant minimizing the empirical 1-risk is the majority label.
    return Hypothesis::constant(mean >= 0.0 ? 1.0 : -1.0, task);
}

Hypothesis fit_threshold(const Dataset& train, Task task) {
    if (task != Task::kClassificationSign)
        throw ArgumentError("fit: threshold class requires classification_sign");
    std::vector<double> candidates;
    candidates.reserve(train.features.size());
    for (const auto& x : train.features) candidates.push_back(x[0]);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    double best_risk = std::numeric_limits<double>::infinity();
    double best_location = candidates.front();
    int best_orientation = 1;
    for (double t : candidates) {
        for (int orientation : {1, -1}) {
            int mistakes = 0;
            for (std::size_t i = 0; i < train.features.size(); ++i) {
                const double pred =
                    (train.features[i][0] >= t ? 1.0 : -1.0) * orientation;
                if (pred != train.labels[i]) ++mistakes;
            }
            const double risk = static_cast<double>(mistakes) /
                                static_cast<double>(train.features.size());
            // Strict improvement only: ties stay with the smaller threshold
            // (and +1 orientation) found first.
            if (risk < best_risk) {
                best_risk = risk;
                best_location = t;
                best_orientation = orientation;
            }
        }
    }
    return Hypothesis::threshold(best_location, best_orientation, task);
}

} // namespace

std::string_view to_string(Task task) {
    switch (task) {
        case Task::kRegressionUnit: return "regression_unit";
        case Task::kClassificationSign: return "classification_sign";
    }
    throw ArgumentError("unknown Task");
}

Task task_from_string(std::string_view name) {
    if (name == "regression_unit") return Task::kRegressionUnit;
    if (name == "classification_sign") return Task::kClassificationSign;
    throw ArgumentError("unknown task '" + std::string(name) +
                        "' (expected regression_unit|classification_sign)");
}

std::string_view to_string(HypothesisKind kind) {
    switch (kind) {
        case HypothesisKind::kConstantMean: return "constant_mean";
        case HypothesisKind::kThreshold: return "threshold";
        case HypothesisKind::kLookupMemorizer: return "lookup_memorizer";
    }
    throw ArgumentError("unknown HypothesisKind");
}

HypothesisKind hypothesis_kind_from_string(std::string_view name) {
    if (name == "constant_mean") return HypothesisKind::kConstantMean;
    if (name == "threshold") return HypothesisKind::kThreshold;
    if (name == "lookup_memorizer") return HypothesisKind::kLookupMemorizer;
    throw ArgumentError("unknown hypothesis '" + std::string(name) +
                        "' (expected constant_mean|threshold|lookup_memorizer)");
}

SplitDataset generate(const SyntheticConfig& config) {
    if (config.n_train < 1 || config.n_test < 1)
        throw ArgumentError("generate: set sizes must be >= 1");
    if (config.noise < 0.0 || config.noise > 1.0)
        throw ArgumentError("generate: noise outside [0, 1]");
    if (config.feature_dim < 1)
        throw ArgumentError("generate: feature_dim must be >= 1");
    return {generate_split(config, "train", config.n_train),
            generate_split(config, "test", config.n_test)};
}

Hypothesis Hypothesis::constant(double value, Task task) {
    Hypothesis h(HypothesisKind::kConstantMean, task);
    h.constant_value_ = value;
    return h;
}

Hypothesis Hypothesis::threshold(double location, int orientation, Task task) {
    if (orientation != 1 && orientation != -1)
        throw ArgumentError("Hypothesis::threshold: orientation must be +1 or -1");
    Hypothesis h(HypothesisKind::kThreshold, task);
    h.threshold_location_ = location;
    h.threshold_orientation_ = orientation;
    return h;
}

Hypothesis Hypothesis::lookup(const Dataset& train, std::uint64_t fallback_seed, Task task) {
    Hypothesis h(HypothesisKind::kLookupMemorizer, task);
    h.fallback_seed_ = fallback_seed;
    h.memorized_.reserve(train.features.size());
    for (std::size_t i = 0; i < train.features.size(); ++i) {
        const std::uint64_t key = feature_hash(train.features[i]);
        if (h.memory_index_.emplace(key, train.labels[i]).second)
            h.memorized_.emplace_back(train.features[i], train.labels[i]);
    }
    return h;
}

double Hypothesis::predict(std::span<const double> features) const {
    switch (kind_) {
        case HypothesisKind::kConstantMean:
            return constant_value_;
        case HypothesisKind::kThreshold:
            return (features[0] >= threshold_location_ ? 1.0 : -1.0) *
                   static_cast<double>(threshold_orientation_);
        case HypothesisKind::kLookupMemorizer: {
            const auto it = memory_index_.find(feature_hash(features));
            if (it != memory_index_.end()) return it->second;
            auto gen = rng::substream(fallback_seed_, kLookupStream, feature_hash(features));
            if (task_ == Task::kRegressionUnit) return gen.uniform01();
            return gen.rademacher();
        }
    }
    throw ArgumentError("unknown HypothesisKind");
}

Hypothesis fit(HypothesisKind kind, const Dataset& train, Task task, std::uint64_t seed) {
    if (train.size() < 1) throw ArgumentError("fit: empty training set");
    switch (kind) {
        case HypothesisKind::kConstantMean: return fit_constant(train, task);
        case HypothesisKind::kThreshold: return fit_threshold(train, task);
        case HypothesisKind::kLookupMemorizer: return Hypothesis::lookup(train, seed, task);
    }
    throw ArgumentError("unknown HypothesisKind");
}

EvalSet apply(const Hypothesis& hypothesis, const Dataset& data) {
    if (data.size() < 1) throw ArgumentError("apply: empty dataset");
    std::vector<LabeledPrediction> items;
    items.reserve(data.features.size());
    for (std::size_t i = 0; i < data.features.size(); ++i)
        items.push_back({hypothesis.predict(data.features[i]), data.labels[i]});
    return EvalSet(std::move(items));
}

} // namespace batchrisk

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "batchrisk/risk.hpp"

namespace batchrisk {

enum class Task { kRegressionUnit, kClassificationSign };

std::string_view to_string(Task task);
Task task_from_string(std::string_view name);

// Synthetic data family (all draws seeded and reproducible):
//   features      i.i.d. uniform on [0,1]^feature_dim
//   regression    label = clip(0.25 + 0.5*x0 + noise*u, 0, 1), u ~ U[-1,1];
//                 symmetric around 1/2, so the analytic label mean is 1/2
//   classification label = sign(x0 - 1/2), flipped with probability `noise`;
//                 analytic label mean is 0
struct SyntheticConfig {
    int n_train = 100;
    int n_test = 100;
    Task task = Task::kClassificationSign;
    double noise = 0.0;  // label-flip probability or additive-noise scale
    int feature_dim = 2;
    std::uint64_t seed = 0;
};

struct Dataset {
    std::vector<std::vector<double>> features;
    std::vector<double> labels;

    int size() const { return static_cast<int>(labels.size()); }
};

struct SplitDataset {
    Dataset train;
    Dataset test;
};

SplitDataset generate(const SyntheticConfig& config);

enum class HypothesisKind { kConstantMean, kThreshold, kLookupMemorizer };

std::string_view to_string(HypothesisKind kind);
HypothesisKind hypothesis_kind_from_string(std::string_view name);

// A fitted predictor from one of the three toy classes:
//   constant_mean     the same value everywhere (mean label; majority label
//                     for classification, keeping outputs in {-1,+1})
//   threshold         sign(x0 - location) * orientation; a small finite class
//   lookup_memorizer  exact training-set lookup with a seeded uniform
//                     fallback on unseen features (interpolating regime)
class Hypothesis {
public:
    static Hypothesis constant(double value, Task task);
    static Hypothesis threshold(double location, int orientation, Task task);
    static Hypothesis lookup(const Dataset& train, std::uint64_t fallback_seed, Task task);

    HypothesisKind kind() const { return kind_; }
    Task task() const { return task_; }
    double predict(std::span<const double> features) const;

    double constant_value() const { return constant_value_; }
    double threshold_location() const { return threshold_location_; }
    int threshold_orientation() const { return threshold_orientation_; }
    std::uint64_t fallback_seed() const { return fallback_seed_; }
    const std::vector<std::pair<std::vector<double>, double>>& memorized() const {
        return memorized_;
    }

private:
    Hypothesis(HypothesisKind kind, Task task) : kind_(kind), task_(task) {}

    HypothesisKind kind_;
    Task task_;
    double constant_value_ = 0.0;
    double threshold_location_ = 0.0;
    int threshold_orientation_ = 1;
    std::uint64_t fallback_seed_ = 0;
    std::vector<std::pair<std::vector<double>, double>> memorized_;
    std::unordered_map<std::uint64_t, double> memory_index_;  // feature hash -> label
};

Hypothesis fit(HypothesisKind kind, const Dataset& train, Task task,
               std::uint64_t seed = 0);

// Scores every row: EvalSet of (prediction, label) pairs.
EvalSet apply(const Hypothesis& hypothesis, const Dataset& data);

} // namespace batchrisk

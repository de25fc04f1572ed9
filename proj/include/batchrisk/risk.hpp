#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "batchrisk/losses.hpp"

namespace batchrisk {

// One (model output, ground truth) pair in the active loss kind's domains.
struct LabeledPrediction {
    double prediction;
    double label;
};

// Ordered collection of n labeled predictions; the set Z whose k-subsets the
// empirical k-risk averages over.
class EvalSet {
public:
    explicit EvalSet(std::vector<LabeledPrediction> items);
    static EvalSet from_columns(std::span<const double> predictions,
                                std::span<const double> labels);

    int size() const { return static_cast<int>(items_.size()); }
    const LabeledPrediction& operator[](std::size_t i) const { return items_[i]; }
    const std::vector<LabeledPrediction>& items() const { return items_; }

    std::vector<double> predictions() const;
    std::vector<double> labels() const;

    // Throws DomainError naming the first offending row.
    void validate_for(LossKind kind) const;

private:
    std::vector<LabeledPrediction> items_;
};

// Finite-support stand-in for the data distribution; makes expected k-risk
// exactly computable.
class DiscreteDistribution {
public:
    struct Atom {
        LabeledPrediction item;
        double probability;
    };

    // Probabilities must be strictly positive and sum to 1 within 1e-12.
    explicit DiscreteDistribution(std::vector<Atom> atoms);

    int size() const { return static_cast<int>(atoms_.size()); }
    const Atom& operator[](std::size_t i) const { return atoms_[i]; }
    const std::vector<Atom>& atoms() const { return atoms_; }

    // Inverse-CDF sample of one atom index.
    int sample_index(double uniform01) const;

private:
    std::vector<Atom> atoms_;
    std::vector<double> cumulative_;
};

enum class RiskMethod { kExact, kClosedForm, kMonteCarlo };

std::string_view to_string(RiskMethod method);
RiskMethod risk_method_from_string(std::string_view name);

struct RiskEstimate {
    double value = 0.0;
    int k = 0;
    LossKind kind = LossKind::kMse;
    RiskMethod method = RiskMethod::kExact;
    std::optional<double> std_error;      // Monte-Carlo only
    std::uint64_t subsets_evaluated = 0;  // batches actually scored
    std::optional<std::uint64_t> seed;    // Monte-Carlo only
};

// a_{k,n} = n(k-1)/(k(n-1)), the weight of r_n in the convex-combination
// identity r_k = (1 - a) r_1 + a r_n.
double interpolation_coefficient(int k, int n);

// Mean batch loss over all C(n,k) unordered subsets of the set.
RiskEstimate empirical_k_risk_exact(const EvalSet& set, int k, LossKind kind);

// Convex-combination closed form; O(n) regardless of k. Only the
// closed-form-eligible kinds (Mse, ZeroOne, GeomCrossEntropy) qualify.
RiskEstimate empirical_k_risk_closed(const EvalSet& set, int k, LossKind kind);

// Unbiased estimate from `draws` uniformly sampled k-subsets (each subset
// drawn without replacement); deterministic per seed.
RiskEstimate empirical_k_risk_mc(const EvalSet& set, int k, LossKind kind,
                                 std::uint64_t draws, std::uint64_t seed);

struct MonteCarloOptions {
    std::uint64_t draws = 10'000;
    std::uint64_t seed = 0;
};

// One estimate per requested k, all with the same method.
std::vector<RiskEstimate> risk_curve(const EvalSet& set, std::span<const int> ks,
                                     LossKind kind, RiskMethod method,
                                     const MonteCarloOptions& mc = {});

// Unbiased empirical variance of the per-sample errors e = prediction - label,
// computed through the identity V = n/(n-1) * (r_1 - r_n); the same quantity
// that shrinks out of the Mse k-risk as r_k = r_1 - (1 - 1/k) V.
double error_variance_mse(const EvalSet& set);

// Exact expected k-risk of a finite distribution: enumerates k-multisets of
// atoms with multinomial weights (i.i.d. WITH replacement, unlike the
// empirical estimator's subsets).
RiskEstimate expected_k_risk_exact(const DiscreteDistribution& dist, int k, LossKind kind);

// |risk(test) - risk(train)| with the same method on both sides.
double generalization_gap(const EvalSet& train, const EvalSet& test, int k, LossKind kind,
                          RiskMethod method, const MonteCarloOptions& mc = {});

} // namespace batchrisk

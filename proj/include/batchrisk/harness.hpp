#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "batchrisk/hypotheses.hpp"
#include "batchrisk/io.hpp"
#include "batchrisk/risk.hpp"

namespace batchrisk {

// One verification check: instances exercised, worst violation seen, and
// whether the built-in known-bad fixture was correctly flagged. A check
// passes only if its main pass is clean AND the audit fired.
struct CheckResult {
    std::string name;
    std::uint64_t instances_run = 0;
    double max_violation = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    bool skipped = false;
    bool audit_flagged = false;
    Json counterexample;  // replayable payload; null unless a violation occurred
};

// Instance counts per check; a zero count skips the check.
struct VerificationBudget {
    std::uint64_t property1_sets = 1000;
    std::uint64_t empirical_monotone_sets = 500;
    std::uint64_t expected_monotone_dists = 200;
    std::uint64_t unbiasedness_dists = 10;
    std::uint64_t unbiasedness_draws = 20000;
    std::uint64_t k_limit_dists = 50;
    std::uint64_t bce_search_budget = 100000;
    std::uint64_t permutation_sets = 200;
    std::uint64_t mc_trials = 200;
    std::uint64_t mc_draws = 2000;
    std::uint64_t massart_tables = 500;
    std::uint64_t peel_off_tables = 200;
    std::uint64_t xi_ratio_max_n = 60;
    std::uint64_t rademacher_invariance_tables = 100;
    std::uint64_t bound_monotonicity_instances = 200;
    std::uint64_t variance_decomposition_sets = 500;
    std::uint64_t kl_identity_samples = 2000;
    std::uint64_t convexity_samples = 2000;

    // Every count multiplied by `factor` (minimum 1 unless the factor is 0,
    // which skips everything).
    static VerificationBudget scaled(double factor);
};

struct VerificationReport {
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;

    bool all_passed() const;
    Json to_json() const;
};

// Runs every spec invariant of the risk and complexity modules at its stated
// tolerance. Deterministic per seed; failures land in the report, never throw.
VerificationReport run_verification(std::uint64_t seed,
                                    const VerificationBudget& budget = {});

// An EvalSet whose exact Bce k-risk strictly increases from k to k+1 while
// the Kl k-risk is non-increasing everywhere.
struct BceCounterexample {
    std::vector<LabeledPrediction> items;
    int k = 0;  // bce risk increases from k to k+1
    std::vector<double> bce_curve;  // exact k-risk for k = 1..n
    std::vector<double> kl_curve;
    std::uint64_t attempts = 0;

    Json to_json() const;
};

// Random search over small sets (n <= 6); exact enumeration certifies the
// witness. Empty optional when the budget is exhausted.
std::optional<BceCounterexample> find_bce_counterexample(std::uint64_t seed,
                                                         std::uint64_t budget);

// Recomputes both curves and re-checks the claimed violation.
bool certify_bce_counterexample(const EvalSet& set, int k);

struct SweepConfig {
    SyntheticConfig data;
    std::vector<int> ks;
    std::vector<LossKind> kinds;
    std::vector<HypothesisKind> variants;
    int repetitions = 9;
    int threads = 1;
};

struct SweepRow {
    HypothesisKind variant;
    std::uint64_t seed;
    int k;
    LossKind kind;
    double train_risk;
    double test_risk;
    double gap;
};

struct SweepAggregate {
    HypothesisKind variant;
    LossKind kind;
    int k;
    double median;
    double q25;
    double q75;
};

struct SweepReport {
    SweepConfig config;
    std::vector<SweepRow> rows;
    std::vector<SweepAggregate> aggregates;

    Json to_json() const;
    std::string to_csv() const;

    // Median gaps for one (variant, kind) in the order of config.ks.
    std::vector<double> median_gaps(HypothesisKind variant, LossKind kind) const;
};

// Test-minus-train gap per k for each repetition and hypothesis variant,
// aggregated to medians and quartiles. Eligible kinds use the closed form;
// others fall back to exact enumeration. Repetitions run in parallel with
// results identical for any thread count.
SweepReport run_sweep(const SweepConfig& config);

} // namespace batchrisk

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "batchrisk/losses.hpp"

namespace batchrisk {

// Matrix of batch-loss values: rows are hypotheses, columns the C(n,k)
// k-subsets of the evaluation set in colexicographic order. Entries must lie
// in [-1, 1], the range the Rademacher bounds assume.
class LossTable {
public:
    LossTable(std::vector<std::vector<double>> values, int n, int k,
              std::optional<LossKind> kind = std::nullopt);

    int rows() const { return static_cast<int>(values_.size()); }
    int cols() const { return cols_; }
    int n() const { return n_; }
    int k() const { return k_; }
    std::optional<LossKind> kind() const { return kind_; }
    double at(int row, int col) const {
        return values_[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
    }
    const std::vector<double>& row(int r) const {
        return values_[static_cast<std::size_t>(r)];
    }

private:
    std::vector<std::vector<double>> values_;
    int cols_;
    int n_;
    int k_;
    std::optional<LossKind> kind_;
};

// Exhaustive sign-vector enumeration is capped at this many columns
// (2^20 assignments).
inline constexpr int kRademacherExactMaxCols = 20;

// Exact E_sigma[ sup over rows of the signed column mean ] over all 2^cols
// sign assignments.
double k_rademacher_exact(const LossTable& table);

struct RademacherEstimate {
    double estimate;
    double std_error;
};

// Monte-Carlo over sigma; deterministic per seed.
RademacherEstimate k_rademacher_mc(const LossTable& table, std::uint64_t sigma_draws,
                                   std::uint64_t seed);

// sqrt(2 ln|A| / C(n,k)): the finite-class bound on the exact complexity.
double massart_bound(std::uint64_t cardinality, int n, int k);

// Shattering coefficient carried in log space so 2^n never overflows.
struct ShatterCoefficient {
    double log_value;

    static ShatterCoefficient from_count(double count);
    static ShatterCoefficient from_log(double log_count) { return {log_count}; }
    static ShatterCoefficient pow2(double exponent);
};

// Class-dependent bound term xi = sqrt(2 ln S / C(n,k)).
double xi(ShatterCoefficient shatter, int n, int k);

// Class-independent deviation term psi = sqrt(ln(1/delta) / n).
double psi(int n, double delta);

struct XiRatio {
    double ratio;  // sqrt(n / C(n,k)), xi(k) relative to xi(1)
    double upper;  // k^{k/2} / n^{(k-1)/2}
};

XiRatio xi_ratio(int n, int k);

// xi with the shattering coefficient replaced by its Sauer bound n^V.
double sauer_xi(int vc_dimension, int n, int k);

enum class BoundRegime { kTheorem3, kCorollary4, kVc };

std::string_view to_string(BoundRegime regime);

struct BoundReport {
    double empirical_risk = 0.0;
    double rademacher_term = 0.0;
    double xi = 0.0;
    double psi = 0.0;
    double c = 0.0;
    double delta = 0.0;
    double total = 0.0;
    BoundRegime regime = BoundRegime::kTheorem3;
    bool vacuous = false;       // xi >= 1: uninformative for [0,1]-valued risks
    bool strict_constants = false;
    double xi_factor = 1.0;     // multiplier applied to xi in `total`
    double psi_factor = 1.0;    // multiplier applied to psi in `total`
};

// total = empirical + 2 * rademacher + c * sqrt(ln(1/delta)/n) with
// c = 1 (zero-one) or c = 2 (mse).
BoundReport theorem3_bound(double empirical_risk, double rademacher, LossKind kind, int n,
                           double delta);

// Classification form: total = empirical + xi + psi. `strict` applies the
// proof's 2*beta and c multipliers instead of the stated ones; with
// beta = 1/2 and c = 1 the two readings coincide, and the report records
// which factors were used.
BoundReport corollary4_bound(double empirical_risk, ShatterCoefficient shatter, int n,
                             int k, double delta, bool strict = false);

// corollary4_bound with the Sauer rewrite ln S <= V ln n.
BoundReport vc_bound(double empirical_risk, int vc_dimension, int n, int k, double delta,
                     bool strict = false);

// Builds the (hypothesis x k-subset) table of batch losses. `predictions`
// holds one row of per-sample model outputs per hypothesis.
LossTable loss_table_from_evalsets(const std::vector<std::vector<double>>& predictions,
                                   std::span<const double> labels, int k, LossKind kind);

// Table of plain subset prediction means (no loss applied); the raw-class
// side of the peel-off inequality R(l o F) <= beta * R(F).
LossTable subset_mean_table(const std::vector<std::vector<double>>& predictions, int k);

} // namespace batchrisk

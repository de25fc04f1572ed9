#include "batchrisk/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "batchrisk/accumulate.hpp"
#include "batchrisk/combinatorics.hpp"
#include "batchrisk/errors.hpp"
#include "batchrisk/rng.hpp"

namespace batchrisk {

namespace {

constexpr std::string_view kSigmaStream = "k_rademacher_mc";

double sup_of_signed_means(const LossTable& table, std::span<const double> signs) {
    const double cols = static_cast<double>(table.cols());
    double best = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < table.rows(); ++r) {
        StableSum dot;
        for (int c = 0; c < table.cols(); ++c)
            dot.add(signs[static_cast<std::size_t>(c)] * table.at(r, c));
        best = std::max(best, dot.get() / cols);
    }
    return best;
}

} // namespace

LossTable::LossTable(std::vector<std::vector<double>> values, int n, int k,
                     std::optional<LossKind> kind)
    : values_(std::move(values)), n_(n), k_(k), kind_(kind) {
    if (values_.empty()) throw ArgumentError("LossTable: at least one row required");
    std::uint64_t expected_cols = 0;
    if (!binom_within(n, k, kEnumerationCap, expected_cols))
        throw BudgetError("LossTable: C(n,k) exceeds the table cap");
    cols_ = static_cast<int>(expected_cols);
    for (std::size_t r = 0; r < values_.size(); ++r) {
        const auto& row = values_[r];
        if (row.size() != expected_cols)
            throw ArgumentError("LossTable: row " + std::to_string(r) + " has " +
                                std::to_string(row.size()) + " columns, expected C(" +
                                std::to_string(n) + "," + std::to_string(k) + ")=" +
                                std::to_string(expected_cols));
        for (double v : row)
            if (!std::isfinite(v) || v < -1.0 || v > 1.0)
                throw DomainError("LossTable: entry " + std::to_string(v) +
                                  " outside [-1, 1]");
    }
}

double k_rademacher_exact(const LossTable& table) {
    const int cols = table.cols();
    if (cols > kRademacherExactMaxCols)
        throw BudgetError("k_rademacher_exact: " + std::to_string(cols) +
                          " columns require 2^" + std::to_string(cols) +
                          " sign vectors; use k_rademacher_mc");
    const int rows = table.rows();
    const auto assignments = std::uint64_t{1} << cols;

    // Gray-code walk over sign vectors: one sign flips per step, so each row's
    // dot product updates in O(1).
    std::vector<double> dot(static_cast<std::size_t>(rows), 0.0);
    std::vector<double> sign(static_cast<std::size_t>(cols), 1.0);
    for (int r = 0; r < rows; ++r) {
        StableSum s;
        for (int c = 0; c < cols; ++c) s.add(table.at(r, c));
        dot[static_cast<std::size_t>(r)] = s.get();
    }

    StableSum sup_sum;
    std::uint64_t gray_prev = 0;
    for (std::uint64_t i = 0; i < assignments; ++i) {
        const std::uint64_t gray = i ^ (i >> 1);
        const std::uint64_t changed = gray ^ gray_prev;
        if (changed != 0) {
            int bit = 0;
            while (((changed >> bit) & 1ULL) == 0) ++bit;
            sign[static_cast<std::size_t>(bit)] = -sign[static_cast<std::size_t>(bit)];
            const double delta = 2.0 * sign[static_cast<std::size_t>(bit)];
            for (int r = 0; r < rows; ++r)
                dot[static_cast<std::size_t>(r)] += delta * table.at(r, bit);
        }
        gray_prev = gray;
        sup_sum.add(*std::max_element(dot.begin(), dot.end()));
    }
    return sup_sum.get() / static_cast<double>(assignments) / static_cast<double>(cols);
}

RademacherEstimate k_rademacher_mc(const LossTable& table, std::uint64_t sigma_draws,
                                   std::uint64_t seed) {
    if (sigma_draws < 2) throw ArgumentError("k_rademacher_mc: sigma_draws must be >= 2");
    std::vector<double> signs(static_cast<std::size_t>(table.cols()));
    MeanVariance stats;
    for (std::uint64_t d = 0; d < sigma_draws; ++d) {
        auto gen = rng::substream(seed, kSigmaStream, d);
        for (auto& s : signs) s = gen.rademacher();
        stats.add(sup_of_signed_means(table, signs));
    }
    return {stats.mean(), stats.std_error()};
}

double massart_bound(std::uint64_t cardinality, int n, int k) {
    if (cardinality < 1) throw ArgumentError("massart_bound: cardinality must be >= 1");
    if (cardinality == 1) return 0.0;
    const double log_card = std::log(static_cast<double>(cardinality));
    return std::exp(0.5 * (std::log(2.0 * log_card) - log_binom(n, k)));
}

ShatterCoefficient ShatterCoefficient::from_count(double count) {
    if (!(count >= 1.0))
        throw ArgumentError("ShatterCoefficient: count must be >= 1");
    return {std::log(count)};
}

ShatterCoefficient ShatterCoefficient::pow2(double exponent) {
    if (exponent < 0.0)
        throw ArgumentError("ShatterCoefficient: negative power of two");
    return {exponent * std::numbers::ln2};
}

double xi(ShatterCoefficient shatter, int n, int k) {
    if (shatter.log_value < 0.0)
        throw ArgumentError("xi: shattering coefficient below 1");
    if (shatter.log_value == 0.0) return 0.0;
    return std::exp(0.5 * (std::log(2.0 * shatter.log_value) - log_binom(n, k)));
}

double psi(int n, double delta) {
    if (n < 1) throw ArgumentError("psi: n must be >= 1");
    if (!(delta > 0.0) || !(delta < 1.0))
        throw ArgumentError("psi: delta=" + std::to_string(delta) + " outside (0, 1)");
    return std::sqrt(std::log(1.0 / delta) / static_cast<double>(n));
}

XiRatio xi_ratio(int n, int k) {
    if (k < 1 || k > n) throw ArgumentError("xi_ratio: k outside [1, n]");
    const double ln_n = std::log(static_cast<double>(n));
    const double ratio = std::exp(0.5 * (ln_n - log_binom(n, k)));
    const double upper = std::exp(0.5 * (static_cast<double>(k) * std::log(static_cast<double>(k)) -
                                         static_cast<double>(k - 1) * ln_n));
    return {ratio, upper};
}

double sauer_xi(int vc_dimension, int n, int k) {
    if (vc_dimension < 1) throw ArgumentError("sauer_xi: VC dimension must be >= 1");
    if (n < 2) throw ArgumentError("sauer_xi: n must be >= 2");
    return xi(ShatterCoefficient::from_log(static_cast<double>(vc_dimension) *
                                           std::log(static_cast<double>(n))),
              n, k);
}

std::string_view to_string(BoundRegime regime) {
    switch (regime) {
        case BoundRegime::kTheorem3: return "theorem3";
        case BoundRegime::kCorollary4: return "corollary4";
        case BoundRegime::kVc: return "vc";
    }
    throw ArgumentError("unknown BoundRegime");
}

BoundReport theorem3_bound(double empirical_risk, double rademacher, LossKind kind, int n,
                           double delta) {
    const LossConstants constants = loss_constants(kind);
    BoundReport report;
    report.empirical_risk = empirical_risk;
    report.rademacher_term = rademacher;
    report.psi = psi(n, delta);
    report.c = constants.c;
    report.delta = delta;
    report.psi_factor = constants.c;
    report.regime = BoundRegime::kTheorem3;
    report.total = empirical_risk + 2.0 * rademacher + constants.c * report.psi;
    return report;
}

namespace {

BoundReport shatter_bound(double empirical_risk, double xi_value, int n, double delta,
                          BoundRegime regime, bool strict) {
    BoundReport report;
    report.empirical_risk = empirical_risk;
    report.xi = xi_value;
    report.psi = psi(n, delta);
    report.c = 1.0;  // c_{0/1}
    report.delta = delta;
    report.regime = regime;
    report.strict_constants = strict;
    // The stated corollary reads total = r + xi + psi. Its proof carries the
    // factors 2*beta and c, which for classification (beta = 1/2, c = 1)
    // multiply out to exactly the stated form.
    const double beta = 0.5;
    report.xi_factor = strict ? 2.0 * beta : 1.0;
    report.psi_factor = strict ? report.c : 1.0;
    report.total = empirical_risk + report.xi_factor * xi_value + report.psi_factor * report.psi;
    report.vacuous = xi_value >= 1.0;
    return report;
}

} // namespace

BoundReport corollary4_bound(double empirical_risk, ShatterCoefficient shatter, int n,
                             int k, double delta, bool strict) {
    if (k < 1 || k > n) throw ArgumentError("corollary4_bound: k outside [1, n]");
    return shatter_bound(empirical_risk, xi(shatter, n, k), n, delta,
                         BoundRegime::kCorollary4, strict);
}

BoundReport vc_bound(double empirical_risk, int vc_dimension, int n, int k, double delta,
                     bool strict) {
    if (k < 1 || k > n) throw ArgumentError("vc_bound: k outside [1, n]");
    return shatter_bound(empirical_risk, sauer_xi(vc_dimension, n, k), n, delta,
                         BoundRegime::kVc, strict);
}

LossTable loss_table_from_evalsets(const std::vector<std::vector<double>>& predictions,
                                   std::span<const double> labels, int k, LossKind kind) {
    if (predictions.empty())
        throw ArgumentError("loss_table_from_evalsets: no hypotheses");
    const int n = static_cast<int>(labels.size());
    std::uint64_t cols = 0;
    if (!binom_within(n, k, kEnumerationCap, cols))
        throw BudgetError("loss_table_from_evalsets: C(n,k) exceeds the cap of " +
                          std::to_string(kEnumerationCap));
    for (const auto& row : predictions)
        if (static_cast<int>(row.size()) != n)
            throw ArgumentError("loss_table_from_evalsets: hypothesis row length " +
                                std::to_string(row.size()) + " does not match " +
                                std::to_string(n) + " labels");

    std::vector<std::vector<double>> values(predictions.size());
    std::vector<double> batch_preds(static_cast<std::size_t>(k));
    std::vector<double> batch_labels(static_cast<std::size_t>(k));
    for (std::size_t h = 0; h < predictions.size(); ++h) {
        auto& out_row = values[h];
        out_row.reserve(cols);
        for_each_subset_colex(n, k, [&](const std::vector<int>& subset) {
            for (int j = 0; j < k; ++j) {
                const auto idx = static_cast<std::size_t>(subset[static_cast<std::size_t>(j)]);
                batch_preds[static_cast<std::size_t>(j)] = predictions[h][idx];
                batch_labels[static_cast<std::size_t>(j)] = labels[idx];
            }
            out_row.push_back(batch_loss(kind, batch_preds, batch_labels));
        });
    }
    return LossTable(std::move(values), n, k, kind);
}

LossTable subset_mean_table(const std::vector<std::vector<double>>& predictions, int k) {
    if (predictions.empty()) throw ArgumentError("subset_mean_table: no hypotheses");
    const int n = static_cast<int>(predictions.front().size());
    std::uint64_t cols = 0;
    if (!binom_within(n, k, kEnumerationCap, cols))
        throw BudgetError("subset_mean_table: C(n,k) exceeds the cap of " +
                          std::to_string(kEnumerationCap));
    std::vector<std::vector<double>> values(predictions.size());
    for (std::size_t h = 0; h < predictions.size(); ++h) {
        if (static_cast<int>(predictions[h].size()) != n)
            throw ArgumentError("subset_mean_table: ragged prediction rows");
        auto& out_row = values[h];
        for_each_subset_colex(n, k, [&](const std::vector<int>& subset) {
            StableSum sum;
            for (int idx : subset) sum.add(predictions[h][static_cast<std::size_t>(idx)]);
            out_row.push_back(sum.get() / static_cast<double>(k));
        });
    }
    return LossTable(std::move(values), n, k);
}

} // namespace batchrisk

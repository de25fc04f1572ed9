#include "batchrisk/risk.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "batchrisk/accumulate.hpp"
#include "batchrisk/combinatorics.hpp"
#include "batchrisk/errors.hpp"
#include "batchrisk/rng.hpp"

namespace batchrisk {

namespace {

constexpr std::string_view kMcStream = "empirical_k_risk_mc";

void require_k_in_range(int k, int n) {
    if (k < 1 || k > n)
        throw ArgumentError("k=" + std::to_string(k) + " outside [1, n] with n=" +
                            std::to_string(n));
}

// Per-item terms reused across subsets: predictions, labels, and (for the
// geometric cross-entropy) the log factors.
struct ItemTerms {
    std::vector<double> pred;
    std::vector<double> label;
    std::vector<double> log_pred;
    std::vector<double> log_1m_pred;
};

ItemTerms precompute_terms(const EvalSet& set, LossKind kind) {
    set.validate_for(kind);
    ItemTerms t;
    const auto n = static_cast<std::size_t>(set.size());
    t.pred.reserve(n);
    t.label.reserve(n);
    const bool geometric = kind == LossKind::kGeomCrossEntropy;
    if (geometric) {
        t.log_pred.reserve(n);
        t.log_1m_pred.reserve(n);
    }
    for (const auto& item : set.items()) {
        t.pred.push_back(item.prediction);
        t.label.push_back(item.label);
        if (geometric) {
            const double p = detail::clamp_log_domain(item.prediction);
            t.log_pred.push_back(std::log(p));
            t.log_1m_pred.push_back(std::log(1.0 - p));
        }
    }
    return t;
}

double subset_batch_loss(LossKind kind, const ItemTerms& t, std::span<const int> subset) {
    const double k = static_cast<double>(subset.size());
    StableSum pred_sum;
    StableSum label_sum;
    StableSum log_sum;
    StableSum log1m_sum;
    const bool geometric = kind == LossKind::kGeomCrossEntropy;
    for (int idx : subset) {
        const auto i = static_cast<std::size_t>(idx);
        pred_sum.add(t.pred[i]);
        label_sum.add(t.label[i]);
        if (geometric) {
            log_sum.add(t.log_pred[i]);
            log1m_sum.add(t.log_1m_pred[i]);
        }
    }
    const BatchStats stats{pred_sum.get() / k, label_sum.get() / k, log_sum.get() / k,
                           log1m_sum.get() / k};
    return loss_from_stats(kind, stats);
}

// r_1: mean pointwise loss (batch loss of singletons).
double risk_1(LossKind kind, const ItemTerms& t) {
    StableSum sum;
    for (std::size_t i = 0; i < t.pred.size(); ++i) {
        const BatchStats stats{t.pred[i], t.label[i],
                               kind == LossKind::kGeomCrossEntropy ? t.log_pred[i] : 0.0,
                               kind == LossKind::kGeomCrossEntropy ? t.log_1m_pred[i] : 0.0};
        sum.add(loss_from_stats(kind, stats));
    }
    return sum.get() / static_cast<double>(t.pred.size());
}

// r_n: batch loss of the whole set.
double risk_n(LossKind kind, const ItemTerms& t) {
    std::vector<int> all(t.pred.size());
    std::iota(all.begin(), all.end(), 0);
    return subset_batch_loss(kind, t, all);
}

} // namespace

EvalSet::EvalSet(std::vector<LabeledPrediction> items) : items_(std::move(items)) {
    if (items_.empty()) throw ArgumentError("EvalSet: at least one item required");
}

EvalSet EvalSet::from_columns(std::span<const double> predictions,
                              std::span<const double> labels) {
    if (predictions.size() != labels.size())
        throw ArgumentError("EvalSet: column length mismatch");
    std::vector<LabeledPrediction> items;
    items.reserve(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i)
        items.push_back({predictions[i], labels[i]});
    return EvalSet(std::move(items));
}

std::vector<double> EvalSet::predictions() const {
    std::vector<double> out;
    out.reserve(items_.size());
    for (const auto& item : items_) out.push_back(item.prediction);
    return out;
}

std::vector<double> EvalSet::labels() const {
    std::vector<double> out;
    out.reserve(items_.size());
    for (const auto& item : items_) out.push_back(item.label);
    return out;
}

void EvalSet::validate_for(LossKind kind) const {
    for (std::size_t i = 0; i < items_.size(); ++i)
        detail::check_element(kind, items_[i].prediction, items_[i].label,
                              "item " + std::to_string(i));
}

DiscreteDistribution::DiscreteDistribution(std::vector<Atom> atoms)
    : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw ArgumentError("DiscreteDistribution: no atoms");
    StableSum total;
    cumulative_.reserve(atoms_.size());
    for (const auto& atom : atoms_) {
        if (!(atom.probability > 0.0))
            throw ArgumentError("DiscreteDistribution: probabilities must be positive");
        total.add(atom.probability);
        cumulative_.push_back(total.get());
    }
    if (std::abs(total.get() - 1.0) > 1e-12)
        throw ArgumentError("DiscreteDistribution: probabilities sum to " +
                            std::to_string(total.get()) + ", expected 1");
    cumulative_.back() = 1.0;
}

int DiscreteDistribution::sample_index(double uniform01) const {
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), uniform01);
    const auto idx = static_cast<std::size_t>(it - cumulative_.begin());
    return static_cast<int>(std::min(idx, atoms_.size() - 1));
}

std::string_view to_string(RiskMethod method) {
    switch (method) {
        case RiskMethod::kExact: return "exact";
        case RiskMethod::kClosedForm: return "closed_form";
        case RiskMethod::kMonteCarlo: return "monte_carlo";
    }
    throw ArgumentError("unknown RiskMethod");
}

RiskMethod risk_method_from_string(std::string_view name) {
    if (name == "exact") return RiskMethod::kExact;
    if (name == "closed" || name == "closed_form") return RiskMethod::kClosedForm;
    if (name == "mc" || name == "monte_carlo") return RiskMethod::kMonteCarlo;
    throw ArgumentError("unknown risk method '" + std::string(name) +
                        "' (expected exact|closed|mc)");
}

double interpolation_coefficient(int k, int n) {
    if (n < 2) throw ArgumentError("interpolation_coefficient: n must be >= 2");
    require_k_in_range(k, n);
    return static_cast<double>(n) * static_cast<double>(k - 1) /
           (static_cast<double>(k) * static_cast<double>(n - 1));
}

RiskEstimate empirical_k_risk_exact(const EvalSet& set, int k, LossKind kind) {
    const int n = set.size();
    require_k_in_range(k, n);
    std::uint64_t subsets = 0;
    if (!binom_within(n, k, kEnumerationCap, subsets))
        throw BudgetError("empirical_k_risk_exact: C(" + std::to_string(n) + "," +
                          std::to_string(k) + ") exceeds the cap of " +
                          std::to_string(kEnumerationCap) +
                          "; use closed_form or monte_carlo");
    const ItemTerms terms = precompute_terms(set, kind);
    StableSum sum;
    for_each_subset_colex(n, k, [&](const std::vector<int>& subset) {
        sum.add(subset_batch_loss(kind, terms, subset));
    });
    RiskEstimate est;
    est.value = sum.get() / static_cast<double>(subsets);
    est.k = k;
    est.kind = kind;
    est.method = RiskMethod::kExact;
    est.subsets_evaluated = subsets;
    return est;
}

RiskEstimate empirical_k_risk_closed(const EvalSet& set, int k, LossKind kind) {
    if (!closed_form_eligible(kind))
        throw UnsupportedLossError("empirical_k_risk_closed: no convex-combination "
                                   "identity for " + std::string(to_string(kind)));
    const int n = set.size();
    require_k_in_range(k, n);
    const ItemTerms terms = precompute_terms(set, kind);
    RiskEstimate est;
    est.k = k;
    est.kind = kind;
    est.method = RiskMethod::kClosedForm;
    if (n == 1) {
        est.value = risk_1(kind, terms);
        est.subsets_evaluated = 1;
        return est;
    }
    const double a = interpolation_coefficient(k, n);
    const double r1 = risk_1(kind, terms);
    const double rn = risk_n(kind, terms);
    est.value = (1.0 - a) * r1 + a * rn;
    est.subsets_evaluated = static_cast<std::uint64_t>(n) + 1;  // n singletons + full set
    return est;
}

RiskEstimate empirical_k_risk_mc(const EvalSet& set, int k, LossKind kind,
                                 std::uint64_t draws, std::uint64_t seed) {
    const int n = set.size();
    require_k_in_range(k, n);
    if (draws < 2) throw ArgumentError("empirical_k_risk_mc: draws must be >= 2");
    const ItemTerms terms = precompute_terms(set, kind);

    std::vector<int> indices(static_cast<std::size_t>(n));
    std::vector<int> subset(static_cast<std::size_t>(k));
    MeanVariance stats;
    for (std::uint64_t d = 0; d < draws; ++d) {
        auto gen = rng::substream(seed, kMcStream, d);
        std::iota(indices.begin(), indices.end(), 0);
        // Partial Fisher-Yates: the first k entries are a uniform k-subset.
        for (int j = 0; j < k; ++j) {
            const auto pick =
                j + static_cast<int>(gen.uniform_below(static_cast<std::uint64_t>(n - j)));
            std::swap(indices[static_cast<std::size_t>(j)],
                      indices[static_cast<std::size_t>(pick)]);
            subset[static_cast<std::size_t>(j)] = indices[static_cast<std::size_t>(j)];
        }
        stats.add(subset_batch_loss(kind, terms, subset));
    }

    RiskEstimate est;
    est.value = stats.mean();
    est.k = k;
    est.kind = kind;
    est.method = RiskMethod::kMonteCarlo;
    est.std_error = stats.std_error();
    est.subsets_evaluated = draws;
    est.seed = seed;
    return est;
}

std::vector<RiskEstimate> risk_curve(const EvalSet& set, std::span<const int> ks,
                                     LossKind kind, RiskMethod method,
                                     const MonteCarloOptions& mc) {
    std::vector<RiskEstimate> out;
    out.reserve(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const std::string context =
            "risk_curve: at ks[" + std::to_string(i) + "]=" + std::to_string(ks[i]) + ": ";
        try {
            switch (method) {
                case RiskMethod::kExact:
                    out.push_back(empirical_k_risk_exact(set, ks[i], kind));
                    break;
                case RiskMethod::kClosedForm:
                    out.push_back(empirical_k_risk_closed(set, ks[i], kind));
                    break;
                case RiskMethod::kMonteCarlo:
                    out.push_back(empirical_k_risk_mc(set, ks[i], kind, mc.draws, mc.seed));
                    break;
            }
        } catch (const BudgetError& e) {
            throw BudgetError(context + e.what());
        } catch (const UnsupportedLossError& e) {
            throw UnsupportedLossError(context + e.what());
        } catch (const DomainError& e) {
            throw DomainError(context + e.what());
        } catch (const Error& e) {
            throw ArgumentError(context + e.what());
        }
    }
    return out;
}

double error_variance_mse(const EvalSet& set) {
    const int n = set.size();
    if (n < 2) throw ArgumentError("error_variance_mse: n must be >= 2");
    const ItemTerms terms = precompute_terms(set, LossKind::kMse);
    const double r1 = risk_1(LossKind::kMse, terms);
    const double rn = risk_n(LossKind::kMse, terms);
    return static_cast<double>(n) / static_cast<double>(n - 1) * (r1 - rn);
}

RiskEstimate expected_k_risk_exact(const DiscreteDistribution& dist, int k, LossKind kind) {
    if (k < 1) throw ArgumentError("expected_k_risk_exact: k must be >= 1");
    const int m = dist.size();
    // Budget on atoms^k, the number of ordered draws the multisets compress.
    double ordered = 1.0;
    for (int i = 0; i < k && m > 1; ++i) {
        ordered *= static_cast<double>(m);
        if (ordered > static_cast<double>(kEnumerationCap))
            throw BudgetError("expected_k_risk_exact: " + std::to_string(m) + "^" +
                              std::to_string(k) + " ordered draws exceed the cap of " +
                              std::to_string(kEnumerationCap));
    }
    for (const auto& atom : dist.atoms())
        detail::check_element(kind, atom.item.prediction, atom.item.label, "atom");

    const bool geometric = kind == LossKind::kGeomCrossEntropy;
    std::vector<double> log_pred(static_cast<std::size_t>(m));
    std::vector<double> log_1m(static_cast<std::size_t>(m));
    if (geometric) {
        for (int i = 0; i < m; ++i) {
            const double p =
                detail::clamp_log_domain(dist[static_cast<std::size_t>(i)].item.prediction);
            log_pred[static_cast<std::size_t>(i)] = std::log(p);
            log_1m[static_cast<std::size_t>(i)] = std::log(1.0 - p);
        }
    }

    // Enumerate count vectors (c_0..c_{m-1}) summing to k. Weight of a
    // multiset is multinomial(k; c) * prod p_i^{c_i}.
    std::vector<int> counts(static_cast<std::size_t>(m), 0);
    StableSum total;
    std::uint64_t multisets = 0;

    auto multiset_weight = [&]() {
        Uint128 multinomial = 1;
        int assigned = 0;
        for (int i = 0; i < m; ++i) {
            const int c = counts[static_cast<std::size_t>(i)];
            assigned += c;
            multinomial *= binom(assigned, c);
        }
        double weight = static_cast<double>(static_cast<std::uint64_t>(multinomial));
        for (int i = 0; i < m; ++i)
            for (int r = 0; r < counts[static_cast<std::size_t>(i)]; ++r)
                weight *= dist[static_cast<std::size_t>(i)].probability;
        return weight;
    };

    auto multiset_loss = [&]() {
        const double dk = static_cast<double>(k);
        StableSum pred_sum;
        StableSum label_sum;
        StableSum log_sum;
        StableSum log1m_sum;
        for (int i = 0; i < m; ++i) {
            const double c = static_cast<double>(counts[static_cast<std::size_t>(i)]);
            if (c == 0.0) continue;
            const auto& atom = dist[static_cast<std::size_t>(i)].item;
            pred_sum.add(c * atom.prediction);
            label_sum.add(c * atom.label);
            if (geometric) {
                log_sum.add(c * log_pred[static_cast<std::size_t>(i)]);
                log1m_sum.add(c * log_1m[static_cast<std::size_t>(i)]);
            }
        }
        const BatchStats stats{pred_sum.get() / dk, label_sum.get() / dk,
                               log_sum.get() / dk, log1m_sum.get() / dk};
        return loss_from_stats(kind, stats);
    };

    auto recurse = [&](auto&& self, int atom_index, int remaining) -> void {
        if (atom_index == m - 1) {
            counts[static_cast<std::size_t>(atom_index)] = remaining;
            total.add(multiset_weight() * multiset_loss());
            ++multisets;
            return;
        }
        for (int c = remaining; c >= 0; --c) {
            counts[static_cast<std::size_t>(atom_index)] = c;
            self(self, atom_index + 1, remaining - c);
        }
    };
    recurse(recurse, 0, k);

    RiskEstimate est;
    est.value = total.get();
    est.k = k;
    est.kind = kind;
    est.method = RiskMethod::kExact;
    est.subsets_evaluated = multisets;
    return est;
}

double generalization_gap(const EvalSet& train, const EvalSet& test, int k, LossKind kind,
                          RiskMethod method, const MonteCarloOptions& mc) {
    require_k_in_range(k, std::min(train.size(), test.size()));
    const std::array<int, 1> ks{k};
    const double train_risk = risk_curve(train, ks, kind, method, mc).front().value;
    const double test_risk = risk_curve(test, ks, kind, method, mc).front().value;
    return std::abs(test_risk - train_risk);
}

} // namespace batchrisk

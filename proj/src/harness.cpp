#include "batchrisk/harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <thread>

#include "batchrisk/accumulate.hpp"
#include "batchrisk/combinatorics.hpp"
#include "batchrisk/complexity.hpp"
#include "batchrisk/errors.hpp"
#include "batchrisk/rng.hpp"
#include "batchrisk/version.hpp"

namespace batchrisk {

namespace {

// ------------------------------------------------------------------ helpers

// Collects violations for one check. A violation beyond tolerance fails the
// check and captures the first replayable witness.
class Check {
public:
    Check(std::string name, double tolerance) {
        result_.name = std::move(name);
        result_.tolerance = tolerance;
    }

    void observe(double violation, const std::function<Json()>& witness) {
        ++result_.instances_run;
        result_.max_violation = std::max(result_.max_violation, violation);
        if (violation > result_.tolerance && !violated_) {
            violated_ = true;
            result_.counterexample = witness();
        }
    }

    // For aggregate checks whose single observation summarizes many trials.
    void add_instances(std::uint64_t count) { result_.instances_run += count; }

    // The known-bad fixture: `violation` must exceed tolerance or the check
    // is reported as failing its self-audit.
    void audit(double violation) { result_.audit_flagged = violation > result_.tolerance; }

    bool violated() const { return violated_; }

    CheckResult finish() && {
        result_.passed = !violated_ && result_.audit_flagged;
        return std::move(result_);
    }

    static CheckResult skipped(std::string name) {
        CheckResult r;
        r.name = std::move(name);
        r.skipped = true;
        return r;
    }

private:
    CheckResult result_;
    bool violated_ = false;
};

double tol_abs_rel(double reference) {
    return std::max(1e-9, 1e-9 * std::abs(reference));
}

Json eval_set_json(const EvalSet& set) {
    Json preds = Json::array();
    Json labels = Json::array();
    for (const auto& item : set.items()) {
        preds.push_back(item.prediction);
        labels.push_back(item.label);
    }
    Json j;
    j["predictions"] = std::move(preds);
    j["labels"] = std::move(labels);
    return j;
}

Json dist_json(const DiscreteDistribution& dist) {
    Json atoms = Json::array();
    for (const auto& atom : dist.atoms()) {
        Json a;
        a["prediction"] = atom.item.prediction;
        a["label"] = atom.item.label;
        a["probability"] = atom.probability;
        atoms.push_back(std::move(a));
    }
    Json j;
    j["atoms"] = std::move(atoms);
    return j;
}

EvalSet random_eval_set(rng::Xoshiro256ss& gen, LossKind kind, int n) {
    std::vector<LabeledPrediction> items;
    items.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        LabeledPrediction item{};
        switch (kind) {
            case LossKind::kMse:
                item.prediction = gen.uniform01();
                item.label = gen.uniform01();
                break;
            case LossKind::kZeroOne:
                item.prediction = gen.rademacher();
                item.label = gen.rademacher();
                break;
            default:
                item.prediction = gen.uniform01();
                item.label = gen.uniform_below(2) ? 1.0 : 0.0;
                break;
        }
        items.push_back(item);
    }
    return EvalSet(std::move(items));
}

DiscreteDistribution random_distribution(rng::Xoshiro256ss& gen, LossKind kind,
                                         int max_atoms) {
    const int m = 1 + static_cast<int>(gen.uniform_below(static_cast<std::uint64_t>(max_atoms)));
    std::vector<double> weights(static_cast<std::size_t>(m));
    double total = 0.0;
    for (auto& w : weights) {
        w = gen.uniform01() + 0.05;
        total += w;
    }
    std::vector<DiscreteDistribution::Atom> atoms;
    atoms.reserve(weights.size());
    for (int i = 0; i < m; ++i) {
        DiscreteDistribution::Atom atom{};
        switch (kind) {
            case LossKind::kMse:
                atom.item.prediction = gen.uniform01();
                atom.item.label = gen.uniform01();
                break;
            case LossKind::kZeroOne:
                atom.item.prediction = gen.rademacher();
                atom.item.label = gen.rademacher();
                break;
            default:
                atom.item.prediction = gen.uniform01();
                atom.item.label = gen.uniform_below(2) ? 1.0 : 0.0;
                break;
        }
        atom.probability = weights[static_cast<std::size_t>(i)] / total;
        atoms.push_back(atom);
    }
    return DiscreteDistribution(std::move(atoms));
}

LossTable random_loss_table(rng::Xoshiro256ss& gen, int rows, int n, int k) {
    std::uint64_t cols = 0;
    binom_within(n, k, kEnumerationCap, cols);
    std::vector<std::vector<double>> values(static_cast<std::size_t>(rows));
    for (auto& row : values) {
        row.resize(cols);
        for (auto& v : row) v = 2.0 * gen.uniform01() - 1.0;
    }
    return LossTable(std::move(values), n, k);
}

// (n, k) pairs with C(n,k) <= 16, the exact-Rademacher test regime.
struct TableShape {
    int n;
    int k;
};

TableShape random_small_shape(rng::Xoshiro256ss& gen) {
    static constexpr TableShape shapes[] = {
        {4, 1}, {5, 1}, {6, 1}, {8, 1}, {16, 1}, {4, 2}, {5, 2}, {6, 2},
        {4, 3}, {5, 3}, {6, 5}, {16, 15}, {6, 6}, {5, 4},
    };
    return shapes[gen.uniform_below(std::size(shapes))];
}

// ------------------------------------------------------------------- checks

CheckResult check_property1(std::uint64_t seed, std::uint64_t sets) {
    const char* name = "property1_closed_equals_exact";
    if (sets == 0) return Check::skipped(name);
    Check check(name, 0.0);  // violations already tolerance-adjusted
    constexpr LossKind kinds[] = {LossKind::kMse, LossKind::kZeroOne,
                                  LossKind::kGeomCrossEntropy};
    for (std::uint64_t i = 0; i < sets; ++i) {
        auto gen = rng::substream(seed, name, i);
        const LossKind kind = kinds[gen.uniform_below(3)];
        const int n = 2 + static_cast<int>(gen.uniform_below(11));
        const EvalSet set = random_eval_set(gen, kind, n);
        for (int k = 1; k <= n; ++k) {
            const double exact = empirical_k_risk_exact(set, k, kind).value;
            const double closed = empirical_k_risk_closed(set, k, kind).value;
            const double violation = std::abs(closed - exact) - tol_abs_rel(exact);
            check.observe(violation, [&] {
                Json j = eval_set_json(set);
                j["kind"] = std::string(to_string(kind));
                j["k"] = k;
                j["exact"] = exact;
                j["closed"] = closed;
                return j;
            });
            if (check.violated()) break;
        }
    }
    // Audit: closed form corrupted to a_{k,n} = k/n on a fixed fixture.
    {
        const EvalSet fixture = EvalSet::from_columns(std::array{0.0, 0.0, 1.0},
                                                      std::array{1.0, 0.0, 1.0});
        const int k = 2, n = 3;
        const double exact = empirical_k_risk_exact(fixture, k, LossKind::kMse).value;
        const double r1 = empirical_k_risk_exact(fixture, 1, LossKind::kMse).value;
        const double rn = empirical_k_risk_exact(fixture, n, LossKind::kMse).value;
        const double bad_a = static_cast<double>(k) / n;
        const double corrupted = (1.0 - bad_a) * r1 + bad_a * rn;
        check.audit(std::abs(corrupted - exact) - tol_abs_rel(exact));
    }
    return std::move(check).finish();
}

CheckResult check_empirical_mse_monotone(std::uint64_t seed, std::uint64_t sets) {
    const char* name = "empirical_mse_monotone_in_k";
    if (sets == 0) return Check::skipped(name);
    Check check(name, 1e-12);
    for (std::uint64_t i = 0; i < sets; ++i) {
        auto gen = rng::substream(seed, name, i);
        const int n = 2 + static_cast<int>(gen.uniform_below(11));
        const EvalSet set = random_eval_set(gen, LossKind::kMse, n);
        double prev = empirical_k_risk_exact(set, 1, LossKind::kMse).value;
        for (int k = 2; k <= n; ++k) {
            const double current = empirical_k_risk_exact(set, k, LossKind::kMse).value;
            check.observe(current - prev, [&] {
                Json j = eval_set_json(set);
                j["k"] = k;
                j["r_k"] = current;
                j["r_k_minus_1"] = prev;
                return j;
            });
            prev = current;
        }
    }
    check.audit(0.4 - 0.3);  // a curve that rises from 0.3 to 0.4 must be flagged
    return std::move(check).finish();
}

CheckResult check_expected_monotone(std::uint64_t seed, std::uint64_t dists) {
    const char* name = "expected_k_risk_monotone_doubly_convex";
    if (dists == 0) return Check::skipped(name);
    Check check(name, 1e-12);
    constexpr LossKind kinds[] = {LossKind::kMse, LossKind::kKl};
    for (std::uint64_t i = 0; i < dists; ++i) {
        auto gen = rng::substream(seed, name, i);
        const LossKind kind = kinds[gen.uniform_below(2)];
        const DiscreteDistribution dist = random_distribution(gen, kind, 5);
        double prev = expected_k_risk_exact(dist, 1, kind).value;
        for (int k = 2; k <= 4; ++k) {
            const double current = expected_k_risk_exact(dist, k, kind).value;
            check.observe(current - prev, [&] {
                Json j = dist_json(dist);
                j["kind"] = std::string(to_string(kind));
                j["k"] = k;
                j["r_k"] = current;
                j["r_k_minus_1"] = prev;
                return j;
            });
            prev = current;
        }
    }
    check.audit(0.2 - 0.1);
    return std::move(check).finish();
}

CheckResult check_unbiasedness(std::uint64_t seed, std::uint64_t dists,
                               std::uint64_t draws) {
    const char* name = "empirical_k_risk_unbiased";
    if (dists == 0 || draws == 0) return Check::skipped(name);
    Check check(name, 0.0);
    constexpr int n = 5;
    for (std::uint64_t i = 0; i < dists; ++i) {
        auto gen = rng::substream(seed, name, i);
        const DiscreteDistribution dist = random_distribution(gen, LossKind::kMse, 4);
        for (int k : {2, 3}) {
            const double expected = expected_k_risk_exact(dist, k, LossKind::kMse).value;
            MeanVariance stats;
            auto sampler = rng::substream(seed, "empirical_k_risk_unbiased/draws",
                                          i * 2 + static_cast<std::uint64_t>(k));
            std::vector<LabeledPrediction> items(n);
            for (std::uint64_t t = 0; t < draws; ++t) {
                for (auto& item : items)
                    item = dist[static_cast<std::size_t>(
                                    dist.sample_index(sampler.uniform01()))]
                               .item;
                stats.add(empirical_k_risk_exact(EvalSet(items), k, LossKind::kMse).value);
            }
            const double deviation = std::abs(stats.mean() - expected);
            const double allowance = 4.0 * stats.std_error() + 1e-12;
            check.observe(deviation - allowance, [&] {
                Json j = dist_json(dist);
                j["k"] = k;
                j["expected"] = expected;
                j["sample_mean"] = stats.mean();
                j["std_error"] = stats.std_error();
                j["draws"] = draws;
                return j;
            });
        }
    }
    check.audit(1.0);  // expectation shifted by 1 is far outside any band
    return std::move(check).finish();
}

CheckResult check_k_limit(std::uint64_t seed, std::uint64_t dists) {
    const char* name = "k_limit_constant_function";
    if (dists == 0) return Check::skipped(name);
    Check check(name, 1e-12);
    for (std::uint64_t i = 0; i < dists; ++i) {
        auto gen = rng::substream(seed, name, i);
        const DiscreteDistribution dist = random_distribution(gen, LossKind::kMse, 5);
        StableSum mean_pred;
        StableSum mean_label;
        for (const auto& atom : dist.atoms()) {
            mean_pred.add(atom.probability * atom.item.prediction);
            mean_label.add(atom.probability * atom.item.label);
        }
        const double limit =
            pointwise_loss(LossKind::kMse, mean_pred.get(), mean_label.get());
        double prev = std::numeric_limits<double>::infinity();
        for (int k = 1; k <= 6; ++k) {
            const double current = expected_k_risk_exact(dist, k, LossKind::kMse).value;
            // Monotone approach from above toward the k -> infinity limit.
            const double violation = std::max(current - prev, limit - current);
            check.observe(violation, [&] {
                Json j = dist_json(dist);
                j["k"] = k;
                j["r_k"] = current;
                j["limit"] = limit;
                return j;
            });
            prev = current;
        }
    }
    check.audit(0.1);  // a curve dipping 0.1 below its limit
    return std::move(check).finish();
}

CheckResult check_bce_counterexample(std::uint64_t seed, std::uint64_t budget) {
    const char* name = "bce_k_risk_can_increase";
    if (budget == 0) return Check::skipped(name);
    Check check(name, 0.0);
    const auto witness = find_bce_counterexample(seed, budget);
    double violation = 1.0;
    if (witness && certify_bce_counterexample(EvalSet(witness->items), witness->k))
        violation = 0.0;
    check.observe(violation, [&] {
        Json j;
        j["error"] = "no certified witness within budget";
        j["budget"] = budget;
        return j;
    });
    // Audit: a doctored witness (monotone bce curve) must fail certification.
    {
        const EvalSet monotone = EvalSet::from_columns(std::array{0.5, 0.5},
                                                       std::array{1.0, 0.0});
        check.audit(certify_bce_counterexample(monotone, 1) ? 0.0 : 1.0);
    }
    return std::move(check).finish();
}

CheckResult check_permutation_invariance(std::uint64_t seed, std::uint64_t sets) {
    const char* name = "permutation_invariance";
    if (sets == 0) return Check::skipped(name);
    Check check(name, 1e-12);
    for (std::uint64_t i = 0; i < sets; ++i) {
        auto gen = rng::substream(seed, name, i);
        const LossKind kind =
            kAllLossKinds[gen.uniform_below(std::size(kAllLossKinds))];
        const int n = 2 + static_cast<int>(gen.uniform_below(7));
        const EvalSet set = random_eval_set(gen, kind, n);
        auto shuffled = set.items();
        for (std::size_t j = shuffled.size(); j > 1; --j)
            std::swap(shuffled[j - 1], shuffled[gen.uniform_below(j)]);
        const EvalSet permuted{std::move(shuffled)};
        const int k = 1 + static_cast<int>(gen.uniform_below(static_cast<std::uint64_t>(n)));
        const double base = empirical_k_risk_exact(set, k, kind).value;
        const double perm = empirical_k_risk_exact(permuted, k, kind).value;
        check.observe(std::abs(base - perm), [&] {
            Json j = eval_set_json(set);
            j["kind"] = std::string(to_string(kind));
            j["k"] = k;
            j["original"] = base;
            j["permuted"] = perm;
            return j;
        });
    }
    // Audit: "permutation" that actually replaces an element.
    {
        const EvalSet a = EvalSet::from_columns(std::array{0.0, 1.0}, std::array{1.0, 1.0});
        const EvalSet b = EvalSet::from_columns(std::array{1.0, 1.0}, std::array{1.0, 1.0});
        check.audit(std::abs(empirical_k_risk_exact(a, 1, LossKind::kMse).value -
                             empirical_k_risk_exact(b, 1, LossKind::kMse).value));
    }
    return std::move(check).finish();
}

CheckResult check_mc_consistency(std::uint64_t seed, std::uint64_t trials,
                                 std::uint64_t draws) {
    const char* name = "monte_carlo_within_5_std_errors";
    if (trials == 0 || draws == 0) return Check::skipped(name);
    // Pass when at least 99% of trials land within 5 standard errors.
    Check check(name, 0.01);
    std::uint64_t failures = 0;
    Json first_failure;
    for (std::uint64_t i = 0; i < trials; ++i) {
        auto gen = rng::substream(seed, name, i);
        const LossKind kind = kAllLossKinds[gen.uniform_below(std::size(kAllLossKinds))];
        const int n = 2 + static_cast<int>(gen.uniform_below(9));
        const int k = 1 + static_cast<int>(gen.uniform_below(static_cast<std::uint64_t>(n)));
        const EvalSet set = random_eval_set(gen, kind, n);
        const double exact = empirical_k_risk_exact(set, k, kind).value;
        const auto mc = empirical_k_risk_mc(set, k, kind, draws,
                                            rng::derive_seed(seed, "mc_trial", i));
        const double band = 5.0 * mc.std_error.value() + 1e-12;
        if (std::abs(mc.value - exact) > band) {
            ++failures;
            if (first_failure.is_null()) {
                first_failure = eval_set_json(set);
                first_failure["kind"] = std::string(to_string(kind));
                first_failure["k"] = k;
                first_failure["exact"] = exact;
                first_failure["mc"] = mc.value;
                first_failure["std_error"] = *mc.std_error;
            }
        }
    }
    const double failure_rate =
        static_cast<double>(failures) / static_cast<double>(trials);
    check.observe(failure_rate, [&] { return first_failure; });
    check.add_instances(trials - 1);
    check.audit(1.0);  // an estimator biased by +10 std errors fails every trial
    return std::move(check).finish();
}

CheckResult check_massart(std::uint64_t seed, std::uint64_t tables) {
    const char* name = "massart_bound_validity";
    if (tables == 0) return Check::skipped(name);
    Check check(name, 1e-12);
    for (std::uint64_t i = 0; i < tables; ++i) {
        auto gen = rng::substream(seed, name, i);
        const auto [n, k] = random_small_shape(gen);
        const int rows = 1 + static_cast<int>(gen.uniform_below(8));
        const LossTable table = random_loss_table(gen, rows, n, k);
        const double exact = k_rademacher_exact(table);
        const double bound =
            massart_bound(static_cast<std::uint64_t>(rows), table.n(), table.k());
        check.observe(exact - bound, [&] {
            Json j;
            j["n"] = table.n();
            j["k"] = table.k();
            j["rows"] = rows;
            j["exact"] = exact;
            j["bound"] = bound;
            return j;
        });
    }
    // Audit: pretend the table had a single row; a two-row sign table has
    // complexity 1 while the |A|=1 bound is 0.
    {
        const LossTable table({{1.0}, {-1.0}}, 1, 1);
        check.audit(k_rademacher_exact(table) - massart_bound(1, 1, 1));
    }
    return std::move(check).finish();
}

CheckResult check_beta_peel_off(std::uint64_t seed, std::uint64_t tables) {
    const char* name = "beta_peel_off_loss_vs_hypotheses";
    if (tables == 0) return Check::skipped(name);
    Check check(name, 1e-12);
    double audit_margin = 0.0;
    for (std::uint64_t i = 0; i < tables; ++i) {
        auto gen = rng::substream(seed, name, i);
        const LossKind kind = (i % 2 == 0) ? LossKind::kZeroOne : LossKind::kMse;
        const auto [n, k] = random_small_shape(gen);
        const int rows = 1 + static_cast<int>(gen.uniform_below(6));
        std::vector<std::vector<double>> predictions(static_cast<std::size_t>(rows));
        std::vector<double> labels(static_cast<std::size_t>(n));
        for (auto& row : predictions) {
            row.resize(static_cast<std::size_t>(n));
            for (auto& v : row)
                v = kind == LossKind::kZeroOne ? gen.rademacher() : gen.uniform01();
        }
        for (auto& y : labels)
            y = kind == LossKind::kZeroOne ? gen.rademacher() : gen.uniform01();

        const double loss_side =
            k_rademacher_exact(loss_table_from_evalsets(predictions, labels, k, kind));
        const double hyp_side = k_rademacher_exact(subset_mean_table(predictions, k));
        const double beta = loss_constants(kind).beta;
        check.observe(loss_side - beta * hyp_side, [&] {
            Json j;
            j["kind"] = std::string(to_string(kind));
            j["n"] = n;
            j["k"] = k;
            j["loss_side"] = loss_side;
            j["hypothesis_side"] = hyp_side;
            j["beta"] = beta;
            return j;
        });
        // The same instance with beta shrunk tenfold should violate at least
        // once across the run; remember the largest margin for the audit.
        audit_margin = std::max(audit_margin, loss_side - beta / 10.0 * hyp_side);
    }
    check.audit(audit_margin);
    return std::move(check).finish();
}

CheckResult check_xi_ratio(std::uint64_t max_n) {
    const char* name = "xi_ratio_upper_bound";
    if (max_n == 0) return Check::skipped(name);
    Check check(name, 1e-12);
    for (int n = 1; n <= static_cast<int>(max_n); ++n) {
        for (int k = 1; k <= n; ++k) {
            const auto [ratio, upper] = xi_ratio(n, k);
            check.observe(ratio - upper, [&, n, k] {
                Json j;
                j["n"] = n;
                j["k"] = k;
                j["ratio"] = ratio;
                j["upper"] = upper;
                return j;
            });
        }
    }
    // Audit: the n=10,k=2 ratio against a tenth of its upper bound.
    const auto [ratio, upper] = xi_ratio(10, 2);
    check.audit(ratio - upper / 10.0);
    return std::move(check).finish();
}

CheckResult check_rademacher_invariances(std::uint64_t seed, std::uint64_t tables) {
    const char* name = "rademacher_row_dup_col_perm_invariant";
    if (tables == 0) return Check::skipped(name);
    Check check(name, 1e-12);
    for (std::uint64_t i = 0; i < tables; ++i) {
        auto gen = rng::substream(seed, name, i);
        const auto [n, k] = random_small_shape(gen);
        const int rows = 1 + static_cast<int>(gen.uniform_below(4));
        const LossTable table = random_loss_table(gen, rows, n, k);
        const double base = k_rademacher_exact(table);

        // Duplicate a random row and permute the columns.
        std::vector<int> perm(static_cast<std::size_t>(table.cols()));
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t j = perm.size(); j > 1; --j)
            std::swap(perm[j - 1], perm[gen.uniform_below(j)]);
        std::vector<std::vector<double>> values;
        for (int r = 0; r < rows; ++r) {
            std::vector<double> row(static_cast<std::size_t>(table.cols()));
            for (int c = 0; c < table.cols(); ++c)
                row[static_cast<std::size_t>(c)] =
                    table.at(r, perm[static_cast<std::size_t>(c)]);
            values.push_back(std::move(row));
        }
        values.push_back(values[gen.uniform_below(static_cast<std::uint64_t>(rows))]);
        const double transformed = k_rademacher_exact(LossTable(std::move(values), n, k));
        check.observe(std::abs(base - transformed), [&] {
            Json j;
            j["n"] = n;
            j["k"] = k;
            j["base"] = base;
            j["transformed"] = transformed;
            return j;
        });
    }
    // Audit: halving the table is not an invariance.
    {
        const LossTable table({{1.0}, {-1.0}}, 1, 1);
        const LossTable halved({{0.5}, {-0.5}}, 1, 1);
        check.audit(std::abs(k_rademacher_exact(table) - k_rademacher_exact(halved)));
    }
    return std::move(check).finish();
}

CheckResult check_bound_monotonicity(std::uint64_t seed, std::uint64_t instances) {
    const char* name = "bound_calculators_monotone";
    if (instances == 0) return Check::skipped(name);
    Check check(name, 1e-15);
    for (std::uint64_t i = 0; i < instances; ++i) {
        auto gen = rng::substream(seed, name, i);
        const double er = gen.uniform01();
        const double rad = gen.uniform01();
        const int n = 2 + static_cast<int>(gen.uniform_below(200));
        const int k = 1 + static_cast<int>(gen.uniform_below(static_cast<std::uint64_t>(n)));
        const double delta = 0.01 + 0.9 * gen.uniform01();
        const double log_shatter = gen.uniform01() * 50.0;
        const LossKind kind = (i % 2 == 0) ? LossKind::kZeroOne : LossKind::kMse;

        const double bump = 0.1 + gen.uniform01();
        const double base_t3 = theorem3_bound(er, rad, kind, n, delta).total;
        const double base_c4 =
            corollary4_bound(er, ShatterCoefficient::from_log(log_shatter), n, k, delta)
                .total;
        const double worse[] = {
            theorem3_bound(er + bump, rad, kind, n, delta).total - base_t3,
            theorem3_bound(er, rad + bump, kind, n, delta).total - base_t3,
            theorem3_bound(er, rad, kind, n, delta * 0.5).total - base_t3,
            corollary4_bound(er + bump, ShatterCoefficient::from_log(log_shatter), n, k,
                             delta)
                    .total -
                base_c4,
            corollary4_bound(er, ShatterCoefficient::from_log(log_shatter + bump), n, k,
                             delta)
                    .total -
                base_c4,
            corollary4_bound(er, ShatterCoefficient::from_log(log_shatter), n, k,
                             delta * 0.5)
                    .total -
                base_c4,
        };
        for (double diff : worse) {
            check.observe(-diff, [&] {
                Json j;
                j["empirical_risk"] = er;
                j["rademacher"] = rad;
                j["n"] = n;
                j["k"] = k;
                j["delta"] = delta;
                j["log_shatter"] = log_shatter;
                j["decrease"] = -diff;
                return j;
            });
        }
    }
    check.audit(0.25);  // a calculator that dropped by 0.25 after increasing an input
    return std::move(check).finish();
}

CheckResult check_variance_decomposition(std::uint64_t seed, std::uint64_t sets) {
    const char* name = "mse_variance_decomposition";
    if (sets == 0) return Check::skipped(name);
    Check check(name, 0.0);
    double audit_margin = 0.0;
    for (std::uint64_t i = 0; i < sets; ++i) {
        auto gen = rng::substream(seed, name, i);
        const int n = 2 + static_cast<int>(gen.uniform_below(11));
        const EvalSet set = random_eval_set(gen, LossKind::kMse, n);
        const double variance = error_variance_mse(set);

        // Independent route: unbiased variance of the errors, directly.
        StableSum err_sum;
        for (const auto& item : set.items()) err_sum.add(item.prediction - item.label);
        const double mean_error = err_sum.get() / n;
        StableSum sq_sum;
        for (const auto& item : set.items()) {
            const double d = item.prediction - item.label - mean_error;
            sq_sum.add(d * d);
        }
        const double direct = sq_sum.get() / (n - 1);
        check.observe(std::abs(variance - direct) - tol_abs_rel(direct), [&] {
            Json j = eval_set_json(set);
            j["identity_route"] = variance;
            j["direct_route"] = direct;
            return j;
        });

        const double r1 = empirical_k_risk_exact(set, 1, LossKind::kMse).value;
        for (int k = 1; k <= n; ++k) {
            const double reconstructed =
                r1 - (1.0 - 1.0 / static_cast<double>(k)) * variance;
            const double exact = empirical_k_risk_exact(set, k, LossKind::kMse).value;
            check.observe(std::abs(reconstructed - exact) - tol_abs_rel(exact), [&] {
                Json j = eval_set_json(set);
                j["k"] = k;
                j["reconstructed"] = reconstructed;
                j["exact"] = exact;
                return j;
            });
            // Audit margin: without the n/(n-1) correction the reconstruction
            // misses the exact value.
            const double uncorrected = r1 - (1.0 - 1.0 / static_cast<double>(k)) *
                                                (variance * (n - 1) / n);
            audit_margin = std::max(audit_margin,
                                    std::abs(uncorrected - exact) - tol_abs_rel(exact));
        }
    }
    check.audit(audit_margin);
    return std::move(check).finish();
}

CheckResult check_kl_identity(std::uint64_t seed, std::uint64_t samples) {
    const char* name = "kl_equals_bce_minus_entropy";
    if (samples == 0) return Check::skipped(name);
    Check check(name, 1e-12);
    for (std::uint64_t i = 0; i < samples; ++i) {
        auto gen = rng::substream(seed, name, i);
        const double yhat = gen.uniform01();
        const double y = (i % 3 == 0) ? (gen.uniform_below(2) ? 1.0 : 0.0)
                                      : gen.uniform01();
        const auto parts = kl_bce_entropy(yhat, y);
        check.observe(std::abs(parts.kl - (parts.bce - parts.h)), [&] {
            Json j;
            j["yhat"] = yhat;
            j["y"] = y;
            j["kl"] = parts.kl;
            j["bce"] = parts.bce;
            j["h"] = parts.h;
            return j;
        });
    }
    // Audit: entropy shifted by 0.1 breaks the identity.
    {
        const auto parts = kl_bce_entropy(0.3, 0.7);
        check.audit(std::abs(parts.kl - (parts.bce - (parts.h + 0.1))));
    }
    return std::move(check).finish();
}

CheckResult check_joint_convexity(std::uint64_t seed, std::uint64_t samples) {
    const char* name = "joint_convexity_doubly_convex_kinds";
    if (samples == 0) return Check::skipped(name);
    Check check(name, 1e-12);
    constexpr LossKind kinds[] = {LossKind::kMse, LossKind::kKl};
    for (std::uint64_t i = 0; i < samples; ++i) {
        auto gen = rng::substream(seed, name, i);
        const LossKind kind = kinds[gen.uniform_below(2)];
        const double x1 = gen.uniform01(), y1 = gen.uniform01();
        const double x2 = gen.uniform01(), y2 = gen.uniform01();
        const double lambda = gen.uniform01();
        const double mid = pointwise_loss(kind, lambda * x1 + (1 - lambda) * x2,
                                          lambda * y1 + (1 - lambda) * y2);
        const double chord = lambda * pointwise_loss(kind, x1, y1) +
                             (1 - lambda) * pointwise_loss(kind, x2, y2);
        check.observe(mid - chord, [&] {
            Json j;
            j["kind"] = std::string(to_string(kind));
            j["p1"] = {x1, y1};
            j["p2"] = {x2, y2};
            j["lambda"] = lambda;
            j["midpoint_loss"] = mid;
            j["chord"] = chord;
            return j;
        });
    }
    // Audit: the zero-one loss is bilinear, not jointly convex; this fixture
    // violates convexity by 1/2.
    {
        const double mid = pointwise_loss(LossKind::kZeroOne, 0.0, 0.0);
        const double chord = 0.5 * pointwise_loss(LossKind::kZeroOne, 1.0, 1.0) +
                             0.5 * pointwise_loss(LossKind::kZeroOne, -1.0, -1.0);
        check.audit(mid - chord);
    }
    return std::move(check).finish();
}

} // namespace

// ----------------------------------------------------------------- reports

VerificationBudget VerificationBudget::scaled(double factor) {
    if (factor < 0.0) throw ArgumentError("budget scale must be >= 0");
    VerificationBudget b;
    const auto scale = [factor](std::uint64_t count) -> std::uint64_t {
        if (factor == 0.0) return 0;
        const double scaled = std::ceil(static_cast<double>(count) * factor);
        return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(scaled));
    };
    b.property1_sets = scale(b.property1_sets);
    b.empirical_monotone_sets = scale(b.empirical_monotone_sets);
    b.expected_monotone_dists = scale(b.expected_monotone_dists);
    b.unbiasedness_dists = scale(b.unbiasedness_dists);
    b.unbiasedness_draws = scale(b.unbiasedness_draws);
    b.k_limit_dists = scale(b.k_limit_dists);
    b.bce_search_budget = scale(b.bce_search_budget);
    b.permutation_sets = scale(b.permutation_sets);
    b.mc_trials = scale(b.mc_trials);
    b.mc_draws = scale(b.mc_draws);
    b.massart_tables = scale(b.massart_tables);
    b.peel_off_tables = scale(b.peel_off_tables);
    b.xi_ratio_max_n = scale(b.xi_ratio_max_n);
    b.rademacher_invariance_tables = scale(b.rademacher_invariance_tables);
    b.bound_monotonicity_instances = scale(b.bound_monotonicity_instances);
    b.variance_decomposition_sets = scale(b.variance_decomposition_sets);
    b.kl_identity_samples = scale(b.kl_identity_samples);
    b.convexity_samples = scale(b.convexity_samples);
    return b;
}

bool VerificationReport::all_passed() const {
    for (const auto& check : checks)
        if (!check.skipped && !check.passed) return false;
    return true;
}

Json VerificationReport::to_json() const {
    Json j;
    j["seed"] = seed;
    j["rng"] = std::string(rng::kAlgorithmId);
    j["version"] = std::string(kLibraryVersion);
    j["all_passed"] = all_passed();
    Json list = Json::array();
    for (const auto& check : checks) {
        Json c;
        c["name"] = check.name;
        if (check.skipped) {
            c["status"] = "skipped";
        } else {
            c["status"] = check.passed ? "pass" : "fail";
            c["instances_run"] = check.instances_run;
            c["max_violation"] = check.max_violation;
            c["tolerance"] = check.tolerance;
            c["audit_flagged"] = check.audit_flagged;
            if (!check.counterexample.is_null()) c["counterexample"] = check.counterexample;
        }
        list.push_back(std::move(c));
    }
    j["checks"] = std::move(list);
    return j;
}

VerificationReport run_verification(std::uint64_t seed, const VerificationBudget& budget) {
    VerificationReport report;
    report.seed = seed;
    report.checks.push_back(check_property1(seed, budget.property1_sets));
    report.checks.push_back(
        check_empirical_mse_monotone(seed, budget.empirical_monotone_sets));
    report.checks.push_back(check_expected_monotone(seed, budget.expected_monotone_dists));
    report.checks.push_back(
        check_unbiasedness(seed, budget.unbiasedness_dists, budget.unbiasedness_draws));
    report.checks.push_back(check_k_limit(seed, budget.k_limit_dists));
    report.checks.push_back(check_bce_counterexample(seed, budget.bce_search_budget));
    report.checks.push_back(check_permutation_invariance(seed, budget.permutation_sets));
    report.checks.push_back(check_mc_consistency(seed, budget.mc_trials, budget.mc_draws));
    report.checks.push_back(check_massart(seed, budget.massart_tables));
    report.checks.push_back(check_beta_peel_off(seed, budget.peel_off_tables));
    report.checks.push_back(check_xi_ratio(budget.xi_ratio_max_n));
    report.checks.push_back(
        check_rademacher_invariances(seed, budget.rademacher_invariance_tables));
    report.checks.push_back(
        check_bound_monotonicity(seed, budget.bound_monotonicity_instances));
    report.checks.push_back(
        check_variance_decomposition(seed, budget.variance_decomposition_sets));
    report.checks.push_back(check_kl_identity(seed, budget.kl_identity_samples));
    report.checks.push_back(check_joint_convexity(seed, budget.convexity_samples));
    return report;
}

// ------------------------------------------------------- bce counterexample

Json BceCounterexample::to_json() const {
    Json j;
    j["found"] = true;
    j["set"] = eval_set_json(EvalSet(items));
    j["k_violating"] = k;
    j["bce_curve"] = bce_curve;
    j["kl_curve"] = kl_curve;
    j["attempts"] = attempts;
    return j;
}

bool certify_bce_counterexample(const EvalSet& set, int k) {
    const int n = set.size();
    if (k < 1 || k + 1 > n) return false;
    std::vector<double> bce(static_cast<std::size_t>(n));
    std::vector<double> kl(static_cast<std::size_t>(n));
    for (int kk = 1; kk <= n; ++kk) {
        bce[static_cast<std::size_t>(kk - 1)] =
            empirical_k_risk_exact(set, kk, LossKind::kBce).value;
        kl[static_cast<std::size_t>(kk - 1)] =
            empirical_k_risk_exact(set, kk, LossKind::kKl).value;
    }
    if (!(bce[static_cast<std::size_t>(k)] >
          bce[static_cast<std::size_t>(k - 1)] + 1e-9))
        return false;
    for (int kk = 1; kk < n; ++kk)
        if (kl[static_cast<std::size_t>(kk)] >
            kl[static_cast<std::size_t>(kk - 1)] + 1e-12)
            return false;
    return true;
}

std::optional<BceCounterexample> find_bce_counterexample(std::uint64_t seed,
                                                         std::uint64_t budget) {
    if (budget < 1) throw ArgumentError("find_bce_counterexample: budget must be >= 1");
    constexpr std::string_view kStream = "find_bce_counterexample";
    for (std::uint64_t attempt = 0; attempt < budget; ++attempt) {
        auto gen = rng::substream(seed, kStream, attempt);
        const int n = 2 + static_cast<int>(gen.uniform_below(5));
        std::vector<LabeledPrediction> items(static_cast<std::size_t>(n));
        for (auto& item : items) {
            item.prediction = gen.uniform01();
            item.label = gen.uniform_below(2) ? 1.0 : 0.0;
        }
        const EvalSet set{std::vector<LabeledPrediction>(items)};

        std::vector<double> bce(static_cast<std::size_t>(n));
        std::vector<double> kl(static_cast<std::size_t>(n));
        for (int k = 1; k <= n; ++k) {
            bce[static_cast<std::size_t>(k - 1)] =
                empirical_k_risk_exact(set, k, LossKind::kBce).value;
            kl[static_cast<std::size_t>(k - 1)] =
                empirical_k_risk_exact(set, k, LossKind::kKl).value;
        }
        int violating_k = 0;
        for (int k = 1; k < n; ++k) {
            if (bce[static_cast<std::size_t>(k)] >
                bce[static_cast<std::size_t>(k - 1)] + 1e-9) {
                violating_k = k;
                break;
            }
        }
        if (violating_k == 0) continue;
        bool kl_monotone = true;
        for (int k = 1; k < n; ++k)
            if (kl[static_cast<std::size_t>(k)] >
                kl[static_cast<std::size_t>(k - 1)] + 1e-12)
                kl_monotone = false;
        if (!kl_monotone) continue;

        BceCounterexample witness;
        witness.items = std::move(items);
        witness.k = violating_k;
        witness.bce_curve = std::move(bce);
        witness.kl_curve = std::move(kl);
        witness.attempts = attempt + 1;
        return witness;
    }
    return std::nullopt;
}

// ------------------------------------------------------------------- sweep

namespace {

double quantile_r7(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    const double h = static_cast<double>(values.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

Json sweep_config_json(const SweepConfig& config) {
    Json j;
    j["task"] = std::string(to_string(config.data.task));
    j["n_train"] = config.data.n_train;
    j["n_test"] = config.data.n_test;
    j["noise"] = config.data.noise;
    j["feature_dim"] = config.data.feature_dim;
    j["seed"] = config.data.seed;
    j["ks"] = config.ks;
    Json kinds = Json::array();
    for (LossKind kind : config.kinds) kinds.push_back(std::string(to_string(kind)));
    j["kinds"] = std::move(kinds);
    Json variants = Json::array();
    for (HypothesisKind v : config.variants)
        variants.push_back(std::string(to_string(v)));
    j["variants"] = std::move(variants);
    j["repetitions"] = config.repetitions;
    return j;
}

void validate_sweep_config(const SweepConfig& config) {
    if (config.repetitions < 1)
        throw ArgumentError("run_sweep: repetitions must be >= 1");
    if (config.ks.empty()) throw ArgumentError("run_sweep: no batch sizes requested");
    if (config.kinds.empty()) throw ArgumentError("run_sweep: no loss kinds requested");
    if (config.variants.empty()) throw ArgumentError("run_sweep: no hypothesis variants");
    const int limit = std::min(config.data.n_train, config.data.n_test);
    for (int k : config.ks)
        if (k < 1 || k > limit)
            throw ArgumentError("run_sweep: k=" + std::to_string(k) +
                                " outside [1, min(n_train, n_test)=" +
                                std::to_string(limit) + "]");
    for (LossKind kind : config.kinds) {
        const bool ok = (config.data.task == Task::kClassificationSign &&
                         kind == LossKind::kZeroOne) ||
                        (config.data.task == Task::kRegressionUnit &&
                         kind == LossKind::kMse);
        if (!ok)
            throw ArgumentError("run_sweep: loss '" + std::string(to_string(kind)) +
                                "' does not match the prediction domain of task '" +
                                std::string(to_string(config.data.task)) + "'");
    }
    for (HypothesisKind variant : config.variants)
        if (variant == HypothesisKind::kThreshold &&
            config.data.task != Task::kClassificationSign)
            throw ArgumentError("run_sweep: threshold hypotheses require "
                                "classification_sign");
}

} // namespace

std::vector<double> SweepReport::median_gaps(HypothesisKind variant, LossKind kind) const {
    std::vector<double> out;
    for (int k : config.ks)
        for (const auto& agg : aggregates)
            if (agg.variant == variant && agg.kind == kind && agg.k == k)
                out.push_back(agg.median);
    return out;
}

Json SweepReport::to_json() const {
    Json j;
    j["config"] = sweep_config_json(config);
    j["rng"] = std::string(rng::kAlgorithmId);
    j["version"] = std::string(kLibraryVersion);
    Json row_list = Json::array();
    for (const auto& row : rows) {
        Json r;
        r["variant"] = std::string(to_string(row.variant));
        r["seed"] = row.seed;
        r["k"] = row.k;
        r["kind"] = std::string(to_string(row.kind));
        r["train_risk"] = row.train_risk;
        r["test_risk"] = row.test_risk;
        r["gap"] = row.gap;
        row_list.push_back(std::move(r));
    }
    j["rows"] = std::move(row_list);
    Json agg_list = Json::array();
    for (const auto& agg : aggregates) {
        Json a;
        a["variant"] = std::string(to_string(agg.variant));
        a["kind"] = std::string(to_string(agg.kind));
        a["k"] = agg.k;
        a["median_gap"] = agg.median;
        a["q25_gap"] = agg.q25;
        a["q75_gap"] = agg.q75;
        agg_list.push_back(std::move(a));
    }
    j["aggregates"] = std::move(agg_list);
    return j;
}

std::string SweepReport::to_csv() const {
    std::string out = "variant,seed,k,kind,train_risk,test_risk,gap\n";
    for (const auto& row : rows) {
        out += std::string(to_string(row.variant)) + ',' + std::to_string(row.seed) +
               ',' + std::to_string(row.k) + ',' + std::string(to_string(row.kind)) +
               ',' + format_double(row.train_risk) + ',' + format_double(row.test_risk) +
               ',' + format_double(row.gap) + '\n';
    }
    return out;
}

SweepReport run_sweep(const SweepConfig& config) {
    validate_sweep_config(config);
    const auto reps = static_cast<std::size_t>(config.repetitions);
    std::vector<std::vector<SweepRow>> per_rep(reps);

    auto run_repetition = [&](std::size_t rep) {
        const std::uint64_t rep_seed =
            rng::derive_seed(config.data.seed, "run_sweep/repetition", rep);
        SyntheticConfig data_config = config.data;
        data_config.seed = rep_seed;
        const SplitDataset split = generate(data_config);

        auto& rows = per_rep[rep];
        for (HypothesisKind variant : config.variants) {
            const Hypothesis h = fit(variant, split.train, config.data.task, rep_seed);
            const EvalSet train_set = apply(h, split.train);
            const EvalSet test_set = apply(h, split.test);
            for (LossKind kind : config.kinds) {
                const RiskMethod method = closed_form_eligible(kind)
                                              ? RiskMethod::kClosedForm
                                              : RiskMethod::kExact;
                for (int k : config.ks) {
                    const std::array<int, 1> ks{k};
                    const double train_risk =
                        risk_curve(train_set, ks, kind, method).front().value;
                    const double test_risk =
                        risk_curve(test_set, ks, kind, method).front().value;
                    rows.push_back({variant, rep_seed, k, kind, train_risk, test_risk,
                                    std::abs(test_risk - train_risk)});
                }
            }
        }
    };

    const int thread_count = std::max(1, std::min<int>(config.threads,
                                                       static_cast<int>(reps)));
    if (thread_count == 1) {
        for (std::size_t rep = 0; rep < reps; ++rep) run_repetition(rep);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(thread_count));
        for (int t = 0; t < thread_count; ++t) {
            workers.emplace_back([&, t] {
                for (std::size_t rep = static_cast<std::size_t>(t); rep < reps;
                     rep += static_cast<std::size_t>(thread_count))
                    run_repetition(rep);
            });
        }
        for (auto& worker : workers) worker.join();
    }

    SweepReport report;
    report.config = config;
    for (const auto& rows : per_rep)
        report.rows.insert(report.rows.end(), rows.begin(), rows.end());

    for (HypothesisKind variant : config.variants) {
        for (LossKind kind : config.kinds) {
            for (int k : config.ks) {
                std::vector<double> gaps;
                gaps.reserve(reps);
                for (const auto& row : report.rows)
                    if (row.variant == variant && row.kind == kind && row.k == k)
                        gaps.push_back(row.gap);
                report.aggregates.push_back({variant, kind, k,
                                             quantile_r7(gaps, 0.5),
                                             quantile_r7(gaps, 0.25),
                                             quantile_r7(gaps, 0.75)});
            }
        }
    }
    return report;
}

} // namespace batchrisk

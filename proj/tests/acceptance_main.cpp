// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Each criterion pins its tolerance in code; runtime limits are enforced
// where stated.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "batchrisk/accumulate.hpp"
#include "batchrisk/combinatorics.hpp"
#include "batchrisk/complexity.hpp"
#include "batchrisk/harness.hpp"
#include "batchrisk/hypotheses.hpp"
#include "batchrisk/risk.hpp"
#include "batchrisk/rng.hpp"

using namespace batchrisk;

namespace {

int failures = 0;

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void report(int criterion, const std::string& description, bool passed,
            const std::string& detail) {
    std::cout << (passed ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": "
              << description << " (" << detail << ")\n";
    if (!passed) ++failures;
}

std::string fmt(double value) {
    std::ostringstream out;
    out.precision(6);
    out << value;
    return out.str();
}

EvalSet random_set(rng::Xoshiro256ss& gen, LossKind kind, int n) {
    std::vector<LabeledPrediction> items(static_cast<std::size_t>(n));
    for (auto& item : items) {
        switch (kind) {
            case LossKind::kMse:
                item = {gen.uniform01(), gen.uniform01()};
                break;
            case LossKind::kZeroOne:
                item = {gen.rademacher(), gen.rademacher()};
                break;
            default:
                item = {gen.uniform01(), gen.uniform_below(2) ? 1.0 : 0.0};
                break;
        }
    }
    return EvalSet(std::move(items));
}

DiscreteDistribution random_dist(rng::Xoshiro256ss& gen, LossKind kind, int max_atoms) {
    const int m = 1 + static_cast<int>(gen.uniform_below(
                          static_cast<std::uint64_t>(max_atoms)));
    std::vector<DiscreteDistribution::Atom> atoms(static_cast<std::size_t>(m));
    double total = 0.0;
    for (auto& atom : atoms) {
        atom.probability = gen.uniform01() + 0.05;
        total += atom.probability;
        atom.item.prediction =
            kind == LossKind::kZeroOne ? gen.rademacher() : gen.uniform01();
        atom.item.label = kind == LossKind::kMse    ? gen.uniform01()
                          : kind == LossKind::kZeroOne ? gen.rademacher()
                                                       : (gen.uniform_below(2) ? 1.0 : 0.0);
    }
    for (auto& atom : atoms) atom.probability /= total;
    return DiscreteDistribution(std::move(atoms));
}

// ------------------------------------------------------------ criterion 1

void criterion1_property1() {
    Timer timer;
    constexpr LossKind kinds[] = {LossKind::kMse, LossKind::kZeroOne,
                                  LossKind::kGeomCrossEntropy};
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        auto gen = rng::substream(101, "acceptance/property1", i);
        const LossKind kind = kinds[gen.uniform_below(3)];
        const int n = 2 + static_cast<int>(gen.uniform_below(11));
        const EvalSet set = random_set(gen, kind, n);
        for (int k = 1; k <= n; ++k) {
            const double exact = empirical_k_risk_exact(set, k, kind).value;
            const double closed = empirical_k_risk_closed(set, k, kind).value;
            worst = std::max(worst, std::abs(closed - exact));
        }
    }
    const double elapsed = timer.seconds();
    report(1, "convex-combination identity |closed - exact| <= 1e-9 on 1000 sets",
           worst <= 1e-9 && elapsed < 10.0,
           "max |diff| " + fmt(worst) + ", " + fmt(elapsed) + " s");
}

// ------------------------------------------------------------ criterion 2

void criterion2_unbiasedness() {
    Timer timer;
    constexpr int n = 5;
    constexpr std::uint64_t draws = 20000;
    bool ok = true;
    double worst_sigma = 0.0;
    for (std::uint64_t d = 0; d < 10; ++d) {
        auto gen = rng::substream(102, "acceptance/unbiasedness", d);
        const DiscreteDistribution dist = random_dist(gen, LossKind::kMse, 4);
        for (int k : {2, 3}) {
            const double expected = expected_k_risk_exact(dist, k, LossKind::kMse).value;
            MeanVariance stats;
            auto sampler = rng::substream(102, "acceptance/unbiasedness/z",
                                          d * 2 + static_cast<std::uint64_t>(k));
            std::vector<LabeledPrediction> items(n);
            for (std::uint64_t t = 0; t < draws; ++t) {
                for (auto& item : items)
                    item = dist[static_cast<std::size_t>(
                                    dist.sample_index(sampler.uniform01()))]
                               .item;
                stats.add(empirical_k_risk_exact(EvalSet(items), k, LossKind::kMse).value);
            }
            const double se = stats.std_error();
            const double sigmas =
                se > 0.0 ? std::abs(stats.mean() - expected) / se
                         : (std::abs(stats.mean() - expected) > 1e-12 ? 1e9 : 0.0);
            worst_sigma = std::max(worst_sigma, sigmas);
            if (sigmas > 4.0) ok = false;
        }
    }
    const double elapsed = timer.seconds();
    report(2, "empirical k-risk unbiased within 4 standard errors over 20000 draws",
           ok && elapsed < 60.0,
           "worst deviation " + fmt(worst_sigma) + " se, " + fmt(elapsed) + " s");
}

// ------------------------------------------------------------ criterion 3

void criterion3_monotonicity() {
    double worst_expected = -1.0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        for (LossKind kind : {LossKind::kMse, LossKind::kKl}) {
            auto gen = rng::substream(103, "acceptance/expected_monotone", i);
            const DiscreteDistribution dist = random_dist(gen, kind, 5);
            double prev = expected_k_risk_exact(dist, 1, kind).value;
            for (int k = 2; k <= 4; ++k) {
                const double current = expected_k_risk_exact(dist, k, kind).value;
                worst_expected = std::max(worst_expected, current - prev);
                prev = current;
            }
        }
    }
    double worst_empirical = -1.0;
    for (std::uint64_t i = 0; i < 500; ++i) {
        auto gen = rng::substream(103, "acceptance/empirical_monotone", i);
        const int n = 2 + static_cast<int>(gen.uniform_below(11));
        const EvalSet set = random_set(gen, LossKind::kMse, n);
        double prev = empirical_k_risk_exact(set, 1, LossKind::kMse).value;
        for (int k = 2; k <= n; ++k) {
            const double current = empirical_k_risk_exact(set, k, LossKind::kMse).value;
            worst_empirical = std::max(worst_empirical, current - prev);
            prev = current;
        }
    }
    report(3, "k-risk non-increasing: expected (mse, kl) and empirical (mse)",
           worst_expected <= 1e-12 && worst_empirical <= 1e-12,
           "max increases " + fmt(worst_expected) + " / " + fmt(worst_empirical));
}

// ------------------------------------------------------------ criterion 4

void criterion4_variance_decomposition() {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 500; ++i) {
        auto gen = rng::substream(104, "acceptance/variance", i);
        const int n = 2 + static_cast<int>(gen.uniform_below(11));
        const EvalSet set = random_set(gen, LossKind::kMse, n);
        const double variance = error_variance_mse(set);
        const double r1 = empirical_k_risk_exact(set, 1, LossKind::kMse).value;
        for (int k = 1; k <= n; ++k) {
            const double reconstructed = r1 - (1.0 - 1.0 / k) * variance;
            const double exact = empirical_k_risk_exact(set, k, LossKind::kMse).value;
            worst = std::max(worst, std::abs(reconstructed - exact));
        }
    }
    report(4, "variance decomposition reconstructs exact mse k-risk within 1e-9",
           worst <= 1e-9, "max |diff| " + fmt(worst));
}

// ------------------------------------------------------------ criterion 5

void criterion5_massart_and_peel_off() {
    struct Shape {
        int n, k;
    };
    constexpr Shape shapes[] = {{4, 1}, {5, 1}, {8, 1}, {16, 1}, {4, 2},
                                {5, 2}, {6, 2}, {4, 3}, {5, 3}, {16, 15}};
    double worst_massart = -1.0;
    for (std::uint64_t i = 0; i < 500; ++i) {
        auto gen = rng::substream(105, "acceptance/massart", i);
        const auto [n, k] = shapes[gen.uniform_below(std::size(shapes))];
        const int rows = 1 + static_cast<int>(gen.uniform_below(8));
        std::uint64_t cols = 0;
        binom_within(n, k, kEnumerationCap, cols);
        std::vector<std::vector<double>> values(static_cast<std::size_t>(rows));
        for (auto& row : values) {
            row.resize(cols);
            for (auto& v : row) v = 2.0 * gen.uniform01() - 1.0;
        }
        const LossTable table(std::move(values), n, k);
        worst_massart =
            std::max(worst_massart, k_rademacher_exact(table) -
                                        massart_bound(static_cast<std::uint64_t>(rows),
                                                      n, k));
    }

    double worst_peel = -1.0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        auto gen = rng::substream(105, "acceptance/peel_off", i);
        const LossKind kind = (i % 2 == 0) ? LossKind::kZeroOne : LossKind::kMse;
        const int n = 4 + static_cast<int>(gen.uniform_below(2));
        const int k = 1 + static_cast<int>(gen.uniform_below(2));
        const int rows = 1 + static_cast<int>(gen.uniform_below(6));
        std::vector<std::vector<double>> preds(static_cast<std::size_t>(rows));
        std::vector<double> labels(static_cast<std::size_t>(n));
        for (auto& row : preds) {
            row.resize(static_cast<std::size_t>(n));
            for (auto& v : row)
                v = kind == LossKind::kZeroOne ? gen.rademacher() : gen.uniform01();
        }
        for (auto& y : labels)
            y = kind == LossKind::kZeroOne ? gen.rademacher() : gen.uniform01();
        const double loss_side =
            k_rademacher_exact(loss_table_from_evalsets(preds, labels, k, kind));
        const double hyp_side = k_rademacher_exact(subset_mean_table(preds, k));
        worst_peel = std::max(worst_peel,
                              loss_side - loss_constants(kind).beta * hyp_side);
    }
    report(5, "massart bound and beta peel-off hold on random tables",
           worst_massart <= 1e-12 && worst_peel <= 1e-12,
           "max excess " + fmt(worst_massart) + " / " + fmt(worst_peel));
}

// ------------------------------------------------------------ criterion 6

void criterion6_overparametrization() {
    bool k2_nonvacuous = true;
    for (int n = 6; n <= 200; ++n)
        if (xi(ShatterCoefficient::pow2(n), n, 2) >= 1.0) k2_nonvacuous = false;
    bool k1_vacuous = true;
    for (int n = 1; n <= 200; ++n)
        if (xi(ShatterCoefficient::pow2(n), n, 1) < 1.0) k1_vacuous = false;
    double worst_ratio = -1.0;
    for (int n = 1; n <= 60; ++n)
        for (int k = 1; k <= n; ++k) {
            const auto [ratio, upper] = xi_ratio(n, k);
            worst_ratio = std::max(worst_ratio, ratio - upper);
        }
    report(6,
           "xi(2^n; n, 2) < 1 for n in [6,200], xi(2^n; n, 1) >= 1, ratio bound to n=60",
           k2_nonvacuous && k1_vacuous && worst_ratio <= 1e-12,
           "max ratio excess " + fmt(worst_ratio));
}

// ------------------------------------------------------------ criterion 7

void criterion7_bce_counterexample() {
    const auto witness = find_bce_counterexample(1729, 100000);
    bool certified = false;
    std::string detail = "no witness";
    if (witness) {
        certified =
            certify_bce_counterexample(EvalSet(witness->items), witness->k);
        detail = "witness n=" + std::to_string(witness->items.size()) +
                 ", k=" + std::to_string(witness->k) + " -> " +
                 std::to_string(witness->k + 1) + ", attempts " +
                 std::to_string(witness->attempts);
    }
    report(7, "certified bce k-risk increase with kl non-increasing", certified, detail);
}

// ------------------------------------------------------------ criterion 8

void criterion8_gap_trend() {
    Timer timer;
    SweepConfig config;
    config.data.task = Task::kClassificationSign;
    config.data.n_train = 200;
    config.data.n_test = 200;
    config.data.noise = 0.0;
    config.data.seed = 1729;
    config.ks = {1, 2, 3, 4, 5, 6, 7, 8};
    config.kinds = {LossKind::kZeroOne};
    config.variants = {HypothesisKind::kLookupMemorizer};
    config.repetitions = 9;
    const auto sweep = run_sweep(config);
    const auto medians =
        sweep.median_gaps(HypothesisKind::kLookupMemorizer, LossKind::kZeroOne);

    int inversions = 0;
    double worst_inversion = 0.0;
    for (std::size_t i = 0; i + 1 < medians.size(); ++i) {
        const double rise = medians[i + 1] - medians[i];
        if (rise > 0.0) {
            ++inversions;
            worst_inversion = std::max(worst_inversion, rise);
        }
    }
    const double elapsed = timer.seconds();
    std::string curve;
    for (double m : medians) curve += fmt(m) + " ";
    report(8, "median gap non-increasing in k (<= 1 inversion of <= 0.005)",
           inversions <= 1 && worst_inversion <= 0.005 && elapsed < 120.0,
           "medians " + curve + "| " + std::to_string(inversions) + " inversions, " +
               fmt(elapsed) + " s");
}

// ------------------------------------------------------------ criterion 9

void criterion9_constants() {
    const auto zo = loss_constants(LossKind::kZeroOne);
    const auto mse = loss_constants(LossKind::kMse);
    bool ok = zo.c == 1.0 && mse.c == 2.0 && zo.lipschitz == 0.5 &&
              zo.range_width == 2.0 && mse.lipschitz == 2.0 && mse.range_width == 1.0;
    double worst = 0.0;
    for (int n : {10, 64, 500}) {
        for (double delta : {0.5, 0.05, 0.01}) {
            const double total =
                theorem3_bound(0.0, 0.0, LossKind::kZeroOne, n, delta).total;
            worst = std::max(worst, std::abs(total - psi(n, delta)));
        }
    }
    report(9, "c_{0/1}=1, c_{mse}=2; zero-risk theorem3 equals psi to 1e-15",
           ok && worst <= 1e-15, "max |total - psi| " + fmt(worst));
}

// ------------------------------------------------------------ criterion 10

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void criterion10_cli_determinism() {
    const fs::path dir = fs::temp_directory_path() / "batchrisk_acceptance";
    fs::create_directories(dir);
    const fs::path fixture = dir / "fixture.csv";
    std::ofstream(fixture) << "prediction,label\n0,1\n0,0\n1,1\n";
    const std::string cli = BATCHRISK_CLI_PATH;

    const std::vector<std::string> commands = {
        "risk --input " + fixture.string() + " --kind mse --k 2 --method mc --draws "
        "2000 --seed 4 --output ",
        "curve --input " + fixture.string() + " --kind mse --ks 1,2,3 --method closed "
        "--output ",
        "bound --regime corollary4 --pow2-shatter 64 --n 64 --k 2 --delta 0.05 "
        "--output ",
        "verify --seed 6 --budget-scale 0.02 --output ",
        "sweep --task classification_sign --n-train 40 --n-test 40 --ks 1,2,3 "
        "--variants lookup_memorizer,threshold,constant_mean --repetitions 3 --seed 8 "
        "--output ",
        "counterexample --seed 3 --budget 20000 --output ",
    };
    bool ok = true;
    std::string failing;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        const fs::path out_a = dir / ("a" + std::to_string(i) + ".json");
        const fs::path out_b = dir / ("b" + std::to_string(i) + ".json");
        const auto run_once = [&](const fs::path& out) {
            const std::string command =
                cli + " " + commands[i] + out.string() + " >/dev/null 2>&1";
            return WEXITSTATUS(std::system(command.c_str()));
        };
        const int code_a = run_once(out_a);
        const int code_b = run_once(out_b);
        const std::string a = slurp(out_a);
        if (code_a != code_b || a.empty() || a != slurp(out_b)) {
            ok = false;
            failing = commands[i].substr(0, commands[i].find(' '));
        }
    }
    report(10, "every CLI command is byte-identical across repeated invocations", ok,
           ok ? std::to_string(commands.size()) + " commands" : "differs: " + failing);
}

} // namespace

int main() {
    criterion1_property1();
    criterion2_unbiasedness();
    criterion3_monotonicity();
    criterion4_variance_decomposition();
    criterion5_massart_and_peel_off();
    criterion6_overparametrization();
    criterion7_bce_counterexample();
    criterion8_gap_trend();
    criterion9_constants();
    criterion10_cli_determinism();
    std::cout << (failures == 0 ? "ACCEPTANCE: all criteria passed"
                                : "ACCEPTANCE: " + std::to_string(failures) +
                                      " criterion(s) failed")
              << '\n';
    return failures;
}

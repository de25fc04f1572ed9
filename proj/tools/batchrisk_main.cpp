// batchrisk: k-risk estimation, generalization bounds, verification suites,
// and synthetic gap-vs-k sweeps, driven by CSV inputs and JSON reports.
//
// Exit codes: 0 success, 1 computation/input error, 2 configuration error,
// 3 verification failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "batchrisk/errors.hpp"
#include "batchrisk/harness.hpp"
#include "batchrisk/io.hpp"
#include "batchrisk/rng.hpp"
#include "batchrisk/version.hpp"

namespace {

using batchrisk::Json;

constexpr std::uint64_t kDefaultSeed = 1729;
constexpr std::uint64_t kDefaultDraws = 10000;
constexpr std::uint64_t kDefaultCounterexampleBudget = 100000;
constexpr double kDefaultDelta = 0.05;

struct CommonOptions {
    std::string output = "-";
    std::string csv_output;
    std::uint64_t seed = kDefaultSeed;
    int threads = 1;
};

void emit(const Json& report, const CommonOptions& common) {
    if (common.output == "-") {
        std::cout << report.dump(2) << '\n';
    } else {
        batchrisk::write_json_file(report, common.output);
    }
}

void emit_csv(const std::string& content, const std::string& path) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw batchrisk::Error("cannot open '" + path + "' for writing");
    out << content;
}

Json metadata(const std::string& command, const CommonOptions& common) {
    Json meta;
    meta["command"] = command;
    meta["version"] = std::string(batchrisk::kLibraryVersion);
    meta["rng"] = std::string(batchrisk::rng::kAlgorithmId);
    meta["seed"] = common.seed;
    meta["threads"] = common.threads;
    return meta;
}

std::vector<batchrisk::LossKind> parse_kinds(const std::vector<std::string>& names) {
    std::vector<batchrisk::LossKind> kinds;
    kinds.reserve(names.size());
    for (const auto& name : names) kinds.push_back(batchrisk::loss_kind_from_string(name));
    return kinds;
}

std::string estimates_csv(const std::vector<batchrisk::RiskEstimate>& estimates) {
    std::string out = "k,kind,method,value,std_error,subsets_evaluated\n";
    for (const auto& est : estimates) {
        out += std::to_string(est.k) + ',' + std::string(to_string(est.kind)) + ',' +
               std::string(to_string(est.method)) + ',' +
               batchrisk::format_double(est.value) + ',' +
               (est.std_error ? batchrisk::format_double(*est.std_error) : std::string{}) +
               ',' + std::to_string(est.subsets_evaluated) + '\n';
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"k-risk of batched predictors: estimators, bounds, verification"};
    app.require_subcommand(1);

    CommonOptions common;
    std::string input_path;
    std::string kind_name = "mse";
    std::string method_name = "exact";
    int k = 1;
    std::vector<int> ks;
    std::uint64_t draws = kDefaultDraws;
    double delta = kDefaultDelta;
    bool strict_constants = false;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--output", common.output, "Report path; '-' for stdout")
            ->envname("BATCHRISK_OUTPUT")
            ->capture_default_str();
        cmd->add_option("--seed", common.seed, "RNG seed")
            ->envname("BATCHRISK_SEED")
            ->capture_default_str();
        cmd->add_option("--threads", common.threads,
                        "Worker bound; never affects results")
            ->envname("BATCHRISK_THREADS")
            ->capture_default_str();
    };

    // ---- risk ----
    auto* risk_cmd = app.add_subcommand("risk", "k-risk of one prediction CSV");
    risk_cmd->add_option("--input", input_path, "CSV with header prediction,label")
        ->required()
        ->envname("BATCHRISK_INPUT");
    risk_cmd->add_option("--kind", kind_name, "mse|zero_one|gce|kl|bce")
        ->required()
        ->envname("BATCHRISK_KIND");
    risk_cmd->add_option("--k", k, "Prediction batch size")->required();
    risk_cmd->add_option("--method", method_name, "exact|closed|mc")
        ->capture_default_str()
        ->envname("BATCHRISK_METHOD");
    risk_cmd->add_option("--draws", draws, "Monte-Carlo subset draws")
        ->capture_default_str();
    risk_cmd->add_option("--csv", common.csv_output, "Optional flat CSV companion");
    add_common(risk_cmd);

    // ---- curve ----
    auto* curve_cmd = app.add_subcommand("curve", "k-risk for a list of batch sizes");
    curve_cmd->add_option("--input", input_path, "CSV with header prediction,label")
        ->required()
        ->envname("BATCHRISK_INPUT");
    curve_cmd->add_option("--kind", kind_name, "mse|zero_one|gce|kl|bce")
        ->required()
        ->envname("BATCHRISK_KIND");
    curve_cmd->add_option("--ks", ks, "Batch sizes (comma separated)")
        ->required()
        ->delimiter(',');
    curve_cmd->add_option("--method", method_name, "exact|closed|mc")
        ->capture_default_str()
        ->envname("BATCHRISK_METHOD");
    curve_cmd->add_option("--draws", draws, "Monte-Carlo subset draws")
        ->capture_default_str();
    curve_cmd->add_option("--csv", common.csv_output, "Optional flat CSV companion");
    add_common(curve_cmd);

    // ---- bound ----
    std::string regime = "corollary4";
    double empirical_risk = 0.0;
    double rademacher = 0.0;
    double log_shatter = -1.0;
    double pow2_shatter = -1.0;
    int vc_dim = 0;
    int bound_n = 0;
    int bound_k = 1;
    auto* bound_cmd = app.add_subcommand("bound", "Generalization bound calculators");
    bound_cmd->add_option("--regime", regime, "theorem3|corollary4|vc")
        ->capture_default_str();
    bound_cmd->add_option("--empirical-risk", empirical_risk, "r_k(f, Z)")
        ->capture_default_str();
    bound_cmd->add_option("--rademacher", rademacher, "k-Rademacher term (theorem3)")
        ->capture_default_str();
    bound_cmd->add_option("--kind", kind_name, "mse|zero_one (theorem3)")
        ->capture_default_str();
    auto* log_shatter_opt =
        bound_cmd->add_option("--log-shatter", log_shatter, "ln S_F(n) (corollary4)");
    bound_cmd->add_option("--pow2-shatter", pow2_shatter, "S_F(n) = 2^value (corollary4)")
        ->excludes(log_shatter_opt);
    bound_cmd->add_option("--vc-dim", vc_dim, "VC dimension (vc regime)");
    bound_cmd->add_option("--n", bound_n, "Training set size")->required();
    bound_cmd->add_option("--k", bound_k, "Prediction batch size")
        ->capture_default_str();
    bound_cmd->add_option("--delta", delta, "Confidence parameter in (0,1)")
        ->capture_default_str();
    bound_cmd->add_flag("--strict-constants", strict_constants,
                        "Apply the proof's 2*beta and c multipliers");
    add_common(bound_cmd);

    // ---- verify ----
    double budget_scale = 1.0;
    auto* verify_cmd = app.add_subcommand("verify", "Run the verification suite");
    verify_cmd->add_option("--budget-scale", budget_scale,
                           "Scales every check's instance count; 0 skips all")
        ->capture_default_str();
    add_common(verify_cmd);

    // ---- sweep ----
    std::string task_name = "classification_sign";
    std::vector<std::string> kind_names;
    std::vector<std::string> variant_names;
    batchrisk::SweepConfig sweep_config;
    auto* sweep_cmd = app.add_subcommand("sweep", "Gap-vs-k experiment on synthetic data");
    sweep_cmd->add_option("--task", task_name, "regression_unit|classification_sign")
        ->capture_default_str();
    sweep_cmd->add_option("--n-train", sweep_config.data.n_train, "Training set size")
        ->capture_default_str();
    sweep_cmd->add_option("--n-test", sweep_config.data.n_test, "Test set size")
        ->capture_default_str();
    sweep_cmd->add_option("--noise", sweep_config.data.noise,
                          "Label-flip probability or additive-noise scale")
        ->capture_default_str();
    sweep_cmd->add_option("--feature-dim", sweep_config.data.feature_dim, "Feature count")
        ->capture_default_str();
    sweep_cmd->add_option("--ks", ks, "Batch sizes (comma separated)")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--kinds", kind_names, "Loss kinds (default: task's loss)")
        ->delimiter(',');
    sweep_cmd
        ->add_option("--variants", variant_names,
                     "constant_mean|threshold|lookup_memorizer (default: all valid)")
        ->delimiter(',');
    sweep_cmd->add_option("--repetitions", sweep_config.repetitions, "Seeds per sweep")
        ->capture_default_str();
    sweep_cmd->add_option("--csv", common.csv_output, "Optional flat CSV companion");
    add_common(sweep_cmd);

    // ---- counterexample ----
    std::uint64_t search_budget = kDefaultCounterexampleBudget;
    auto* counter_cmd =
        app.add_subcommand("counterexample", "Search for a Bce k-risk increase");
    counter_cmd->add_option("--budget", search_budget, "Random sets to try")
        ->capture_default_str();
    add_common(counter_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*risk_cmd || *curve_cmd) {
            const auto kind = batchrisk::loss_kind_from_string(kind_name);
            const auto method = batchrisk::risk_method_from_string(method_name);
            const auto set = batchrisk::parse_eval_csv(input_path, kind);
            if (*risk_cmd) ks.assign(1, k);
            for (int kk : ks)
                if (kk < 1 || kk > set.size())
                    throw batchrisk::ArgumentError(
                        "k=" + std::to_string(kk) + " outside [1, n] for input with n=" +
                        std::to_string(set.size()));
            batchrisk::MonteCarloOptions mc{draws, common.seed};
            const auto estimates = batchrisk::risk_curve(set, ks, kind, method, mc);

            Json report;
            report["metadata"] = metadata(*risk_cmd ? "risk" : "curve", common);
            report["metadata"]["input"] = input_path;
            report["metadata"]["kind"] = std::string(to_string(kind));
            report["metadata"]["method"] = std::string(to_string(method));
            report["metadata"]["draws"] = draws;
            report["metadata"]["n"] = set.size();
            if (*risk_cmd) {
                report["estimate"] = batchrisk::to_json(estimates.front());
            } else {
                Json list = Json::array();
                for (const auto& est : estimates) list.push_back(batchrisk::to_json(est));
                report["estimates"] = std::move(list);
            }
            emit(report, common);
            emit_csv(estimates_csv(estimates), common.csv_output);
            return 0;
        }

        if (*bound_cmd) {
            batchrisk::BoundReport bound;
            if (regime == "theorem3") {
                bound = batchrisk::theorem3_bound(
                    empirical_risk, rademacher,
                    batchrisk::loss_kind_from_string(kind_name), bound_n, delta);
            } else if (regime == "corollary4") {
                batchrisk::ShatterCoefficient shatter{0.0};
                if (pow2_shatter >= 0.0)
                    shatter = batchrisk::ShatterCoefficient::pow2(pow2_shatter);
                else if (log_shatter >= 0.0)
                    shatter = batchrisk::ShatterCoefficient::from_log(log_shatter);
                else
                    throw batchrisk::ArgumentError(
                        "corollary4 needs --log-shatter or --pow2-shatter");
                bound = batchrisk::corollary4_bound(empirical_risk, shatter, bound_n,
                                                    bound_k, delta, strict_constants);
            } else if (regime == "vc") {
                bound = batchrisk::vc_bound(empirical_risk, vc_dim, bound_n, bound_k,
                                            delta, strict_constants);
            } else {
                throw batchrisk::ArgumentError("unknown regime '" + regime +
                                               "' (expected theorem3|corollary4|vc)");
            }
            Json report;
            report["metadata"] = metadata("bound", common);
            report["metadata"]["regime"] = regime;
            report["metadata"]["n"] = bound_n;
            report["metadata"]["k"] = bound_k;
            report["metadata"]["delta"] = delta;
            report["metadata"]["strict_constants"] = strict_constants;
            report["bound"] = batchrisk::to_json(bound);
            emit(report, common);
            return 0;
        }

        if (*verify_cmd) {
            const auto budget = batchrisk::VerificationBudget::scaled(budget_scale);
            const auto result = batchrisk::run_verification(common.seed, budget);
            for (const auto& check : result.checks)
                std::cerr << (check.skipped ? "SKIP" : check.passed ? "PASS" : "FAIL")
                          << ' ' << check.name << '\n';
            Json report;
            report["metadata"] = metadata("verify", common);
            report["metadata"]["budget_scale"] = budget_scale;
            report["verification"] = result.to_json();
            emit(report, common);
            return result.all_passed() ? 0 : 3;
        }

        if (*sweep_cmd) {
            sweep_config.data.task = batchrisk::task_from_string(task_name);
            sweep_config.data.seed = common.seed;
            sweep_config.ks = ks;
            sweep_config.threads = common.threads;
            if (kind_names.empty()) {
                sweep_config.kinds = {sweep_config.data.task ==
                                              batchrisk::Task::kClassificationSign
                                          ? batchrisk::LossKind::kZeroOne
                                          : batchrisk::LossKind::kMse};
            } else {
                sweep_config.kinds = parse_kinds(kind_names);
            }
            if (variant_names.empty()) {
                sweep_config.variants = {batchrisk::HypothesisKind::kConstantMean,
                                         batchrisk::HypothesisKind::kLookupMemorizer};
                if (sweep_config.data.task == batchrisk::Task::kClassificationSign)
                    sweep_config.variants.push_back(batchrisk::HypothesisKind::kThreshold);
            } else {
                for (const auto& name : variant_names)
                    sweep_config.variants.push_back(
                        batchrisk::hypothesis_kind_from_string(name));
            }
            const auto report_data = batchrisk::run_sweep(sweep_config);
            Json report;
            report["metadata"] = metadata("sweep", common);
            report["sweep"] = report_data.to_json();
            emit(report, common);
            emit_csv(report_data.to_csv(), common.csv_output);
            return 0;
        }

        if (*counter_cmd) {
            const auto witness =
                batchrisk::find_bce_counterexample(common.seed, search_budget);
            Json report;
            report["metadata"] = metadata("counterexample", common);
            report["metadata"]["budget"] = search_budget;
            if (witness) {
                report["result"] = witness->to_json();
            } else {
                report["result"]["found"] = false;
                report["result"]["attempts"] = search_budget;
            }
            emit(report, common);
            return 0;
        }
    } catch (const batchrisk::ArgumentError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const batchrisk::UnsupportedLossError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const batchrisk::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

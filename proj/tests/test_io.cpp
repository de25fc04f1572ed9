#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "batchrisk/errors.hpp"
#include "batchrisk/io.hpp"
#include "batchrisk/rng.hpp"

using namespace batchrisk;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("batchrisk_io_" + name);
}

EvalSet parse_string(const std::string& content, std::optional<LossKind> kind = {}) {
    std::istringstream in(content);
    return parse_eval_csv(in, kind, "test");
}

} // namespace

TEST_CASE("parse minimal csv") {
    const EvalSet set = parse_string("prediction,label\n0.5,1\n");
    REQUIRE(set.size() == 1);
    CHECK(set[0].prediction == 0.5);
    CHECK(set[0].label == 1.0);
}

TEST_CASE("parse errors cite the file line") {
    CHECK_THROWS_WITH_AS(parse_string("prediction,label\n0.5,1\nabc,1\n"),
                         doctest::Contains("line 3"), ParseError);
    CHECK_THROWS_WITH_AS(parse_string("prediction,label\n0.5\n"),
                         doctest::Contains("line 2"), ParseError);
    CHECK_THROWS_WITH_AS(parse_string("prediction,label\n0.5,1,9\n"),
                         doctest::Contains("line 2"), ParseError);
    CHECK_THROWS_WITH_AS(parse_string("prediction,label\nnan,1\n"),
                         doctest::Contains("line 2"), ParseError);
    CHECK_THROWS_WITH_AS(parse_string("prediction,label\ninf,0\n"),
                         doctest::Contains("line 2"), ParseError);
}

TEST_CASE("parse accepts CRLF line endings") {
    const EvalSet set = parse_string("prediction,label\r\n0.5,1\r\n0.25,0\r\n");
    REQUIRE(set.size() == 2);
    CHECK(set[1].prediction == 0.25);
}

TEST_CASE("parse rejects bad headers and empty input") {
    CHECK_THROWS_AS(parse_string(""), ParseError);
    CHECK_THROWS_AS(parse_string("pred,label\n0.5,1\n"), ParseError);
    CHECK_THROWS_AS(parse_string("prediction,label\n"), ParseError);
}

TEST_CASE("parse validates domain when the kind is known") {
    CHECK_THROWS_WITH_AS(
        parse_string("prediction,label\n1.5,1\n", LossKind::kMse),
        doctest::Contains("line 2"), ParseError);
    CHECK_THROWS_AS(parse_string("prediction,label\n0.5,0.5\n", LossKind::kZeroOne),
                    ParseError);
    CHECK_NOTHROW(parse_string("prediction,label\n1,-1\n", LossKind::kZeroOne));
    CHECK_NOTHROW(parse_string("prediction,label\n0.5,1\n", LossKind::kBce));
}

TEST_CASE("csv round trip is the identity") {
    auto gen = rng::substream(61, "csv_roundtrip");
    std::vector<LabeledPrediction> items;
    for (int i = 0; i < 64; ++i)
        items.push_back({gen.uniform01(), gen.uniform01()});
    items.push_back({1e-12, 1.0});
    items.push_back({0.1 + 0.2, 0.3});  // 0.30000000000000004 must survive
    const EvalSet original{std::move(items)};

    const auto path = temp_file("roundtrip.csv");
    write_eval_csv(original, path);
    const EvalSet parsed = parse_eval_csv(path);
    REQUIRE(parsed.size() == original.size());
    for (int i = 0; i < parsed.size(); ++i) {
        CHECK(parsed[static_cast<std::size_t>(i)].prediction ==
              original[static_cast<std::size_t>(i)].prediction);
        CHECK(parsed[static_cast<std::size_t>(i)].label ==
              original[static_cast<std::size_t>(i)].label);
    }
    std::filesystem::remove(path);
}

TEST_CASE("format_double emits shortest exact representations") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
    CHECK(format_double(0.1 + 0.2) == "0.30000000000000004");
}

TEST_CASE("risk estimate json carries all fields") {
    RiskEstimate est;
    est.value = 0.25;
    est.k = 2;
    est.kind = LossKind::kMse;
    est.method = RiskMethod::kMonteCarlo;
    est.std_error = 0.001;
    est.subsets_evaluated = 100;
    est.seed = 7;
    const Json j = to_json(est);
    CHECK(j["value"] == 0.25);
    CHECK(j["k"] == 2);
    CHECK(j["kind"] == "mse");
    CHECK(j["method"] == "monte_carlo");
    CHECK(j["std_error"] == 0.001);
    CHECK(j["subsets_evaluated"] == 100);
    CHECK(j["seed"] == 7);

    est.method = RiskMethod::kExact;
    est.std_error.reset();
    est.seed.reset();
    const Json e = to_json(est);
    CHECK(e["std_error"].is_null());
    CHECK(e["seed"].is_null());
}

TEST_CASE("loss table csv and sidecar") {
    const LossTable table({{0.5, -0.5, 0.0}}, 3, 2, LossKind::kZeroOne);
    const auto csv_path = temp_file("table.csv");
    const auto sidecar_path = temp_file("table.json");
    write_loss_table_csv(table, csv_path, sidecar_path);

    std::ifstream csv(csv_path);
    std::string line;
    std::getline(csv, line);
    CHECK(line == "0.5,-0.5,0");

    std::ifstream side(sidecar_path);
    const Json meta = Json::parse(side);
    CHECK(meta["n"] == 3);
    CHECK(meta["k"] == 2);
    CHECK(meta["kind"] == "zero_one");
    CHECK(meta["column_order"] == "colex");
    std::filesystem::remove(csv_path);
    std::filesystem::remove(sidecar_path);
}

TEST_CASE("dataset csv header matches the feature dimension") {
    Dataset d;
    d.features = {{0.25, 0.75}, {0.5, 0.5}};
    d.labels = {1.0, 0.0};
    const auto path = temp_file("dataset.csv");
    write_dataset_csv(d, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "f0,f1,label");
    std::string row;
    std::getline(in, row);
    CHECK(row == "0.25,0.75,1");
    std::filesystem::remove(path);
}

TEST_CASE("hypothesis json") {
    const auto constant = Hypothesis::constant(0.5, Task::kRegressionUnit);
    const Json j = to_json(constant);
    CHECK(j["variant"] == "constant_mean");
    CHECK(j["value"] == 0.5);

    Dataset d;
    d.features = {{0.5}};
    d.labels = {1.0};
    const auto lookup = Hypothesis::lookup(d, 42, Task::kClassificationSign);
    const Json lj = to_json(lookup);
    CHECK(lj["variant"] == "lookup_memorizer");
    CHECK(lj["fallback_seed"] == 42);
    CHECK(lj["entries"].size() == 1);
}

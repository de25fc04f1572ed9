#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "batchrisk/complexity.hpp"
#include "batchrisk/hypotheses.hpp"
#include "batchrisk/risk.hpp"

namespace batchrisk {

using Json = nlohmann::ordered_json;

// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double value);

// EvalSet CSV: header "prediction,label", one pair per row. When `kind` is
// given, values are also checked against its domains; errors cite the
// offending file line.
EvalSet parse_eval_csv(const std::filesystem::path& path,
                       std::optional<LossKind> kind = std::nullopt);
EvalSet parse_eval_csv(std::istream& in, std::optional<LossKind> kind,
                       const std::string& source_name);

void write_eval_csv(const EvalSet& set, const std::filesystem::path& path);
std::string eval_csv_string(const EvalSet& set);

// Dataset CSV: header "f0,...,f{d-1},label".
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);

// LossTable CSV (one row per hypothesis) plus a JSON sidecar
// {n, k, kind, column_order}.
void write_loss_table_csv(const LossTable& table, const std::filesystem::path& csv_path,
                          const std::filesystem::path& sidecar_path);

Json to_json(const RiskEstimate& estimate);
Json to_json(const BoundReport& report);
Json to_json(const Hypothesis& hypothesis);

// Atomically-ordered, newline-terminated dump used for all report files.
void write_json_file(const Json& value, const std::filesystem::path& path);

} // namespace batchrisk

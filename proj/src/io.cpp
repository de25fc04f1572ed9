#include "batchrisk/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "batchrisk/errors.hpp"

namespace batchrisk {

namespace {

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

double parse_real(const std::string& token, int line_number) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw ParseError("line " + std::to_string(line_number) + ": '" + token +
                         "' is not a decimal real");
    if (!std::isfinite(value))
        throw ParseError("line " + std::to_string(line_number) + ": '" + token +
                         "' is not finite");
    return value;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    return out;
}

} // namespace

std::string format_double(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc{}) throw Error("format_double failed");
    return std::string(buffer, ptr);
}

EvalSet parse_eval_csv(const std::filesystem::path& path, std::optional<LossKind> kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    return parse_eval_csv(in, kind, path.string());
}

EvalSet parse_eval_csv(std::istream& in, std::optional<LossKind> kind,
                       const std::string& source_name) {
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(source_name + ": empty input, expected header 'prediction,label'");
    if (strip_cr(line) != "prediction,label")
        throw ParseError(source_name + ": line 1: header must be 'prediction,label', got '" +
                         strip_cr(line) + "'");

    std::vector<LabeledPrediction> items;
    int line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw ParseError(source_name + ": line " + std::to_string(line_number) +
                             ": expected exactly two comma-separated values");
        LabeledPrediction item{};
        item.prediction = parse_real(line.substr(0, comma), line_number);
        item.label = parse_real(line.substr(comma + 1), line_number);
        if (kind) {
            try {
                detail::check_element(*kind, item.prediction, item.label, "");
            } catch (const DomainError& e) {
                throw ParseError(source_name + ": line " + std::to_string(line_number) +
                                 ": " + e.what());
            }
        }
        items.push_back(item);
    }
    if (items.empty())
        throw ParseError(source_name + ": no data rows");
    return EvalSet(std::move(items));
}

std::string eval_csv_string(const EvalSet& set) {
    std::string out = "prediction,label\n";
    for (const auto& item : set.items()) {
        out += format_double(item.prediction);
        out += ',';
        out += format_double(item.label);
        out += '\n';
    }
    return out;
}

void write_eval_csv(const EvalSet& set, const std::filesystem::path& path) {
    open_for_write(path) << eval_csv_string(set);
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    const std::size_t dim = data.features.empty() ? 0 : data.features.front().size();
    for (std::size_t d = 0; d < dim; ++d) out << 'f' << d << ',';
    out << "label\n";
    for (std::size_t i = 0; i < data.features.size(); ++i) {
        for (double v : data.features[i]) out << format_double(v) << ',';
        out << format_double(data.labels[i]) << '\n';
    }
}

void write_loss_table_csv(const LossTable& table, const std::filesystem::path& csv_path,
                          const std::filesystem::path& sidecar_path) {
    auto out = open_for_write(csv_path);
    for (int r = 0; r < table.rows(); ++r) {
        for (int c = 0; c < table.cols(); ++c) {
            if (c > 0) out << ',';
            out << format_double(table.at(r, c));
        }
        out << '\n';
    }
    Json sidecar;
    sidecar["n"] = table.n();
    sidecar["k"] = table.k();
    sidecar["kind"] = table.kind() ? Json(std::string(to_string(*table.kind()))) : Json();
    sidecar["column_order"] = "colex";
    sidecar["rows"] = table.rows();
    sidecar["columns"] = table.cols();
    write_json_file(sidecar, sidecar_path);
}

Json to_json(const RiskEstimate& estimate) {
    Json j;
    j["value"] = estimate.value;
    j["k"] = estimate.k;
    j["kind"] = std::string(to_string(estimate.kind));
    j["method"] = std::string(to_string(estimate.method));
    j["std_error"] = estimate.std_error ? Json(*estimate.std_error) : Json();
    j["subsets_evaluated"] = estimate.subsets_evaluated;
    j["seed"] = estimate.seed ? Json(*estimate.seed) : Json();
    return j;
}

Json to_json(const BoundReport& report) {
    Json j;
    j["empirical_risk"] = report.empirical_risk;
    j["rademacher_term"] = report.rademacher_term;
    j["xi"] = report.xi;
    j["psi"] = report.psi;
    j["c"] = report.c;
    j["delta"] = report.delta;
    j["total"] = report.total;
    j["regime"] = std::string(to_string(report.regime));
    j["vacuous"] = report.vacuous;
    j["strict_constants"] = report.strict_constants;
    j["xi_factor"] = report.xi_factor;
    j["psi_factor"] = report.psi_factor;
    return j;
}

Json to_json(const Hypothesis& hypothesis) {
    Json j;
    j["variant"] = std::string(to_string(hypothesis.kind()));
    j["task"] = std::string(to_string(hypothesis.task()));
    switch (hypothesis.kind()) {
        case HypothesisKind::kConstantMean:
            j["value"] = hypothesis.constant_value();
            break;
        case HypothesisKind::kThreshold:
            j["location"] = hypothesis.threshold_location();
            j["orientation"] = hypothesis.threshold_orientation();
            break;
        case HypothesisKind::kLookupMemorizer: {
            j["fallback_seed"] = hypothesis.fallback_seed();
            Json entries = Json::array();
            for (const auto& [features, label] : hypothesis.memorized()) {
                Json entry;
                entry["features"] = features;
                entry["label"] = label;
                entries.push_back(std::move(entry));
            }
            j["entries"] = std::move(entries);
            break;
        }
    }
    return j;
}

void write_json_file(const Json& value, const std::filesystem::path& path) {
    open_for_write(path) << value.dump(2) << '\n';
}

} // namespace batchrisk

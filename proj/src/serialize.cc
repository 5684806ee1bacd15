#include "dph/serialize.h"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dph/csv.h"

namespace dph {
namespace {

using nlohmann::json;

json NumberOrNull(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json OptionalNumber(const std::optional<double>& x) {
  return x ? NumberOrNull(*x) : json(nullptr);
}

std::optional<double> ReadOptional(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

double ReadDoubleOrNan(const json& j) {
  return j.is_null() ? std::nan("") : j.get<double>();
}

json LedgerJson(const BudgetLedger& ledger) {
  json entries = json::array();
  for (const BudgetLedger::Entry& e : ledger.entries()) {
    entries.push_back({{"module", e.module},
                       {"eps", e.eps},
                       {"disjoint_group", e.disjoint_group ? json(*e.disjoint_group)
                                                           : json(nullptr)}});
  }
  return entries;
}

json TreeJson(const HayEstimator& estimator) {
  const AggregateTree& tree = estimator.noisy();
  json levels = json::array();
  for (std::size_t ell = 1; ell <= tree.height(); ++ell) {
    const TreeLevel& level = tree.level(ell);
    json variances = json::array();
    for (double v : level.variances) variances.push_back(NumberOrNull(v));
    json consistent(std::vector<double>(estimator.consistent(ell).begin(),
                                        estimator.consistent(ell).end()));
    levels.push_back({{"values", level.values},
                      {"variances", std::move(variances)},
                      {"pruned", level.pruned},
                      {"consistent", std::move(consistent)}});
  }
  return {{"fanout", tree.fanout()}, {"height", tree.height()}, {"levels", levels}};
}

std::string OptionalText(const std::optional<double>& x) {
  return x ? FormatDouble(*x) : std::string();
}

std::optional<double> ParseOptional(const std::string& field, std::size_t line_no) {
  if (field.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": bad number '" +
                             field + "'");
  }
  return value;
}

std::size_t ParseCount(const std::string& field, std::size_t line_no) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": bad integer '" +
                             field + "'");
  }
  return value;
}

// Reads the rows after `header`, each with exactly `columns` fields.
template <typename Fn>
void ReadTable(std::istream& in, std::string_view header, std::size_t columns, Fn&& fn) {
  std::string line;
  if (!std::getline(in, line) || SplitCsvLine(line) != SplitCsvLine(header)) {
    throw std::runtime_error("line 1: expected header `" + std::string(header) + "`");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> fields = SplitCsvLine(line);
    if (fields.size() != columns) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                               std::to_string(columns) + " fields");
    }
    fn(fields, line_no);
  }
}

}  // namespace

std::string StructureToJson(const NoisyStructure& structure) {
  json out;
  out["scheme"] = std::string(SchemeName(structure.kind()));
  out["variant"] = std::string(structure.variant_name());
  out["n"] = structure.n();
  out["seed"] = structure.seed();
  out["ledger_total"] = structure.ledger().total();
  out["ledger_spent"] = structure.ledger().spent();
  out["ledger"] = LedgerJson(structure.ledger());
  if (structure.grouping()) {
    json groups = json::array();
    for (const Group& g : structure.grouping()->groups()) {
      groups.push_back({g.lo, g.hi});
    }
    out["grouping"] = std::move(groups);
  } else {
    out["grouping"] = nullptr;
  }
  const auto& payload = structure.payload();
  if (const auto* h = std::get_if<NoisyHistogram>(&payload)) {
    json values = json::array();
    json labels = json::array();
    json groups = json::array();
    for (const NoisyBin& bin : h->bins()) {
      values.push_back(OptionalNumber(bin.value));
      labels.push_back(bin.label.name);
      groups.push_back(bin.label.group ? json(*bin.label.group) : json(nullptr));
    }
    out["values"] = std::move(values);
    out["labels"] = std::move(labels);
    out["group_ids"] = std::move(groups);
  } else if (const auto* tree = std::get_if<HayEstimator>(&payload)) {
    out["tree"] = TreeJson(*tree);
  } else {
    out["values"] = std::get<std::vector<double>>(payload);
  }
  return out.dump(2) + "\n";
}

void WriteTrialsCsv(const std::vector<TrialResult>& rows, std::ostream& out) {
  out << "scheme,trial,mse,build_ms\n";
  for (const TrialResult& row : rows) {
    out << CsvField(row.scheme) << ',' << row.trial << ',' << OptionalText(row.mse)
        << ',' << OptionalText(row.build_ms) << '\n';
  }
}

std::vector<TrialResult> ReadTrialsCsv(std::istream& in) {
  std::vector<TrialResult> rows;
  ReadTable(in, "scheme,trial,mse,build_ms", 4,
            [&](const std::vector<std::string>& f, std::size_t line_no) {
              TrialResult row;
              row.scheme = f[0];
              row.trial = ParseCount(f[1], line_no);
              row.mse = ParseOptional(f[2], line_no);
              row.build_ms = ParseOptional(f[3], line_no);
              rows.push_back(std::move(row));
            });
  return rows;
}

std::string MseResultToJson(const MseResult& result) {
  json summary = json::array();
  for (const SchemeSummary& s : result.summary) {
    summary.push_back({{"scheme", s.scheme},
                       {"trials", s.trials},
                       {"failures", s.failures},
                       {"median_mse", NumberOrNull(s.median_mse)},
                       {"mean_mse", NumberOrNull(s.mean_mse)},
                       {"median_build_ms", NumberOrNull(s.median_build_ms)},
                       {"first_error", s.first_error}});
  }
  json trials = json::array();
  for (const TrialResult& row : result.trials) {
    trials.push_back({{"scheme", row.scheme},
                      {"trial", row.trial},
                      {"mse", OptionalNumber(row.mse)},
                      {"build_ms", OptionalNumber(row.build_ms)},
                      {"error", row.error}});
  }
  return json{{"summary", summary}, {"trials", trials}}.dump(2) + "\n";
}

MseResult MseResultFromJson(std::string_view text) {
  const json j = json::parse(text);
  MseResult result;
  for (const json& s : j.at("summary")) {
    SchemeSummary summary;
    summary.scheme = s.at("scheme").get<std::string>();
    summary.trials = s.at("trials").get<std::size_t>();
    summary.failures = s.at("failures").get<std::size_t>();
    summary.median_mse = ReadDoubleOrNan(s.at("median_mse"));
    summary.mean_mse = ReadDoubleOrNan(s.at("mean_mse"));
    summary.median_build_ms = ReadDoubleOrNan(s.at("median_build_ms"));
    summary.first_error = s.at("first_error").get<std::string>();
    result.summary.push_back(std::move(summary));
  }
  for (const json& t : j.at("trials")) {
    TrialResult row;
    row.scheme = t.at("scheme").get<std::string>();
    row.trial = t.at("trial").get<std::size_t>();
    row.mse = ReadOptional(t.at("mse"));
    row.build_ms = ReadOptional(t.at("build_ms"));
    row.error = t.at("error").get<std::string>();
    result.trials.push_back(std::move(row));
  }
  return result;
}

void WriteTimingCsv(const std::vector<TimingRow>& rows, std::ostream& out) {
  out << "scheme,n,build_ms,status\n";
  for (const TimingRow& row : rows) {
    out << CsvField(row.scheme) << ',' << row.n << ',' << OptionalText(row.build_ms)
        << ',' << CsvField(row.status) << '\n';
  }
}

std::vector<TimingRow> ReadTimingCsv(std::istream& in) {
  std::vector<TimingRow> rows;
  ReadTable(in, "scheme,n,build_ms,status", 4,
            [&](const std::vector<std::string>& f, std::size_t line_no) {
              rows.push_back(TimingRow{f[0], ParseCount(f[1], line_no),
                                       ParseOptional(f[2], line_no), f[3]});
            });
  return rows;
}

void WriteTradeoffCsv(const std::vector<SchemeSummary>& summary, std::ostream& out) {
  out << "scheme,median_mse,mean_mse,median_build_ms,failures\n";
  for (const SchemeSummary& s : summary) {
    out << CsvField(s.scheme) << ',' << FormatDouble(s.median_mse) << ','
        << FormatDouble(s.mean_mse) << ',' << FormatDouble(s.median_build_ms) << ','
        << s.failures << '\n';
  }
}

}  // namespace dph

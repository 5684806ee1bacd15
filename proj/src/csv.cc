#include "dph/csv.h"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace dph {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

std::string CsvField(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> SplitCsvLine(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
}

std::string FormatDouble(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("cannot format double");
  return std::string(buf, end);
}

Histogram ReadHistogramCsv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw std::runtime_error("dataset is empty (missing `label,value` header)");
  }
  ++line_no;
  if (Trim(line) != "label,value") {
    throw std::runtime_error("line 1: expected header `label,value`");
  }
  std::vector<Bin> bins;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view row = Trim(line);
    if (row.empty()) continue;
    const std::vector<std::string> fields = SplitCsvLine(row);
    if (fields.size() != 2) {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": expected two fields");
    }
    std::string_view label = Trim(fields[0]);
    std::string_view field = Trim(fields[1]);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (label.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": malformed label or value");
    }
    bins.push_back(Bin{Label{std::string(label), std::nullopt, false}, value});
  }
  try {
    return Histogram(std::move(bins));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("invalid dataset: ") + e.what());
  }
}

Histogram ReadHistogramCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");
  return ReadHistogramCsv(in);
}

void WriteHistogramCsv(const Histogram& h, std::ostream& out) {
  out << "label,value\n";
  for (const Bin& bin : h.bins()) {
    out << CsvField(bin.label.name) << ',' << FormatDouble(bin.value) << '\n';
  }
}

void WriteHistogramCsv(const Histogram& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  WriteHistogramCsv(h, out);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace dph

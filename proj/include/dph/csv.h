// Dataset files: CSV with header `label,value`, one bin per row, row order is
// bin order.

#ifndef DPH_CSV_H_
#define DPH_CSV_H_

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dph/core.h"

namespace dph {

// Throws std::runtime_error with a line number on malformed input.
Histogram ReadHistogramCsv(std::istream& in);
Histogram ReadHistogramCsv(const std::string& path);

void WriteHistogramCsv(const Histogram& h, std::ostream& out);
// Throws std::runtime_error when the file cannot be written.
void WriteHistogramCsv(const Histogram& h, const std::string& path);

// Shortest decimal text that parses back to the same double.
std::string FormatDouble(double value);

// RFC 4180 quoting, applied only when the field contains `,`, `"` or a newline.
std::string CsvField(std::string_view field);
// Splits one line into fields, undoing CsvField.
std::vector<std::string> SplitCsvLine(std::string_view line);

}  // namespace dph

#endif  // DPH_CSV_H_

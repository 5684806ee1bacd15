// JSON for published structures; CSV and JSON for experiment tables.

#ifndef DPH_SERIALIZE_H_
#define DPH_SERIALIZE_H_

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dph/eval.h"
#include "dph/schemes.h"

namespace dph {

// Variant tag, values, grouping or tree metadata, and the ledger. Infinite
// variances are written as null. Output is byte-identical for equal inputs.
std::string StructureToJson(const NoisyStructure& structure);

// `scheme,trial,mse,build_ms`. Failed trials have empty mse and build_ms;
// their messages are kept by the JSON form only.
void WriteTrialsCsv(const std::vector<TrialResult>& rows, std::ostream& out);
std::vector<TrialResult> ReadTrialsCsv(std::istream& in);

// Summary plus every trial row, including error messages.
std::string MseResultToJson(const MseResult& result);
MseResult MseResultFromJson(std::string_view text);

// `scheme,n,build_ms,status`.
void WriteTimingCsv(const std::vector<TimingRow>& rows, std::ostream& out);
std::vector<TimingRow> ReadTimingCsv(std::istream& in);

// Utility-versus-time pairs: `scheme,median_mse,mean_mse,median_build_ms,failures`.
void WriteTradeoffCsv(const std::vector<SchemeSummary>& summary, std::ostream& out);

}  // namespace dph

#endif  // DPH_SERIALIZE_H_

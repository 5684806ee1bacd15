#include "dph/serialize.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "dph/csv.h"

namespace dph {
namespace {

using nlohmann::json;

TEST(HistogramCsvTest, RoundTrip) {
  std::vector<Bin> bins{{Label{"a,b", std::nullopt, false}, 1.5},
                        {Label{"z", std::nullopt, false}, 0.0},
                        {Label{"q", std::nullopt, false}, 0.1}};
  const Histogram h(bins);
  std::stringstream buffer;
  WriteHistogramCsv(h, buffer);
  const Histogram back = ReadHistogramCsv(buffer);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0].label.name, "a,b");
  EXPECT_EQ(back.values(), h.values());
}

TEST(HistogramCsvTest, MalformedInputNamesTheLine) {
  std::stringstream bad("label,value\nx,1\ny,oops\n");
  try {
    ReadHistogramCsv(bad);
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  std::stringstream negative("label,value\nx,-1\n");
  EXPECT_ANY_THROW(ReadHistogramCsv(negative));
  EXPECT_THROW(ReadHistogramCsv(std::string("/nonexistent/data.csv")), std::runtime_error);
}

TEST(FormatDoubleTest, ShortestRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456789.0, -2.5}) {
    EXPECT_EQ(std::stod(FormatDouble(x)), x);
  }
  EXPECT_EQ(FormatDouble(0.5), "0.5");
}

NoisyStructure RunSmall(SchemeKind kind, std::uint64_t seed) {
  const std::vector<double> values{5, 5, 5, 0, 0, 0, 0, 9, 1, 1, 2, 3, 0, 0, 0, 0, 4};
  SchemeConfig config;
  config.kind = kind;
  config.seed = seed;
  config.fanout = 4;
  return RunScheme(Histogram::FromValues(values), config);
}

TEST(StructureJsonTest, ByteIdenticalForEqualRuns) {
  for (SchemeKind kind : kAllSchemes) {
    EXPECT_EQ(StructureToJson(RunSmall(kind, 3)), StructureToJson(RunSmall(kind, 3))) << SchemeName(kind);
    EXPECT_NE(StructureToJson(RunSmall(kind, 3)), StructureToJson(RunSmall(kind, 4))) << SchemeName(kind);
  }
}

TEST(StructureJsonTest, CarriesVariantLedgerAndPayload) {
  const json lpa = json::parse(StructureToJson(RunSmall(SchemeKind::kLpa, 1)));
  EXPECT_EQ(lpa["scheme"], "lpa");
  EXPECT_EQ(lpa["variant"], "histogram");
  EXPECT_EQ(lpa["n"], 17);
  EXPECT_EQ(lpa["values"].size(), 17u);
  EXPECT_TRUE(lpa["grouping"].is_null());
  EXPECT_DOUBLE_EQ(lpa["ledger_spent"].get<double>(), 1.0);

  const json sub = json::parse(StructureToJson(RunSmall(SchemeKind::kSub, 1)));
  EXPECT_EQ(sub["variant"], "tree");
  EXPECT_EQ(sub["tree"]["fanout"], 4);
  EXPECT_EQ(sub["tree"]["height"], 4);
  EXPECT_EQ(sub["tree"]["levels"].size(), 4u);
  EXPECT_FALSE(sub["grouping"].is_null());

  const json sps = json::parse(StructureToJson(RunSmall(SchemeKind::kSps, 1)));
  EXPECT_EQ(sps["variant"], "prefix");
  EXPECT_EQ(sps["ledger"].size(), 2u);
  std::size_t covered = 0;
  for (const json& g : sps["grouping"]) covered += g[1].get<std::size_t>() - g[0].get<std::size_t>() + 1;
  EXPECT_EQ(covered, 17u);
}

TEST(StructureJsonTest, InfiniteVariancesBecomeNull) {
  std::vector<TreeLevel> levels(2);
  levels[0] = {{3.0}, {2.0}, {0}};
  levels[1] = {{1.5, 1.5}, {std::numeric_limits<double>::infinity(),
                            std::numeric_limits<double>::infinity()}, {1, 1}};
  BudgetLedger ledger(1.0);
  ledger.Spend("x", 1.0);
  const NoisyStructure s(SchemeKind::kSub, HayEstimator(AggregateTree(2, 2, levels)), ledger,
                         std::nullopt, 0);
  const json j = json::parse(StructureToJson(s));
  EXPECT_TRUE(j["tree"]["levels"][1]["variances"][0].is_null());
  EXPECT_EQ(j["tree"]["levels"][1]["pruned"][1], 1);
}

TEST(TrialsCsvTest, RoundTripWithFailures) {
  const std::vector<TrialResult> rows{{"lpa", 0, 612.25, 0.5, ""},
                                      {"dawa", 1, std::nullopt, std::nullopt, "guard"},
                                      {"s,1", 2, 1.0 / 3.0, 2.0, ""}};
  std::stringstream buffer;
  WriteTrialsCsv(rows, buffer);
  const std::vector<TrialResult> back = ReadTrialsCsv(buffer);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0], rows[0]);
  EXPECT_EQ(back[1].scheme, "dawa");
  EXPECT_FALSE(back[1].mse.has_value());
  EXPECT_EQ(back[1].error, "");
  EXPECT_EQ(back[2], rows[2]);
}

TEST(TrialsCsvTest, RejectsBadHeaderAndFields) {
  std::stringstream header("scheme,mse\n");
  EXPECT_THROW(ReadTrialsCsv(header), std::runtime_error);
  std::stringstream fields("scheme,trial,mse,build_ms\nlpa,x,1,1\n");
  EXPECT_THROW(ReadTrialsCsv(fields), std::runtime_error);
  std::stringstream count("scheme,trial,mse,build_ms\nlpa,1,1\n");
  EXPECT_THROW(ReadTrialsCsv(count), std::runtime_error);
}

TEST(MseResultJsonTest, LosslessRoundTrip) {
  MseResult result;
  result.trials = {{"h", 0, 0.1, 0.2, ""}, {"dawa", 0, std::nullopt, std::nullopt, "too big"}};
  result.summary = Summarize(result.trials);
  const MseResult back = MseResultFromJson(MseResultToJson(result));
  EXPECT_EQ(back.trials, result.trials);
  ASSERT_EQ(back.summary.size(), 2u);
  EXPECT_EQ(back.summary[0], result.summary[0]);
  EXPECT_TRUE(std::isnan(back.summary[1].median_mse));
  EXPECT_EQ(back.summary[1].first_error, "too big");
}

TEST(TimingCsvTest, RoundTrip) {
  const std::vector<TimingRow> rows{{"sub", 1024, 3.5, "ok"},
                                    {"dawa", 2048, std::nullopt, "SKIPPED"},
                                    {"s2", 10, std::nullopt, "error, \"quoted\""}};
  std::stringstream buffer;
  WriteTimingCsv(rows, buffer);
  EXPECT_EQ(ReadTimingCsv(buffer), rows);
}

TEST(TradeoffCsvTest, OneRowPerScheme) {
  std::stringstream buffer;
  WriteTradeoffCsv(Summarize({{"a", 0, 1.0, 2.0, ""}, {"b", 0, 3.0, 4.0, ""}}), buffer);
  EXPECT_EQ(buffer.str(),
            "scheme,median_mse,mean_mse,median_build_ms,failures\na,1,1,2,0\nb,3,3,4,0\n");
}

}  // namespace
}  // namespace dph

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "dph/core.h"
#include "dph/eval.h"
#include "dph/grouping.h"
#include "dph/noise.h"
#include "dph/schemes.h"
#include "dph/serialize.h"

namespace py = pybind11;

namespace {

using GroupTuple = std::tuple<std::size_t, std::size_t, double>;

std::vector<GroupTuple> ToTuples(const dph::GroupingStrategy& g) {
  std::vector<GroupTuple> out;
  for (const dph::Group& group : g.groups()) out.emplace_back(group.lo, group.hi, group.cost);
  return out;
}

dph::NoisyStructure Run(const std::vector<double>& values, const std::string& scheme,
                        double eps, std::uint64_t seed, std::size_t fanout,
                        const std::optional<std::string>& metric,
                        const std::string& allocation, const std::string& fq_strategy,
                        bool force) {
  dph::SchemeConfig config;
  config.kind = dph::ParseScheme(scheme);
  config.eps = eps;
  config.seed = seed;
  config.fanout = fanout;
  if (metric) config.metric = dph::ParseMetric(*metric);
  config.allocation = dph::ParseAllocation(allocation);
  config.fq_strategy = dph::ParseFqStrategy(fq_strategy);
  config.force = force;
  py::gil_scoped_release release;
  return dph::RunScheme(dph::Histogram::FromValues(values), config);
}

py::dict MseSummary(const std::vector<double>& values,
                    const std::vector<std::string>& schemes, double eps,
                    double range_fraction, std::size_t trials, std::size_t queries,
                    std::uint64_t seed) {
  dph::ExperimentSpec spec;
  for (const std::string& s : schemes) spec.schemes.push_back(dph::ParseScheme(s));
  spec.eps = eps;
  spec.range_fraction = range_fraction;
  spec.trials = trials;
  spec.queries_per_trial = queries;
  spec.seed = seed;
  dph::MseResult result;
  {
    py::gil_scoped_release release;
    result = dph::MseExperiment(dph::Histogram::FromValues(values), spec);
  }
  py::dict out;
  for (const dph::SchemeSummary& s : result.summary) {
    py::dict row;
    row["median_mse"] = s.median_mse;
    row["mean_mse"] = s.mean_mse;
    row["median_build_ms"] = s.median_build_ms;
    row["failures"] = s.failures;
    out[py::str(s.scheme)] = row;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_dphist, m) {
  m.doc() = "Private publishing of histograms that answer range sums";

  py::register_exception<dph::BudgetExceededError>(m, "BudgetExceededError",
                                                   PyExc_RuntimeError);
  py::register_exception<dph::GuardError>(m, "GuardError", PyExc_RuntimeError);
  py::register_exception<dph::ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<dph::NoisyStructure>(m, "Structure")
      .def_property_readonly("scheme",
                             [](const dph::NoisyStructure& s) {
                               return std::string(dph::SchemeName(s.kind()));
                             })
      .def_property_readonly("variant",
                             [](const dph::NoisyStructure& s) {
                               return std::string(s.variant_name());
                             })
      .def_property_readonly("n", &dph::NoisyStructure::n)
      .def_property_readonly("seed", &dph::NoisyStructure::seed)
      .def_property_readonly("ledger_total",
                             [](const dph::NoisyStructure& s) { return s.ledger().total(); })
      .def_property_readonly("ledger_spent",
                             [](const dph::NoisyStructure& s) { return s.ledger().spent(); })
      .def_property_readonly("grouping",
                             [](const dph::NoisyStructure& s)
                                 -> std::optional<std::vector<GroupTuple>> {
                               if (!s.grouping()) return std::nullopt;
                               return ToTuples(*s.grouping());
                             })
      .def("answer",
           [](const dph::NoisyStructure& s, std::size_t lo, std::size_t hi) {
             return s.Answer(dph::RangeQuery{lo, hi});
           },
           py::arg("lo"), py::arg("hi"), "Range sum over bins lo..hi (1-based, inclusive).")
      .def("to_json", &dph::StructureToJson);

  m.def("run_scheme", &Run, py::arg("values"), py::arg("scheme"), py::arg("eps") = 1.0,
        py::arg("seed") = 0, py::arg("fanout") = 16, py::arg("metric") = py::none(),
        py::arg("budget_allocation") = "geometric",
        py::arg("fq_strategy") = "hierarchical", py::arg("force") = false);

  m.def("schemes", [] {
    std::vector<std::string> names;
    for (dph::SchemeKind k : dph::kAllSchemes) names.emplace_back(dph::SchemeName(k));
    return names;
  });

  m.def("generate",
        [](const std::string& kind, std::size_t n, std::uint64_t seed, double magnitude) {
          dph::SyntheticSpec spec{dph::ParseSynthetic(kind), n, seed, magnitude};
          return dph::Generate(spec).values();
        },
        py::arg("kind"), py::arg("n"), py::arg("seed") = 1, py::arg("magnitude") = 1000.0);

  m.def("lpa",
        [](const std::vector<double>& values, double eps, std::uint64_t seed) {
          dph::BudgetLedger ledger(eps);
          dph::NoiseSource src(seed);
          return dph::Lpa(dph::Histogram::FromValues(values), eps, src, ledger).values();
        },
        py::arg("values"), py::arg("eps"), py::arg("seed") = 0);

  m.def("prefix_sums",
        [](const std::vector<double>& values) { return dph::PrefixSums(values); },
        py::arg("values"));
  m.def("range_sum",
        [](const std::vector<double>& values, std::size_t lo, std::size_t hi) {
          return dph::RangeSum(std::span<const double>(values), dph::RangeQuery{lo, hi});
        },
        py::arg("values"), py::arg("lo"), py::arg("hi"));

  m.def("group_squared_optimal",
        [](const std::vector<double>& noisy, double noise_eps, double v, bool bias_correct) {
          return ToTuples(dph::GroupSquaredOptimal(
              noisy, noise_eps, dph::PermissibleGroups::All(noisy.size(), v), bias_correct));
        },
        py::arg("noisy"), py::arg("noise_eps"), py::arg("v"), py::arg("bias_correct") = true,
        "Optimal squared-metric grouping of already-noisy values; spends no budget.");

  m.def("mse_experiment", &MseSummary, py::arg("values"), py::arg("schemes"),
        py::arg("eps") = 1.0, py::arg("range_fraction") = 0.3, py::arg("trials") = 100,
        py::arg("queries") = 2000, py::arg("seed") = 0);
}

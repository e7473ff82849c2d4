#include "rrf/csv.hpp"
#include "rrf/experiments.hpp"
#include "rrf/statistics.hpp"

#include <doctest.h>

#include <sstream>

using namespace rrf;
using namespace rrf::experiments;

TEST_CASE("nearest-rank percentiles") {
  const std::vector<double> x = {5.0, 1.0, 4.0, 2.0, 3.0};
  CHECK(stats::percentile(x, 50) == 3.0);
  CHECK(stats::percentile(x, 0) == 1.0);
  CHECK(stats::percentile(x, 100) == 5.0);
  CHECK(stats::percentile(x, 20) == 1.0);
  CHECK(stats::percentile(x, 21) == 2.0);
  CHECK(stats::percentile({1.0, 2.0, 3.0, 4.0}, 50) == 2.0);
  CHECK(stats::mean(x) == 3.0);
  const stats::Summary s = stats::summarize(x);
  CHECK(s.min == 1.0);
  CHECK(s.p25 == 2.0);
  CHECK(s.p50 == 3.0);
  CHECK(s.p75 == 4.0);
  CHECK(s.max == 5.0);
  CHECK_THROWS(stats::percentile({}, 50));
  CHECK_THROWS(stats::percentile(x, 101));
}

TEST_CASE("number formatting and CSV rows") {
  CHECK(csv::format_number(0.0) == "0");
  CHECK(csv::format_number(1.0) == "1");
  CHECK(csv::format_number(0.001) == "0.001");
  CHECK(csv::format_number(2.5e-4) == "2.500000000000e-04");
  CHECK(csv::format_number(-1e-10) == "-1.000000000000e-10");
  CHECK(csv::format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(csv::format_number(123456.0) == "123456");

  std::ostringstream os;
  csv::Writer w(os, {"a", "b"});
  w.row({csv::cell(1), csv::cell(0.5)});
  CHECK(os.str() == "a,b\n1,0.5\n");
  CHECK_THROWS(w.row({"x"}));
}

TEST_CASE("config parsing") {
  const ExperimentConfig fixed = parse_config(R"({"schema_version": 1, "experiment": "example1-fixed"})");
  CHECK(fixed.n_values.size() == 12);
  CHECK(fixed.geometry.inverse_h == 40);
  CHECK(fixed.runs == 100);

  const ExperimentConfig adaptive = parse_config(
      R"({"schema_version": 1, "experiment": "example1-adaptive", "runs": 7, "geometry": {"inverse_h": 20}})");
  CHECK(adaptive.tolerances == std::vector<double>{1e-2, 1e-4, 1e-6});
  CHECK(adaptive.runs == 7);
  CHECK(adaptive.geometry.inverse_h == 20);

  const ExperimentConfig hdep = parse_config(R"({"schema_version": 1, "experiment": "example1-hdep"})");
  CHECK(hdep.geometry.half_length == 0.5);

  const ExperimentConfig gfem =
      parse_config(R"({"schema_version": 1, "experiment": "example4-gfem", "gfem": {"example": "channels"}})");
  CHECK(gfem.gfem_example == "channels");

  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config("[]"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "example1-fixed"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"schema_version": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"schema_version": 2, "experiment": "example1-fixed"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "experiment": "nope"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "experiment": "example1-fixed", "colour": 1})"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_config(R"({"schema_version": 1, "experiment": "example1-fixed", "geometry": {"depth": 1}})"),
      ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "experiment": "example1-fixed", "runs": 0})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "experiment": "example1-fixed", "runs": "many"})"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_config(R"({"schema_version": 1, "experiment": "example1-adaptive", "tolerances": [-1]})"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config(R"({"schema_version": 1, "experiment": "example1-cputable", "n_t_values": [10, 20]})"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config(R"({"schema_version": 1, "experiment": "example4-gfem", "gfem": {"example": "x"}})"),
      ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("studies are reproducible byte for byte") {
  const ExperimentConfig c = parse_config(
      R"({"schema_version": 1, "experiment": "example1-fixed", "geometry": {"inverse_h": 10},
          "n_values": [1, 2, 4], "runs": 20, "seed": 3})");
  std::ostringstream a, b;
  write_fixed_csv(a, fixed_rank_study(c));
  write_fixed_csv(b, fixed_rank_study(c));
  CHECK(a.str() == b.str());
  CHECK(a.str().find("n,") == 0);

  ExperimentConfig threaded = parse_config(
      R"({"schema_version": 1, "experiment": "example1-adaptive", "geometry": {"inverse_h": 10},
          "tolerances": [1e-3], "runs": 20, "seed": 5})");
  std::ostringstream s1, s2;
  write_adaptive_csv(s1, adaptive_study(threaded));
  threaded.threads = 3;
  write_adaptive_csv(s2, adaptive_study(threaded));
  CHECK(s1.str() == s2.str());
}

TEST_CASE("Helmholtz with zero wave number is the Laplace spectrum") {
  const ExperimentConfig c = parse_config(
      R"({"schema_version": 1, "experiment": "example2-helmholtz", "geometry": {"inverse_h": 20},
          "kappa_values": [0], "spectrum_count": 5})");
  const std::vector<HelmholtzRow> rows = helmholtz_study(c);
  REQUIRE(rows.size() == 5);
  const InterfaceProblem p = build_interface_problem({1.0, 1.0, 20, 0.0});
  const oracle::SpectralData s =
      oracle::weighted_svd(assemble_dense(*p.op), p.op->source_space(), p.op->range_space());
  for (const HelmholtzRow& r : rows) {
    CHECK(r.kappa == 0.0);
    CHECK(r.sigma == doctest::Approx(s.sigma[r.i - 1]).epsilon(1e-10));
  }
}

TEST_CASE("cpu table counts evaluations") {
  const ExperimentConfig c = parse_config(
      R"({"schema_version": 1, "experiment": "example1-cputable",
          "geometry": {"half_length": 1.0, "width": 2.0, "inverse_h": 20}, "seed": 2})");
  const CpuTable t = cpu_table(c);
  CHECK(t.n_t == 20);
  CHECK(t.basis_size > 0);
  CHECK(t.evaluations == t.basis_size + t.n_t);
  CHECK(t.source_dim == 2 * 41);
  CHECK(t.range_dim == 41);
  std::ostringstream a, b;
  write_cpu_csv(a, t);
  write_cpu_csv(b, cpu_table(c));
  CHECK(a.str() == b.str());
}

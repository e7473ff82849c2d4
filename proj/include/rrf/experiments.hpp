#pragma once

#include "rrf/linalg.hpp"
#include "rrf/oracle.hpp"
#include "rrf/rangefinder.hpp"
#include "rrf/statistics.hpp"
#include "rrf/transfer.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace rrf::experiments {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;

/// Experiment identifiers accepted in the "experiment" field.
const std::vector<std::string>& experiment_ids();

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string experiment;
  InterfaceProblemConfig geometry;

  std::vector<int> n_values;          // basis sizes (fixed, hdep)
  std::vector<double> tolerances;     // adaptive tol, or tol_GFEM
  std::vector<int> n_t_values;        // test vector counts
  std::vector<int> inverse_h_values;  // hdep
  std::vector<double> kappa_values;   // helmholtz
  int spectrum_count = 20;            // singular values written per kappa
  int basis_size = 4;                 // effectivity: size of the basis whose error is estimated
  double eps_algofail = 1e-15;
  double eps_testfail = 1e-10;        // effectivity and hdep test vectors

  std::string gfem_example = "poisson";  // poisson or channels
  int gfem_inverse_h = 100;

  std::uint64_t seed = 0;
  int runs = 100;
  int threads = 1;
  std::filesystem::path output = "results";
};

/// Parses JSON text. Missing fields take per-experiment defaults; unknown fields and
/// invalid values raise ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& config);

// Study results, independent of the CSV layout.

struct FixedRankRow {
  Index n = 0;
  stats::Summary error{};
  double sigma_next = 0.0;
  double a_priori = 0.0;  // NaN for n < 4
};

struct FixedRankStudy {
  Vector sigma;                        // weighted singular values of T
  std::vector<std::vector<double>> errors;  // errors[k][run] for n_values[k]
  std::vector<FixedRankRow> rows;
};

struct AdaptiveRun {
  std::uint64_t seed = 0;
  double tol = 0.0;
  int n_t = 0;
  Index n = 0;
  Index evaluations = 0;
  Index rejected = 0;
  bool exhausted = false;
  double error = 0.0;
  std::vector<double> estimates;  // estimator value before each loop test
};

struct AdaptiveRow {
  double tol = 0.0;
  int n_t = 0;
  stats::Summary error{};
  int failures = 0;  // runs with error > tol
  stats::Summary basis_size{};
  stats::Summary evaluations{};
};

struct AdaptiveStudy {
  std::vector<AdaptiveRun> runs;  // ordered by (tol, n_t, run)
  std::vector<AdaptiveRow> rows;
};

struct HdepRow {
  int inverse_h = 0;
  Index n = 0;
  double median_error = 0.0;
  double median_normalized_test_norm = 0.0;
  double sqrt_h = 0.0;
};

struct EffectivityRow {
  int n_t = 0;
  stats::Summary normalized{};  // max_i ||E r_i|| / ||E|| with E = T - P T
  double median_effectivity = 0.0;
  double c_est = 0.0;
  double c_eff = 0.0;
  double lower_bound = 0.0;  // 1 / c_est
  double upper_bound = 0.0;  // c_eff / c_est
  int above_c_eff = 0;       // runs with effectivity > c_eff
  int below_one = 0;         // runs with effectivity < 1
};

struct HelmholtzRow {
  double kappa = 0.0;
  int i = 0;
  double sigma = 0.0;
};

struct CpuTable {
  Index unknowns = 0;  // volume DOFs not on Gamma_out
  Index source_dim = 0;
  Index range_dim = 0;
  Index basis_size = 0;
  Index evaluations = 0;
  Index adjoint_evaluations = 0;
  int n_t = 0;
  double setup_seconds = 0.0;
  double basis_seconds = 0.0;
  double seconds_per_evaluation = 0.0;
};

FixedRankStudy fixed_rank_study(const ExperimentConfig& config);
AdaptiveStudy adaptive_study(const ExperimentConfig& config);
std::vector<HdepRow> hdep_study(const ExperimentConfig& config);
std::vector<EffectivityRow> effectivity_study(const ExperimentConfig& config);
std::vector<HelmholtzRow> helmholtz_study(const ExperimentConfig& config);
CpuTable cpu_table(const ExperimentConfig& config);

void write_fixed_csv(std::ostream& os, const FixedRankStudy& study);
void write_adaptive_csv(std::ostream& os, const AdaptiveStudy& study);
/// One JSON object per line with the diagnostics of every adaptive run.
void write_adaptive_jsonl(std::ostream& os, const AdaptiveStudy& study);
void write_hdep_csv(std::ostream& os, const std::vector<HdepRow>& rows);
void write_effectivity_csv(std::ostream& os, const std::vector<EffectivityRow>& rows);
void write_helmholtz_csv(std::ostream& os, const std::vector<HelmholtzRow>& rows);
/// Sizes and evaluation counts; deterministic.
void write_cpu_csv(std::ostream& os, const CpuTable& table);
/// Wall times; informational.
void write_cpu_times_csv(std::ostream& os, const CpuTable& table);

/// Runs the configured experiment and writes its files below config.output.
/// Returns the written paths.
std::vector<std::filesystem::path> run(const ExperimentConfig& config, std::ostream& log);

}  // namespace rrf::experiments

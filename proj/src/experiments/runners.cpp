#include "rrf/experiments.hpp"

#include "rrf/csv.hpp"
#include "rrf/gfem.hpp"
#include "rrf/parallel.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

namespace rrf::experiments {

namespace {

// Dense copy of the transfer operator with the exact error oracle.
struct DenseProblem {
  InterfaceProblem problem;
  std::shared_ptr<const MatrixOperator> op;
  std::shared_ptr<const ProjectionErrorOracle> oracle;
};

DenseProblem dense_problem(const InterfaceProblemConfig& geometry) {
  DenseProblem d;
  d.problem = build_interface_problem(geometry);
  const TransferOperator& t = *d.problem.op;
  DenseMatrix matrix = assemble_dense(t);
  d.oracle = std::make_shared<ProjectionErrorOracle>(matrix, t.source_space(), t.range_space());
  d.op = std::make_shared<MatrixOperator>(std::move(matrix), t.source_space(), t.range_space());
  return d;
}

Index max_value(const std::vector<int>& v) {
  Index m = 0;
  for (int x : v) m = std::max<Index>(m, x);
  return m;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<std::string> summary_cells(const stats::Summary& s) {
  return {csv::cell(s.min), csv::cell(s.p25), csv::cell(s.p50),
          csv::cell(s.p75), csv::cell(s.max), csv::cell(s.mean)};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Stream 0 feeds the basis, stream 1 the test vectors of the a posteriori studies.
constexpr std::uint64_t kBasisStream = 0;
constexpr std::uint64_t kTestStream = 1;

}  // namespace

FixedRankStudy fixed_rank_study(const ExperimentConfig& config) {
  const DenseProblem d = dense_problem(config.geometry);
  const Index n_max = max_value(config.n_values);
  const std::size_t runs = static_cast<std::size_t>(config.runs);

  FixedRankStudy study;
  study.sigma = d.oracle->singular_values();
  study.errors.assign(config.n_values.size(), std::vector<double>(runs));
  parallel_for(runs, config.threads, [&](std::size_t r) {
    RngStream rng(config.seed + r, kBasisStream);
    const RangeBasis full = fixed_rank_range(*d.op, n_max, rng);
    for (std::size_t k = 0; k < config.n_values.size(); ++k) {
      const Index n = std::min<Index>(config.n_values[k], full.size());
      study.errors[k][r] = (*d.oracle)(full.basis.prefix(n));
    }
  });

  const double cond_r = d.op->range_space().condition();
  const double cond_s = d.op->source_space().condition();
  for (std::size_t k = 0; k < config.n_values.size(); ++k) {
    FixedRankRow row;
    row.n = config.n_values[k];
    row.error = stats::summarize(study.errors[k]);
    row.sigma_next = row.n < study.sigma.size() ? study.sigma[row.n] : 0.0;
    row.a_priori = row.n >= 4 ? a_priori_bound(study.sigma, row.n, cond_r, cond_s)
                              : std::numeric_limits<double>::quiet_NaN();
    study.rows.push_back(row);
  }
  return study;
}

AdaptiveStudy adaptive_study(const ExperimentConfig& config) {
  const DenseProblem d = dense_problem(config.geometry);
  const std::size_t runs = static_cast<std::size_t>(config.runs);

  AdaptiveStudy study;
  for (double tol : config.tolerances) {
    for (int n_t : config.n_t_values) {
      std::vector<AdaptiveRun> batch(runs);
      parallel_for(runs, config.threads, [&](std::size_t r) {
        AdaptiveOptions options;
        options.tol = tol;
        options.n_t = n_t;
        options.eps_algofail = config.eps_algofail;
        RngStream rng(config.seed + r, kBasisStream);
        const RangeBasis basis = adaptive_randomized_range(*d.op, options, rng);
        AdaptiveRun& run = batch[r];
        run.seed = config.seed + r;
        run.tol = tol;
        run.n_t = n_t;
        run.n = basis.size();
        run.evaluations = basis.evaluations;
        run.rejected = basis.rejected;
        run.exhausted = basis.exhausted;
        run.error = (*d.oracle)(basis.basis);
        for (const RangeStep& step : basis.trace) run.estimates.push_back(step.estimate);
      });

      AdaptiveRow row;
      row.tol = tol;
      row.n_t = n_t;
      std::vector<double> errors, sizes, evaluations;
      for (const AdaptiveRun& run : batch) {
        errors.push_back(run.error);
        sizes.push_back(static_cast<double>(run.n));
        evaluations.push_back(static_cast<double>(run.evaluations));
        if (run.error > tol) ++row.failures;
      }
      row.error = stats::summarize(errors);
      row.basis_size = stats::summarize(sizes);
      row.evaluations = stats::summarize(evaluations);
      study.rows.push_back(row);
      study.runs.insert(study.runs.end(), batch.begin(), batch.end());
    }
  }
  return study;
}

std::vector<HdepRow> hdep_study(const ExperimentConfig& config) {
  const int n_t = config.n_t_values.front();
  const Index n_max = max_value(config.n_values);
  const std::size_t runs = static_cast<std::size_t>(config.runs);

  std::vector<HdepRow> rows;
  for (int inverse_h : config.inverse_h_values) {
    InterfaceProblemConfig geometry = config.geometry;
    geometry.inverse_h = inverse_h;
    const DenseProblem d = dense_problem(geometry);

    std::vector<std::vector<double>> errors(config.n_values.size(), std::vector<double>(runs));
    std::vector<std::vector<double>> normalized = errors;
    parallel_for(runs, config.threads, [&](std::size_t r) {
      RngStream rng(config.seed + r, kBasisStream);
      const RangeBasis full = fixed_rank_range(*d.op, n_max, rng);
      for (std::size_t k = 0; k < config.n_values.size(); ++k) {
        const OrthonormalBasis basis =
            full.basis.prefix(std::min<Index>(config.n_values[k], full.size()));
        const double error = (*d.oracle)(basis);
        RngStream test_rng(config.seed + r, kTestStream);
        const NormEstimate est =
            norm_estimate(ResidualOperator(*d.op, basis), n_t, config.eps_testfail, test_rng);
        errors[k][r] = error;
        normalized[k][r] = error > 0 ? est.max_test_norm / error : 0.0;
      }
    });
    for (std::size_t k = 0; k < config.n_values.size(); ++k) {
      HdepRow row;
      row.inverse_h = inverse_h;
      row.n = config.n_values[k];
      row.median_error = stats::percentile(errors[k], 50);
      row.median_normalized_test_norm = stats::percentile(normalized[k], 50);
      row.sqrt_h = std::sqrt(1.0 / inverse_h);
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<EffectivityRow> effectivity_study(const ExperimentConfig& config) {
  const DenseProblem d = dense_problem(config.geometry);
  const std::size_t runs = static_cast<std::size_t>(config.runs);
  const InnerProductSpace& source = d.op->source_space();
  const Index n_o = std::min(d.op->source_dim(), d.op->range_dim());

  std::vector<OrthonormalBasis> bases(runs);
  parallel_for(runs, config.threads, [&](std::size_t r) {
    RngStream rng(config.seed + r, kBasisStream);
    bases[r] = fixed_rank_range(*d.op, config.basis_size, rng).basis;
  });

  std::vector<EffectivityRow> rows;
  for (int n_t : config.n_t_values) {
    EffectivityRow row;
    row.n_t = n_t;
    row.c_est = c_est(n_t, config.eps_testfail, source.lambda_min());
    row.c_eff = c_eff(n_t, config.eps_testfail, source.lambda_min(), source.lambda_max(), n_o);
    row.lower_bound = 1.0 / row.c_est;
    row.upper_bound = row.c_eff / row.c_est;

    std::vector<double> eta(runs);
    parallel_for(runs, config.threads, [&](std::size_t r) {
      RngStream rng(config.seed + r, kTestStream);
      eta[r] = effectivity(*d.op, bases[r], n_t, config.eps_testfail, rng, *d.oracle);
    });
    std::vector<double> normalized;
    for (double e : eta) {
      normalized.push_back(e / row.c_est);
      if (e > row.c_eff) ++row.above_c_eff;
      if (e < 1.0) ++row.below_one;
    }
    row.normalized = stats::summarize(normalized);
    row.median_effectivity = stats::percentile(eta, 50);
    rows.push_back(row);
  }
  return rows;
}

std::vector<HelmholtzRow> helmholtz_study(const ExperimentConfig& config) {
  std::vector<HelmholtzRow> rows;
  for (double kappa : config.kappa_values) {
    InterfaceProblemConfig geometry = config.geometry;
    geometry.kappa = kappa;
    const InterfaceProblem p = build_interface_problem(geometry);
    const oracle::SpectralData data =
        oracle::weighted_svd(assemble_dense(*p.op), p.op->source_space(), p.op->range_space());
    const Index count = std::min<Index>(config.spectrum_count, data.sigma.size());
    for (Index i = 0; i < count; ++i) {
      rows.push_back({kappa, static_cast<int>(i + 1), data.sigma[i]});
    }
  }
  return rows;
}

CpuTable cpu_table(const ExperimentConfig& config) {
  CpuTable table;
  auto start = std::chrono::steady_clock::now();
  const InterfaceProblem p = build_interface_problem(config.geometry);
  table.setup_seconds = seconds_since(start);

  const TransferOperator& t = *p.op;
  table.source_dim = t.source_dim();
  table.range_dim = t.range_dim();
  table.unknowns = t.volume_dim() - t.source_dim();
  table.n_t = config.n_t_values.front();

  AdaptiveOptions options;
  options.tol = config.tolerances.front();
  options.n_t = table.n_t;
  options.eps_algofail = config.eps_algofail;
  RngStream rng(config.seed, kBasisStream);
  const CountingOperator counted(t);
  start = std::chrono::steady_clock::now();
  const RangeBasis basis = adaptive_randomized_range(counted, options, rng);
  table.basis_seconds = seconds_since(start);

  table.basis_size = basis.size();
  table.evaluations = counted.count();
  table.seconds_per_evaluation =
      table.evaluations ? table.basis_seconds / static_cast<double>(table.evaluations) : 0.0;
  return table;
}

void write_fixed_csv(std::ostream& os, const FixedRankStudy& study) {
  csv::Writer w(os, {"n", "min", "p25", "p50", "p75", "max", "mean", "sigma_next", "a_priori_bound"});
  for (const FixedRankRow& row : study.rows) {
    w.row(concat(concat({csv::cell(row.n)}, summary_cells(row.error)),
                 {csv::cell(row.sigma_next), std::isnan(row.a_priori) ? "" : csv::cell(row.a_priori)}));
  }
}

void write_adaptive_csv(std::ostream& os, const AdaptiveStudy& study) {
  csv::Writer w(os, {"tol", "n_t", "min", "p25", "p50", "p75", "max", "mean", "failures",
                     "n_min", "n_median", "n_max", "evaluations_median"});
  for (const AdaptiveRow& row : study.rows) {
    w.row(concat(concat({csv::cell(row.tol), csv::cell(row.n_t)}, summary_cells(row.error)),
                 {csv::cell(row.failures), csv::cell(row.basis_size.min),
                  csv::cell(row.basis_size.p50), csv::cell(row.basis_size.max),
                  csv::cell(row.evaluations.p50)}));
  }
}

void write_adaptive_jsonl(std::ostream& os, const AdaptiveStudy& study) {
  for (const AdaptiveRun& run : study.runs) {
    nlohmann::json j = {{"seed", run.seed},
                        {"tol", run.tol},
                        {"n_t", run.n_t},
                        {"n", run.n},
                        {"evaluations", run.evaluations},
                        {"rejected", run.rejected},
                        {"exhausted", run.exhausted},
                        {"estimates", run.estimates},
                        {"error", run.error}};
    os << j.dump() << '\n';
  }
}

void write_hdep_csv(std::ostream& os, const std::vector<HdepRow>& rows) {
  csv::Writer w(os, {"inverse_h", "n", "median_error", "median_normalized_test_norm", "sqrt_h"});
  for (const HdepRow& row : rows) {
    w.row({csv::cell(row.inverse_h), csv::cell(row.n), csv::cell(row.median_error),
           csv::cell(row.median_normalized_test_norm), csv::cell(row.sqrt_h)});
  }
}

void write_effectivity_csv(std::ostream& os, const std::vector<EffectivityRow>& rows) {
  csv::Writer w(os, {"n_t", "min", "p25", "p50", "p75", "max", "mean", "median_effectivity",
                     "c_est", "c_eff", "lower_bound", "upper_bound", "above_c_eff", "below_one"});
  for (const EffectivityRow& row : rows) {
    w.row(concat(concat({csv::cell(row.n_t)}, summary_cells(row.normalized)),
                 {csv::cell(row.median_effectivity), csv::cell(row.c_est), csv::cell(row.c_eff),
                  csv::cell(row.lower_bound), csv::cell(row.upper_bound),
                  csv::cell(row.above_c_eff), csv::cell(row.below_one)}));
  }
}

void write_helmholtz_csv(std::ostream& os, const std::vector<HelmholtzRow>& rows) {
  csv::Writer w(os, {"kappa", "i", "sigma"});
  for (const HelmholtzRow& row : rows) {
    w.row({csv::cell(row.kappa), csv::cell(row.i), csv::cell(row.sigma)});
  }
}

void write_cpu_csv(std::ostream& os, const CpuTable& t) {
  csv::Writer w(os, {"block", "quantity", "value"});
  w.row({"problem", "unknowns", csv::cell(t.unknowns)});
  w.row({"problem", "source_dim", csv::cell(t.source_dim)});
  w.row({"problem", "range_dim", csv::cell(t.range_dim)});
  w.row({"basis", "basis_size", csv::cell(t.basis_size)});
  w.row({"basis", "test_vectors", csv::cell(t.n_t)});
  w.row({"basis", "operator_evaluations", csv::cell(t.evaluations)});
  w.row({"basis", "adjoint_evaluations", csv::cell(t.adjoint_evaluations)});
  w.row({"basis", "dense_evaluations", csv::cell(t.source_dim)});
}

void write_cpu_times_csv(std::ostream& os, const CpuTable& t) {
  csv::Writer w(os, {"block", "quantity", "seconds"});
  w.row({"problem", "assembly_and_factorization", csv::cell(t.setup_seconds)});
  w.row({"problem", "operator_evaluation", csv::cell(t.seconds_per_evaluation)});
  w.row({"basis", "basis_generation", csv::cell(t.basis_seconds)});
  w.row({"basis", "dense_estimate",
         csv::cell(t.seconds_per_evaluation * static_cast<double>(t.source_dim))});
}

namespace {

std::vector<std::filesystem::path> run_gfem(const ExperimentConfig& config, std::ostream& log) {
  gfem::GfemConfig g = config.gfem_example == "channels" ? gfem::channels_config(config.gfem_inverse_h)
                                                          : gfem::poisson_config(config.gfem_inverse_h);
  g.n_t = config.n_t_values.front();
  g.eps_algofail = config.eps_algofail;
  g.threads = config.threads;
  gfem::GfemProblem problem = gfem::build_problem(g);
  problem.config.threads = 1;  // parallel over runs instead
  log << "gfem: " << problem.mesh->num_nodes() << " nodes, " << problem.patches.size()
      << " patches\n";

  const std::size_t runs = static_cast<std::size_t>(config.runs);
  std::vector<std::vector<gfem::GfemRun>> sweeps(runs);
  parallel_for(runs, config.threads, [&](std::size_t r) {
    sweeps[r] = gfem::run_sweep(problem, config.tolerances, config.seed + r);
  });
  // rows ordered by tolerance, then seed
  std::vector<gfem::GfemRun> results;
  for (std::size_t t = 0; t < config.tolerances.size(); ++t) {
    for (const auto& sweep : sweeps) results.push_back(sweep[t]);
  }

  const auto patch_path = config.output / "gfem_patches.csv";
  const auto global_path = config.output / "gfem_global.csv";
  std::ofstream patch_out(patch_path), global_out(global_path);
  gfem::write_patch_csv(patch_out, results);
  gfem::write_global_csv(global_out, results);
  return {patch_path, global_path};
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

std::vector<std::filesystem::path> run(const ExperimentConfig& config, std::ostream& log) {
  validate(config);
  std::filesystem::create_directories(config.output);
  const std::string& id = config.experiment;
  const auto path = [&](const char* name) { return config.output / name; };
  std::vector<std::filesystem::path> written;

  if (id == "example1-fixed") {
    const FixedRankStudy study = fixed_rank_study(config);
    auto out = open_output(path("fixed.csv"));
    write_fixed_csv(out, study);
    auto spectrum = open_output(path("spectrum.csv"));
    csv::Writer w(spectrum, {"index", "sigma"});
    for (Index i = 0; i < study.sigma.size(); ++i) w.row({csv::cell(i + 1), csv::cell(study.sigma[i])});
    written = {path("fixed.csv"), path("spectrum.csv")};
  } else if (id == "example1-adaptive") {
    const AdaptiveStudy study = adaptive_study(config);
    auto out = open_output(path("adaptive.csv"));
    write_adaptive_csv(out, study);
    auto runs = open_output(path("adaptive_runs.jsonl"));
    write_adaptive_jsonl(runs, study);
    written = {path("adaptive.csv"), path("adaptive_runs.jsonl")};
  } else if (id == "example1-hdep") {
    auto out = open_output(path("hdep.csv"));
    write_hdep_csv(out, hdep_study(config));
    written = {path("hdep.csv")};
  } else if (id == "example1-effectivity") {
    auto out = open_output(path("effectivity.csv"));
    write_effectivity_csv(out, effectivity_study(config));
    written = {path("effectivity.csv")};
  } else if (id == "example1-cputable") {
    const CpuTable table = cpu_table(config);
    auto out = open_output(path("cputable.csv"));
    write_cpu_csv(out, table);
    auto times = open_output(path("cputable_times.csv"));
    write_cpu_times_csv(times, table);
    written = {path("cputable.csv"), path("cputable_times.csv")};
  } else if (id == "example2-helmholtz") {
    auto out = open_output(path("helmholtz.csv"));
    write_helmholtz_csv(out, helmholtz_study(config));
    written = {path("helmholtz.csv")};
  } else if (id == "example4-gfem") {
    written = run_gfem(config, log);
  }
  for (const auto& p : written) log << "wrote " << p.string() << '\n';
  return written;
}

}  // namespace rrf::experiments

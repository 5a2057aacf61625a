// Command-line driver: generate test problems, run the instrumented Krylov
// solvers, evaluate error estimates on recorded traces, and run the binned
// accuracy benchmark. All outputs are deterministic for a fixed option set
// (including --seed), so reruns produce byte-identical files.
//
// Exit codes: 0 success/converged, 1 bad configuration or I/O failure,
// 2 iteration limit reached, 3 solver breakdown.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bicgql/bicgql.hpp"

namespace fs = std::filesystem;
using namespace bicgql;

namespace {

struct Options {
  std::string command;
  std::string matrix_path;
  std::string rhs_path;
  long long rhs_index = 0;
  std::string trace_path;
  double gen_kappa = 1e3;
  std::string gen_class = "hpd";
  std::size_t dim = 100;
  std::string method = "bicg";
  std::string criterion = "residual";
  double tol = 1e-8;
  std::size_t d1 = 4;
  std::size_t d2 = 4;
  std::string l2_variant = "consistent";
  std::size_t bins = 6;
  std::size_t cases = 10;
  std::size_t rhs_per_matrix = 10;
  double solve_tol = kDefaultBenchSolveTol;
  std::size_t max_iter = 0;
  std::uint64_t seed = 12345;
  std::string out = "out";
  std::size_t jobs = 1;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

DenseMatrix load_or_generate_matrix(const Options& opt, bool& generated) {
  if (!opt.matrix_path.empty()) {
    generated = false;
    return read_matrix_market(opt.matrix_path);
  }
  generated = true;
  GenSpec spec;
  spec.matrix_class = matrix_class_from_string(opt.gen_class);
  spec.dim = opt.dim;
  spec.kappa = opt.gen_kappa;
  spec.seed = opt.seed;
  return gen_matrix(spec);
}

Vector load_rhs(const Options& opt, std::size_t dim) {
  if (!opt.rhs_path.empty()) return read_matrix_market_vector(opt.rhs_path);
  if (opt.rhs_index < 0 || std::size_t(opt.rhs_index) >= dim)
    throw Error("rhs index out of range for dimension " + std::to_string(dim));
  return canonical_basis_vector(dim, std::size_t(opt.rhs_index));
}

int termination_exit_code(Termination t) {
  switch (t) {
    case Termination::Converged: return 0;
    case Termination::MaxIter: return 2;
    case Termination::Breakdown: return 3;
  }
  return 1;
}

int cmd_gen(const Options& opt) {
  GenSpec spec;
  spec.matrix_class = matrix_class_from_string(opt.gen_class);
  spec.dim = opt.dim;
  spec.kappa = opt.gen_kappa;
  spec.seed = opt.seed;
  const DenseMatrix a = gen_matrix(spec);
  fs::create_directories(opt.out);
  const fs::path path = fs::path(opt.out) / "matrix.mtx";
  write_matrix_market(path, a);
  std::cout << "wrote " << path.string() << " (" << to_string(spec.matrix_class) << ", dim "
            << spec.dim << ", kappa " << spec.kappa << ", seed " << spec.seed << ")\n";
  return 0;
}

int cmd_solve(const Options& opt) {
  bool generated = false;
  const DenseMatrix a = load_or_generate_matrix(opt, generated);
  const Vector b = load_rhs(opt, a.dim());

  SolverOptions sopts;
  sopts.criterion.kind = criterion_kind_from_string(opt.criterion);
  sopts.criterion.threshold = opt.tol;
  sopts.criterion.d1 = opt.d1;
  sopts.criterion.d2 = opt.d2;
  sopts.criterion.l2_variant = l2_variant_from_string(opt.l2_variant);
  sopts.max_iterations = opt.max_iter;
  sopts.record_snapshots = true;

  const Method method = method_from_string(opt.method);
  const SolveResult res = solve(method, a, b, sopts);

  fs::create_directories(opt.out);
  const fs::path outdir(opt.out);
  write_matrix_market(outdir / "solution.mtx", res.x);
  write_trace_csv(outdir / "trace.csv", res.trace);

  // Estimate series: trace estimates always; quadrature bounds when the
  // matrix is symmetric (their theory needs an HPD system).
  const bool symmetric = a.is_symmetric(1e-8);
  std::vector<EstimateSeries> series;
  series.push_back(build_anorm_series(res.trace, opt.d1, symmetric));
  series.push_back(build_l2_series(res.trace, opt.d1, opt.d2,
                                   l2_variant_from_string(opt.l2_variant), symmetric));
  series.push_back(build_residual_series(res.trace, detail::residual_normalizer(b)));
  const SpectrumBounds* spectrum_ptr = nullptr;
  SpectrumBounds spectrum;
  if (symmetric) {
    spectrum = spectrum_bounds(a);
    if (spectrum.lambda_min > 0.0) {
      spectrum_ptr = &spectrum;
      const CgqlSeries q = build_cgql_series(res.trace, spectrum, opt.d1);
      series.push_back(q.gauss);
      series.push_back(q.radau_lower);
      series.push_back(q.radau_upper);
      series.push_back(q.lobatto);
    }
  }
  {
    auto [gm_a, gm_l] = build_gm_series(a, b, res.trace);
    series.push_back(std::move(gm_a));
    series.push_back(std::move(gm_l));
  }
  write_estimate_series_csv(outdir / "estimates.csv", series);

  const Vector x_true = [&]() -> Vector {
    try {
      return direct_solve(a, b);
    } catch (const SingularMatrix&) {
      return {};
    }
  }();
  emit_trace_plot(outdir / "trace_plot",
                  trace_plot_columns(a, b, res, x_true, opt.d1, opt.d2,
                                     l2_variant_from_string(opt.l2_variant), spectrum_ptr));

  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", std::sqrt(res.trace.final_res_norm_sq));
  std::cout << "method " << to_string(res.trace.method) << ", iterations "
            << res.trace.iterations() << ", termination " << to_string(res.trace.termination)
            << ", final residual norm " << buf << "\n";
  return termination_exit_code(res.trace.termination);
}

int cmd_estimate(const Options& opt) {
  if (opt.trace_path.empty()) throw Error("estimate requires --trace");
  const SolveTrace t = read_trace_csv(opt.trace_path);
  const bool hpd_hint = opt.lambda_min > 0.0 && opt.lambda_max >= opt.lambda_min;

  std::vector<EstimateSeries> series;
  series.push_back(build_anorm_series(t, opt.d1, hpd_hint));
  series.push_back(
      build_l2_series(t, opt.d1, opt.d2, l2_variant_from_string(opt.l2_variant), hpd_hint));
  // Residual series normalized by the trace's own initial residual norm.
  series.push_back(build_residual_series(t, std::sqrt(t.r0_norm_sq)));
  if (hpd_hint) {
    const CgqlSeries q = build_cgql_series(t, {opt.lambda_min, opt.lambda_max}, opt.d1);
    series.push_back(q.gauss);
    series.push_back(q.radau_lower);
    series.push_back(q.radau_upper);
    series.push_back(q.lobatto);
  }
  fs::create_directories(opt.out);
  const fs::path path = fs::path(opt.out) / "estimates.csv";
  write_estimate_series_csv(path, series);
  std::cout << "wrote " << path.string() << " (" << series.size() << " series, "
            << t.records.size() << " trace records)\n";
  return 0;
}

int cmd_bench(const Options& opt, bool class_given) {
  BenchConfig cfg;
  cfg.dim = opt.dim;
  cfg.method = method_from_string(opt.method);
  cfg.bins.clear();
  for (std::size_t i = 0; i < opt.bins; ++i)
    cfg.bins.push_back({std::pow(10.0, double(i)), std::pow(10.0, double(i + 1))});
  cfg.matrices_per_bin = opt.cases;
  cfg.rhs_per_matrix = opt.rhs_per_matrix;
  cfg.d1 = opt.d1;
  cfg.d2 = opt.d2;
  cfg.l2_variant = l2_variant_from_string(opt.l2_variant);
  cfg.solve_tol = opt.solve_tol;
  if (opt.max_iter) cfg.max_iterations = opt.max_iter;
  cfg.seed = opt.seed;
  cfg.jobs = opt.jobs;

  fs::create_directories(opt.out);
  std::vector<MatrixClass> classes;
  if (class_given)
    classes.push_back(matrix_class_from_string(opt.gen_class));
  else
    classes = {MatrixClass::Hpd, MatrixClass::NonsymIndefinite};

  for (MatrixClass cls : classes) {
    cfg.matrix_class = cls;
    const std::vector<BinReport> reports = run_bench(cfg);
    const fs::path path = fs::path(opt.out) / (std::string("bench_") + to_string(cls) + ".csv");
    write_bin_reports_csv(path, reports);
    std::cout << "wrote " << path.string() << "\n";
    for (const BinReport& r : reports) {
      char lo[40], hi[40], m0[40], m1[40];
      std::snprintf(lo, sizeof(lo), "%g", r.lo);
      std::snprintf(hi, sizeof(hi), "%g", r.hi);
      std::snprintf(m0, sizeof(m0), "%.4g", r.metrics[kAnormVsResidual].mean);
      std::snprintf(m1, sizeof(m1), "%.4g", r.metrics[kL2VsResidual].mean);
      std::cout << "  " << to_string(cls) << " bin [" << lo << "," << hi
                << "]: anorm_vs_residual mean " << m0 << ", l2_vs_residual mean " << m1 << ", "
                << r.n_cases << " cases, " << r.n_breakdowns << " breakdowns\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Krylov solvers (cg, bicg, bicgstab) with online error-norm estimation:\n"
      "generate conditioned test matrices, solve and record coefficient traces,\n"
      "evaluate error estimates and bounds, and benchmark estimate accuracy."};
  app.fallthrough(true);
  app.set_config("--config", "", "key=value config file; explicit flags override it");

  Options opt;
  app.add_option("--matrix", opt.matrix_path, "Matrix Market file for the system matrix");
  app.add_option("--rhs", opt.rhs_path, "Matrix Market file for the right-hand side");
  app.add_option("--rhs-index", opt.rhs_index,
                 "canonical basis index for the right-hand side (default 0)");
  app.add_option("--trace", opt.trace_path, "trace CSV to evaluate estimates on");
  app.add_option("--gen-kappa", opt.gen_kappa, "condition number for generated matrices");
  app.add_option("--gen-class", opt.gen_class, "matrix class: hpd | nonsym")
      ->check(CLI::IsMember({"hpd", "nonsym"}));
  app.add_option("--dim", opt.dim, "matrix dimension for generated problems");
  app.add_option("--method", opt.method, "solver: cg | bicg | bicgstab")
      ->check(CLI::IsMember({"cg", "bicg", "bicgstab"}));
  app.add_option("--criterion", opt.criterion, "stopping rule: residual | anorm | l2")
      ->check(CLI::IsMember({"residual", "anorm", "l2"}));
  app.add_option("--tol", opt.tol, "stopping threshold");
  app.add_option("--d1", opt.d1, "A-norm estimate delay");
  app.add_option("--d2", opt.d2, "extra l2 estimate delay");
  app.add_option("--l2-variant", opt.l2_variant, "l2 term assembly: consistent | paper")
      ->check(CLI::IsMember({"consistent", "paper"}));
  app.add_option("--bins", opt.bins, "number of decade condition-number bins");
  app.add_option("--cases", opt.cases, "matrices per bin");
  app.add_option("--rhs-per-matrix", opt.rhs_per_matrix, "right-hand sides per matrix");
  app.add_option("--solve-tol", opt.solve_tol, "benchmark solve stopping tolerance");
  app.add_option("--max-iter", opt.max_iter, "iteration cap (0: 10x dimension)");
  app.add_option("--seed", opt.seed, "base seed for all randomness");
  app.add_option("--out", opt.out, "output directory");
  app.add_option("--jobs", opt.jobs, "benchmark worker threads");
  app.add_option("--lambda-min", opt.lambda_min, "spectrum lower bound for quadrature bounds");
  app.add_option("--lambda-max", opt.lambda_max, "spectrum upper bound for quadrature bounds");

  CLI::App* sub_gen = app.add_subcommand("gen", "generate a conditioned test matrix");
  CLI::App* sub_solve = app.add_subcommand("solve", "solve a system, recording a trace");
  CLI::App* sub_estimate = app.add_subcommand("estimate", "evaluate estimates on a trace CSV");
  CLI::App* sub_bench = app.add_subcommand("bench", "run the binned accuracy benchmark");
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (!sub_gen->parsed() && !sub_solve->parsed() && !sub_estimate->parsed() &&
      !sub_bench->parsed()) {
    std::cout << app.help();
    return 1;
  }

  try {
    if (sub_gen->parsed()) return cmd_gen(opt);
    if (sub_solve->parsed()) return cmd_solve(opt);
    if (sub_estimate->parsed()) return cmd_estimate(opt);
    return cmd_bench(opt, app.count("--gen-class") > 0);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

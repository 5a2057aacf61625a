// Benchmark harness: measures how much more accurate the trace-based error
// estimates are than (a) the relative residual read as an error proxy and
// (b) the one-shot moment estimates, over seeded random problems binned by
// condition number.
//
// Per case (matrix + canonical-basis right-hand side) the solver runs with
// iterate snapshots, true errors are reconstructed against a direct solve,
// and each valid target iteration j contributes accuracy ratios:
//
//   anorm_vs_residual = (|sqrt(g_j) - eA_j| / eA_j)
//                     / (|rres_j - rerr_j| / rerr_j)
//   l2_vs_residual    = (|sqrt(|f_j|) - e2_j| / ||x||)
//                     / |rres_j - rerr_j|
//   anorm_vs_gm       = |sqrt(g0_j) - eA_j| / |sqrt(|gm_anorm_j|) - eA_j|
//   l2_vs_gm          = |sqrt(|f0_j|) - e2_j| / |sqrt(gm_l2_j) - e2_j|
//
// with eA/e2 the true A-norm/l2 errors, rres = ||r_j||/||b||, rerr =
// e2_j/||x||, g/f the delayed estimates (delays d1/d2), and g0/f0 their
// zero-delay counterparts pitted against the two-apply moment estimates.
// Ratios below 1 mean the trace estimate is the more accurate one. Samples
// are skipped where a denominator degenerates or the true error has hit the
// rounding floor. Case means are aggregated per bin (mean/median/geomean).
#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "bicgql/dense_matrix.hpp"
#include "bicgql/errors.hpp"
#include "bicgql/estimators.hpp"
#include "bicgql/lu.hpp"
#include "bicgql/matrix_gen.hpp"
#include "bicgql/solvers.hpp"
#include "bicgql/trace.hpp"
#include "bicgql/vector_ops.hpp"

namespace bicgql {

struct KappaBin {
  double lo = 1.0;
  double hi = 10.0;
};

inline std::vector<KappaBin> default_bins() {
  std::vector<KappaBin> bins;
  for (int i = 0; i < 6; ++i) bins.push_back({std::pow(10.0, i), std::pow(10.0, i + 1)});
  return bins;
}

// Residual tolerance at which benchmark solves stop. Late iterations, where
// the recurrence residual decouples from the true error, produce ratio
// outliers that say nothing about estimator quality; the attainable accuracy
// of CG/BiCG is roughly (machine epsilon) * kappa, about 2e-10 at the largest
// benchmarked kappa of 1e6, so 1e-8 keeps every sampled iteration two decades
// clear of that floor.
inline constexpr double kDefaultBenchSolveTol = 1e-8;

struct BenchConfig {
  MatrixClass matrix_class = MatrixClass::Hpd;
  Method method = Method::BiCG;
  std::size_t dim = 100;
  std::vector<KappaBin> bins = default_bins();
  std::size_t matrices_per_bin = 10;
  std::size_t rhs_per_matrix = 10;
  std::size_t d1 = 4;
  std::size_t d2 = 4;
  L2Variant l2_variant = L2Variant::Consistent;
  double solve_tol = kDefaultBenchSolveTol;
  std::size_t max_iterations = 2500;
  std::uint64_t seed = 12345;
  std::size_t jobs = 1;
};

enum BenchMetric : std::size_t {
  kAnormVsResidual = 0,
  kL2VsResidual = 1,
  kAnormVsGm = 2,
  kL2VsGm = 3,
  kMetricCount = 4,
};

inline const char* bench_metric_name(std::size_t m) {
  switch (m) {
    case kAnormVsResidual: return "anorm_vs_residual";
    case kL2VsResidual: return "l2_vs_residual";
    case kAnormVsGm: return "anorm_vs_gm";
    case kL2VsGm: return "l2_vs_gm";
  }
  return "?";
}

struct MetricSummary {
  double mean = 0.0;
  double median = 0.0;
  double geomean = 0.0;
  std::size_t n_cases = 0;  // cases contributing at least one sample
};

struct BinReport {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n_cases = 0;       // cases with a usable solve
  std::size_t n_breakdowns = 0;  // cases skipped after exhausting retries
  std::array<MetricSummary, kMetricCount> metrics{};
};

namespace detail {

struct CaseAccumulator {
  std::array<double, kMetricCount> sum{};
  std::array<std::size_t, kMetricCount> count{};
  bool skipped = false;

  void add(std::size_t metric, double v) {
    sum[metric] += v;
    ++count[metric];
  }
  bool has(std::size_t metric) const { return count[metric] > 0; }
  double mean(std::size_t metric) const { return sum[metric] / double(count[metric]); }
};

// All accuracy ratios for one solved case; mirrors the header comment.
inline CaseAccumulator case_metrics(const DenseMatrix& a, const Vector& b, const Vector& x_true,
                                    const SolveTrace& t, const BenchConfig& cfg) {
  CaseAccumulator acc;
  const std::size_t m = t.records.size();
  if (m == 0) return acc;

  std::vector<double> ea(m), e2(m);
  for (std::size_t j = 0; j < m; ++j) {
    const Vector& xj = *t.records[j].x_snapshot;
    Vector e = subtract(x_true, xj);
    ea[j] = std::sqrt(std::abs(dot(e, a.apply(e))));
    e2[j] = norm(e);
  }
  const double x2 = norm(x_true);
  const double bn = norm(b);
  if (x2 == 0.0 || bn == 0.0) return acc;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double ea_floor = 1e2 * eps * ea[0];
  const double e2_floor = 1e2 * eps * e2[0];

  for (std::size_t j = 0; j < m; ++j) {
    if (!(ea[j] > ea_floor && e2[j] > e2_floor)) continue;
    const double rres = std::sqrt(t.records[j].res_norm_sq) / bn;
    const double rerr = e2[j] / x2;
    const double den_abs = std::abs(rres - rerr);
    const double den_rel = den_abs / rerr;
    // Target carries no comparison signal when the residual proxy is exact
    // (notably j = 0 with a zero initial guess, where both quotients are 1).
    if (den_abs <= 1e-16) continue;

    if (j + cfg.d1 < m && den_rel > 1e-14) {
      const double g = bicgql_anorm(t, j + cfg.d1, cfg.d1);
      acc.add(kAnormVsResidual, (std::abs(std::sqrt(g) - ea[j]) / ea[j]) / den_rel);
    }
    if (j + cfg.d1 + cfg.d2 < m && den_abs > 1e-16) {
      const double f = bicgql_l2norm(t, j + cfg.d1 + cfg.d2, cfg.d1, cfg.d2, cfg.l2_variant);
      acc.add(kL2VsResidual, (std::abs(std::sqrt(std::abs(f)) - e2[j]) / x2) / den_abs);
    }

    // Zero-delay trace estimates against the two-apply moment estimates,
    // both evaluated at the true residual of iterate j.
    Vector rj = subtract(b, a.apply(*t.records[j].x_snapshot));
    GolubMeurantEstimate gm;
    try {
      gm = golub_meurant(a, rj);
    } catch (const Error&) {
      continue;
    }
    const double g0 = bicgql_anorm(t, j, 0);
    const double gm_den_a = std::abs(std::sqrt(std::abs(gm.anorm_sq_est)) - ea[j]);
    if (gm_den_a > 1e-300)
      acc.add(kAnormVsGm, std::abs(std::sqrt(g0) - ea[j]) / gm_den_a);
    const double f0 = bicgql_l2norm(t, j, 0, 0, cfg.l2_variant);
    const double gm_den_l = std::abs(std::sqrt(std::abs(gm.l2_sq_est)) - e2[j]);
    if (gm_den_l > 1e-300)
      acc.add(kL2VsGm, std::abs(std::sqrt(std::abs(f0)) - e2[j]) / gm_den_l);
  }
  return acc;
}

// One matrix worth of cases: generates the problem, solves per right-hand
// side (retrying breakdowns with fresh random shadow vectors), accumulates.
inline std::vector<CaseAccumulator> run_matrix_cases(const BenchConfig& cfg, std::size_t bin_index,
                                                     std::size_t matrix_index) {
  const KappaBin& bin = cfg.bins[bin_index];
  const std::uint64_t class_tag = std::uint64_t(cfg.matrix_class);
  const std::uint64_t mseed = mix_seed(cfg.seed, bin_index, matrix_index, class_tag);
  std::mt19937_64 rng(mseed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double kappa = bin.lo * std::pow(bin.hi / bin.lo, uni(rng));

  GenSpec spec;
  spec.matrix_class = cfg.matrix_class;
  spec.dim = cfg.dim;
  spec.kappa = kappa;
  spec.seed = mseed;
  const DenseMatrix a = gen_matrix(spec);

  const std::vector<std::size_t> rhs_idx =
      rhs_index_suite(cfg.dim, cfg.rhs_per_matrix, mix_seed(mseed, 0xE1u));

  SolverOptions opts;
  opts.criterion.kind = CriterionKind::ResidualRelative;
  opts.criterion.threshold = cfg.solve_tol;
  opts.max_iterations = cfg.max_iterations;
  opts.record_snapshots = true;

  std::vector<CaseAccumulator> out;
  out.reserve(rhs_idx.size());
  for (std::size_t ri = 0; ri < rhs_idx.size(); ++ri) {
    const Vector b = canonical_basis_vector(cfg.dim, rhs_idx[ri]);
    const Vector x_true = direct_solve(a, b);

    SolveResult res;
    bool usable = false;
    for (std::uint64_t attempt = 0; attempt < 4; ++attempt) {
      SolverOptions o = opts;
      if (attempt > 0)
        o.shadow = random_unit_vector(cfg.dim, mix_seed(mseed, ri, attempt, 0x5AD0u));
      res = solve(cfg.method, a, b, o);
      if (res.trace.termination != Termination::Breakdown ||
          res.trace.records.size() >= cfg.d1 + cfg.d2 + 2) {
        usable = true;
        break;
      }
    }
    if (!usable) {
      CaseAccumulator acc;
      acc.skipped = true;
      out.push_back(acc);
      continue;
    }
    out.push_back(case_metrics(a, b, x_true, res.trace, cfg));
  }
  return out;
}

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double geomean_of(const std::vector<double>& v) {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (x > 0.0) {
      s += std::log(x);
      ++n;
    }
  }
  return n ? std::exp(s / double(n)) : 0.0;
}

}  // namespace detail

// Runs the whole binned protocol. Matrices are independent work units, run
// on cfg.jobs threads into a pre-sized result table, so the aggregate is
// identical regardless of thread count.
inline std::vector<BinReport> run_bench(const BenchConfig& cfg) {
  if (cfg.bins.empty()) throw Error("run_bench: no bins configured");
  if (cfg.dim < 2) throw DimensionMismatch("run_bench: dim must be at least 2");
  for (const KappaBin& b : cfg.bins)
    if (!(b.lo >= 1.0 && b.hi >= b.lo)) throw Error("run_bench: bad bin bounds");

  const std::size_t n_tasks = cfg.bins.size() * cfg.matrices_per_bin;
  std::vector<std::vector<detail::CaseAccumulator>> table(n_tasks);

  auto run_task = [&](std::size_t task) {
    const std::size_t bi = task / cfg.matrices_per_bin;
    const std::size_t mi = task % cfg.matrices_per_bin;
    table[task] = detail::run_matrix_cases(cfg, bi, mi);
  };

  const std::size_t jobs = std::min(std::max<std::size_t>(cfg.jobs, 1), n_tasks);
  if (jobs <= 1) {
    for (std::size_t task = 0; task < n_tasks; ++task) run_task(task);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (std::size_t task = next.fetch_add(1); task < n_tasks; task = next.fetch_add(1))
          run_task(task);
      });
    }
    for (std::thread& th : pool) th.join();
  }

  std::vector<BinReport> reports(cfg.bins.size());
  for (std::size_t bi = 0; bi < cfg.bins.size(); ++bi) {
    BinReport& rep = reports[bi];
    rep.lo = cfg.bins[bi].lo;
    rep.hi = cfg.bins[bi].hi;
    std::array<std::vector<double>, kMetricCount> case_means;
    for (std::size_t mi = 0; mi < cfg.matrices_per_bin; ++mi) {
      for (const detail::CaseAccumulator& acc : table[bi * cfg.matrices_per_bin + mi]) {
        if (acc.skipped) {
          ++rep.n_breakdowns;
          continue;
        }
        ++rep.n_cases;
        for (std::size_t k = 0; k < kMetricCount; ++k)
          if (acc.has(k)) case_means[k].push_back(acc.mean(k));
      }
    }
    for (std::size_t k = 0; k < kMetricCount; ++k) {
      rep.metrics[k].mean = detail::mean_of(case_means[k]);
      rep.metrics[k].median = detail::median_of(case_means[k]);
      rep.metrics[k].geomean = detail::geomean_of(case_means[k]);
      rep.metrics[k].n_cases = case_means[k].size();
    }
  }
  return reports;
}

inline void write_bin_reports_csv(const std::filesystem::path& path,
                                  const std::vector<BinReport>& reports) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "bin_lo,bin_hi,metric_name,mean,median,geomean,n_cases,n_breakdowns\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (const BinReport& rep : reports) {
    for (std::size_t k = 0; k < kMetricCount; ++k) {
      put(rep.lo);
      out << ",";
      put(rep.hi);
      out << "," << bench_metric_name(k) << ",";
      put(rep.metrics[k].mean);
      out << ",";
      put(rep.metrics[k].median);
      out << ",";
      put(rep.metrics[k].geomean);
      out << "," << rep.metrics[k].n_cases << "," << rep.n_breakdowns << "\n";
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Per-solve diagnostic table: truth and estimates along one trace, written
// both as a gnuplot-friendly whitespace table (.dat) and as CSV (.csv).

struct PlotColumn {
  std::string name;
  std::map<std::size_t, double> values;  // keyed by iteration
};

// Truth + estimate columns for one solved case. Columns that need the true
// solution are included only when x_true is nonempty; quadrature bound
// columns only when spectrum is given (HPD systems).
template <LinearOperator Op>
std::vector<PlotColumn> trace_plot_columns(const Op& a, [[maybe_unused]] const Vector& b,
                                           const SolveResult& res, const Vector& x_true,
                                           std::size_t d1, std::size_t d2, L2Variant variant,
                                           const SpectrumBounds* spectrum) {
  const SolveTrace& t = res.trace;
  std::vector<PlotColumn> cols;

  PlotColumn resc{"res_norm", {}};
  for (std::size_t k = 0; k <= t.records.size(); ++k)
    resc.values[k] = std::sqrt(t.res_norm_sq_at(k));

  if (!x_true.empty()) {
    PlotColumn ea{"err_anorm_sq", {}}, e2{"err_l2_sq", {}};
    for (const IterationRecord& rec : t.records) {
      if (!rec.x_snapshot) throw InsufficientHistory("trace_plot_columns: no iterate snapshots");
      Vector e = subtract(x_true, *rec.x_snapshot);
      ea.values[rec.k] = std::abs(dot(e, a.apply(e)));
      e2.values[rec.k] = norm_sq(e);
    }
    cols.push_back(std::move(ea));
    cols.push_back(std::move(e2));
  }

  const bool hpd = spectrum != nullptr;
  EstimateSeries g = build_anorm_series(t, d1, hpd);
  PlotColumn gc{"est_anorm_sq", {}};
  gc.values = g.values;
  cols.push_back(std::move(gc));

  if (spectrum) {
    CgqlSeries q = build_cgql_series(t, *spectrum, d1);
    PlotColumn gauss{"gauss_anorm_sq", q.gauss.values};
    PlotColumn lob{"lobatto_anorm_sq", q.lobatto.values};
    cols.push_back(std::move(gauss));
    cols.push_back(std::move(lob));
  }

  EstimateSeries f = build_l2_series(t, d1, d2, variant, hpd);
  PlotColumn fc{"est_l2_sq", {}};
  fc.values = f.values;
  cols.push_back(std::move(fc));
  cols.push_back(std::move(resc));
  return cols;
}

// Writes base.dat (whitespace table, '#'-prefixed header, nan for holes) and
// base.csv (same table, comma-separated, empty cells for holes). %.17g
// everywhere, so the CSV round-trips bit for bit.
inline void emit_trace_plot(const std::filesystem::path& base,
                            const std::vector<PlotColumn>& cols) {
  std::vector<std::size_t> keys;
  for (const PlotColumn& c : cols)
    for (const auto& [k, v] : c.values) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  std::filesystem::path dat = base;
  dat += ".dat";
  std::filesystem::path csv = base;
  csv += ".csv";
  std::ofstream od(dat), oc(csv);
  if (!od) throw IoError("cannot open for writing: " + dat.string());
  if (!oc) throw IoError("cannot open for writing: " + csv.string());

  od << "# k";
  oc << "k";
  for (const PlotColumn& c : cols) {
    od << " " << c.name;
    oc << "," << c.name;
  }
  od << "\n";
  oc << "\n";
  char buf[40];
  for (std::size_t k : keys) {
    od << k;
    oc << k;
    for (const PlotColumn& c : cols) {
      const auto it = c.values.find(k);
      if (it == c.values.end()) {
        od << " nan";
        oc << ",";
      } else {
        std::snprintf(buf, sizeof(buf), "%.17g", it->second);
        od << " " << buf;
        oc << "," << buf;
      }
    }
    od << "\n";
    oc << "\n";
  }
  if (!od) throw IoError("write failed: " + dat.string());
  if (!oc) throw IoError("write failed: " + csv.string());
}

}  // namespace bicgql

// End-to-end tests of the command-line driver: exit codes, output files,
// determinism of reruns, and config-file handling. The binary path comes
// from the BICGQL_CLI environment variable set by the build.
#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bicgql/dense_matrix.hpp"
#include "bicgql/lu.hpp"
#include "bicgql/matrix_market.hpp"
#include "bicgql/vector_ops.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* p = std::getenv("BICGQL_CLI");
  REQUIRE(p != nullptr);
  return p;
}

fs::path scratch_root() {
  const fs::path root = fs::temp_directory_path() / "bicgql_cli_tests";
  fs::create_directories(root);
  return root;
}

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args) {
  const fs::path so = scratch_root() / "stdout.txt";
  const fs::path se = scratch_root() / "stderr.txt";
  const std::string cmd =
      "\"" + cli_path() + "\" " + args + " > \"" + so.string() + "\" 2> \"" + se.string() + "\"";
  const int rc = std::system(cmd.c_str());
  RunResult r;
  REQUIRE(rc != -1);
  if (WIFEXITED(rc)) r.exit_code = WEXITSTATUS(rc);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  r.out = slurp(so);
  r.err = slurp(se);
  return r;
}

std::string slurp_file(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = scratch_root() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("running without a subcommand prints usage and fails") {
  const RunResult r = run_cli("");
  CHECK(r.exit_code == 1);
  CHECK(r.out.find("Usage") != std::string::npos);
}

TEST_CASE("help exits cleanly") {
  const RunResult r = run_cli("--help");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("solve") != std::string::npos);
}

TEST_CASE("gen writes a matrix and reruns byte-identically") {
  const fs::path d1 = fresh_dir("gen_a");
  const fs::path d2 = fresh_dir("gen_b");
  const std::string flags = "gen --dim 6 --gen-kappa 10 --seed 3 --out ";
  CHECK(run_cli(flags + "\"" + d1.string() + "\"").exit_code == 0);
  CHECK(run_cli(flags + "\"" + d2.string() + "\"").exit_code == 0);
  REQUIRE(fs::exists(d1 / "matrix.mtx"));
  REQUIRE(fs::exists(d2 / "matrix.mtx"));
  CHECK(slurp_file(d1 / "matrix.mtx") == slurp_file(d2 / "matrix.mtx"));

  const bicgql::DenseMatrix a = bicgql::read_matrix_market(d1 / "matrix.mtx");
  CHECK(a.rows() == 6);
  CHECK(a.cols() == 6);
}

TEST_CASE("solve on a perfectly conditioned system converges in one iteration") {
  const fs::path d = fresh_dir("solve_easy");
  const RunResult r =
      run_cli("solve --gen-kappa 1 --dim 8 --seed 2 --out \"" + d.string() + "\"");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("iterations 1") != std::string::npos);
  CHECK(r.out.find("termination converged") != std::string::npos);
  for (const char* f :
       {"solution.mtx", "trace.csv", "estimates.csv", "trace_plot.dat", "trace_plot.csv"})
    CHECK(fs::exists(d / f));
}

TEST_CASE("solve reruns produce byte-identical traces") {
  const fs::path d1 = fresh_dir("solve_rep_a");
  const fs::path d2 = fresh_dir("solve_rep_b");
  const std::string flags =
      "solve --gen-kappa 100 --dim 20 --seed 9 --method cg --rhs-index 4 --out ";
  CHECK(run_cli(flags + "\"" + d1.string() + "\"").exit_code == 0);
  CHECK(run_cli(flags + "\"" + d2.string() + "\"").exit_code == 0);
  CHECK(slurp_file(d1 / "trace.csv") == slurp_file(d2 / "trace.csv"));
  CHECK(slurp_file(d1 / "estimates.csv") == slurp_file(d2 / "estimates.csv"));
  CHECK(slurp_file(d1 / "solution.mtx") == slurp_file(d2 / "solution.mtx"));
}

TEST_CASE("hitting the iteration cap exits with code 2") {
  const fs::path d = fresh_dir("solve_cap");
  const RunResult r = run_cli(
      "solve --gen-kappa 1e4 --dim 30 --seed 5 --max-iter 3 --tol 1e-14 --out \"" + d.string() +
      "\"");
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("termination maxiter") != std::string::npos);
}

TEST_CASE("solve with the energy-norm criterion stops near the requested error") {
  const fs::path d = fresh_dir("solve_anorm");
  const std::string gen_flags = "--gen-kappa 1e4 --dim 50 --seed 5";
  CHECK(run_cli("gen " + gen_flags + " --out \"" + d.string() + "\"").exit_code == 0);
  const RunResult r =
      run_cli("solve " + gen_flags + " --method cg --criterion anorm --tol 1e-6 --out \"" +
              d.string() + "\"");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("termination converged") != std::string::npos);

  // Oracle: the returned iterate's true energy-norm error stays within a
  // decade of the requested threshold (the estimate refers to a delayed,
  // strictly worse iterate, so the solution can only be better).
  const bicgql::DenseMatrix a = bicgql::read_matrix_market(d / "matrix.mtx");
  const bicgql::Vector x = bicgql::read_matrix_market_vector(d / "solution.mtx");
  bicgql::Vector b(a.dim(), 0.0);
  b[0] = 1.0;  // default --rhs-index is 0
  const bicgql::Vector x_true = bicgql::direct_solve(a, b);
  const bicgql::Vector e = bicgql::subtract(x_true, x);
  const double ea = std::sqrt(std::abs(bicgql::dot(e, a.apply(e))));
  CHECK(ea <= 1e-5);
  CHECK(ea > 0.0);
}

TEST_CASE("a singular system reports breakdown with exit code 3") {
  const fs::path d = fresh_dir("solve_singular");
  bicgql::DenseMatrix a(2, 2);
  a(0, 0) = 1.0;
  const fs::path mpath = d / "singular.mtx";
  bicgql::write_matrix_market(mpath, a);
  const RunResult r = run_cli("solve --matrix \"" + mpath.string() +
                              "\" --method cg --rhs-index 1 --out \"" + d.string() + "\"");
  CHECK(r.exit_code == 3);
  CHECK(r.out.find("termination breakdown") != std::string::npos);
}

TEST_CASE("estimate evaluates a recorded trace") {
  const fs::path d = fresh_dir("estimate_src");
  CHECK(run_cli("solve --gen-kappa 100 --dim 20 --seed 9 --method cg --out \"" + d.string() +
                "\"")
            .exit_code == 0);
  const fs::path e = fresh_dir("estimate_out");
  const RunResult r = run_cli("estimate --trace \"" + (d / "trace.csv").string() +
                              "\" --d1 2 --d2 2 --lambda-min 1 --lambda-max 100 --out \"" +
                              e.string() + "\"");
  CHECK(r.exit_code == 0);
  REQUIRE(fs::exists(e / "estimates.csv"));
  const std::string text = slurp_file(e / "estimates.csv");
  CHECK(text.find("BiCGQL_Anorm") != std::string::npos);
  CHECK(text.find("CGQL_Gauss") != std::string::npos);
}

TEST_CASE("estimate without a trace fails") {
  CHECK(run_cli("estimate").exit_code == 1);
}

TEST_CASE("invalid option values are rejected") {
  CHECK(run_cli("solve --method gauss").exit_code == 1);
  CHECK(run_cli("solve --criterion energy").exit_code == 1);
  CHECK(run_cli("gen --gen-class spd").exit_code == 1);
}

TEST_CASE("config files set defaults and explicit flags override them") {
  const fs::path d = fresh_dir("config_case");
  const fs::path cfg = d / "run.ini";
  {
    std::ofstream out(cfg);
    out << "dim=6\n";
    out << "gen-kappa=1\n";
    out << "seed=2\n";
  }
  const fs::path d1 = fresh_dir("config_plain");
  CHECK(run_cli("--config \"" + cfg.string() + "\" solve --out \"" + d1.string() + "\"")
            .exit_code == 0);
  CHECK(bicgql::read_matrix_market_vector(d1 / "solution.mtx").size() == 6);

  const fs::path d2 = fresh_dir("config_override");
  CHECK(run_cli("--config \"" + cfg.string() + "\" solve --dim 8 --out \"" + d2.string() + "\"")
            .exit_code == 0);
  CHECK(bicgql::read_matrix_market_vector(d2 / "solution.mtx").size() == 8);
}

TEST_CASE("a tiny benchmark writes a per-bin csv") {
  const fs::path d = fresh_dir("bench_tiny");
  const RunResult r = run_cli(
      "bench --bins 2 --cases 1 --rhs-per-matrix 2 --dim 16 --d1 2 --d2 2 --gen-class hpd "
      "--jobs 2 --solve-tol 1e-8 --seed 21 --out \"" +
      d.string() + "\"");
  CHECK(r.exit_code == 0);
  REQUIRE(fs::exists(d / "bench_hpd.csv"));
  std::ifstream in(d / "bench_hpd.csv");
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "bin_lo,bin_hi,metric_name,mean,median,geomean,n_cases,n_breakdowns");
  std::size_t rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 8);
  CHECK_FALSE(fs::exists(d / "bench_nonsym.csv"));
}

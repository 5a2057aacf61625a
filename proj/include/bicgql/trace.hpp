// Per-iteration solver history: the scalar stream the error estimators read.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bicgql/errors.hpp"
#include "bicgql/vector_ops.hpp"

namespace bicgql {

enum class Method { CG, BiCG, BiCGStab };

enum class Termination { Converged, MaxIter, Breakdown };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::CG: return "cg";
    case Method::BiCG: return "bicg";
    case Method::BiCGStab: return "bicgstab";
  }
  return "?";
}

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxIter: return "maxiter";
    case Termination::Breakdown: return "breakdown";
  }
  return "?";
}

inline Method method_from_string(const std::string& s) {
  if (s == "cg") return Method::CG;
  if (s == "bicg") return Method::BiCG;
  if (s == "bicgstab") return Method::BiCGStab;
  throw Error("unknown method: " + s);
}

inline Termination termination_from_string(const std::string& s) {
  if (s == "converged") return Termination::Converged;
  if (s == "maxiter") return Termination::MaxIter;
  if (s == "breakdown") return Termination::Breakdown;
  throw Error("unknown termination: " + s);
}

// One solver step k. step_coeff multiplies the search direction p_k;
// res_norm_sq is ||r_k||^2 for the residual *entering* the step, so record k
// and iterate x_k line up. beta is the beta_{k+1} computed at the end of the
// step. shadow_res_dot is rtilde_k^T r_k for the two-sided methods (equals
// ||r_k||^2 for CG). mu_p is the Rayleigh quotient p_k^T A p_k / ||p_k||^2.
struct IterationRecord {
  std::size_t k = 0;
  double step_coeff = 0.0;
  double beta = 0.0;
  double res_norm_sq = 0.0;
  double shadow_res_dot = 0.0;
  double mu_p = 0.0;
  std::optional<Vector> x_snapshot;
};

struct SolveTrace {
  Method method = Method::CG;
  double r0_norm_sq = 0.0;
  std::vector<IterationRecord> records;
  Termination termination = Termination::MaxIter;
  // ||r_m||^2 after the last recorded step, i.e. the residual the solver
  // finished with. With m records, residual index m refers to this value.
  double final_res_norm_sq = 0.0;

  std::size_t iterations() const { return records.size(); }

  // ||r_k||^2 for k = 0..records.size(); the top index is the final residual.
  double res_norm_sq_at(std::size_t k) const {
    if (k < records.size()) return records[k].res_norm_sq;
    if (k == records.size()) return final_res_norm_sq;
    throw InsufficientHistory("res_norm_sq_at: index " + std::to_string(k) +
                              " past end of trace");
  }
};

inline void write_trace_csv(const std::filesystem::path& path, const SolveTrace& t) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  char buf[40];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "# method=" << to_string(t.method) << " termination=" << to_string(t.termination)
      << " r0_norm_sq=" << fmt(t.r0_norm_sq) << " final_res_norm_sq=" << fmt(t.final_res_norm_sq)
      << "\n";
  out << "k,step_coeff,beta,res_norm_sq,shadow_res_dot,mu_p\n";
  for (const IterationRecord& r : t.records) {
    out << r.k << "," << fmt(r.step_coeff) << "," << fmt(r.beta) << "," << fmt(r.res_norm_sq)
        << "," << fmt(r.shadow_res_dot) << "," << fmt(r.mu_p) << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline SolveTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  SolveTrace t;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw IoError("missing trace metadata line: " + path.string());
  {
    std::istringstream ms(line.substr(2));
    std::string kv;
    while (ms >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
      if (key == "method") t.method = method_from_string(val);
      else if (key == "termination") t.termination = termination_from_string(val);
      else if (key == "r0_norm_sq") t.r0_norm_sq = std::stod(val);
      else if (key == "final_res_norm_sq") t.final_res_norm_sq = std::stod(val);
    }
  }
  if (!std::getline(in, line) || line.rfind("k,", 0) != 0)
    throw IoError("missing trace header line: " + path.string());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    IterationRecord r;
    auto next = [&]() {
      if (!std::getline(ls, cell, ',')) throw IoError("short trace row: " + path.string());
      return cell;
    };
    r.k = static_cast<std::size_t>(std::stoull(next()));
    r.step_coeff = std::stod(next());
    r.beta = std::stod(next());
    r.res_norm_sq = std::stod(next());
    r.shadow_res_dot = std::stod(next());
    r.mu_p = std::stod(next());
    t.records.push_back(std::move(r));
  }
  return t;
}

}  // namespace bicgql

#pragma once

// Benchmark grid over random forests: one row per (instance, formulation).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "treemio/analysis.hpp"
#include "treemio/fixtures.hpp"
#include "treemio/formulations.hpp"
#include "treemio/solver.hpp"

namespace treemio {

struct BenchRow {
  std::uint64_t seed = 0;
  int d = 1;
  int T = 1;
  int depth = 1;
  std::string formulation;
  double build_ms = 0.0;
  double solve_ms = 0.0;
  std::string status;  // "optimal", "limit", or a solver status
  double mip_obj = std::numeric_limits<double>::quiet_NaN();
  double lp_bound = std::numeric_limits<double>::quiet_NaN();
  double gap_percent = std::numeric_limits<double>::quiet_NaN();
  long nodes = 0;
};

inline constexpr const char* kBenchHeader =
    "seed,d,T,depth,formulation,build_ms,solve_ms,status,mip_obj,lp_bound,gap_percent,nodes";

struct BenchGrid {
  std::vector<int> d{1, 2, 3};
  std::vector<int> T{1, 2, 4, 8};
  int depth = 4;
  int seeds = 10;
  std::uint64_t base_seed = 0;
  int samples = 32;  // training rows per instance
  std::vector<FormulationKind> kinds{std::begin(kAllKinds), std::end(kAllKinds)};
  double time_limit_s = 60.0;
};

namespace detail {

inline std::string csv_num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Builds and solves one formulation on one ensemble.
inline BenchRow bench_one(const TreeEnsemble& ens, const SplitIndex& index, FormulationKind kind, std::uint64_t seed,
                          int d, int T, int depth, const SolverConfig& cfg) {
  BenchRow row;
  row.seed = seed;
  row.d = d;
  row.T = T;
  row.depth = depth;
  row.formulation = to_string(kind);
  auto t0 = std::chrono::steady_clock::now();
  MipModel model = build(kind, ens, index);
  row.build_ms = detail::ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  SolveResult lp = solve_lp(relax(model), cfg);
  SolveResult mip = solve_mip(model, cfg);
  row.solve_ms = detail::ms_since(t0);
  if (lp.optimal()) row.lp_bound = lp.objective;
  row.nodes = mip.node_count;
  switch (mip.status) {
    case SolveStatus::Optimal: row.status = "optimal"; break;
    case SolveStatus::NodeLimit:
    case SolveStatus::TimeLimit:
    case SolveStatus::IterationLimit: row.status = "limit"; break;
    default: row.status = to_string(mip.status); break;
  }
  if (mip.has_solution()) row.mip_obj = mip.objective;
  if (lp.optimal() && mip.has_solution()) row.gap_percent = gap_percent(row.lp_bound, row.mip_obj);
  return row;
}

/// Runs the grid; instances are bootstrap forests on noisy triangle data.
/// `sink` receives each row as soon as it is produced.
template <typename Sink>
void run_bench(const BenchGrid& grid, Sink&& sink) {
  SolverConfig cfg;
  cfg.time_limit_s = grid.time_limit_s;
  for (int d : grid.d) {
    for (int T : grid.T) {
      for (int s = 0; s < grid.seeds; ++s) {
        const std::uint64_t seed = grid.base_seed + static_cast<std::uint64_t>(s);
        TreeEnsemble ens = make_random_forest(d, T, grid.depth, seed, grid.samples);
        SplitIndex index = build_split_index(ens);
        for (FormulationKind kind : grid.kinds) sink(bench_one(ens, index, kind, seed, d, T, grid.depth, cfg));
      }
    }
  }
}

inline std::vector<BenchRow> run_bench(const BenchGrid& grid) {
  std::vector<BenchRow> rows;
  run_bench(grid, [&](BenchRow r) { rows.push_back(std::move(r)); });
  return rows;
}

inline std::string to_csv_line(const BenchRow& r) {
  std::ostringstream o;
  o << r.seed << ',' << r.d << ',' << r.T << ',' << r.depth << ',' << r.formulation << ','
    << detail::csv_num(r.build_ms) << ',' << detail::csv_num(r.solve_ms) << ',' << r.status << ','
    << detail::csv_num(r.mip_obj) << ',' << detail::csv_num(r.lp_bound) << ',' << detail::csv_num(r.gap_percent)
    << ',' << r.nodes;
  return o.str();
}

inline std::vector<BenchRow> parse_bench_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kBenchHeader) throw ParseError("bench CSV must start with the header line");
  std::vector<BenchRow> rows;
  auto num = [](const std::string& f) { return f.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(f); };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 12) throw ParseError("bench CSV row has " + std::to_string(f.size()) + " fields: " + line);
    try {
      BenchRow r;
      r.seed = std::stoull(f[0]);
      r.d = std::stoi(f[1]);
      r.T = std::stoi(f[2]);
      r.depth = std::stoi(f[3]);
      r.formulation = f[4];
      r.build_ms = num(f[5]);
      r.solve_ms = num(f[6]);
      r.status = f[7];
      r.mip_obj = num(f[8]);
      r.lp_bound = num(f[9]);
      r.gap_percent = num(f[10]);
      r.nodes = std::stol(f[11]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ParseError("malformed bench CSV row: " + line);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Summaries

struct BenchSummary {
  int d = 0;
  int T = 0;
  std::string formulation;
  int runs = 0;
  double truncated_mean_ms = 0.0;  // limit runs counted at the time limit
  double percent_limit = 0.0;
  double geomean_ms = 0.0;         // limit runs counted at the time limit
  double mean_gap_percent = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr const char* kSummaryHeader = "d,T,formulation,runs,truncated_mean_ms,percent_limit,geomean_ms,mean_gap_percent";

/// Groups rows by (d, T, formulation). Times below 1 ms are clamped to 1 ms
/// inside the geometric mean.
inline std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows, double time_limit_s) {
  std::map<std::tuple<int, int, std::string>, std::vector<const BenchRow*>> groups;
  for (const BenchRow& r : rows) groups[{r.d, r.T, r.formulation}].push_back(&r);
  std::vector<BenchSummary> out;
  const double cap = time_limit_s * 1000.0;
  for (const auto& [key, members] : groups) {
    BenchSummary s;
    std::tie(s.d, s.T, s.formulation) = key;
    s.runs = static_cast<int>(members.size());
    double sum = 0.0, log_sum = 0.0, gap_sum = 0.0;
    int limits = 0, gaps = 0;
    for (const BenchRow* r : members) {
      const bool limit = r->status != "optimal";
      double t = limit ? cap : std::min(cap, r->solve_ms);
      if (limit) ++limits;
      sum += t;
      log_sum += std::log(std::max(t, 1.0));
      if (std::isfinite(r->gap_percent)) {
        gap_sum += r->gap_percent;
        ++gaps;
      }
    }
    s.truncated_mean_ms = sum / s.runs;
    s.percent_limit = 100.0 * limits / s.runs;
    s.geomean_ms = std::exp(log_sum / s.runs);
    if (gaps > 0) s.mean_gap_percent = gap_sum / gaps;
    out.push_back(std::move(s));
  }
  return out;
}

inline std::string to_csv_line(const BenchSummary& s) {
  std::ostringstream o;
  o << s.d << ',' << s.T << ',' << s.formulation << ',' << s.runs << ',' << detail::csv_num(s.truncated_mean_ms) << ','
    << detail::csv_num(s.percent_limit) << ',' << detail::csv_num(s.geomean_ms) << ','
    << detail::csv_num(s.mean_gap_percent);
  return o.str();
}

// ---------------------------------------------------------------------------
// Gap ordering across the formulations of one instance

struct GapOrderViolation {
  std::uint64_t seed;
  int d, T;
  std::string what;
};

/// Checks, per instance, gap(expset_elbow) <= gap(expset) <= gap(misic) and
/// gap(elbow) <= gap(misic), each up to `tol`; d = 1 instances must also have
/// a zero expset gap.
inline std::vector<GapOrderViolation> check_gap_ordering(const std::vector<BenchRow>& rows, double tol = 1e-6) {
  std::map<std::tuple<std::uint64_t, int, int, int>, std::map<std::string, double>> inst;
  for (const BenchRow& r : rows) inst[{r.seed, r.d, r.T, r.depth}][r.formulation] = r.gap_percent;
  std::vector<GapOrderViolation> out;
  for (const auto& [key, gaps] : inst) {
    auto [seed, d, T, depth] = key;
    auto get = [&](const char* k) -> std::optional<double> {
      auto it = gaps.find(k);
      if (it == gaps.end()) return std::nullopt;
      return it->second;
    };
    auto check = [&](const char* lo, const char* hi) {
      auto a = get(lo), b = get(hi);
      if (!a || !b) return;
      if (!std::isfinite(*a) || !std::isfinite(*b) || *a > *b + tol) {
        out.push_back({seed, d, T, std::string("gap(") + lo + ") > gap(" + hi + ")"});
      }
    };
    check("expset_elbow", "expset");
    check("expset", "misic");
    check("elbow", "misic");
    if (d == 1) {
      if (auto e = get("expset"); e && !(std::abs(*e) <= tol)) out.push_back({seed, d, T, "d=1 expset gap not zero"});
    }
  }
  return out;
}

}  // namespace treemio

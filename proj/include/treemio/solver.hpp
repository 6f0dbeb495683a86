#pragma once

// Best-bound branch and bound over the bundled simplex, plus vertex tests.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "treemio/error.hpp"
#include "treemio/mip_model.hpp"
#include "treemio/simplex.hpp"

namespace treemio {

/// Point keyed by variable name.
using NamedPoint = std::map<std::string, double, std::less<>>;

namespace detail {

struct BnbNode {
  double bound;  // LP value in maximization space
  long seq;
  std::vector<double> lower, upper;
  std::vector<double> values;
};

struct NodeOrder {
  bool operator()(const BnbNode* a, const BnbNode* b) const {
    if (a->bound != b->bound) return a->bound < b->bound;
    return a->seq > b->seq;
  }
};

/// True when a node with LP value `bound` cannot beat `incumbent` by more than the gap tolerance.
inline bool dominated(double bound, double incumbent) {
  if (!std::isfinite(incumbent)) return false;
  return bound - incumbent <= 1e-6 * std::max(1.0, std::abs(incumbent));
}

}  // namespace detail

/// Maximizes or minimizes `model` with binaries enforced. Branches on the
/// most fractional binary (lowest id on ties); explores the open node with
/// the best LP bound first (creation order on ties).
inline SolveResult solve_mip(const MipModel& model, const SolverConfig& cfg = {}) {
  const auto start = std::chrono::steady_clock::now();
  const double dir = model.objective().sense == ObjSense::Maximize ? 1.0 : -1.0;
  std::vector<std::size_t> binaries;
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    if (model.variable(j).type == VarType::Binary) binaries.push_back(j);
  }

  SolveResult best;
  best.status = SolveStatus::Infeasible;
  double incumbent = -kInf;  // maximization space
  long nodes = 0;
  long iterations = 0;

  auto branch_var = [&](const std::vector<double>& x) -> std::optional<std::size_t> {
    std::optional<std::size_t> pick;
    double frac_best = cfg.int_tol;
    for (std::size_t j : binaries) {
      double f = std::min(x[j] - std::floor(x[j]), std::ceil(x[j]) - x[j]);
      if (f > frac_best) {
        frac_best = f;
        pick = j;
      }
    }
    return pick;
  };

  std::vector<std::unique_ptr<detail::BnbNode>> storage;
  std::priority_queue<detail::BnbNode*, std::vector<detail::BnbNode*>, detail::NodeOrder> open;
  long seq = 0;

  // Returns the LP status; integral children update the incumbent, others are queued.
  auto process = [&](std::vector<double> lo, std::vector<double> hi) -> SolveStatus {
    ++nodes;
    SolveResult lp = solve_lp_with_bounds(model, lo, hi, cfg);
    iterations += lp.iterations;
    if (lp.status != SolveStatus::Optimal) return lp.status;
    const double bound = dir * lp.objective;
    if (detail::dominated(bound, incumbent)) return lp.status;
    if (!branch_var(lp.values)) {
      incumbent = bound;
      best.objective = lp.objective;
      best.values = std::move(lp.values);
      return lp.status;
    }
    auto node = std::make_unique<detail::BnbNode>(
        detail::BnbNode{bound, seq++, std::move(lo), std::move(hi), std::move(lp.values)});
    open.push(node.get());
    storage.push_back(std::move(node));
    return lp.status;
  };

  std::vector<double> lo, hi;
  for (const Variable& v : model.variables()) {
    lo.push_back(v.lower);
    hi.push_back(v.upper);
  }
  SolveStatus root = process(lo, hi);
  if (root != SolveStatus::Optimal) {
    best.status = root;
    best.node_count = nodes;
    best.iterations = iterations;
    return best;
  }

  SolveStatus limit = SolveStatus::Optimal;
  while (!open.empty()) {
    detail::BnbNode* node = open.top();
    if (detail::dominated(node->bound, incumbent)) break;
    if (nodes >= cfg.max_bnb_nodes) {
      limit = SolveStatus::NodeLimit;
      break;
    }
    if (cfg.time_limit_s > 0.0) {
      std::chrono::duration<double> el = std::chrono::steady_clock::now() - start;
      if (el.count() > cfg.time_limit_s) {
        limit = SolveStatus::TimeLimit;
        break;
      }
    }
    open.pop();
    const std::size_t j = *branch_var(node->values);
    for (double side : {0.0, 1.0}) {
      std::vector<double> clo = node->lower, chi = node->upper;
      clo[j] = chi[j] = side;
      SolveStatus st = process(std::move(clo), std::move(chi));
      if (st == SolveStatus::IterationLimit || st == SolveStatus::TimeLimit) limit = st;
    }
    node->values.clear();
    node->values.shrink_to_fit();
    if (limit != SolveStatus::Optimal) break;
  }

  double open_bound = open.empty() ? -kInf : open.top()->bound;
  double bound = std::max(incumbent, open_bound);
  best.node_count = nodes;
  best.iterations = iterations;
  best.best_bound = std::isfinite(bound) ? dir * bound : std::numeric_limits<double>::quiet_NaN();
  if (limit != SolveStatus::Optimal) {
    best.status = limit;
  } else {
    best.status = best.values.empty() ? SolveStatus::Infeasible : SolveStatus::Optimal;
  }
  return best;
}

/// Throws DimensionMismatch unless `point` names every model variable and nothing else.
inline std::vector<double> to_dense(const MipModel& model, const NamedPoint& point) {
  if (point.size() != model.num_variables()) {
    throw DimensionMismatch("point has " + std::to_string(point.size()) + " entries, model has " +
                            std::to_string(model.num_variables()) + " variables");
  }
  std::vector<double> x(model.num_variables());
  for (const auto& [name, v] : point) {
    auto id = model.find(name);
    if (!id) throw DimensionMismatch("point names unknown variable '" + name + "'");
    x[*id] = v;
  }
  return x;
}

/// Fills every variable missing from `partial` that an output row defines
/// in terms of known ones (y_t from leaf indicators, then y). Throws
/// DimensionMismatch when something stays undetermined.
inline NamedPoint complete_point(const MipModel& model, NamedPoint partial) {
  bool progress = true;
  while (progress) {
    progress = false;
    for (const Constraint& c : model.constraints()) {
      if (c.kind != RowKind::Output || c.sense != Sense::Equal) continue;
      const Term* unknown = nullptr;
      int missing = 0;
      double known = 0.0;
      for (const Term& t : c.terms) {
        auto it = partial.find(model.variable(t.var).name);
        if (it == partial.end()) {
          ++missing;
          unknown = &t;
        } else {
          known += t.coeff * it->second;
        }
      }
      if (missing != 1) continue;
      partial[model.variable(unknown->var).name] = (c.rhs - known) / unknown->coeff;
      progress = true;
    }
  }
  for (const Variable& v : model.variables()) {
    if (!partial.count(v.name)) throw DimensionMismatch("point leaves variable '" + v.name + "' undetermined");
  }
  return partial;
}

/// Rank of a dense row set by Gaussian elimination with partial pivoting.
/// Rows are scaled to unit max-norm first; pivots below `tol` count as zero.
inline std::size_t matrix_rank(std::vector<std::vector<double>> rows, std::size_t ncols, double tol = 1e-9) {
  for (auto& r : rows) {
    double m = 0.0;
    for (double v : r) m = std::max(m, std::abs(v));
    if (m > 0.0) {
      for (double& v : r) v /= m;
    }
  }
  std::size_t rank = 0;
  for (std::size_t c = 0; c < ncols && rank < rows.size(); ++c) {
    std::size_t piv = rank;
    for (std::size_t r = rank; r < rows.size(); ++r) {
      if (std::abs(rows[r][c]) > std::abs(rows[piv][c])) piv = r;
    }
    if (std::abs(rows[piv][c]) <= tol) continue;
    std::swap(rows[piv], rows[rank]);
    for (std::size_t r = rank + 1; r < rows.size(); ++r) {
      double f = rows[r][c] / rows[rank][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < ncols; ++k) rows[r][k] -= f * rows[rank][k];
    }
    ++rank;
  }
  return rank;
}

/// True iff `x` is feasible for the LP relaxation of `model` and its active
/// rows and bounds have full column rank.
inline bool is_vertex(const MipModel& model, const std::vector<double>& x, const SolverConfig& cfg = {}) {
  const std::size_t n = model.num_variables();
  if (x.size() != n) {
    throw DimensionMismatch("point has " + std::to_string(x.size()) + " entries, model has " + std::to_string(n) +
                            " variables");
  }
  std::vector<std::vector<double>> active;
  for (std::size_t j = 0; j < n; ++j) {
    const Variable& v = model.variable(j);
    if (x[j] < v.lower - cfg.feas_tol || x[j] > v.upper + cfg.feas_tol) return false;
    if (std::abs(x[j] - v.lower) <= cfg.feas_tol || std::abs(x[j] - v.upper) <= cfg.feas_tol) {
      std::vector<double> row(n, 0.0);
      row[j] = 1.0;
      active.push_back(std::move(row));
    }
  }
  for (const Constraint& c : model.constraints()) {
    if (c.violation(x) > cfg.feas_tol) return false;
    if (std::abs(c.activity(x) - c.rhs) <= cfg.feas_tol) {
      std::vector<double> row(n, 0.0);
      for (const Term& t : c.terms) row[t.var] = t.coeff;
      active.push_back(std::move(row));
    }
  }
  return matrix_rank(std::move(active), n) == n;
}

inline bool is_vertex(const MipModel& model, const NamedPoint& point, const SolverConfig& cfg = {}) {
  return is_vertex(model, to_dense(model, point), cfg);
}

}  // namespace treemio

#pragma once

// Ground-truth oracle and polyhedral checks on the formulations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "treemio/error.hpp"
#include "treemio/formulations.hpp"
#include "treemio/mip_model.hpp"
#include "treemio/rng.hpp"
#include "treemio/solver.hpp"
#include "treemio/tree_model.hpp"

namespace treemio {

// ---------------------------------------------------------------------------
// Cell-enumeration oracle

/// How a point on a threshold is scored.
///  Open:   each tree routes `w_i <= theta` left (the ensemble's prediction).
///  Closed: each tree may take any leaf whose closed box contains w, so the
///          maximum is taken over the closure of every cell, per tree.
enum class BoundarySemantics { Open, Closed };

struct OracleOptions {
  BoundarySemantics semantics = BoundarySemantics::Open;
  std::size_t max_cells = 1'000'000;
  SolverConfig lp;
};

struct OracleResult {
  std::vector<double> w;
  double value = -kInf;
  std::size_t cells = 0;
  std::size_t feasible_cells = 0;
};

namespace detail {

inline double evaluate_closed(const DecisionTree& tree, int v, std::span<const double> w) {
  const Node& n = tree.node(v);
  if (n.leaf) return n.value;
  const double x = w[static_cast<std::size_t>(n.feature)];
  if (x < n.threshold) return evaluate_closed(tree, n.left, w);
  if (x > n.threshold) return evaluate_closed(tree, n.right, w);
  return std::max(evaluate_closed(tree, n.left, w), evaluate_closed(tree, n.right, w));
}

inline std::vector<std::vector<double>> pooled_thresholds(const TreeEnsemble& ens) {
  std::vector<std::vector<double>> th(static_cast<std::size_t>(ens.num_features));
  for (const DecisionTree& tree : ens.trees) {
    for (int v : tree.splits()) th[static_cast<std::size_t>(tree.node(v).feature)].push_back(tree.node(v).threshold);
  }
  for (auto& t : th) {
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
  }
  return th;
}

/// One coordinate slot of the cell grid: an interval plus the point used to
/// score it. Routing sends w = t left, so under open semantics a cell that
/// starts at a threshold excludes its lower end.
struct Slot {
  double lower, upper, probe;
  bool open_lower = false;
};

// Relative inset that stands in for a strict lower bound in the cell LP.
inline constexpr double kOpenInset = 1e-6;

}  // namespace detail

/// Maximizes the ensemble over its domain, optionally intersected with
/// linear rows over w, by enumerating the grid of cells cut out by the
/// pooled thresholds. Throws CellLimit beyond `opts.max_cells` cells.
inline OracleResult oracle_optimum(const TreeEnsemble& ens, const std::vector<FeatureRow>& rows = {},
                                   const OracleOptions& opts = {}) {
  require_valid(ens);
  const auto d = static_cast<std::size_t>(ens.num_features);
  for (const Bounds& b : ens.domain) {
    if (!std::isfinite(b.lower) || !std::isfinite(b.upper)) throw UnboundedDomain("oracle needs a bounded domain");
  }
  for (const FeatureRow& r : rows) {
    if (r.coeffs.size() != d) throw DimensionMismatch("feature row size does not match the ensemble");
  }
  const auto th = detail::pooled_thresholds(ens);
  std::vector<std::vector<detail::Slot>> slots(d);
  double total = 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    double lo = ens.domain[i].lower;
    const bool open = opts.semantics == BoundarySemantics::Open;
    bool after_threshold = false;
    for (double t : th[i]) {
      slots[i].push_back({lo, t, 0.5 * (lo + t), open && after_threshold});
      if (!open) slots[i].push_back({t, t, t});
      lo = t;
      after_threshold = true;
    }
    slots[i].push_back({lo, ens.domain[i].upper, 0.5 * (lo + ens.domain[i].upper), open && after_threshold});
    total *= static_cast<double>(slots[i].size());
  }
  if (total > static_cast<double>(opts.max_cells)) {
    throw CellLimit("cell grid has " + std::to_string(static_cast<long long>(total)) + " cells, limit is " +
                    std::to_string(opts.max_cells));
  }

  // Feasibility LP over one cell: w in the cell's box and all rows.
  MipModel lp;
  std::vector<std::size_t> wv;
  if (!rows.empty()) {
    for (std::size_t i = 0; i < d; ++i) {
      wv.push_back(lp.add_variable(names::w(static_cast<int>(i)), ens.domain[i].lower, ens.domain[i].upper,
                                   VarType::Continuous, Role::W));
    }
    std::size_t k = 0;
    for (const FeatureRow& r : rows) {
      std::vector<Term> terms;
      for (std::size_t i = 0; i < d; ++i) terms.push_back({wv[i], r.coeffs[i]});
      lp.add_constraint("extra_" + std::to_string(++k), std::move(terms), r.sense, r.rhs);
    }
  }

  OracleResult best;
  std::vector<std::size_t> odo(d, 0);
  std::vector<double> w(d), lo(d), hi(d);
  while (true) {
    ++best.cells;
    for (std::size_t i = 0; i < d; ++i) {
      const detail::Slot& s = slots[i][odo[i]];
      w[i] = s.probe;
      lo[i] = s.open_lower ? s.lower + detail::kOpenInset * (s.upper - s.lower) : s.lower;
      hi[i] = s.upper;
    }
    bool feasible = true;
    std::vector<double> where = w;
    if (!rows.empty()) {
      SolveResult r = solve_lp_with_bounds(lp, lo, hi, opts.lp);
      feasible = r.optimal();
      if (feasible) where = r.values;
    }
    if (feasible) {
      ++best.feasible_cells;
      double value = 0.0;
      for (std::size_t t = 0; t < ens.size(); ++t) {
        const DecisionTree& tree = ens.trees[t];
        value += ens.weights[t] *
                 (opts.semantics == BoundarySemantics::Open ? evaluate(tree, w) : detail::evaluate_closed(tree, tree.root, w));
      }
      if (value > best.value) {
        best.value = value;
        best.w = where;
      }
    }
    std::size_t i = 0;
    while (i < d && ++odo[i] == slots[i].size()) odo[i++] = 0;
    if (i == d) break;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Relaxation gap

struct GapReport {
  FormulationKind kind = FormulationKind::Projected;
  SolveStatus lp_status = SolveStatus::Infeasible;
  SolveStatus mip_status = SolveStatus::Infeasible;
  double lp_bound = std::numeric_limits<double>::quiet_NaN();
  double mip_opt = std::numeric_limits<double>::quiet_NaN();
  double gap_percent = std::numeric_limits<double>::quiet_NaN();
  long nodes = 0;
};

inline constexpr double kGapEpsilon = 1e-9;

inline double gap_percent(double lp_bound, double mip_opt) {
  return 100.0 * (lp_bound - mip_opt) / std::max(std::abs(mip_opt), kGapEpsilon);
}

/// Solves the LP relaxation and the MIP of one formulation (maximizing y).
inline GapReport relaxation_gap(const MipModel& model, FormulationKind kind, const SolverConfig& cfg = {}) {
  GapReport g;
  g.kind = kind;
  SolveResult lp = solve_lp(relax(model), cfg);
  SolveResult mip = solve_mip(model, cfg);
  g.lp_status = lp.status;
  g.mip_status = mip.status;
  g.lp_bound = lp.objective;
  g.mip_opt = mip.objective;
  g.nodes = mip.node_count;
  if (lp.optimal() && mip.has_solution()) g.gap_percent = gap_percent(g.lp_bound, g.mip_opt);
  return g;
}

inline GapReport relaxation_gap(const TreeEnsemble& ens, FormulationKind kind, const SolverConfig& cfg = {},
                                const BuildOptions& opts = {}) {
  return relaxation_gap(build(kind, ens, opts), kind, cfg);
}

// ---------------------------------------------------------------------------
// Polyhedral containment

struct RowViolation {
  std::string name;
  double violation = 0.0;  // max over the inner polytope of (a.v - b), clipped at 0
};

struct ContainmentReport {
  std::vector<RowViolation> rows;
  double max_violation = 0.0;
  bool contained = true;
};

/// For every row and bound of `outer`, maximizes its violation over the LP
/// relaxation of `inner`. Variables are matched by name; every outer
/// variable must exist in inner with the same role.
inline ContainmentReport check_containment(const MipModel& inner, const MipModel& outer, const SolverConfig& cfg = {}) {
  MipModel probe = relax(inner);
  std::vector<std::size_t> map(outer.num_variables());
  for (std::size_t j = 0; j < outer.num_variables(); ++j) {
    const Variable& v = outer.variable(j);
    auto id = probe.find(v.name);
    if (!id || probe.variable(*id).role != v.role) {
      throw RoleMismatch("variable '" + v.name + "' has no counterpart with the same role in the inner model");
    }
    map[j] = *id;
  }
  ContainmentReport rep;
  auto maximize = [&](std::vector<Term> terms) {
    probe.set_objective(ObjSense::Maximize, std::move(terms));
    SolveResult r = solve_lp(probe, cfg);
    if (r.status == SolveStatus::Unbounded) return kInf;
    if (r.status == SolveStatus::Infeasible) return -kInf;
    if (!r.optimal()) throw Error(std::string("containment LP stopped: ") + to_string(r.status));
    return r.objective;
  };
  auto record = [&](std::string name, double violation) {
    violation = std::max(0.0, violation);
    rep.max_violation = std::max(rep.max_violation, violation);
    rep.rows.push_back({std::move(name), violation});
  };
  for (const Constraint& c : outer.constraints()) {
    std::vector<Term> terms;
    for (const Term& t : c.terms) terms.push_back({map[t.var], t.coeff});
    if (c.sense != Sense::GreaterEqual) record(c.name, maximize(terms) - c.rhs);
    if (c.sense != Sense::LessEqual) {
      for (Term& t : terms) t.coeff = -t.coeff;
      record(c.name + (c.sense == Sense::Equal ? "_rev" : ""), maximize(terms) + c.rhs);
    }
  }
  for (std::size_t j = 0; j < outer.num_variables(); ++j) {
    const Variable& v = outer.variable(j);
    if (std::isfinite(v.upper)) record(v.name + "_ub", maximize({{map[j], 1.0}}) - v.upper);
    if (std::isfinite(v.lower)) record(v.name + "_lb", maximize({{map[j], -1.0}}) + v.lower);
  }
  rep.contained = rep.max_violation <= cfg.feas_tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Integrality probe

struct ProbeReport {
  int solved = 0;
  int fractional = 0;
  int failed = 0;  // LP not optimal
  double max_distance = 0.0;
  std::vector<double> first_fractional;
};

/// Solves the relaxation for `n_objectives` objectives with coefficients
/// uniform in [-1, 1] on every variable and counts optima with a `roles`
/// variable farther than int_tol from {0, 1}.
inline ProbeReport probe_integrality(const MipModel& model, const std::vector<Role>& roles, int n_objectives,
                                     std::uint64_t seed, const SolverConfig& cfg = {}) {
  MipModel m = relax(model);
  std::vector<std::size_t> checked;
  for (std::size_t j = 0; j < m.num_variables(); ++j) {
    if (std::find(roles.begin(), roles.end(), m.variable(j).role) != roles.end()) checked.push_back(j);
  }
  Pcg32 rng(seed);
  ProbeReport rep;
  for (int k = 0; k < n_objectives; ++k) {
    std::vector<Term> obj;
    for (std::size_t j = 0; j < m.num_variables(); ++j) obj.push_back({j, rng.uniform(-1.0, 1.0)});
    m.set_objective(ObjSense::Maximize, std::move(obj));
    SolveResult r = solve_lp(m, cfg);
    if (!r.optimal()) {
      ++rep.failed;
      continue;
    }
    ++rep.solved;
    double dist = 0.0;
    for (std::size_t j : checked) dist = std::max(dist, std::min(std::abs(r.values[j]), std::abs(r.values[j] - 1.0)));
    rep.max_distance = std::max(rep.max_distance, dist);
    if (dist > cfg.int_tol) {
      if (rep.fractional == 0) rep.first_fractional = r.values;
      ++rep.fractional;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Total unimodularity

using IntMatrix = std::vector<std::vector<int>>;

namespace detail {

/// Exact determinant of a small integer matrix (fraction-free elimination).
inline std::int64_t bareiss_det(std::vector<std::vector<std::int64_t>> a) {
  const std::size_t n = a.size();
  std::int64_t sign = 1, prev = 1;
  for (std::size_t k = 0; k < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t r = k + 1;
      while (r < n && a[r][k] == 0) ++r;
      if (r == n) return 0;
      std::swap(a[k], a[r]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
    }
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

inline bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
  const std::size_t k = c.size();
  std::size_t i = k;
  while (i > 0 && c[i - 1] == n - k + i - 1) --i;
  if (i == 0) return false;
  ++c[i - 1];
  for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
  return true;
}

}  // namespace detail

inline constexpr double kMaxSubmatrices = 1e7;

/// True iff every square submatrix of order <= max_order has determinant
/// in {-1, 0, 1}.
inline bool check_tu(const IntMatrix& a, int max_order) {
  const std::size_t m = a.size();
  const std::size_t n = m ? a[0].size() : 0;
  for (const auto& row : a) {
    if (row.size() != n) throw EntryRange("matrix rows have different lengths");
    for (int v : row) {
      if (v < -1 || v > 1) throw EntryRange("entry " + std::to_string(v) + " outside {-1, 0, 1}");
    }
  }
  const std::size_t top = std::min({static_cast<std::size_t>(std::max(max_order, 0)), m, n});
  double count = 0.0;
  for (std::size_t k = 1; k <= top; ++k) count += detail::binomial(m, k) * detail::binomial(n, k);
  if (count > kMaxSubmatrices) {
    throw SizeLimit("check would visit " + std::to_string(static_cast<long long>(count)) + " submatrices");
  }
  // Order 1 is the entry check above.
  for (std::size_t k = 2; k <= top; ++k) {
    std::vector<std::size_t> rows(k);
    for (std::size_t i = 0; i < k; ++i) rows[i] = i;
    do {
      std::vector<std::size_t> cols(k);
      for (std::size_t i = 0; i < k; ++i) cols[i] = i;
      do {
        std::vector<std::vector<std::int64_t>> sub(k, std::vector<std::int64_t>(k));
        for (std::size_t i = 0; i < k; ++i) {
          for (std::size_t j = 0; j < k; ++j) sub[i][j] = a[rows[i]][cols[j]];
        }
        std::int64_t det = detail::bareiss_det(std::move(sub));
        if (det < -1 || det > 1) return false;
      } while (detail::next_combination(cols, n));
    } while (detail::next_combination(rows, m));
  }
  return true;
}

/// Constraint matrix of the expset system of a 1-D ensemble in block form:
/// one row per split (by tree, thresholds ascending) with +1 on below(s)
/// leaves and -1 on its threshold indicator, followed by the ordering rows
/// x_j - x_{j+1}. Columns: leaves of each tree in order, then x_1..x_K.
inline IntMatrix expset_tu_matrix(const TreeEnsemble& ens, const SplitIndex& index) {
  if (ens.num_features != 1) throw DimensionError("the block matrix is defined for one feature");
  std::vector<std::size_t> leaf_offset;
  std::size_t cols = 0;
  for (std::size_t t = 0; t < ens.size(); ++t) {
    leaf_offset.push_back(cols);
    cols += index.num_leaves[t];
  }
  const std::size_t x0 = cols;
  const auto K = static_cast<std::size_t>(index.K(0));
  cols += K;
  IntMatrix a;
  for (std::size_t t = 0; t < ens.size(); ++t) {
    std::vector<std::size_t> order = index.tree_splits[t];
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t p, std::size_t q) { return index.splits[p].rank < index.splits[q].rank; });
    for (std::size_t si : order) {
      const SplitInfo& s = index.splits[si];
      std::vector<int> row(cols, 0);
      for (int l : s.below) row[leaf_offset[t] + static_cast<std::size_t>(l)] = 1;
      row[x0 + static_cast<std::size_t>(s.rank) - 1] = -1;
      a.push_back(std::move(row));
    }
  }
  for (std::size_t j = 0; j + 1 < K; ++j) {
    std::vector<int> row(cols, 0);
    row[x0 + j] = 1;
    row[x0 + j + 1] = -1;
    a.push_back(std::move(row));
  }
  return a;
}

// ---------------------------------------------------------------------------
// Nested-split implication

struct Lemma2Report {
  bool right_parent = true;  // s' in right_parent(s); otherwise left_parent
  bool covering = false;     // leaf cover condition for the pair
  double violation = 0.0;    // max violation of the elbow row
  bool implied = false;
};

/// Maximizes the violation of the elbow row for (s, s') over the misic
/// relaxation plus the two expset rows that imply it when the leaf cover
/// condition holds. `s` and `s_parent` index `index.splits`.
inline Lemma2Report check_implication_lemma2(const TreeEnsemble& ens, const SplitIndex& index, std::size_t s,
                                             std::size_t s_parent, const SolverConfig& cfg = {}) {
  const SplitInfo& child = index.splits.at(s);
  const SplitInfo& parent = index.splits.at(s_parent);
  Lemma2Report rep;
  auto in = [](const std::vector<std::size_t>& v, std::size_t x) { return std::find(v.begin(), v.end(), x) != v.end(); };
  if (in(child.right_parent, s_parent)) {
    rep.right_parent = true;
  } else if (in(child.left_parent, s_parent)) {
    rep.right_parent = false;
  } else {
    throw NotNested("split " + std::to_string(s_parent) + " is not a same-feature parent of split " + std::to_string(s));
  }
  const std::size_t t = child.tree;
  // Pair (lower set, upper set): for right parents below(s') and above(s).
  const std::vector<int>& lower_set = rep.right_parent ? parent.below : child.below;
  const std::vector<int>& upper_set = rep.right_parent ? child.above : parent.above;
  const std::size_t p = index.num_leaves[t];
  std::vector<bool> cover(p, false);
  for (int l : lower_set) cover[static_cast<std::size_t>(l)] = true;
  for (int l : upper_set) cover[static_cast<std::size_t>(l)] = true;
  rep.covering = std::all_of(cover.begin(), cover.end(), [](bool b) { return b; });

  MipModel m = relax(build_misic(ens, index));
  auto z = [&](int l) { return m.id(names::z(t, l)); };
  const std::size_t x_lo = m.id(names::x(child.feature, rep.right_parent ? parent.rank : child.rank));
  const std::size_t x_hi = m.id(names::x(child.feature, rep.right_parent ? child.rank : parent.rank));
  std::vector<Term> below_row{{x_lo, -1.0}}, above_row{{x_hi, 1.0}};
  for (int l : lower_set) below_row.push_back({z(l), 1.0});
  for (int l : upper_set) above_row.push_back({z(l), 1.0});
  m.add_constraint("exp_below", std::move(below_row), Sense::LessEqual, 0.0);
  m.add_constraint("exp_above", std::move(above_row), Sense::LessEqual, 1.0);
  // Elbow row: sum(side z) - x_lo + x_hi <= 0, side = right(s) or left(s).
  std::vector<Term> obj{{x_lo, -1.0}, {x_hi, 1.0}};
  for (int l : rep.right_parent ? child.right : child.left) obj.push_back({z(l), 1.0});
  m.set_objective(ObjSense::Maximize, std::move(obj));
  SolveResult r = solve_lp(m, cfg);
  if (!r.optimal()) throw Error(std::string("implication LP stopped: ") + to_string(r.status));
  rep.violation = std::max(0.0, r.objective);
  rep.implied = rep.violation <= cfg.feas_tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Sharpness in one dimension

struct SharpnessReport {
  bool in_projection = false;
  bool in_hull = false;
};

namespace detail {

using Pt = std::pair<double, double>;

inline double cross(const Pt& o, const Pt& a, const Pt& b) {
  return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
}

/// Counter-clockwise convex hull (Andrew's monotone chain).
inline std::vector<Pt> convex_hull(std::vector<Pt> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Pt> h(2 * pts.size());
  std::size_t k = 0;
  for (const Pt& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lo = k + 1; i-- > 0;) {
    while (k >= lo && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

inline bool in_polygon(const std::vector<Pt>& hull, const Pt& q, double tol) {
  if (hull.size() == 1) return std::abs(hull[0].first - q.first) <= tol && std::abs(hull[0].second - q.second) <= tol;
  if (hull.size() == 2) {
    const Pt& a = hull[0];
    const Pt& b = hull[1];
    double len = std::hypot(b.first - a.first, b.second - a.second);
    if (std::abs(cross(a, b, q)) > tol * len) return false;
    double t = ((q.first - a.first) * (b.first - a.first) + (q.second - a.second) * (b.second - a.second)) / (len * len);
    return t >= -tol && t <= 1 + tol;
  }
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Pt& a = hull[i];
    const Pt& b = hull[(i + 1) % hull.size()];
    double len = std::hypot(b.first - a.first, b.second - a.second);
    if (cross(a, b, q) < -tol * len) return false;
  }
  return true;
}

}  // namespace detail

/// Breakpoints of the graph of a 1-D ensemble: both ends of every cell at
/// the cell's value.
inline std::vector<std::pair<double, double>> graph_breakpoints_1d(const TreeEnsemble& ens) {
  if (ens.num_features != 1) throw DimensionError("graph breakpoints need d = 1, got d = " + std::to_string(ens.num_features));
  auto th = detail::pooled_thresholds(ens)[0];
  std::vector<std::pair<double, double>> pts;
  double lo = ens.domain[0].lower;
  th.push_back(ens.domain[0].upper);
  for (double hi : th) {
    const double mid = 0.5 * (lo + hi);
    const double v = evaluate(ens, std::span<const double>(&mid, 1));
    pts.emplace_back(lo, v);
    pts.emplace_back(hi, v);
    lo = hi;
  }
  return pts;
}

/// Tests (w0, y0) against the projection of the relaxation of `kind` onto
/// (w, y) and against the convex hull of the ensemble's graph.
inline SharpnessReport check_sharpness_1d(const TreeEnsemble& ens, double w0, double y0, FormulationKind kind,
                                          const SolverConfig& cfg = {}, const BuildOptions& opts = {}) {
  if (ens.num_features != 1) throw DimensionError("sharpness check needs d = 1, got d = " + std::to_string(ens.num_features));
  if (uses_split_indicators(kind)) {
    throw UnsupportedFormulation(std::string("'") + to_string(kind) + "' has no feature variable to project onto");
  }
  SharpnessReport rep;
  MipModel m = relax(build(kind, ens, opts));
  std::vector<double> lo, hi;
  for (const Variable& v : m.variables()) {
    lo.push_back(v.lower);
    hi.push_back(v.upper);
  }
  const std::size_t w = m.id(names::w(0)), y = m.id(names::y());
  if (w0 < lo[w] - cfg.feas_tol || w0 > hi[w] + cfg.feas_tol) {
    rep.in_projection = false;
  } else {
    lo[w] = hi[w] = w0;
    lo[y] = hi[y] = y0;
    m.set_objective(ObjSense::Maximize, {});
    rep.in_projection = solve_lp_with_bounds(m, lo, hi, cfg).optimal();
  }
  rep.in_hull = detail::in_polygon(detail::convex_hull(graph_breakpoints_1d(ens)), {w0, y0}, 1e-9);
  return rep;
}

// ---------------------------------------------------------------------------
// Exhaustive vertex enumeration (tiny systems only)

inline constexpr std::size_t kMaxEnumerationVars = 12;

/// All vertices of the LP relaxation, found by solving every n x n subsystem
/// of rows and bounds. Throws SizeLimit above 12 variables or 2e6 subsets.
inline std::vector<std::vector<double>> enumerate_vertices(const MipModel& model, const SolverConfig& cfg = {}) {
  const std::size_t n = model.num_variables();
  if (n > kMaxEnumerationVars) throw SizeLimit("vertex enumeration is limited to 12 variables");
  std::vector<std::vector<double>> hyper;  // coefficients followed by rhs
  for (const Constraint& c : model.constraints()) {
    std::vector<double> row(n + 1, 0.0);
    for (const Term& t : c.terms) row[t.var] = t.coeff;
    row[n] = c.rhs;
    hyper.push_back(std::move(row));
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (double b : {model.variable(j).lower, model.variable(j).upper}) {
      if (!std::isfinite(b)) continue;
      std::vector<double> row(n + 1, 0.0);
      row[j] = 1.0;
      row[n] = b;
      hyper.push_back(std::move(row));
    }
  }
  if (detail::binomial(hyper.size(), n) > 2e6) throw SizeLimit("too many candidate bases");
  std::vector<std::vector<double>> out;
  if (hyper.size() < n) return out;
  std::vector<std::size_t> pick(n);
  for (std::size_t i = 0; i < n; ++i) pick[i] = i;
  do {
    // Gaussian elimination with partial pivoting on the chosen rows.
    std::vector<std::vector<double>> a;
    for (std::size_t i : pick) a.push_back(hyper[i]);
    bool singular = false;
    for (std::size_t c = 0; c < n && !singular; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c; r < n; ++r) {
        if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
      }
      if (std::abs(a[piv][c]) <= 1e-9) {
        singular = true;
        break;
      }
      std::swap(a[piv], a[c]);
      for (std::size_t r = 0; r < n; ++r) {
        if (r == c || a[r][c] == 0.0) continue;
        double f = a[r][c] / a[c][c];
        for (std::size_t k = c; k <= n; ++k) a[r][k] -= f * a[c][k];
      }
    }
    if (singular) continue;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = a[i][n] / a[i][i];
    bool feasible = true;
    for (std::size_t j = 0; j < n && feasible; ++j) {
      feasible = x[j] >= model.variable(j).lower - cfg.feas_tol && x[j] <= model.variable(j).upper + cfg.feas_tol;
    }
    for (const Constraint& c : model.constraints()) {
      if (!feasible) break;
      feasible = c.violation(x) <= cfg.feas_tol;
    }
    if (!feasible) continue;
    bool seen = std::any_of(out.begin(), out.end(), [&](const std::vector<double>& v) {
      for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(v[j] - x[j]) > 1e-7) return false;
      }
      return true;
    });
    if (!seen) out.push_back(std::move(x));
  } while (detail::next_combination(pick, hyper.size()));
  return out;
}

// ---------------------------------------------------------------------------
// Report serialization

inline nlohmann::json to_json(const GapReport& g) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"kind", to_string(g.kind)},         {"lp_status", to_string(g.lp_status)},
          {"mip_status", to_string(g.mip_status)}, {"lp_bound", num(g.lp_bound)},
          {"mip_opt", num(g.mip_opt)},         {"gap_percent", num(g.gap_percent)},
          {"nodes", g.nodes}};
}

inline nlohmann::json to_json(const ContainmentReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const RowViolation& v : r.rows) rows.push_back({{"row", v.name}, {"violation", v.violation}});
  return {{"contained", r.contained}, {"max_violation", r.max_violation}, {"rows", rows}};
}

inline nlohmann::json to_json(const ProbeReport& r) {
  return {{"solved", r.solved}, {"fractional", r.fractional}, {"failed", r.failed}, {"max_distance", r.max_distance}};
}

inline nlohmann::json to_json(const Lemma2Report& r) {
  return {{"parent_set", r.right_parent ? "right_parent" : "left_parent"},
          {"covering", r.covering},
          {"violation", r.violation},
          {"implied", r.implied}};
}

inline nlohmann::json to_json(const SharpnessReport& r) {
  return {{"in_projection", r.in_projection}, {"in_hull", r.in_hull}};
}

inline nlohmann::json to_json(const OracleResult& r) {
  return {{"value", r.value}, {"w", r.w}, {"cells", r.cells}, {"feasible_cells", r.feasible_cells}};
}

/// One-line human-readable rendering: `key=value` pairs in key order.
inline std::string to_text(const nlohmann::json& report) {
  std::string out;
  for (auto it = report.begin(); it != report.end(); ++it) {
    if (it->is_array() || it->is_object()) continue;
    if (!out.empty()) out += ' ';
    out += it.key() + '=' + (it->is_string() ? it->get<std::string>() : it->dump());
  }
  return out;
}

}  // namespace treemio

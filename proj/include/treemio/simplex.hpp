#pragma once

// Dense bounded-variable primal simplex.
//
// Every model variable is mapped onto one column that is either free or has
// lower bound 0 and an optional finite upper bound; nonbasic columns sit at
// a bound (free ones at 0). Phase 1 minimizes the sum of artificials,
// phase 2 maximizes the objective.
// Pricing is Dantzig's rule, switching to Bland's rule after a run of
// degenerate pivots so the method cannot cycle.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treemio/error.hpp"
#include "treemio/mip_model.hpp"

namespace treemio {

struct SolverConfig {
  double feas_tol = 1e-7;
  double int_tol = 1e-6;
  long max_lp_iters = 50'000;
  long max_bnb_nodes = 200'000;
  double time_limit_s = 0.0;  // 0: no limit
  /// Degenerate pivots in a row before pricing switches to Bland's rule.
  int bland_after = 50;
  bool always_bland = false;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit, NodeLimit, TimeLimit };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterationLimit: return "iteration_limit";
    case SolveStatus::NodeLimit: return "node_limit";
    case SolveStatus::TimeLimit: return "time_limit";
  }
  return "?";
}

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> values;  // indexed by model variable id
  // MIP only.
  double best_bound = std::numeric_limits<double>::quiet_NaN();
  long node_count = 0;
  // LP only.
  long iterations = 0;
  std::vector<std::size_t> basis;  // basic standard-form columns, by row

  [[nodiscard]] bool optimal() const { return status == SolveStatus::Optimal; }
  [[nodiscard]] bool has_solution() const { return !values.empty(); }
  [[nodiscard]] double value(const MipModel& m, std::string_view name) const { return values.at(m.id(name)); }
};

namespace detail {

/// How one model variable is expressed through standard-form columns.
struct ColumnMap {
  enum Kind { Fixed, Shifted, Mirrored, Free } kind = Fixed;
  double offset = 0.0;
  std::size_t col = 0;
};

class DenseSimplex {
 public:
  DenseSimplex(const MipModel& model, std::span<const double> lower, std::span<const double> upper,
               const SolverConfig& cfg)
      : model_(model), cfg_(cfg) {
    build(lower, upper);
  }

  SolveResult run() {
    SolveResult res;
    if (trivially_infeasible_) {
      res.status = SolveStatus::Infeasible;
      return res;
    }
    // Phase 1.
    if (num_artificial_ > 0) {
      std::vector<double> cost(ncols_, 0.0);
      for (std::size_t j = first_artificial_; j < ncols_; ++j) cost[j] = -1.0;
      load_costs(cost);
      SolveStatus st = iterate(res.iterations);
      if (st != SolveStatus::Optimal) {
        res.status = st;
        return res;
      }
      double infeas = 0.0;
      for (std::size_t r = 0; r < m_; ++r) {
        if (basis_[r] >= first_artificial_) infeas += beta_[r];
      }
      if (infeas > cfg_.feas_tol) {
        res.status = SolveStatus::Infeasible;
        return res;
      }
      for (std::size_t j = first_artificial_; j < ncols_; ++j) upper_[j] = 0.0;
      banned_from_ = first_artificial_;
    }
    // Phase 2.
    load_costs(cost_);
    SolveStatus st = iterate(res.iterations);
    res.status = st;
    if (st != SolveStatus::Optimal) return res;

    std::vector<double> colval(ncols_, 0.0);
    for (std::size_t j = 0; j < ncols_; ++j) colval[j] = state_[j] == AtUpper ? upper_[j] : 0.0;
    for (std::size_t r = 0; r < m_; ++r) colval[basis_[r]] = beta_[r];
    res.values.assign(model_.num_variables(), 0.0);
    for (std::size_t v = 0; v < maps_.size(); ++v) {
      const ColumnMap& cm = maps_[v];
      switch (cm.kind) {
        case ColumnMap::Fixed: res.values[v] = cm.offset; break;
        case ColumnMap::Shifted: res.values[v] = cm.offset + colval[cm.col]; break;
        case ColumnMap::Mirrored: res.values[v] = cm.offset - colval[cm.col]; break;
        case ColumnMap::Free: res.values[v] = colval[cm.col]; break;
      }
    }
    const Objective& obj = model_.objective();
    double z = obj.constant;
    for (const Term& t : obj.terms) z += t.coeff * res.values[t.var];
    res.objective = z;
    res.basis = basis_;
    return res;
  }

 private:
  enum State : unsigned char { Basic, AtLower, AtUpper };

  void build(std::span<const double> lower, std::span<const double> upper) {
    const std::size_t n = model_.num_variables();
    maps_.resize(n);
    std::vector<double> col_upper;
    std::vector<std::size_t> free_cols;
    for (std::size_t v = 0; v < n; ++v) {
      double lo = lower[v], hi = upper[v];
      ColumnMap& cm = maps_[v];
      if (lo > hi + cfg_.feas_tol) {
        trivially_infeasible_ = true;
        return;
      }
      if (std::isfinite(lo) && std::isfinite(hi) && hi - lo <= 0.0) {
        cm = {ColumnMap::Fixed, lo, 0};
      } else if (std::isfinite(lo)) {
        cm = {ColumnMap::Shifted, lo, col_upper.size()};
        col_upper.push_back(std::isfinite(hi) ? hi - lo : kInf);
      } else if (std::isfinite(hi)) {
        cm = {ColumnMap::Mirrored, hi, col_upper.size()};
        col_upper.push_back(kInf);
      } else {
        cm = {ColumnMap::Free, 0.0, col_upper.size()};
        free_cols.push_back(col_upper.size());
        col_upper.push_back(kInf);
      }
    }
    const std::size_t nstruct = col_upper.size();

    // Substituted rows: sum coeff*col (sense) rhs'.
    struct Row {
      std::vector<std::pair<std::size_t, double>> entries;
      Sense sense;
      double rhs;
    };
    std::vector<Row> rows;
    for (const Constraint& c : model_.constraints()) {
      Row r{{}, c.sense, c.rhs};
      for (const Term& t : c.terms) {
        const ColumnMap& cm = maps_[t.var];
        switch (cm.kind) {
          case ColumnMap::Fixed: r.rhs -= t.coeff * cm.offset; break;
          case ColumnMap::Shifted:
            r.rhs -= t.coeff * cm.offset;
            r.entries.emplace_back(cm.col, t.coeff);
            break;
          case ColumnMap::Mirrored:
            r.rhs -= t.coeff * cm.offset;
            r.entries.emplace_back(cm.col, -t.coeff);
            break;
          case ColumnMap::Free: r.entries.emplace_back(cm.col, t.coeff); break;
        }
      }
      if (r.entries.empty()) {
        // Row reads 0 (sense) rhs.
        bool ok = (c.sense == Sense::LessEqual && r.rhs >= -cfg_.feas_tol) ||
                  (c.sense == Sense::GreaterEqual && r.rhs <= cfg_.feas_tol) ||
                  (c.sense == Sense::Equal && std::abs(r.rhs) <= cfg_.feas_tol);
        if (!ok) {
          trivially_infeasible_ = true;
          return;
        }
        continue;
      }
      rows.push_back(std::move(r));
    }
    m_ = rows.size();

    // Column layout: structural | slacks | artificials.
    std::size_t nslack = 0;
    for (const Row& r : rows) {
      if (r.sense != Sense::Equal) ++nslack;
    }
    // Decide which rows need an artificial.
    std::vector<bool> needs_art(m_, false);
    std::vector<double> sign(m_, 1.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const Row& r = rows[i];
      if (r.sense == Sense::LessEqual) {
        needs_art[i] = r.rhs < 0.0;
      } else if (r.sense == Sense::GreaterEqual) {
        needs_art[i] = r.rhs > 0.0;
      } else {
        needs_art[i] = true;
      }
      // Row is scaled so the basic column (slack or artificial) has +1 and rhs >= 0.
      if (r.sense == Sense::LessEqual) {
        sign[i] = needs_art[i] ? -1.0 : 1.0;
      } else if (r.sense == Sense::GreaterEqual) {
        sign[i] = needs_art[i] ? 1.0 : -1.0;
      } else {
        sign[i] = r.rhs < 0.0 ? -1.0 : 1.0;
      }
      if (needs_art[i]) ++num_artificial_;
    }
    first_artificial_ = nstruct + nslack;
    ncols_ = first_artificial_ + num_artificial_;
    banned_from_ = ncols_;
    width_ = ncols_;
    tab_.assign(m_ * width_, 0.0);
    beta_.assign(m_, 0.0);
    basis_.assign(m_, 0);
    upper_.assign(ncols_, kInf);
    state_.assign(ncols_, AtLower);
    free_.assign(ncols_, false);
    for (std::size_t j : free_cols) free_[j] = true;
    for (std::size_t j = 0; j < nstruct; ++j) upper_[j] = col_upper[j];

    std::size_t slack = nstruct, art = first_artificial_;
    for (std::size_t i = 0; i < m_; ++i) {
      const Row& r = rows[i];
      double* row = &tab_[i * width_];
      for (auto [col, coeff] : r.entries) row[col] += sign[i] * coeff;
      beta_[i] = sign[i] * r.rhs;
      std::optional<std::size_t> slack_col;
      if (r.sense != Sense::Equal) {
        slack_col = slack++;
        row[*slack_col] = sign[i] * (r.sense == Sense::LessEqual ? 1.0 : -1.0);
      }
      if (needs_art[i]) {
        row[art] = 1.0;
        basis_[i] = art++;
      } else {
        basis_[i] = *slack_col;
      }
      state_[basis_[i]] = Basic;
    }

    cost_.assign(ncols_, 0.0);
    const Objective& obj = model_.objective();
    const double dir = obj.sense == ObjSense::Maximize ? 1.0 : -1.0;
    for (const Term& t : obj.terms) {
      const ColumnMap& cm = maps_[t.var];
      switch (cm.kind) {
        case ColumnMap::Fixed: break;
        case ColumnMap::Shifted: cost_[cm.col] += dir * t.coeff; break;
        case ColumnMap::Mirrored: cost_[cm.col] -= dir * t.coeff; break;
        case ColumnMap::Free: cost_[cm.col] += dir * t.coeff; break;
      }
    }
  }

  void load_costs(const std::vector<double>& cost) {
    reduced_ = cost;
    for (std::size_t r = 0; r < m_; ++r) {
      double cb = cost[basis_[r]];
      if (cb == 0.0) continue;
      const double* row = &tab_[r * width_];
      for (std::size_t j = 0; j < ncols_; ++j) reduced_[j] -= cb * row[j];
    }
    for (std::size_t r = 0; r < m_; ++r) reduced_[basis_[r]] = 0.0;
  }

  SolveStatus iterate(long& iterations) {
    constexpr double kPivotTol = 1e-7;
    constexpr double kCostTol = 1e-9;
    constexpr double kHarrisTol = 1e-9;
    int degenerate_run = 0;
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::size_t> nz;
    while (true) {
      if (iterations >= cfg_.max_lp_iters) return SolveStatus::IterationLimit;
      if (cfg_.time_limit_s > 0.0 && (iterations & 63) == 0) {
        std::chrono::duration<double> el = std::chrono::steady_clock::now() - start;
        if (el.count() > cfg_.time_limit_s) return SolveStatus::TimeLimit;
      }
      const bool bland = cfg_.always_bland || degenerate_run >= cfg_.bland_after;

      // Entering column.
      std::size_t q = ncols_;
      double best = 0.0;
      for (std::size_t j = 0; j < banned_from_; ++j) {
        if (state_[j] == Basic) continue;
        double dj = reduced_[j];
        double gain = 0.0;
        if (state_[j] == AtLower && (dj > kCostTol || (free_[j] && dj < -kCostTol))) gain = std::abs(dj);
        if (state_[j] == AtUpper && dj < -kCostTol) gain = -dj;
        if (gain <= 0.0) continue;
        if (upper_[j] == 0.0) continue;
        if (bland) {
          q = j;
          break;
        }
        if (gain > best) {
          best = gain;
          q = j;
        }
      }
      if (q == ncols_) return SolveStatus::Optimal;
      const double dir = state_[q] == AtUpper || (free_[q] && reduced_[q] < 0.0) ? -1.0 : 1.0;

      // Ratio test; t_max is how far column q moves. Dantzig steps use the
      // two-pass Harris test (largest pivot among rows blocking within
      // kHarrisTol); Bland steps use the plain minimum ratio, lowest index.
      double t_max = upper_[q];
      std::size_t leave = m_;
      bool leave_to_upper = false;
      auto ratio = [&](std::size_t r, double alpha, double slack, bool& to_upper) {
        if (alpha > kPivotTol) {
          if (free_[basis_[r]]) return kInf;
          to_upper = false;
          return (std::max(beta_[r], 0.0) + slack) / alpha;
        }
        if (alpha < -kPivotTol && std::isfinite(upper_[basis_[r]])) {
          to_upper = true;
          return (std::max(upper_[basis_[r]] - beta_[r], 0.0) + slack) / -alpha;
        }
        return kInf;
      };
      if (bland) {
        for (std::size_t r = 0; r < m_; ++r) {
          bool to_upper = false;
          double limit = ratio(r, tab_[r * width_ + q] * dir, 0.0, to_upper);
          if (limit < t_max || (limit == t_max && leave != m_ && basis_[r] < basis_[leave])) {
            t_max = limit;
            leave = r;
            leave_to_upper = to_upper;
          }
        }
      } else {
        double bound = upper_[q];
        for (std::size_t r = 0; r < m_; ++r) {
          bool to_upper = false;
          bound = std::min(bound, ratio(r, tab_[r * width_ + q] * dir, kHarrisTol, to_upper));
        }
        double best_alpha = 0.0;
        for (std::size_t r = 0; r < m_ && std::isfinite(bound); ++r) {
          const double alpha = tab_[r * width_ + q] * dir;
          bool to_upper = false;
          double limit = ratio(r, alpha, 0.0, to_upper);
          if (limit <= bound && std::abs(alpha) > best_alpha) {
            best_alpha = std::abs(alpha);
            t_max = limit;
            leave = r;
            leave_to_upper = to_upper;
          }
        }
        if (leave == m_) t_max = upper_[q];
        if (leave != m_ && upper_[q] <= t_max) {
          t_max = upper_[q];
          leave = m_;
        }
      }
      if (!std::isfinite(t_max)) return SolveStatus::Unbounded;
      ++iterations;
      degenerate_run = t_max <= 1e-12 ? degenerate_run + 1 : 0;

      // Move basic values.
      if (t_max != 0.0) {
        for (std::size_t r = 0; r < m_; ++r) beta_[r] -= tab_[r * width_ + q] * dir * t_max;
      }
      if (leave == m_) {
        state_[q] = state_[q] == AtLower ? AtUpper : AtLower;  // bound flip
        continue;
      }
      const double entering_value = (state_[q] == AtUpper ? upper_[q] : 0.0) + dir * t_max;
      const std::size_t out = basis_[leave];
      state_[out] = leave_to_upper ? AtUpper : AtLower;
      pivot(leave, q, nz);
      basis_[leave] = q;
      state_[q] = Basic;
      beta_[leave] = entering_value;
    }
  }

  void pivot(std::size_t pr, std::size_t pc, std::vector<std::size_t>& nz) {
    double* prow = &tab_[pr * width_];
    const double inv = 1.0 / prow[pc];
    nz.clear();
    for (std::size_t j = 0; j < ncols_; ++j) {
      if (prow[j] != 0.0) {
        prow[j] *= inv;
        nz.push_back(j);
      }
    }
    prow[pc] = 1.0;
    for (std::size_t r = 0; r < m_; ++r) {
      if (r == pr) continue;
      double* row = &tab_[r * width_];
      const double f = row[pc];
      if (f == 0.0) continue;
      for (std::size_t j : nz) row[j] -= f * prow[j];
      row[pc] = 0.0;
    }
    const double f = reduced_[pc];
    if (f != 0.0) {
      for (std::size_t j : nz) reduced_[j] -= f * prow[j];
      reduced_[pc] = 0.0;
    }
  }

  const MipModel& model_;
  const SolverConfig& cfg_;
  std::vector<ColumnMap> maps_;
  bool trivially_infeasible_ = false;
  std::size_t m_ = 0, ncols_ = 0, width_ = 0;
  std::size_t first_artificial_ = 0, num_artificial_ = 0, banned_from_ = 0;
  std::vector<double> tab_, beta_, upper_, cost_, reduced_;
  std::vector<std::size_t> basis_;
  std::vector<State> state_;
  std::vector<bool> free_;  // column has no lower bound; nonbasic value 0
};

}  // namespace detail

/// Solves the LP over `model` with the given variable bounds; integrality
/// is ignored.
inline SolveResult solve_lp_with_bounds(const MipModel& model, std::span<const double> lower,
                                        std::span<const double> upper, const SolverConfig& cfg = {}) {
  detail::DenseSimplex simplex(model, lower, upper, cfg);
  return simplex.run();
}

/// Solves a model without binaries. Returns a basic optimal solution.
inline SolveResult solve_lp(const MipModel& model, const SolverConfig& cfg = {}) {
  if (model.num_binaries() > 0) throw Error("solve_lp needs a relaxed model; call relax() first");
  std::vector<double> lo, hi;
  for (const Variable& v : model.variables()) {
    lo.push_back(v.lower);
    hi.push_back(v.upper);
  }
  return solve_lp_with_bounds(model, lo, hi, cfg);
}

}  // namespace treemio

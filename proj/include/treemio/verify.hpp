#pragma once

// Verification suites over fixtures and seeded random instances. Each suite
// returns named checks; the CLI and the acceptance runner print them.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "treemio/analysis.hpp"
#include "treemio/bench.hpp"
#include "treemio/fixtures.hpp"
#include "treemio/formulations.hpp"
#include "treemio/solver.hpp"

namespace treemio {

struct Check {
  std::string label;
  bool pass = false;
  std::string detail;
};

struct SuiteResult {
  std::string name;
  std::vector<Check> checks;
  double seconds = 0.0;

  [[nodiscard]] bool pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
  void add(std::string label, bool ok, std::string detail = {}) {
    checks.push_back({std::move(label), ok, std::move(detail)});
  }
};

inline constexpr std::uint64_t kDefaultSeed = 20240601;

namespace detail {

template <typename F>
SuiteResult timed_suite(std::string name, F&& body) {
  SuiteResult r;
  r.name = std::move(name);
  auto t0 = std::chrono::steady_clock::now();
  body(r);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline std::string fmt(double v) {
  std::ostringstream o;
  o.precision(10);
  o << v;
  return o.str();
}

}  // namespace detail

/// Every printed fractional point of the fixtures is a vertex of its relaxation.
inline SuiteResult verify_examples() {
  return detail::timed_suite("examples", [](SuiteResult& r) {
    for (std::string_view name : kFixtureNames) {
      Fixture f = reference_fixture(name);
      for (const ReferencePoint& p : f.vertices) {
        MipModel m = relax(build_for(f, p.kind));
        bool ok = is_vertex(m, complete_point(m, p.values));
        r.add(std::string(name) + ": " + p.label, ok);
      }
    }
  });
}

// Random instances used by several suites.
inline TreeEnsemble single_tree_instance(int i, std::uint64_t seed) {
  return make_random_ensemble(1 + i % 5, 1, 2 + i % 3, seed + static_cast<std::uint64_t>(i));
}
inline TreeEnsemble one_d_instance(int i, std::uint64_t seed) {
  return make_random_forest(1, 1 + i % 5, 2 + i % 3, seed + static_cast<std::uint64_t>(i));
}

/// Random-objective probes: Q^proj of single trees and Q^expset of 1-D
/// ensembles have no fractional optimum.
inline SuiteResult verify_ideal(std::uint64_t seed, int instances = 10, int objectives = 200) {
  return detail::timed_suite("ideal", [&](SuiteResult& r) {
    int frac_proj = 0, frac_exp = 0, failed = 0;
    for (int i = 0; i < instances; ++i) {
      TreeEnsemble ens = single_tree_instance(i, seed);
      ProbeReport p = probe_integrality(build_projected(ens), {Role::Z}, objectives, seed + 7 * i);
      frac_proj += p.fractional;
      failed += p.failed;
    }
    r.add("projected, single trees: fractional optima", frac_proj == 0 && failed == 0,
          std::to_string(frac_proj) + " fractional, " + std::to_string(failed) + " failed LPs over " +
              std::to_string(instances * objectives) + " objectives");
    failed = 0;
    for (int i = 0; i < instances; ++i) {
      TreeEnsemble ens = one_d_instance(i, seed);
      ProbeReport p = probe_integrality(build(FormulationKind::Expset, ens), {Role::X, Role::Z}, objectives, seed + 11 * i);
      frac_exp += p.fractional;
      failed += p.failed;
    }
    r.add("expset, 1-D ensembles: fractional optima", frac_exp == 0 && failed == 0,
          std::to_string(frac_exp) + " fractional, " + std::to_string(failed) + " failed LPs over " +
              std::to_string(instances * objectives) + " objectives");
  });
}

/// Block matrices of small 1-D ensembles are totally unimodular up to order 9.
inline SuiteResult verify_tu(std::uint64_t seed, int instances = 5, int max_order = 9) {
  return detail::timed_suite("tu", [&](SuiteResult& r) {
    for (int i = 0; i < instances; ++i) {
      TreeEnsemble ens = make_random_forest(1, 1 + i % 2, 2, seed + 100 + static_cast<std::uint64_t>(i), 16);
      SplitIndex index = build_split_index(ens);
      IntMatrix a = expset_tu_matrix(ens, index);
      bool ok = check_tu(a, max_order);
      r.add("1-D ensemble " + std::to_string(i) + " (T=" + std::to_string(ens.size()) + ")", ok,
            std::to_string(a.size()) + "x" + std::to_string(a.empty() ? 0 : a[0].size()) + " matrix");
    }
  });
}

/// Q^expset and Q^elbow sit inside Q^misic; Q^misic is not inside Q^expset on fig3a.
inline SuiteResult verify_containment(std::uint64_t seed, int instances = 10) {
  return detail::timed_suite("containment", [&](SuiteResult& r) {
    std::vector<std::pair<std::string, TreeEnsemble>> cases;
    cases.emplace_back("fig3a", reference_fixture("fig3a").ensemble);
    cases.emplace_back("fig3b", reference_fixture("fig3b").ensemble);
    for (int i = 0; i < instances; ++i) {
      cases.emplace_back("random " + std::to_string(i),
                         make_random_forest(1 + i % 3, 1 + i % 2, 3, seed + 200 + static_cast<std::uint64_t>(i)));
    }
    for (const auto& [label, ens] : cases) {
      SplitIndex index = build_split_index(ens);
      MipModel misic = build_misic(ens, index);
      ContainmentReport e = check_containment(build_expset(ens, index), misic);
      ContainmentReport l = check_containment(add_elbow(misic, ens, index), misic);
      r.add(label + ": expset inside misic", e.contained, "max violation " + detail::fmt(e.max_violation));
      r.add(label + ": elbow inside misic", l.contained, "max violation " + detail::fmt(l.max_violation));
    }
    const TreeEnsemble ens = reference_fixture("fig3a").ensemble;
    SplitIndex index = build_split_index(ens);
    ContainmentReport rev = check_containment(build_misic(ens, index), build_expset(ens, index));
    r.add("fig3a: misic not inside expset", rev.max_violation > 1e-6,
          "reverse violation " + detail::fmt(rev.max_violation));
  });
}

/// Ex3 graph points against projection and hull.
inline SuiteResult verify_sharp() {
  return detail::timed_suite("sharp", [](SuiteResult& r) {
    Fixture f = reference_fixture("ex3");
    for (const GraphPoint& p : f.graph_points) {
      SharpnessReport s = check_sharpness_1d(f.ensemble, p.w, p.y, FormulationKind::Projected);
      r.add("ex3 point (" + detail::fmt(p.w) + ", " + detail::fmt(p.y) + ")",
            s.in_projection == p.in_projection && s.in_hull == p.in_hull,
            std::string("in_projection=") + (s.in_projection ? "true" : "false") +
                " in_hull=" + (s.in_hull ? "true" : "false"));
    }
  });
}

/// Nested-split implication holds on elbow_segment and fails on fig3b.
inline SuiteResult verify_lemma2() {
  return detail::timed_suite("lemma2", [](SuiteResult& r) {
    {
      Fixture f = reference_fixture("elbow_segment");
      SplitIndex index = build_split_index(f.ensemble);
      std::size_t s = *index.find(0, 0, 2.0), sp = *index.find(0, 0, 5.0);
      Lemma2Report rep = check_implication_lemma2(f.ensemble, index, s, sp);
      r.add("elbow_segment: implied", rep.covering && rep.violation <= 1e-7,
            "violation " + detail::fmt(rep.violation));
    }
    {
      Fixture f = reference_fixture("fig3b");
      SplitIndex index = build_split_index(f.ensemble);
      std::size_t s = *index.find(0, 1, 4.0), sp = *index.find(0, 1, 2.0);
      Lemma2Report rep = check_implication_lemma2(f.ensemble, index, s, sp);
      r.add("fig3b: not implied", !rep.covering && rep.violation > 1e-4, "violation " + detail::fmt(rep.violation));
    }
  });
}

/// MIP optima of all eight formulations equal the cell-enumeration optimum.
inline SuiteResult verify_oracle(std::uint64_t seed, int instances = 20, int depth = 4) {
  return detail::timed_suite("oracle", [&](SuiteResult& r) {
    for (std::string_view name : kFixtureNames) {
      Fixture f = reference_fixture(name);
      OracleResult o = oracle_optimum(f.ensemble, f.constraints);
      int bad = 0;
      for (FormulationKind k : kAllKinds) {
        if (uses_split_indicators(k) && !f.constraints.empty()) continue;
        SolveResult s = solve_mip(build_for(f, k));
        if (!s.optimal() || std::abs(s.objective - o.value) > 1e-6) ++bad;
      }
      r.add("fixture " + std::string(name), bad == 0, "oracle " + detail::fmt(o.value));
    }
    for (int d = 1; d <= 3; ++d) {
      for (int T : {1, 2, 4}) {
        int bad = 0, solves = 0;
        double worst = 0.0;
        for (int s = 0; s < instances; ++s) {
          TreeEnsemble ens = make_random_forest(d, T, depth, seed + static_cast<std::uint64_t>(s));
          SplitIndex index = build_split_index(ens);
          double o = oracle_optimum(ens).value;
          for (FormulationKind k : kAllKinds) {
            SolveResult res = solve_mip(build(k, ens, index));
            ++solves;
            double err = res.optimal() ? std::abs(res.objective - o) : kInf;
            worst = std::max(worst, err);
            if (err > 1e-6) ++bad;
          }
        }
        r.add("d=" + std::to_string(d) + " T=" + std::to_string(T), bad == 0,
              std::to_string(solves) + " solves, " + std::to_string(bad) + " mismatches, max error " + detail::fmt(worst));
      }
    }
  });
}

/// LP-gap ordering over a bench grid of the split-indicator formulations.
inline SuiteResult verify_gaps(std::uint64_t seed, int seeds = 10) {
  return detail::timed_suite("gaps", [&](SuiteResult& r) {
    BenchGrid grid;
    grid.seeds = seeds;
    grid.base_seed = seed;
    grid.kinds = {FormulationKind::Misic, FormulationKind::Expset, FormulationKind::Elbow, FormulationKind::ExpsetElbow};
    std::vector<BenchRow> rows = run_bench(grid);
    auto bad = check_gap_ordering(rows);
    std::string detail = std::to_string(rows.size()) + " rows";
    if (!bad.empty()) {
      detail += "; first violation: seed " + std::to_string(bad[0].seed) + " d=" + std::to_string(bad[0].d) +
                " T=" + std::to_string(bad[0].T) + " " + bad[0].what;
    }
    r.add("gap ordering on every row", bad.empty(), detail);
  });
}

/// Projected model sizes on generated single trees.
inline SuiteResult verify_sizes(std::uint64_t seed, int per_d = 4) {
  return detail::timed_suite("sizes", [&](SuiteResult& r) {
    int bad = 0, trees = 0;
    for (int d = 1; d <= 5; ++d) {
      for (int i = 0; i < per_d; ++i) {
        TreeEnsemble ens = make_random_ensemble(d, 1, 1 + i % 4, seed + 300 + static_cast<std::uint64_t>(10 * d + i));
        ModelStats st = model_stats(build_projected(ens));
        const std::size_t p = ens.trees[0].num_leaves();
        const auto du = static_cast<std::size_t>(d);
        ++trees;
        if (st.num_constraints != 2 * du + 1 || st.num_variables != p + du + 1) ++bad;
      }
    }
    r.add("2d+1 rows and p+d+1 variables", bad == 0, std::to_string(trees) + " trees, " + std::to_string(bad) + " off");
    TreeEnsemble five = make_random_ensemble(5, 1, 4, seed + 999);
    ModelStats st = model_stats(build_projected(five));
    r.add("d=5 tree: 11 constraints", st.num_constraints == 11, "constraints: " + std::to_string(st.num_constraints));
  });
}

inline constexpr std::string_view kSuiteNames[] = {"ideal", "containment", "tu", "sharp", "lemma2", "examples",
                                                   "oracle", "gaps", "sizes"};

inline SuiteResult run_suite(std::string_view name, std::uint64_t seed) {
  if (name == "examples") return verify_examples();
  if (name == "ideal") return verify_ideal(seed);
  if (name == "tu") return verify_tu(seed);
  if (name == "containment") return verify_containment(seed);
  if (name == "sharp") return verify_sharp();
  if (name == "lemma2") return verify_lemma2();
  if (name == "oracle") return verify_oracle(seed);
  if (name == "gaps") return verify_gaps(seed);
  if (name == "sizes") return verify_sizes(seed);
  throw Error("unknown verification suite '" + std::string(name) + "'");
}

}  // namespace treemio

#pragma once

// Synthetic data, CART training, random ensembles and hand-built reference
// ensembles with known fractional vertices.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treemio/error.hpp"
#include "treemio/formulations.hpp"
#include "treemio/rng.hpp"
#include "treemio/solver.hpp"
#include "treemio/tree_model.hpp"

namespace treemio {

struct Dataset {
  std::vector<std::vector<double>> X;  // n rows of d features
  std::vector<double> r;
  std::uint64_t seed = 0;
  std::vector<Bounds> domain;

  [[nodiscard]] std::size_t size() const { return r.size(); }
  [[nodiscard]] int num_features() const { return static_cast<int>(domain.size()); }
};

/// r = sum_j (1 - |w_j|) + d * eps with w ~ U(-1,1)^d and eps ~ U(0,1)
/// (eps = 0 without noise).
inline Dataset gen_triangle_data(int d, int n, bool noise, std::uint64_t seed) {
  if (d < 1) throw DimensionError("triangle data needs d >= 1");
  if (n < 2) throw Error("triangle data needs n >= 2");
  Pcg32 rng(seed);
  Dataset data;
  data.seed = seed;
  data.domain.assign(static_cast<std::size_t>(d), Bounds{-1.0, 1.0});
  for (int k = 0; k < n; ++k) {
    std::vector<double> row;
    double r = 0.0;
    for (int j = 0; j < d; ++j) {
      double w = rng.uniform(-1.0, 1.0);
      row.push_back(w);
      r += 1.0 - std::abs(w);
    }
    double eps = noise ? rng.uniform01() : 0.0;
    data.X.push_back(std::move(row));
    data.r.push_back(r + d * eps);
  }
  return data;
}

struct CartReport {
  /// Set when every target was identical and a split was allowed.
  bool degenerate = false;
};

namespace detail {

class CartBuilder {
 public:
  CartBuilder(const Dataset& data, int max_depth, int min_leaf) : data_(data), max_depth_(max_depth), min_leaf_(min_leaf) {}

  DecisionTree run(std::vector<std::size_t> rows) {
    grow(std::move(rows), 0);
    tree_.root = 0;
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  double mean(const std::vector<std::size_t>& rows) const {
    double s = 0.0;
    for (std::size_t k : rows) s += data_.r[k];
    return s / static_cast<double>(rows.size());
  }

  // Best SSE reduction over midpoints of consecutive distinct values;
  // ties keep the earliest (feature, threshold).
  Split best_split(const std::vector<std::size_t>& rows) const {
    const std::size_t n = rows.size();
    double total = 0.0, total_sq = 0.0;
    for (std::size_t k : rows) {
      total += data_.r[k];
      total_sq += data_.r[k] * data_.r[k];
    }
    const double parent_sse = total_sq - total * total / static_cast<double>(n);
    Split best;
    std::vector<std::size_t> order = rows;
    for (int f = 0; f < data_.num_features(); ++f) {
      const auto fi = static_cast<std::size_t>(f);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return data_.X[a][fi] < data_.X[b][fi]; });
      double left = 0.0, left_sq = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const double r = data_.r[order[i]];
        left += r;
        left_sq += r * r;
        const double a = data_.X[order[i]][fi], b = data_.X[order[i + 1]][fi];
        if (!(a < b)) continue;
        const auto nl = static_cast<double>(i + 1), nr = static_cast<double>(n - i - 1);
        if (nl < min_leaf_ || nr < min_leaf_) continue;
        const double right = total - left, right_sq = total_sq - left_sq;
        const double sse = (left_sq - left * left / nl) + (right_sq - right * right / nr);
        const double gain = parent_sse - sse;
        if (gain > best.gain + 1e-12 * std::max(1.0, parent_sse)) best = {f, 0.5 * (a + b), gain};
      }
    }
    return best;
  }

  int grow(std::vector<std::size_t> rows, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(Node{id, true, -1, 0.0, -1, -1, mean(rows)});
    if (depth >= max_depth_ || rows.size() < 2 * static_cast<std::size_t>(min_leaf_)) return id;
    Split s = best_split(rows);
    if (s.feature < 0) return id;
    std::vector<std::size_t> lrows, rrows;
    for (std::size_t k : rows) {
      (data_.X[k][static_cast<std::size_t>(s.feature)] <= s.threshold ? lrows : rrows).push_back(k);
    }
    int l = grow(std::move(lrows), depth + 1);
    int r = grow(std::move(rrows), depth + 1);
    Node& n = tree_.nodes[static_cast<std::size_t>(id)];
    n.leaf = false;
    n.feature = s.feature;
    n.threshold = s.threshold;
    n.left = l;
    n.right = r;
    n.value = std::numeric_limits<double>::quiet_NaN();
    return id;
  }

  const Dataset& data_;
  int max_depth_;
  int min_leaf_;
  DecisionTree tree_;
};

inline DecisionTree train_cart_rows(const Dataset& data, std::vector<std::size_t> rows, int max_depth, int min_leaf,
                                    CartReport* report) {
  if (min_leaf < 1) throw Error("min_leaf must be at least 1");
  if (rows.size() < 2 * static_cast<std::size_t>(min_leaf)) throw Error("too few rows for min_leaf");
  const double first = data.r[rows.front()];
  const bool constant = std::all_of(rows.begin(), rows.end(), [&](std::size_t k) { return data.r[k] == first; });
  if (report) report->degenerate = constant && max_depth > 0;
  return CartBuilder(data, max_depth, min_leaf).run(std::move(rows));
}

}  // namespace detail

/// Greedy variance-reduction regression tree. Node ids follow preorder.
inline DecisionTree train_cart(const Dataset& data, int max_depth, int min_leaf = 1, CartReport* report = nullptr) {
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0);
  return detail::train_cart_rows(data, std::move(rows), max_depth, min_leaf, report);
}

/// T trees on bootstrap resamples of size n, equal weights 1/T.
inline TreeEnsemble train_forest(const Dataset& data, int T, int max_depth, std::uint64_t seed) {
  if (T < 1) throw Error("forest needs T >= 1");
  Pcg32 rng(seed);
  TreeEnsemble ens;
  ens.num_features = data.num_features();
  ens.domain = data.domain;
  const auto n = static_cast<std::uint32_t>(data.size());
  for (int t = 0; t < T; ++t) {
    std::vector<std::size_t> rows(n);
    for (auto& k : rows) k = rng.below(n);
    ens.trees.push_back(detail::train_cart_rows(data, std::move(rows), max_depth, 1, nullptr));
  }
  ens.weights.assign(static_cast<std::size_t>(T), 1.0 / T);
  return ens;
}

/// Ensemble of T trees, each fit to its own noisy triangle sample of size
/// `n`. Independent samples make thresholds distinct across trees almost
/// surely (see README, "Boundary semantics").
inline TreeEnsemble make_random_ensemble(int d, int T, int depth, std::uint64_t seed, int n = 32) {
  if (T < 1) throw Error("ensemble needs T >= 1");
  TreeEnsemble ens;
  ens.num_features = d;
  for (int t = 0; t < T; ++t) {
    Dataset data = gen_triangle_data(d, n, true, seed * 1000003ULL + static_cast<std::uint64_t>(t));
    ens.domain = data.domain;
    ens.trees.push_back(train_cart(data, depth, 1));
  }
  ens.weights.assign(static_cast<std::size_t>(T), 1.0 / T);
  return ens;
}

/// Bootstrap random forest on one shared triangle sample.
inline TreeEnsemble make_random_forest(int d, int T, int depth, std::uint64_t seed, int n = 32) {
  return train_forest(gen_triangle_data(d, n, true, seed), T, depth, seed ^ 0x9e3779b97f4a7c15ULL);
}

// ---------------------------------------------------------------------------
// Reference fixtures

/// Printed coordinates of a fractional vertex; output variables (y_t, y)
/// are filled in by `complete_point`.
struct ReferencePoint {
  std::string label;
  FormulationKind kind;
  NamedPoint values;
};

/// A (w, y) pair with its expected membership in the relaxation's
/// projection and in the convex hull of the graph.
struct GraphPoint {
  double w = 0.0;
  double y = 0.0;
  bool in_projection = false;
  bool in_hull = false;
};

struct Fixture {
  std::string name;
  std::string description;
  TreeEnsemble ensemble;
  std::vector<FeatureRow> constraints;
  BuildOptions options;
  std::vector<ReferencePoint> vertices;
  std::vector<GraphPoint> graph_points;
  std::optional<double> optimum;  // unconstrained maximum of the ensemble
};

namespace detail {

/// Nested tree description; leaves carry a value, splits two children.
struct TreeSpec {
  int feature = -1;
  double threshold = 0.0;
  double value = 0.0;
  std::vector<TreeSpec> kids;
};

inline TreeSpec leaf(double v) { return {-1, 0.0, v, {}}; }
inline TreeSpec split(int feature, double threshold, TreeSpec l, TreeSpec r) {
  return {feature, threshold, 0.0, {std::move(l), std::move(r)}};
}

inline int emit(const TreeSpec& spec, DecisionTree& tree) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(Node{id, spec.kids.empty(), spec.feature, spec.threshold, -1, -1,
                            spec.kids.empty() ? spec.value : std::numeric_limits<double>::quiet_NaN()});
  if (!spec.kids.empty()) {
    int l = emit(spec.kids[0], tree);
    int r = emit(spec.kids[1], tree);
    tree.nodes[static_cast<std::size_t>(id)].left = l;
    tree.nodes[static_cast<std::size_t>(id)].right = r;
  }
  return id;
}

inline DecisionTree make_tree(const TreeSpec& spec) {
  DecisionTree tree;
  emit(spec, tree);
  return tree;
}

inline TreeEnsemble make_ensemble(std::vector<TreeSpec> specs, std::vector<Bounds> domain) {
  TreeEnsemble ens;
  ens.num_features = static_cast<int>(domain.size());
  ens.domain = std::move(domain);
  for (const TreeSpec& s : specs) ens.trees.push_back(make_tree(s));
  ens.weights.assign(ens.trees.size(), 1.0 / static_cast<double>(ens.trees.size()));
  return ens;
}

// One feature, w <= 5 then w <= 2 on the left branch.
inline TreeEnsemble segment_tree() {
  return make_ensemble({split(0, 5.0, split(0, 2.0, leaf(1), leaf(2)), leaf(3))}, {{0.0, 10.0}});
}

inline Fixture fixture_ex1() {
  Fixture f;
  f.name = "ex1";
  f.description = "single 1-D tree, w <= 5 then w <= 2; misic relaxation has a fractional vertex";
  f.ensemble = segment_tree();
  // x_1_1 is the w <= 2 indicator, x_1_2 the w <= 5 indicator.
  f.vertices.push_back({"misic fractional vertex", FormulationKind::Misic,
                        {{"z_1_1", 0.0}, {"z_1_2", 0.5}, {"z_1_3", 0.5}, {"x_1_1", 0.5}, {"x_1_2", 0.5}}});
  f.optimum = 3.0;
  return f;
}

inline Fixture fixture_ex2() {
  Fixture f;
  f.name = "ex2";
  f.description = "single 1-D tree, w <= 5 then w <= 2, arc big-M formulation with M = 15";
  f.ensemble = segment_tree();
  f.options.bigm.fixed_m = 15.0;
  f.vertices.push_back({"bigm fractional vertex", FormulationKind::BigM,
                        {{"w1", 0.0},
                         {"a_1_0_l", 1.0 / 3.0},
                         {"a_1_0_r", 2.0 / 3.0},
                         {"a_1_1_l", 1.0 / 3.0},
                         {"a_1_1_r", 0.0}}});
  f.optimum = 3.0;
  return f;
}

inline Fixture fixture_ex3() {
  Fixture f;
  f.name = "ex3";
  f.description = "two 1-D trees on [0,3] with weights 1/2; the union formulation is neither ideal nor sharp";
  f.ensemble = make_ensemble({split(0, 1.0, leaf(1), leaf(4)), split(0, 2.0, leaf(2), leaf(3))}, {{0.0, 3.0}});
  f.vertices.push_back({"projected fractional vertex", FormulationKind::Projected,
                        {{"w1", 1.0}, {"z_1_1", 0.0}, {"z_1_2", 1.0}, {"z_2_1", 0.5}, {"z_2_2", 0.5}}});
  f.graph_points = {{1.0, 3.25, true, false}, {2.5, 3.5, true, true}};
  f.optimum = 3.5;
  return f;
}

inline Fixture fixture_ex4() {
  Fixture f;
  f.name = "ex4";
  f.description = "2-D tree on [0,3]^2 with the side constraint w1 + w2 <= 3";
  f.ensemble = make_ensemble({split(0, 2.0, split(1, 2.0, leaf(1), leaf(2)), leaf(3))}, {{0.0, 3.0}, {0.0, 3.0}});
  f.constraints.push_back({{1.0, 1.0}, Sense::LessEqual, 3.0});
  f.vertices.push_back({"projected vertex under w1 + w2 <= 3", FormulationKind::Projected,
                        {{"w1", 2.0 / 3.0},
                         {"w2", 7.0 / 3.0},
                         {"z_1_1", 2.0 / 3.0},
                         {"z_1_2", 0.0},
                         {"z_1_3", 1.0 / 3.0}}});
  f.optimum = 3.0;
  return f;
}

inline Fixture fixture_fig3a() {
  Fixture f;
  f.name = "fig3a";
  f.description = "2-D tree, w1 <= 5 then w2 <= 2 (left) and w2 <= 5 (right); misic has fractional vertices";
  f.ensemble = make_ensemble({split(0, 5.0, split(1, 2.0, leaf(1), leaf(2)), split(1, 5.0, leaf(3), leaf(4)))},
                             {{0.0, 10.0}, {0.0, 10.0}});
  const NamedPoint x{{"x_1_1", 0.5}, {"x_2_1", 0.5}, {"x_2_2", 0.5}};
  NamedPoint p1 = x, p2 = x;
  for (auto [name, v] : std::initializer_list<std::pair<const char*, double>>{
           {"z_1_1", 0.0}, {"z_1_2", 0.5}, {"z_1_3", 0.0}, {"z_1_4", 0.5}}) {
    p1[name] = v;
  }
  for (auto [name, v] : std::initializer_list<std::pair<const char*, double>>{
           {"z_1_1", 0.5}, {"z_1_2", 0.0}, {"z_1_3", 0.5}, {"z_1_4", 0.0}}) {
    p2[name] = v;
  }
  f.vertices.push_back({"misic fractional vertex (z2, z4)", FormulationKind::Misic, p1});
  f.vertices.push_back({"misic fractional vertex (z1, z3)", FormulationKind::Misic, p2});
  f.optimum = 4.0;
  return f;
}

inline Fixture fixture_fig3b() {
  Fixture f;
  f.name = "fig3b";
  f.description = "2-D tree, w1 <= 5 then nested w2 <= 2, w2 <= 4 on the right; expset has a fractional vertex";
  f.ensemble = make_ensemble({split(0, 5.0, leaf(1), split(1, 2.0, leaf(2), split(1, 4.0, leaf(3), leaf(4))))},
                             {{0.0, 10.0}, {0.0, 10.0}});
  f.vertices.push_back({"expset fractional vertex", FormulationKind::Expset,
                        {{"x_1_1", 0.5},
                         {"x_2_1", 0.5},
                         {"x_2_2", 0.5},
                         {"z_1_1", 0.5},
                         {"z_1_2", 0.0},
                         {"z_1_3", 0.5},
                         {"z_1_4", 0.0}}});
  f.optimum = 4.0;
  return f;
}

inline Fixture fixture_elbow_segment() {
  Fixture f = fixture_ex1();
  f.name = "elbow_segment";
  f.description = "single 1-D tree with nested splits on one feature; elbow rows follow from expset";
  f.vertices.clear();
  return f;
}

}  // namespace detail

inline constexpr std::string_view kFixtureNames[] = {"ex1", "ex2", "ex3", "ex4", "fig3a", "fig3b", "elbow_segment"};

inline Fixture reference_fixture(std::string_view name) {
  if (name == "ex1") return detail::fixture_ex1();
  if (name == "ex2") return detail::fixture_ex2();
  if (name == "ex3") return detail::fixture_ex3();
  if (name == "ex4") return detail::fixture_ex4();
  if (name == "fig3a") return detail::fixture_fig3a();
  if (name == "fig3b") return detail::fixture_fig3b();
  if (name == "elbow_segment") return detail::fixture_elbow_segment();
  throw UnknownFixture("unknown fixture '" + std::string(name) + "'");
}

/// Builds the relaxation or MIP a fixture point refers to, with the
/// fixture's side constraints and big-M option applied.
inline MipModel build_for(const Fixture& f, FormulationKind kind) {
  MipModel m = build(kind, f.ensemble, f.options);
  if (!uses_split_indicators(kind)) m = attach_constraints(std::move(m), f.constraints);
  return m;
}

}  // namespace treemio

#pragma once

// Builders turning a tree ensemble into each MIP formulation.
//
// Variable names (all indices 1-based):
//   w<i>            feature i                      y        ensemble output
//   y_<t>           output of tree t               z_<t>_<l> leaf l of tree t
//   x_<i>_<j>       w_i <= j-th smallest threshold of feature i
//   a_<t>_<v>_l/r   left/right arc out of node v (arena index) in tree t
//   wl_<t>_<l>_<i>  leaf copy of w_i,  yl_<t>_<l> leaf copy of y_t

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treemio/error.hpp"
#include "treemio/mip_model.hpp"
#include "treemio/tree_model.hpp"

namespace treemio {

enum class FormulationKind { Misic, BigM, UnionExt, Projected, Facet, Expset, Elbow, ExpsetElbow };

inline constexpr FormulationKind kAllKinds[] = {
    FormulationKind::Misic,  FormulationKind::BigM,   FormulationKind::UnionExt, FormulationKind::Projected,
    FormulationKind::Facet,  FormulationKind::Expset, FormulationKind::Elbow,    FormulationKind::ExpsetElbow,
};

inline const char* to_string(FormulationKind kind) {
  switch (kind) {
    case FormulationKind::Misic: return "misic";
    case FormulationKind::BigM: return "bigm";
    case FormulationKind::UnionExt: return "union_ext";
    case FormulationKind::Projected: return "projected";
    case FormulationKind::Facet: return "facet";
    case FormulationKind::Expset: return "expset";
    case FormulationKind::Elbow: return "elbow";
    case FormulationKind::ExpsetElbow: return "expset_elbow";
  }
  return "?";
}

inline std::optional<FormulationKind> parse_kind(std::string_view name) {
  for (FormulationKind k : kAllKinds) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

/// Kinds that encode the feature vector through threshold indicators x.
inline bool uses_split_indicators(FormulationKind kind) {
  return kind == FormulationKind::Misic || kind == FormulationKind::Expset || kind == FormulationKind::Elbow ||
         kind == FormulationKind::ExpsetElbow;
}

namespace names {
inline std::string w(int i) { return "w" + std::to_string(i + 1); }
inline std::string y() { return "y"; }
inline std::string y_tree(std::size_t t) { return "y_" + std::to_string(t + 1); }
inline std::string z(std::size_t t, int leaf) { return "z_" + std::to_string(t + 1) + "_" + std::to_string(leaf + 1); }
inline std::string x(int feature, int rank) { return "x_" + std::to_string(feature + 1) + "_" + std::to_string(rank); }
inline std::string arc(std::size_t t, int node, bool left) {
  return "a_" + std::to_string(t + 1) + "_" + std::to_string(node) + (left ? "_l" : "_r");
}
inline std::string w_leaf(std::size_t t, int leaf, int i) {
  return "wl_" + std::to_string(t + 1) + "_" + std::to_string(leaf + 1) + "_" + std::to_string(i + 1);
}
inline std::string y_leaf(std::size_t t, int leaf) {
  return "yl_" + std::to_string(t + 1) + "_" + std::to_string(leaf + 1);
}
}  // namespace names

namespace detail {

inline void require_bounded(const TreeEnsemble& ens, const char* what) {
  for (const Bounds& b : ens.domain) {
    if (!std::isfinite(b.lower) || !std::isfinite(b.upper)) {
      throw UnboundedDomain(std::string(what) + " needs a bounded domain");
    }
  }
}

inline std::vector<std::size_t> add_features(MipModel& m, const TreeEnsemble& ens) {
  std::vector<std::size_t> w;
  for (int i = 0; i < ens.num_features; ++i) {
    const Bounds& b = ens.domain[static_cast<std::size_t>(i)];
    w.push_back(m.add_variable(names::w(i), b.lower, b.upper, VarType::Continuous, Role::W));
  }
  return w;
}

inline std::vector<std::size_t> add_tree_outputs(MipModel& m, const TreeEnsemble& ens) {
  std::vector<std::size_t> yt;
  for (std::size_t t = 0; t < ens.size(); ++t) {
    yt.push_back(m.add_variable(names::y_tree(t), -kInf, kInf, VarType::Continuous, Role::YTree));
  }
  return yt;
}

/// y = sum_t weight_t y_t, and a default objective of maximizing y.
inline void add_ensemble_output(MipModel& m, const TreeEnsemble& ens, const std::vector<std::size_t>& yt) {
  std::size_t y = m.add_variable(names::y(), -kInf, kInf, VarType::Continuous, Role::Y);
  std::vector<Term> row{{y, 1.0}};
  for (std::size_t t = 0; t < yt.size(); ++t) row.push_back({yt[t], -ens.weights[t]});
  m.add_constraint("out", std::move(row), Sense::Equal, 0.0, RowKind::Output);
  m.set_objective(ObjSense::Maximize, {{y, 1.0}});
}

inline std::string row_name(std::string_view stem, std::size_t t, std::size_t k) {
  return std::string(stem) + "_" + std::to_string(t + 1) + "_" + std::to_string(k + 1);
}

inline std::vector<std::vector<std::size_t>> add_threshold_indicators(MipModel& m, const TreeEnsemble& ens,
                                                                      const SplitIndex& index) {
  std::vector<std::vector<std::size_t>> x(static_cast<std::size_t>(ens.num_features));
  for (int i = 0; i < ens.num_features; ++i) {
    for (int j = 1; j <= index.K(i); ++j) {
      x[static_cast<std::size_t>(i)].push_back(m.add_variable(names::x(i, j), 0.0, 1.0, VarType::Binary, Role::X));
    }
  }
  for (int i = 0; i < ens.num_features; ++i) {
    const auto& xi = x[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j + 1 < xi.size(); ++j) {
      m.add_constraint("ord_" + std::to_string(i + 1) + "_" + std::to_string(j + 1), {{xi[j], 1.0}, {xi[j + 1], -1.0}},
                       Sense::LessEqual, 0.0);
    }
  }
  return x;
}

/// Shared body of the threshold-indicator family; `expanded` selects
/// below/above sets instead of left/right.
inline MipModel build_indicator_model(const TreeEnsemble& ens, const SplitIndex& index, bool expanded) {
  require_valid(ens);
  MipModel m;
  m.tag = expanded ? "expset" : "misic";
  auto x = add_threshold_indicators(m, ens, index);
  auto yt = add_tree_outputs(m, ens);
  for (std::size_t t = 0; t < ens.size(); ++t) {
    const std::size_t p = index.num_leaves[t];
    std::vector<std::size_t> z;
    for (std::size_t l = 0; l < p; ++l) {
      z.push_back(m.add_variable(names::z(t, static_cast<int>(l)), 0.0, kInf, VarType::Continuous, Role::Z));
    }
    std::vector<Term> one;
    for (std::size_t l = 0; l < p; ++l) one.push_back({z[l], 1.0});
    m.add_constraint("choose_" + std::to_string(t + 1), std::move(one), Sense::Equal, 1.0);

    const auto leaves = ens.trees[t].leaves();
    std::vector<Term> score{{yt[t], 1.0}};
    for (std::size_t l = 0; l < p; ++l) score.push_back({z[l], -ens.trees[t].node(leaves[l]).value});
    m.add_constraint("score_" + std::to_string(t + 1), std::move(score), Sense::Equal, 0.0, RowKind::Output);

    std::size_t k = 0;
    for (std::size_t s : index.tree_splits[t]) {
      const SplitInfo& info = index.splits[s];
      std::size_t xs = x[static_cast<std::size_t>(info.feature)][static_cast<std::size_t>(info.rank - 1)];
      std::vector<Term> lo{{xs, -1.0}}, hi{{xs, 1.0}};
      for (int l : expanded ? info.below : info.left) lo.push_back({z[static_cast<std::size_t>(l)], 1.0});
      for (int l : expanded ? info.above : info.right) hi.push_back({z[static_cast<std::size_t>(l)], 1.0});
      m.add_constraint(row_name("lft", t, k), std::move(lo), Sense::LessEqual, 0.0);
      m.add_constraint(row_name("rgt", t, k), std::move(hi), Sense::LessEqual, 1.0);
      ++k;
    }
  }
  add_ensemble_output(m, ens, yt);
  return m;
}

}  // namespace detail

inline MipModel build_misic(const TreeEnsemble& ens, const SplitIndex& index) {
  return detail::build_indicator_model(ens, index, false);
}

inline MipModel build_expset(const TreeEnsemble& ens, const SplitIndex& index) {
  return detail::build_indicator_model(ens, index, true);
}

/// Adds the nested-branch constraints for every split and every same-feature
/// ancestor in its parent sets.
inline MipModel add_elbow(MipModel base, const TreeEnsemble& ens, const SplitIndex& index) {
  if (base.tag != "misic" && base.tag != "expset") {
    throw MismatchError("elbow constraints need a misic or expset base model, got '" + base.tag + "'");
  }
  if (index.tree_splits.size() != ens.size()) throw MismatchError("split index was built for another ensemble");
  auto var = [&](const std::string& name, Role role) {
    auto id = base.find(name);
    if (!id || base.variable(*id).role != role) throw MismatchError("base model lacks variable '" + name + "'");
    return *id;
  };
  auto x_of = [&](const SplitInfo& s) { return var(names::x(s.feature, s.rank), Role::X); };
  std::size_t k = 0;
  for (std::size_t si = 0; si < index.splits.size(); ++si) {
    const SplitInfo& s = index.splits[si];
    for (std::size_t pi : s.right_parent) {
      const SplitInfo& parent = index.splits[pi];
      std::vector<Term> row{{x_of(parent), -1.0}, {x_of(s), 1.0}};
      for (int l : s.right) row.push_back({var(names::z(s.tree, l), Role::Z), 1.0});
      base.add_constraint("elb_" + std::to_string(++k), std::move(row), Sense::LessEqual, 0.0);
    }
    for (std::size_t pi : s.left_parent) {
      const SplitInfo& parent = index.splits[pi];
      std::vector<Term> row{{x_of(s), -1.0}, {x_of(parent), 1.0}};
      for (int l : s.left) row.push_back({var(names::z(s.tree, l), Role::Z), 1.0});
      base.add_constraint("elb_" + std::to_string(++k), std::move(row), Sense::LessEqual, 0.0);
    }
  }
  base.tag = base.tag == "misic" ? "elbow" : "expset_elbow";
  return base;
}

/// Multiple-choice extended formulation with per-leaf copies of (w, y_t).
inline MipModel build_union_ext(const TreeEnsemble& ens) {
  require_valid(ens);
  detail::require_bounded(ens, "union_ext");
  MipModel m;
  m.tag = "union_ext";
  auto w = detail::add_features(m, ens);
  auto yt = detail::add_tree_outputs(m, ens);
  const int d = ens.num_features;
  for (std::size_t t = 0; t < ens.size(); ++t) {
    auto boxes = extract_leaves(ens, t);
    const std::size_t p = boxes.size();
    std::vector<std::size_t> z, yl;
    std::vector<std::vector<std::size_t>> wl(p);
    for (std::size_t l = 0; l < p; ++l) {
      const int li = static_cast<int>(l);
      for (int i = 0; i < d; ++i) {
        wl[l].push_back(m.add_variable(names::w_leaf(t, li, i), -kInf, kInf, VarType::Continuous, Role::WLeaf));
      }
      yl.push_back(m.add_variable(names::y_leaf(t, li), -kInf, kInf, VarType::Continuous, Role::YLeaf));
      z.push_back(m.add_variable(names::z(t, li), 0.0, 1.0, VarType::Binary, Role::Z));
    }
    for (std::size_t l = 0; l < p; ++l) {
      for (int i = 0; i < d; ++i) {
        auto ii = static_cast<std::size_t>(i);
        m.add_constraint(detail::row_name("ub", t, l * static_cast<std::size_t>(d) + ii),
                         {{z[l], boxes[l].upper[ii]}, {wl[l][ii], -1.0}}, Sense::GreaterEqual, 0.0);
        m.add_constraint(detail::row_name("lb", t, l * static_cast<std::size_t>(d) + ii),
                         {{z[l], boxes[l].lower[ii]}, {wl[l][ii], -1.0}}, Sense::LessEqual, 0.0);
      }
      m.add_constraint(detail::row_name("lscore", t, l), {{yl[l], 1.0}, {z[l], -boxes[l].score}}, Sense::Equal, 0.0);
    }
    std::vector<Term> one;
    for (std::size_t l = 0; l < p; ++l) one.push_back({z[l], 1.0});
    m.add_constraint("choose_" + std::to_string(t + 1), std::move(one), Sense::Equal, 1.0);
    for (int i = 0; i < d; ++i) {
      std::vector<Term> row{{w[static_cast<std::size_t>(i)], 1.0}};
      for (std::size_t l = 0; l < p; ++l) row.push_back({wl[l][static_cast<std::size_t>(i)], -1.0});
      m.add_constraint(detail::row_name("wsum", t, static_cast<std::size_t>(i)), std::move(row), Sense::Equal, 0.0);
    }
    std::vector<Term> ysum{{yt[t], 1.0}};
    for (std::size_t l = 0; l < p; ++l) ysum.push_back({yl[l], -1.0});
    m.add_constraint("score_" + std::to_string(t + 1), std::move(ysum), Sense::Equal, 0.0, RowKind::Output);
  }
  detail::add_ensemble_output(m, ens, yt);
  return m;
}

/// Union of leaf boxes projected onto w: 2d+1 structural rows per tree.
inline MipModel build_projected(const TreeEnsemble& ens) {
  require_valid(ens);
  detail::require_bounded(ens, "projected");
  MipModel m;
  m.tag = "projected";
  auto w = detail::add_features(m, ens);
  auto yt = detail::add_tree_outputs(m, ens);
  for (std::size_t t = 0; t < ens.size(); ++t) {
    auto boxes = extract_leaves(ens, t);
    std::vector<std::size_t> z;
    for (std::size_t l = 0; l < boxes.size(); ++l) {
      z.push_back(m.add_variable(names::z(t, static_cast<int>(l)), 0.0, 1.0, VarType::Binary, Role::Z));
    }
    for (int i = 0; i < ens.num_features; ++i) {
      auto ii = static_cast<std::size_t>(i);
      std::vector<Term> up{{w[ii], -1.0}}, lo{{w[ii], -1.0}};
      for (std::size_t l = 0; l < boxes.size(); ++l) {
        up.push_back({z[l], boxes[l].upper[ii]});
        lo.push_back({z[l], boxes[l].lower[ii]});
      }
      m.add_constraint(detail::row_name("ub", t, ii), std::move(up), Sense::GreaterEqual, 0.0);
      m.add_constraint(detail::row_name("lb", t, ii), std::move(lo), Sense::LessEqual, 0.0);
    }
    std::vector<Term> one;
    for (std::size_t zl : z) one.push_back({zl, 1.0});
    m.add_constraint("choose_" + std::to_string(t + 1), std::move(one), Sense::Equal, 1.0);
    std::vector<Term> score{{yt[t], 1.0}};
    for (std::size_t l = 0; l < boxes.size(); ++l) score.push_back({z[l], -boxes[l].score});
    m.add_constraint("score_" + std::to_string(t + 1), std::move(score), Sense::Equal, 0.0, RowKind::Output);
  }
  detail::add_ensemble_output(m, ens, yt);
  return m;
}

/// Projected formulation with the last leaf indicator eliminated. The
/// image of z_p >= 0, sum_{l<p} z_l <= 1, is kept as an explicit row.
inline MipModel build_facet(const TreeEnsemble& ens) {
  require_valid(ens);
  detail::require_bounded(ens, "facet");
  MipModel m;
  m.tag = "facet";
  auto w = detail::add_features(m, ens);
  auto yt = detail::add_tree_outputs(m, ens);
  for (std::size_t t = 0; t < ens.size(); ++t) {
    auto boxes = extract_leaves(ens, t);
    const std::size_t p = boxes.size();
    const LeafBox& last = boxes.back();
    std::vector<std::size_t> z;
    for (std::size_t l = 0; l + 1 < p; ++l) {
      z.push_back(m.add_variable(names::z(t, static_cast<int>(l)), 0.0, 1.0, VarType::Binary, Role::Z));
    }
    for (int i = 0; i < ens.num_features; ++i) {
      auto ii = static_cast<std::size_t>(i);
      std::vector<Term> up{{w[ii], -1.0}}, lo{{w[ii], -1.0}};
      for (std::size_t l = 0; l + 1 < p; ++l) {
        up.push_back({z[l], boxes[l].upper[ii] - last.upper[ii]});
        lo.push_back({z[l], boxes[l].lower[ii] - last.lower[ii]});
      }
      m.add_constraint(detail::row_name("ub", t, ii), std::move(up), Sense::GreaterEqual, -last.upper[ii]);
      m.add_constraint(detail::row_name("lb", t, ii), std::move(lo), Sense::LessEqual, -last.lower[ii]);
    }
    if (!z.empty()) {
      std::vector<Term> one;
      for (std::size_t zl : z) one.push_back({zl, 1.0});
      m.add_constraint("last_" + std::to_string(t + 1), std::move(one), Sense::LessEqual, 1.0);
    }
    std::vector<Term> score{{yt[t], 1.0}};
    for (std::size_t l = 0; l + 1 < p; ++l) score.push_back({z[l], -(boxes[l].score - last.score)});
    m.add_constraint("score_" + std::to_string(t + 1), std::move(score), Sense::Equal, last.score, RowKind::Output);
  }
  detail::add_ensemble_output(m, ens, yt);
  return m;
}

struct BigMOptions {
  /// Replaces the per-row tightest M with one constant for every row.
  std::optional<double> fixed_m;
};

/// Arc-based big-M formulation: one binary per parent-to-child arc.
inline MipModel build_bigm(const TreeEnsemble& ens, const BigMOptions& opts = {}) {
  require_valid(ens);
  detail::require_bounded(ens, "big-M");
  MipModel m;
  m.tag = "bigm";
  auto w = detail::add_features(m, ens);
  auto yt = detail::add_tree_outputs(m, ens);
  for (std::size_t t = 0; t < ens.size(); ++t) {
    const DecisionTree& tree = ens.trees[t];
    std::vector<Term> score{{yt[t], 1.0}};
    double constant = 0.0;
    if (tree.node(tree.root).leaf) constant = tree.node(tree.root).value;
    // incoming[v] = arc variable entering node v.
    std::vector<std::optional<std::size_t>> incoming(tree.nodes.size());
    std::size_t k = 0;
    for (int v : tree.splits()) {
      const Node& n = tree.node(v);
      std::size_t left = m.add_variable(names::arc(t, v, true), 0.0, 1.0, VarType::Binary, Role::Arc);
      std::size_t right = m.add_variable(names::arc(t, v, false), 0.0, 1.0, VarType::Binary, Role::Arc);
      incoming[static_cast<std::size_t>(n.left)] = left;
      incoming[static_cast<std::size_t>(n.right)] = right;
      if (v == tree.root) {
        m.add_constraint("root_" + std::to_string(t + 1), {{left, 1.0}, {right, 1.0}}, Sense::Equal, 1.0);
      } else {
        m.add_constraint(detail::row_name("flow", t, k), {{left, 1.0}, {right, 1.0}, {*incoming[static_cast<std::size_t>(v)], -1.0}},
                         Sense::Equal, 0.0);
      }
      const auto i = static_cast<std::size_t>(n.feature);
      const Bounds& b = ens.domain[i];
      const double m_left = opts.fixed_m.value_or(b.upper - n.threshold);
      const double m_right = opts.fixed_m.value_or(n.threshold - b.lower);
      // w_i - M (1 - a_l) <= theta   and   w_i + M (1 - a_r) >= theta
      m.add_constraint(detail::row_name("bml", t, k), {{w[i], 1.0}, {left, m_left}}, Sense::LessEqual,
                       n.threshold + m_left);
      m.add_constraint(detail::row_name("bmr", t, k), {{w[i], 1.0}, {right, -m_right}}, Sense::GreaterEqual,
                       n.threshold - m_right);
      ++k;
    }
    for (int v : tree.leaves()) {
      if (auto arc = incoming[static_cast<std::size_t>(v)]) score.push_back({*arc, -tree.node(v).value});
    }
    m.add_constraint("score_" + std::to_string(t + 1), std::move(score), Sense::Equal, constant, RowKind::Output);
  }
  detail::add_ensemble_output(m, ens, yt);
  return m;
}

/// Linear row over the feature vector: sum_i coeffs[i] * w_i (sense) rhs.
struct FeatureRow {
  std::vector<double> coeffs;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

inline MipModel attach_constraints(MipModel model, const std::vector<FeatureRow>& rows) {
  if (auto kind = parse_kind(model.tag); kind && uses_split_indicators(*kind)) {
    throw UnsupportedFormulation("feature constraints cannot be linked to the threshold indicators of '" + model.tag +
                                 "'");
  }
  if (rows.empty()) return model;
  auto w = model.with_role(Role::W);
  if (w.empty()) throw UnsupportedFormulation("model has no feature variables");
  std::size_t k = 0;
  for (const FeatureRow& r : rows) {
    if (r.coeffs.size() != w.size()) {
      throw DimensionMismatch("feature row has " + std::to_string(r.coeffs.size()) + " coefficients, model has " +
                              std::to_string(w.size()) + " features");
    }
    std::vector<Term> terms;
    for (std::size_t i = 0; i < w.size(); ++i) terms.push_back({w[i], r.coeffs[i]});
    model.add_constraint("extra_" + std::to_string(++k), std::move(terms), r.sense, r.rhs);
  }
  return model;
}

enum class ObjectiveKind { MaxY, MinY };

inline MipModel set_objective(MipModel model, ObjectiveKind kind) {
  std::size_t y = model.id(names::y());
  model.set_objective(kind == ObjectiveKind::MaxY ? ObjSense::Maximize : ObjSense::Minimize, {{y, 1.0}});
  return model;
}

inline MipModel set_objective(MipModel model, ObjSense sense, std::vector<Term> row, double constant = 0.0) {
  model.set_objective(sense, std::move(row), constant);
  return model;
}

struct BuildOptions {
  BigMOptions bigm;
};

/// Builds any formulation kind, maximizing y.
inline MipModel build(FormulationKind kind, const TreeEnsemble& ens, const SplitIndex& index,
                      const BuildOptions& opts = {}) {
  switch (kind) {
    case FormulationKind::Misic: return build_misic(ens, index);
    case FormulationKind::Expset: return build_expset(ens, index);
    case FormulationKind::Elbow: return add_elbow(build_misic(ens, index), ens, index);
    case FormulationKind::ExpsetElbow: return add_elbow(build_expset(ens, index), ens, index);
    case FormulationKind::UnionExt: return build_union_ext(ens);
    case FormulationKind::Projected: return build_projected(ens);
    case FormulationKind::Facet: return build_facet(ens);
    case FormulationKind::BigM: return build_bigm(ens, opts.bigm);
  }
  throw Error("unknown formulation kind");
}

inline MipModel build(FormulationKind kind, const TreeEnsemble& ens, const BuildOptions& opts = {}) {
  return build(kind, ens, build_split_index(ens), opts);
}

}  // namespace treemio

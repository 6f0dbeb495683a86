#pragma once

// Decision trees, ensembles, leaf boxes and per-split index sets.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "treemio/error.hpp"

namespace treemio {

struct Bounds {
  double lower = 0.0;
  double upper = 1.0;
};

/// One node of a tree arena. Internal nodes route `w[feature] <= threshold`
/// to `left`, everything else to `right`; children are arena indices.
struct Node {
  int id = 0;
  bool leaf = true;
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = std::numeric_limits<double>::quiet_NaN();
};

struct DecisionTree {
  std::vector<Node> nodes;
  int root = 0;

  [[nodiscard]] const Node& node(int index) const { return nodes.at(static_cast<std::size_t>(index)); }

  /// Arena indices of the leaves in left-first depth-first order. Leaf
  /// positions in this vector are the leaf numbers used by every formulation.
  [[nodiscard]] std::vector<int> leaves() const {
    std::vector<int> out;
    std::vector<int> stack{root};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      const Node& n = node(v);
      if (n.leaf) {
        out.push_back(v);
      } else {
        stack.push_back(n.right);
        stack.push_back(n.left);
      }
    }
    return out;
  }

  /// Arena indices of the internal nodes in preorder.
  [[nodiscard]] std::vector<int> splits() const {
    std::vector<int> out;
    std::vector<int> stack{root};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      const Node& n = node(v);
      if (!n.leaf) {
        out.push_back(v);
        stack.push_back(n.right);
        stack.push_back(n.left);
      }
    }
    return out;
  }

  [[nodiscard]] std::size_t num_leaves() const { return leaves().size(); }
};

struct TreeEnsemble {
  std::vector<DecisionTree> trees;
  int num_features = 1;
  std::vector<Bounds> domain;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const { return trees.size(); }
  [[nodiscard]] double weight(std::size_t t) const { return weights.at(t); }
};

/// Axis-aligned cell of one leaf: `lower[i] (<|<=) w[i] <= upper[i]`.
struct LeafBox {
  int leaf_id = 0;    // JSON node id
  int node = 0;       // arena index
  std::vector<double> lower;
  std::vector<double> upper;
  double score = 0.0;
  std::vector<bool> lower_open;

  [[nodiscard]] bool contains(std::span<const double> w) const {
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (w[i] > upper[i]) return false;
      if (lower_open[i] ? !(w[i] > lower[i]) : w[i] < lower[i]) return false;
    }
    return true;
  }
};

// ---------------------------------------------------------------------------
// Diagnostics and validation

enum class DiagnosticKind { Schema, Domain, Structure };

struct Diagnostic {
  DiagnosticKind kind;
  std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

inline const char* to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::Schema: return "SchemaError";
    case DiagnosticKind::Domain: return "DomainError";
    case DiagnosticKind::Structure: return "StructureError";
  }
  return "?";
}

namespace detail {

inline void validate_tree(const TreeEnsemble& ens, std::size_t t, Diagnostics& out) {
  const DecisionTree& tree = ens.trees[t];
  const std::string where = "tree " + std::to_string(t) + ": ";
  const int n = static_cast<int>(tree.nodes.size());
  if (n == 0) {
    out.push_back({DiagnosticKind::Structure, where + "no nodes"});
    return;
  }
  if (tree.root < 0 || tree.root >= n) {
    out.push_back({DiagnosticKind::Structure, where + "root is not a node"});
    return;
  }
  bool broken = false;
  for (const Node& node : tree.nodes) {
    const std::string at = where + "node " + std::to_string(node.id) + ": ";
    if (node.leaf) {
      if (!std::isfinite(node.value)) out.push_back({DiagnosticKind::Structure, at + "leaf missing a finite score"});
      continue;
    }
    if (node.left < 0 || node.left >= n || node.right < 0 || node.right >= n) {
      out.push_back({DiagnosticKind::Structure, at + "internal node needs two existing children"});
      broken = true;
    } else if (node.left == node.right) {
      out.push_back({DiagnosticKind::Structure, at + "children must be distinct"});
      broken = true;
    }
    if (node.feature < 0 || node.feature >= ens.num_features) {
      out.push_back({DiagnosticKind::Schema, at + "feature index " + std::to_string(node.feature) + " out of range"});
    } else if (!std::isfinite(node.threshold)) {
      out.push_back({DiagnosticKind::Domain, at + "threshold is not finite"});
    } else if (!ens.domain.empty() && ens.domain.size() == static_cast<std::size_t>(ens.num_features)) {
      const Bounds& b = ens.domain[static_cast<std::size_t>(node.feature)];
      if (!(node.threshold > b.lower && node.threshold < b.upper)) {
        out.push_back({DiagnosticKind::Domain, at + "threshold outside the open domain"});
      }
    }
  }
  if (broken) return;

  // Walk from the root carrying the current cell; detects cycles, shared
  // children and splits that do not cut their cell.
  std::vector<int> visits(static_cast<std::size_t>(n), 0);
  const bool have_domain = ens.domain.size() == static_cast<std::size_t>(ens.num_features);
  struct Frame {
    int node;
    std::vector<double> lo, hi;
  };
  std::vector<Frame> stack;
  {
    Frame f{tree.root, {}, {}};
    if (have_domain) {
      for (const Bounds& b : ens.domain) {
        f.lo.push_back(b.lower);
        f.hi.push_back(b.upper);
      }
    }
    stack.push_back(std::move(f));
  }
  bool cyclic = false;
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    auto idx = static_cast<std::size_t>(f.node);
    if (++visits[idx] > 1) {
      cyclic = true;
      break;
    }
    const Node& node = tree.nodes[idx];
    if (node.leaf) continue;
    if (have_domain && node.feature >= 0 && node.feature < ens.num_features) {
      auto i = static_cast<std::size_t>(node.feature);
      if (!(node.threshold > f.lo[i] && node.threshold < f.hi[i]) && node.threshold > ens.domain[i].lower &&
          node.threshold < ens.domain[i].upper) {
        out.push_back({DiagnosticKind::Structure,
                       where + "node " + std::to_string(node.id) + ": threshold does not split its cell"});
      }
    }
    Frame left{node.left, f.lo, f.hi};
    Frame right{node.right, std::move(f.lo), std::move(f.hi)};
    if (have_domain && node.feature >= 0 && node.feature < ens.num_features) {
      auto i = static_cast<std::size_t>(node.feature);
      left.hi[i] = std::min(left.hi[i], node.threshold);
      right.lo[i] = std::max(right.lo[i], node.threshold);
    }
    stack.push_back(std::move(right));
    stack.push_back(std::move(left));
  }
  if (cyclic) {
    out.push_back({DiagnosticKind::Structure, where + "cycle or shared child"});
    return;
  }
  for (int v = 0; v < n; ++v) {
    if (visits[static_cast<std::size_t>(v)] == 0) {
      out.push_back({DiagnosticKind::Structure,
                     where + "node " + std::to_string(tree.nodes[static_cast<std::size_t>(v)].id) + " unreachable"});
    }
  }
}

}  // namespace detail

/// Lists every invariant violation of an ensemble; empty when valid.
inline Diagnostics validate(const TreeEnsemble& ens) {
  Diagnostics out;
  if (ens.num_features < 1) out.push_back({DiagnosticKind::Schema, "num_features must be positive"});
  if (ens.domain.size() != static_cast<std::size_t>(std::max(ens.num_features, 0))) {
    out.push_back({DiagnosticKind::Schema, "domain must have one [lb, ub] pair per feature"});
  }
  for (std::size_t i = 0; i < ens.domain.size(); ++i) {
    if (!(ens.domain[i].lower < ens.domain[i].upper)) {
      out.push_back({DiagnosticKind::Domain, "feature " + std::to_string(i) + ": lb must be < ub"});
    }
  }
  if (ens.trees.empty()) out.push_back({DiagnosticKind::Schema, "ensemble has no trees"});
  if (ens.weights.size() != ens.trees.size()) {
    out.push_back({DiagnosticKind::Schema, "weights must have one entry per tree"});
  }
  for (double w : ens.weights) {
    if (!std::isfinite(w)) out.push_back({DiagnosticKind::Schema, "weights must be finite"});
  }
  for (std::size_t t = 0; t < ens.trees.size(); ++t) detail::validate_tree(ens, t, out);
  return out;
}

namespace detail {

inline TreeEnsemble ensemble_from_json(const nlohmann::json& j, Diagnostics& out) {
  TreeEnsemble ens;
  auto schema = [&](std::string msg) { out.push_back({DiagnosticKind::Schema, std::move(msg)}); };
  if (!j.is_object()) {
    schema("top level must be an object");
    return ens;
  }
  if (!j.contains("num_features") || !j["num_features"].is_number_integer()) {
    schema("num_features: missing or not an integer");
  } else {
    ens.num_features = j["num_features"].get<int>();
  }
  if (!j.contains("domain") || !j["domain"].is_array()) {
    schema("domain: missing or not an array");
  } else {
    for (const auto& pair : j["domain"]) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
        schema("domain: entries must be [lb, ub] number pairs");
        continue;
      }
      ens.domain.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
  }
  if (!j.contains("trees") || !j["trees"].is_array()) {
    schema("trees: missing or not an array");
    return ens;
  }
  for (std::size_t t = 0; t < j["trees"].size(); ++t) {
    const auto& jt = j["trees"][t];
    const std::string where = "tree " + std::to_string(t) + ": ";
    DecisionTree tree;
    if (!jt.is_object() || !jt.contains("nodes") || !jt["nodes"].is_array()) {
      schema(where + "nodes: missing or not an array");
      ens.trees.push_back(std::move(tree));
      continue;
    }
    std::map<int, int> index_of;
    std::vector<std::pair<int, int>> child_ids;
    for (const auto& jn : jt["nodes"]) {
      if (!jn.is_object() || !jn.contains("id") || !jn["id"].is_number_integer()) {
        schema(where + "node without integer id");
        continue;
      }
      Node node;
      node.id = jn["id"].get<int>();
      if (index_of.count(node.id)) {
        out.push_back({DiagnosticKind::Structure, where + "duplicate node id " + std::to_string(node.id)});
        continue;
      }
      std::pair<int, int> kids{-1, -1};
      bool internal = jn.contains("left") || jn.contains("right") || jn.contains("threshold") || jn.contains("feature");
      if (internal) {
        node.leaf = false;
        bool ok = true;
        for (const char* key : {"feature", "left", "right"}) {
          if (!jn.contains(key) || !jn[key].is_number_integer()) {
            schema(where + "node " + std::to_string(node.id) + ": " + key + " missing or not an integer");
            ok = false;
          }
        }
        if (!jn.contains("threshold") || !jn["threshold"].is_number()) {
          schema(where + "node " + std::to_string(node.id) + ": threshold missing or not a number");
          ok = false;
        }
        if (ok) {
          node.feature = jn["feature"].get<int>();
          node.threshold = jn["threshold"].get<double>();
          kids = {jn["left"].get<int>(), jn["right"].get<int>()};
        }
      } else if (jn.contains("value")) {
        if (!jn["value"].is_number()) {
          schema(where + "node " + std::to_string(node.id) + ": value is not a number");
        } else {
          node.value = jn["value"].get<double>();
        }
      }
      index_of[node.id] = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(node);
      child_ids.push_back(kids);
    }
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
      if (tree.nodes[k].leaf) continue;
      auto resolve = [&](int id) {
        auto it = index_of.find(id);
        if (it == index_of.end()) {
          out.push_back({DiagnosticKind::Structure, where + "child id " + std::to_string(id) + " does not exist"});
          return -1;
        }
        return it->second;
      };
      if (child_ids[k].first == -1 && child_ids[k].second == -1) continue;
      tree.nodes[k].left = resolve(child_ids[k].first);
      tree.nodes[k].right = resolve(child_ids[k].second);
    }
    if (!jt.contains("root") || !jt["root"].is_number_integer()) {
      schema(where + "root: missing or not an integer");
    } else if (auto it = index_of.find(jt["root"].get<int>()); it == index_of.end()) {
      out.push_back({DiagnosticKind::Structure, where + "root id does not exist"});
    } else {
      tree.root = it->second;
    }
    ens.trees.push_back(std::move(tree));
  }
  if (j.contains("weights")) {
    if (!j["weights"].is_array()) {
      schema("weights: not an array");
    } else {
      for (const auto& w : j["weights"]) {
        if (!w.is_number()) {
          schema("weights: entries must be numbers");
          continue;
        }
        ens.weights.push_back(w.get<double>());
      }
    }
  } else if (!ens.trees.empty()) {
    ens.weights.assign(ens.trees.size(), 1.0 / static_cast<double>(ens.trees.size()));
  }
  return ens;
}

[[noreturn]] inline void raise(const Diagnostic& d) {
  switch (d.kind) {
    case DiagnosticKind::Schema: throw SchemaError(d.message);
    case DiagnosticKind::Domain: throw DomainError(d.message);
    case DiagnosticKind::Structure: throw StructureError(d.message);
  }
  throw SchemaError(d.message);
}

}  // namespace detail

/// Validates raw JSON text against the ensemble schema and invariants.
inline Diagnostics validate_json(std::string_view text) {
  Diagnostics out;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    out.push_back({DiagnosticKind::Schema, std::string("invalid JSON: ") + e.what()});
    return out;
  }
  TreeEnsemble ens = detail::ensemble_from_json(j, out);
  if (out.empty()) {
    Diagnostics more = validate(ens);
    out.insert(out.end(), more.begin(), more.end());
  }
  return out;
}

inline TreeEnsemble parse_ensemble(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  Diagnostics diags;
  TreeEnsemble ens = detail::ensemble_from_json(j, diags);
  if (!diags.empty()) detail::raise(diags.front());
  diags = validate(ens);
  if (!diags.empty()) detail::raise(diags.front());
  return ens;
}

/// Throws the first invariant violation, if any.
inline void require_valid(const TreeEnsemble& ens) {
  Diagnostics diags = validate(ens);
  if (!diags.empty()) detail::raise(diags.front());
}

inline nlohmann::json to_json(const TreeEnsemble& ens) {
  nlohmann::json j;
  j["num_features"] = ens.num_features;
  j["domain"] = nlohmann::json::array();
  for (const Bounds& b : ens.domain) j["domain"].push_back({b.lower, b.upper});
  j["weights"] = ens.weights;
  j["trees"] = nlohmann::json::array();
  for (const DecisionTree& tree : ens.trees) {
    nlohmann::json jt;
    jt["nodes"] = nlohmann::json::array();
    for (const Node& n : tree.nodes) {
      if (n.leaf) {
        jt["nodes"].push_back({{"id", n.id}, {"value", n.value}});
      } else {
        jt["nodes"].push_back({{"id", n.id},
                               {"feature", n.feature},
                               {"threshold", n.threshold},
                               {"left", tree.nodes[static_cast<std::size_t>(n.left)].id},
                               {"right", tree.nodes[static_cast<std::size_t>(n.right)].id}});
      }
    }
    jt["root"] = tree.nodes[static_cast<std::size_t>(tree.root)].id;
    j["trees"].push_back(std::move(jt));
  }
  return j;
}

inline std::string to_json_text(const TreeEnsemble& ens) { return to_json(ens).dump(2); }

// ---------------------------------------------------------------------------
// Leaves and evaluation

/// One box per leaf, in left-first depth-first order.
inline std::vector<LeafBox> extract_leaves(const DecisionTree& tree, std::span<const Bounds> domain) {
  const std::size_t d = domain.size();
  std::vector<LeafBox> boxes;
  struct Frame {
    int node;
    std::vector<double> lo, hi;
    std::vector<bool> open;
  };
  Frame start{tree.root, std::vector<double>(d), std::vector<double>(d), std::vector<bool>(d, false)};
  for (std::size_t i = 0; i < d; ++i) {
    start.lo[i] = domain[i].lower;
    start.hi[i] = domain[i].upper;
  }
  std::vector<Frame> stack;
  stack.push_back(std::move(start));
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    const Node& n = tree.node(f.node);
    if (n.leaf) {
      boxes.push_back({n.id, f.node, std::move(f.lo), std::move(f.hi), n.value, std::move(f.open)});
      continue;
    }
    auto i = static_cast<std::size_t>(n.feature);
    Frame left{n.left, f.lo, f.hi, f.open};
    left.hi[i] = std::min(left.hi[i], n.threshold);
    Frame right{n.right, std::move(f.lo), std::move(f.hi), std::move(f.open)};
    if (n.threshold >= right.lo[i]) {
      right.lo[i] = n.threshold;
      right.open[i] = true;
    }
    stack.push_back(std::move(right));
    stack.push_back(std::move(left));
  }
  return boxes;
}

inline std::vector<LeafBox> extract_leaves(const TreeEnsemble& ens, std::size_t t) {
  return extract_leaves(ens.trees.at(t), ens.domain);
}

/// Arena index of the leaf reached by `w`; ties at a threshold go left.
inline int leaf_of(const DecisionTree& tree, std::span<const double> w) {
  int v = tree.root;
  while (!tree.node(v).leaf) {
    const Node& n = tree.node(v);
    v = w[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return v;
}

inline double evaluate(const DecisionTree& tree, std::span<const double> w) {
  return tree.node(leaf_of(tree, w)).value;
}

inline double evaluate(const TreeEnsemble& ens, std::span<const double> w) {
  if (w.size() != static_cast<std::size_t>(ens.num_features)) {
    throw OutOfDomain("point has " + std::to_string(w.size()) + " coordinates, expected " +
                      std::to_string(ens.num_features));
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] >= ens.domain[i].lower && w[i] <= ens.domain[i].upper)) {
      throw OutOfDomain("coordinate " + std::to_string(i) + " outside the domain");
    }
  }
  double total = 0.0;
  for (std::size_t t = 0; t < ens.trees.size(); ++t) total += ens.weights[t] * evaluate(ens.trees[t], w);
  return total;
}

// ---------------------------------------------------------------------------
// Split index

/// Index sets of one split. Leaf sets hold leaf positions within the tree
/// (see `DecisionTree::leaves`); parent sets hold positions in
/// `SplitIndex::splits`.
struct SplitInfo {
  std::size_t tree = 0;
  int node = 0;
  int feature = 0;
  double threshold = 0.0;
  int rank = 0;  // 1-based ascending rank among the pooled thresholds of `feature`
  std::vector<int> left, right, below, above;
  std::vector<std::size_t> right_parent, left_parent;
};

struct SplitIndex {
  std::vector<SplitInfo> splits;
  std::vector<std::vector<double>> thresholds;          // per feature, ascending, deduplicated
  std::vector<std::vector<std::size_t>> tree_splits;    // per tree, positions into `splits`
  std::vector<std::size_t> num_leaves;                  // per tree

  [[nodiscard]] int K(int feature) const {
    return static_cast<int>(thresholds.at(static_cast<std::size_t>(feature)).size());
  }

  [[nodiscard]] std::optional<std::size_t> find(std::size_t tree, int node) const {
    for (std::size_t s : tree_splits.at(tree)) {
      if (splits[s].node == node) return s;
    }
    return std::nullopt;
  }

  /// Split of `tree` on `feature` with exactly `threshold`, first in preorder.
  [[nodiscard]] std::optional<std::size_t> find(std::size_t tree, int feature, double threshold) const {
    for (std::size_t s : tree_splits.at(tree)) {
      if (splits[s].feature == feature && splits[s].threshold == threshold) return s;
    }
    return std::nullopt;
  }
};

namespace detail {

inline std::vector<int> set_union(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace detail

/// Builds all split sets. below/above are computed twice, once by the
/// adjacent-threshold recursion and once as unions, and the two must agree.
inline SplitIndex build_split_index(const TreeEnsemble& ens) {
  SplitIndex index;
  const auto d = static_cast<std::size_t>(ens.num_features);
  index.thresholds.assign(d, {});
  for (const DecisionTree& tree : ens.trees) {
    for (int v : tree.splits()) {
      const Node& n = tree.node(v);
      index.thresholds[static_cast<std::size_t>(n.feature)].push_back(n.threshold);
    }
  }
  for (auto& th : index.thresholds) {
    std::sort(th.begin(), th.end());
    th.erase(std::unique(th.begin(), th.end()), th.end());
  }

  for (std::size_t t = 0; t < ens.trees.size(); ++t) {
    const DecisionTree& tree = ens.trees[t];
    std::vector<int> leaves = tree.leaves();
    std::map<int, int> leaf_pos;
    for (std::size_t k = 0; k < leaves.size(); ++k) leaf_pos[leaves[k]] = static_cast<int>(k);
    index.num_leaves.push_back(leaves.size());

    // Leaves under each node, and ancestors of each split.
    std::map<int, std::vector<int>> under;
    auto collect = [&](auto&& self, int v) -> std::vector<int> {
      const Node& n = tree.node(v);
      std::vector<int> out;
      if (n.leaf) {
        out.push_back(leaf_pos[v]);
      } else {
        out = detail::set_union(self(self, n.left), self(self, n.right));
      }
      under[v] = out;
      return out;
    };
    collect(collect, tree.root);

    std::vector<std::size_t> mine;
    std::map<int, std::size_t> pos_of_node;
    struct Frame {
      int node;
      std::vector<std::pair<int, bool>> ancestors;  // (node, went_left)
    };
    std::vector<Frame> stack{{tree.root, {}}};
    std::vector<std::pair<int, std::vector<std::pair<int, bool>>>> ordered;
    while (!stack.empty()) {
      Frame f = std::move(stack.back());
      stack.pop_back();
      const Node& n = tree.node(f.node);
      if (n.leaf) continue;
      ordered.emplace_back(f.node, f.ancestors);
      auto right_anc = f.ancestors;
      right_anc.emplace_back(f.node, false);
      f.ancestors.emplace_back(f.node, true);
      stack.push_back({n.right, std::move(right_anc)});
      stack.push_back({n.left, std::move(f.ancestors)});
    }
    for (auto& [v, anc] : ordered) {
      const Node& n = tree.node(v);
      SplitInfo info;
      info.tree = t;
      info.node = v;
      info.feature = n.feature;
      info.threshold = n.threshold;
      const auto& th = index.thresholds[static_cast<std::size_t>(n.feature)];
      info.rank = static_cast<int>(std::lower_bound(th.begin(), th.end(), n.threshold) - th.begin()) + 1;
      info.left = under[n.left];
      info.right = under[n.right];
      pos_of_node[v] = index.splits.size();
      mine.push_back(index.splits.size());
      index.splits.push_back(std::move(info));
    }
    for (auto& [v, anc] : ordered) {
      SplitInfo& info = index.splits[pos_of_node[v]];
      for (const auto& [a, went_left] : anc) {
        if (tree.node(a).feature != info.feature) continue;
        (went_left ? info.right_parent : info.left_parent).push_back(pos_of_node[a]);
      }
    }

    // Union definition: below(s) = U{left(s'') : theta'' <= theta}, above symmetric.
    for (std::size_t s : mine) {
      SplitInfo& info = index.splits[s];
      for (std::size_t o : mine) {
        const SplitInfo& other = index.splits[o];
        if (other.feature != info.feature) continue;
        if (other.threshold <= info.threshold) info.below = detail::set_union(info.below, other.left);
        if (other.threshold >= info.threshold) info.above = detail::set_union(info.above, other.right);
      }
    }

    // Recursive definition over the tree's distinct thresholds per feature.
    for (int feature = 0; feature < ens.num_features; ++feature) {
      std::map<double, std::vector<std::size_t>> groups;
      for (std::size_t s : mine) {
        if (index.splits[s].feature == feature) groups[index.splits[s].threshold].push_back(s);
      }
      if (groups.empty()) continue;
      std::vector<std::vector<int>> lefts, rights;
      for (auto& [theta, members] : groups) {
        std::vector<int> l, r;
        for (std::size_t s : members) {
          l = detail::set_union(l, index.splits[s].left);
          r = detail::set_union(r, index.splits[s].right);
        }
        lefts.push_back(std::move(l));
        rights.push_back(std::move(r));
      }
      const std::size_t g = lefts.size();
      std::vector<std::vector<int>> below(g), above(g);
      below[0] = lefts[0];
      for (std::size_t j = 1; j < g; ++j) below[j] = detail::set_union(below[j - 1], lefts[j]);
      above[g - 1] = rights[g - 1];
      for (std::size_t j = g - 1; j-- > 0;) above[j] = detail::set_union(above[j + 1], rights[j]);
      std::size_t j = 0;
      for (auto& [theta, members] : groups) {
        for (std::size_t s : members) {
          if (index.splits[s].below != below[j] || index.splits[s].above != above[j]) {
            throw StructureError("below/above definitions disagree for tree " + std::to_string(t));
          }
        }
        ++j;
      }
    }
    index.tree_splits.push_back(std::move(mine));
  }
  return index;
}

}  // namespace treemio

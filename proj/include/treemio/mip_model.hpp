#pragma once

// Formulation-agnostic MIP container, LP relaxation view and LP-file export.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "treemio/error.hpp"

namespace treemio {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarType { Continuous, Binary };

/// Semantic role of a variable inside a formulation.
enum class Role { W, Y, YTree, Z, X, Arc, WLeaf, YLeaf, Other };

inline const char* to_string(Role role) {
  switch (role) {
    case Role::W: return "w";
    case Role::Y: return "y";
    case Role::YTree: return "y_t";
    case Role::Z: return "z";
    case Role::X: return "x";
    case Role::Arc: return "arc";
    case Role::WLeaf: return "w_leaf";
    case Role::YLeaf: return "y_leaf";
    case Role::Other: return "other";
  }
  return "?";
}

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  VarType type = VarType::Continuous;
  Role role = Role::Other;
};

enum class Sense { LessEqual, Equal, GreaterEqual };

inline const char* to_string(Sense s) {
  switch (s) {
    case Sense::LessEqual: return "<=";
    case Sense::Equal: return "=";
    case Sense::GreaterEqual: return ">=";
  }
  return "?";
}

struct Term {
  std::size_t var = 0;
  double coeff = 0.0;

  friend bool operator==(const Term&, const Term&) = default;
};

/// Structural rows are what `model_stats` counts; output rows only define
/// y_t and y from the leaf indicators.
enum class RowKind { Structural, Output };

struct Constraint {
  std::string name;
  std::vector<Term> terms;  // sorted by variable, no duplicates, no zeros
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
  RowKind kind = RowKind::Structural;

  [[nodiscard]] double activity(const std::vector<double>& x) const {
    double a = 0.0;
    for (const Term& t : terms) a += t.coeff * x[t.var];
    return a;
  }

  /// Amount by which `x` violates the row; 0 when satisfied.
  [[nodiscard]] double violation(const std::vector<double>& x) const {
    double a = activity(x);
    switch (sense) {
      case Sense::LessEqual: return std::max(0.0, a - rhs);
      case Sense::GreaterEqual: return std::max(0.0, rhs - a);
      case Sense::Equal: return std::abs(a - rhs);
    }
    return 0.0;
  }
};

enum class ObjSense { Maximize, Minimize };

struct Objective {
  ObjSense sense = ObjSense::Maximize;
  std::vector<Term> terms;
  double constant = 0.0;
};

/// Sorts by variable and merges duplicate entries by summing them.
inline std::vector<Term> normalize_terms(std::vector<Term> terms) {
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> out;
  for (const Term& t : terms) {
    if (!out.empty() && out.back().var == t.var) {
      out.back().coeff += t.coeff;
    } else {
      out.push_back(t);
    }
  }
  std::erase_if(out, [](const Term& t) { return t.coeff == 0.0; });
  return out;
}

class MipModel {
 public:
  std::size_t add_variable(std::string name, double lower, double upper, VarType type, Role role = Role::Other) {
    if (by_name_.count(name)) throw NameError("duplicate variable name '" + name + "'");
    if (type == VarType::Binary && (lower < 0.0 || upper > 1.0)) {
      throw Error("binary variable '" + name + "' must have bounds inside [0, 1]");
    }
    std::size_t id = vars_.size();
    by_name_.emplace(name, id);
    vars_.push_back({std::move(name), lower, upper, type, role});
    return id;
  }

  std::size_t add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs,
                             RowKind kind = RowKind::Structural) {
    for (const Term& t : terms) {
      if (t.var >= vars_.size()) throw Error("constraint '" + name + "' references an undeclared variable");
      if (!std::isfinite(t.coeff)) throw Error("constraint '" + name + "' has a non-finite coefficient");
    }
    if (!std::isfinite(rhs)) throw Error("constraint '" + name + "' has a non-finite right-hand side");
    rows_.push_back({std::move(name), normalize_terms(std::move(terms)), sense, rhs, kind});
    return rows_.size() - 1;
  }

  void set_objective(ObjSense sense, std::vector<Term> terms, double constant = 0.0) {
    for (const Term& t : terms) {
      if (t.var >= vars_.size()) throw Error("objective references an undeclared variable");
    }
    objective_ = {sense, normalize_terms(std::move(terms)), constant};
  }

  [[nodiscard]] const std::vector<Variable>& variables() const { return vars_; }
  [[nodiscard]] std::vector<Variable>& variables() { return vars_; }
  [[nodiscard]] const Variable& variable(std::size_t id) const { return vars_.at(id); }
  [[nodiscard]] const std::vector<Constraint>& constraints() const { return rows_; }
  [[nodiscard]] const Objective& objective() const { return objective_; }
  [[nodiscard]] std::size_t num_variables() const { return vars_.size(); }
  [[nodiscard]] std::size_t num_constraints() const { return rows_.size(); }

  [[nodiscard]] std::optional<std::size_t> find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }

  [[nodiscard]] std::size_t id(std::string_view name) const {
    auto v = find(name);
    if (!v) throw NameError("no variable named '" + std::string(name) + "'");
    return *v;
  }

  [[nodiscard]] std::vector<std::size_t> with_role(Role role) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < vars_.size(); ++j) {
      if (vars_[j].role == role) out.push_back(j);
    }
    return out;
  }

  [[nodiscard]] bool has_role(Role role) const {
    return std::any_of(vars_.begin(), vars_.end(), [&](const Variable& v) { return v.role == role; });
  }

  [[nodiscard]] std::size_t num_binaries() const {
    return static_cast<std::size_t>(
        std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) { return v.type == VarType::Binary; }));
  }

  /// Formulation tag set by the builders ("misic", "projected", ...).
  std::string tag;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  Objective objective_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

/// Same model with every integrality requirement dropped.
inline MipModel relax(MipModel model) {
  for (Variable& v : model.variables()) v.type = VarType::Continuous;
  return model;
}

struct ModelStats {
  std::size_t num_constraints = 0;  // structural rows, simple bounds excluded
  std::size_t num_output_rows = 0;
  std::size_t num_variables = 0;    // excludes the ensemble aggregate y
  std::size_t num_binaries = 0;
  std::size_t num_nonzeros = 0;     // in structural rows
};

inline ModelStats model_stats(const MipModel& model) {
  ModelStats s;
  for (const Constraint& c : model.constraints()) {
    if (c.kind == RowKind::Structural) {
      ++s.num_constraints;
      s.num_nonzeros += c.terms.size();
    } else {
      ++s.num_output_rows;
    }
  }
  for (const Variable& v : model.variables()) {
    if (v.role != Role::Y) ++s.num_variables;
    if (v.type == VarType::Binary) ++s.num_binaries;
  }
  return s;
}

// ---------------------------------------------------------------------------
// LP-file export (CPLEX-style subset)

namespace detail {

inline bool valid_lp_name(const std::string& name) {
  static const std::regex pattern("[A-Za-z_][A-Za-z0-9_]*");
  return std::regex_match(name, pattern);
}

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_terms(std::string& out, const MipModel& m, const std::vector<Term>& terms) {
  if (terms.empty()) {
    out += " 0 " + m.variable(0).name;
    return;
  }
  bool first = true;
  for (const Term& t : terms) {
    double c = t.coeff;
    if (first) {
      out += c < 0 ? " - " : " ";
    } else {
      out += c < 0 ? " - " : " + ";
    }
    out += fmt17(std::abs(c)) + " " + m.variable(t.var).name;
    first = false;
  }
}

}  // namespace detail

/// Renders the model as LP text in declaration order.
inline std::string write_lp(const MipModel& model) {
  for (const Variable& v : model.variables()) {
    if (!detail::valid_lp_name(v.name)) throw NameError("illegal LP name '" + v.name + "'");
  }
  for (const Constraint& c : model.constraints()) {
    if (!detail::valid_lp_name(c.name)) throw NameError("illegal LP name '" + c.name + "'");
  }
  if (model.num_variables() == 0) throw NameError("model has no variables");

  std::string out = "\\ treemio model";
  if (!model.tag.empty()) out += " (" + model.tag + ")";
  out += "\n";
  const Objective& obj = model.objective();
  out += obj.sense == ObjSense::Maximize ? "Maximize\n" : "Minimize\n";
  out += " obj:";
  detail::write_terms(out, model, obj.terms);
  if (obj.constant != 0.0) out += (obj.constant < 0 ? " - " : " + ") + detail::fmt17(std::abs(obj.constant));
  out += "\nSubject To\n";
  for (const Constraint& c : model.constraints()) {
    out += " " + c.name + ":";
    detail::write_terms(out, model, c.terms);
    out += std::string(" ") + to_string(c.sense) + " " + detail::fmt17(c.rhs) + "\n";
  }
  out += "Bounds\n";
  for (const Variable& v : model.variables()) {
    const bool lo_inf = std::isinf(v.lower);
    const bool hi_inf = std::isinf(v.upper);
    if (v.type == VarType::Binary && v.lower == 0.0 && v.upper == 1.0) continue;
    if (lo_inf && hi_inf) {
      out += " " + v.name + " free\n";
    } else if (lo_inf) {
      out += " -infinity <= " + v.name + " <= " + detail::fmt17(v.upper) + "\n";
    } else if (hi_inf) {
      if (v.lower != 0.0) out += " " + v.name + " >= " + detail::fmt17(v.lower) + "\n";
    } else {
      out += " " + detail::fmt17(v.lower) + " <= " + v.name + " <= " + detail::fmt17(v.upper) + "\n";
    }
  }
  bool any_binary = false;
  for (const Variable& v : model.variables()) {
    if (v.type != VarType::Binary) continue;
    if (!any_binary) out += "Binaries\n";
    any_binary = true;
    out += " " + v.name + "\n";
  }
  out += "End\n";
  return out;
}

}  // namespace treemio

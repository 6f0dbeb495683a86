#pragma once

// Parser for side constraints written as `c1*w1 + c2*w2 <= b`.
//
//   row   := term { ('+' | '-') term } op number
//   term  := [number '*'] 'w' index      (index is 1-based)
//   op    := '<=' | '>=' | '='
//
// A leading sign is allowed on the first term and on the right-hand side.
// Objectives use the same term syntax over any model variable name, without
// an operator: `2*w2 - 2*z_1_2 + z_1_3`.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <cstdlib>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "treemio/error.hpp"
#include "treemio/formulations.hpp"

namespace treemio {

namespace detail {

class RowLexer {
 public:
  explicit RowLexer(std::string_view text) : s_(text) {}

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool done() {
    skip_ws();
    return pos_ >= s_.size();
  }
  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  bool eat(std::string_view tok) {
    skip_ws();
    if (s_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }
  std::optional<double> number() {
    skip_ws();
    if (pos_ >= s_.size()) return std::nullopt;
    const char c = s_[pos_];
    if (!std::isdigit(static_cast<unsigned char>(c)) && c != '.') return std::nullopt;
    std::string buf(s_.substr(pos_));
    char* end = nullptr;
    double v = std::strtod(buf.c_str(), &end);
    if (end == buf.c_str()) return std::nullopt;
    pos_ += static_cast<std::size_t>(end - buf.c_str());
    return v;
  }
  std::optional<std::string> identifier() {
    skip_ws();
    const std::size_t start = pos_;
    auto alpha = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
    if (pos_ >= s_.size() || !alpha(s_[pos_])) return std::nullopt;
    while (pos_ < s_.size() && (alpha(s_[pos_]) || std::isdigit(static_cast<unsigned char>(s_[pos_])))) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " at offset " + std::to_string(pos_) + " in '" + std::string(s_) + "'");
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses one feature row for an ensemble with `d` features.
inline FeatureRow parse_feature_row(std::string_view text, int d) {
  detail::RowLexer lex(text);
  FeatureRow row;
  row.coeffs.assign(static_cast<std::size_t>(d), 0.0);
  bool first = true;
  while (true) {
    double sign = 1.0;
    if (lex.eat("-")) {
      sign = -1.0;
    } else if (!lex.eat("+") && !first) {
      break;
    }
    double coeff = 1.0;
    if (auto c = lex.number()) {
      coeff = *c;
      if (!lex.eat("*")) lex.fail("expected '*' after coefficient");
    }
    if (!lex.eat("w")) lex.fail("expected feature name w<index>");
    auto idx = lex.number();
    if (!idx || *idx != std::floor(*idx)) lex.fail("expected integer feature index");
    const long i = static_cast<long>(*idx);
    if (i < 1 || i > d) lex.fail("feature w" + std::to_string(i) + " outside w1..w" + std::to_string(d));
    row.coeffs[static_cast<std::size_t>(i - 1)] += sign * coeff;
    first = false;
    const char c = lex.peek();
    if (c != '+' && c != '-') break;
  }
  if (lex.eat("<=")) {
    row.sense = Sense::LessEqual;
  } else if (lex.eat(">=")) {
    row.sense = Sense::GreaterEqual;
  } else if (lex.eat("=")) {
    row.sense = Sense::Equal;
  } else {
    lex.fail("expected one of <=, >=, =");
  }
  double sign = 1.0;
  if (lex.eat("-")) {
    sign = -1.0;
  } else {
    lex.eat("+");
  }
  auto rhs = lex.number();
  if (!rhs) lex.fail("expected right-hand side number");
  row.rhs = sign * *rhs;
  if (!lex.done()) lex.fail("unexpected trailing input");
  return row;
}

/// Parses a linear objective over variable names; repeated names accumulate.
inline std::vector<std::pair<std::string, double>> parse_linear_expr(std::string_view text) {
  detail::RowLexer lex(text);
  std::vector<std::pair<std::string, double>> terms;
  bool first = true;
  while (!lex.done()) {
    double sign = 1.0;
    if (lex.eat("-")) {
      sign = -1.0;
    } else if (!lex.eat("+") && !first) {
      lex.fail("expected '+' or '-'");
    }
    double coeff = 1.0;
    if (auto c = lex.number()) {
      coeff = *c;
      if (!lex.eat("*")) lex.fail("expected '*' after coefficient");
    }
    auto name = lex.identifier();
    if (!name) lex.fail("expected variable name");
    auto it = std::find_if(terms.begin(), terms.end(), [&](const auto& t) { return t.first == *name; });
    if (it == terms.end()) {
      terms.emplace_back(*name, sign * coeff);
    } else {
      it->second += sign * coeff;
    }
    first = false;
  }
  if (terms.empty()) lex.fail("empty expression");
  return terms;
}

}  // namespace treemio

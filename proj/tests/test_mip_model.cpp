#include <gtest/gtest.h>

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "treemio/fixtures.hpp"
#include "treemio/formulations.hpp"
#include "treemio/mip_model.hpp"

using namespace treemio;

namespace {

// Independent reader for the LP subset the writer emits.
struct ParsedLp {
  bool maximize = true;
  std::map<std::string, double> objective;
  struct Row {
    std::map<std::string, double> coeffs;
    std::string op;
    double rhs = 0.0;
  };
  std::vector<std::pair<std::string, Row>> rows;
  std::map<std::string, std::pair<double, double>> bounds;
  std::vector<std::string> binaries;
};

double parse_num(const std::string& s) {
  if (s == "infinity" || s == "+infinity") return kInf;
  if (s == "-infinity") return -kInf;
  return std::stod(s);
}

// Parses "[name:] [-] c v [+|-] c v ... [op rhs]" into coefficient map.
void parse_linear(std::istringstream& in, std::map<std::string, double>& coeffs, std::string* op, double* rhs) {
  std::string tok;
  double sign = 1.0;
  while (in >> tok) {
    if (tok == "+") {
      sign = 1.0;
    } else if (tok == "-") {
      sign = -1.0;
    } else if (tok == "<=" || tok == ">=" || tok == "=") {
      *op = tok;
      in >> tok;
      *rhs = parse_num(tok);
      return;
    } else {
      double c = std::stod(tok);
      std::string var;
      in >> var;
      coeffs[var] += sign * c;
      sign = 1.0;
    }
  }
}

ParsedLp parse_lp(const std::string& text) {
  ParsedLp lp;
  std::istringstream lines(text);
  std::string line, section;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '\\') continue;
    if (line[0] != ' ') {
      section = line;
      if (section == "Minimize") lp.maximize = false;
      continue;
    }
    std::istringstream in(line);
    if (section == "Maximize" || section == "Minimize") {
      std::string name;
      in >> name;
      std::string op;
      double rhs = 0;
      parse_linear(in, lp.objective, &op, &rhs);
    } else if (section == "Subject To") {
      std::string name;
      in >> name;
      name.pop_back();
      ParsedLp::Row row;
      parse_linear(in, row.coeffs, &row.op, &row.rhs);
      lp.rows.emplace_back(name, row);
    } else if (section == "Bounds") {
      std::vector<std::string> t;
      std::string tok;
      while (in >> tok) t.push_back(tok);
      if (t.size() == 2 && t[1] == "free") {
        lp.bounds[t[0]] = {-kInf, kInf};
      } else if (t.size() == 3 && t[1] == ">=") {
        lp.bounds[t[0]] = {parse_num(t[2]), kInf};
      } else if (t.size() == 5) {
        lp.bounds[t[2]] = {parse_num(t[0]), parse_num(t[4])};
      } else {
        ADD_FAILURE() << "unrecognized bound line: " << line;
      }
    } else if (section == "Binaries") {
      std::string name;
      in >> name;
      lp.binaries.push_back(name);
    }
  }
  return lp;
}

void expect_round_trip(const MipModel& m) {
  ParsedLp lp = parse_lp(write_lp(m));
  EXPECT_EQ(lp.maximize, m.objective().sense == ObjSense::Maximize);
  std::map<std::string, double> c;
  for (const Term& t : m.objective().terms) c[m.variable(t.var).name] = t.coeff;
  EXPECT_EQ(lp.objective, c);
  ASSERT_EQ(lp.rows.size(), m.num_constraints());
  for (std::size_t k = 0; k < m.num_constraints(); ++k) {
    const Constraint& row = m.constraints()[k];
    std::map<std::string, double> a;
    for (const Term& t : row.terms) a[m.variable(t.var).name] = t.coeff;
    EXPECT_EQ(lp.rows[k].first, row.name);
    EXPECT_EQ(lp.rows[k].second.coeffs, a) << row.name;
    EXPECT_EQ(lp.rows[k].second.op, to_string(row.sense)) << row.name;
    EXPECT_EQ(lp.rows[k].second.rhs, row.rhs) << row.name;
  }
  std::vector<std::string> bin;
  for (const Variable& v : m.variables()) {
    if (v.type == VarType::Binary) bin.push_back(v.name);
    auto it = lp.bounds.find(v.name);
    std::pair<double, double> b = it == lp.bounds.end() ? std::make_pair(0.0, v.type == VarType::Binary ? 1.0 : kInf)
                                                         : it->second;
    EXPECT_EQ(b.first, v.lower) << v.name;
    EXPECT_EQ(b.second, v.upper) << v.name;
  }
  EXPECT_EQ(lp.binaries, bin);
}

MipModel tiny_model() {
  MipModel m;
  std::size_t x = m.add_variable("x", 0.0, 1.0, VarType::Continuous);
  m.set_objective(ObjSense::Maximize, {{x, 1.0}});
  return m;
}

}  // namespace

TEST(Relax, DropsIntegralityOnly) {
  MipModel m = build(FormulationKind::Projected, reference_fixture("ex3").ensemble);
  ASSERT_EQ(m.num_binaries(), 4u);
  MipModel r = relax(m);
  EXPECT_EQ(r.num_binaries(), 0u);
  EXPECT_EQ(r.num_constraints(), m.num_constraints());
  for (std::size_t j = 0; j < m.num_variables(); ++j) {
    EXPECT_EQ(r.variable(j).lower, m.variable(j).lower);
    EXPECT_EQ(r.variable(j).upper, m.variable(j).upper);
  }
  EXPECT_EQ(write_lp(relax(r)), write_lp(r));
}

TEST(Model, DuplicateTermsMerge) {
  MipModel m;
  std::size_t a = m.add_variable("a", 0, 1, VarType::Continuous);
  std::size_t b = m.add_variable("b", 0, 1, VarType::Continuous);
  m.add_constraint("r", {{b, 1.0}, {a, 2.0}, {b, 3.0}}, Sense::LessEqual, 1.0);
  EXPECT_EQ(m.constraints()[0].terms, (std::vector<Term>{{a, 2.0}, {b, 4.0}}));
  EXPECT_THROW(m.add_variable("a", 0, 1, VarType::Continuous), NameError);
  EXPECT_THROW(m.add_constraint("bad", {{a, kInf}}, Sense::LessEqual, 0.0), Error);
}

TEST(WriteLp, TinyModel) {
  std::string text = write_lp(tiny_model());
  for (const char* s : {"Maximize", "Subject To", "Bounds", "End", "x <= 1"}) {
    EXPECT_NE(text.find(s), std::string::npos) << s;
  }
}

TEST(WriteLp, IllegalName) {
  MipModel m;
  m.add_variable("bad name", 0, 1, VarType::Continuous);
  EXPECT_THROW(write_lp(m), NameError);
}

TEST(WriteLp, MisicDeclaresTwoBinaries) {
  MipModel m = build(FormulationKind::Misic, reference_fixture("ex1").ensemble);
  ParsedLp lp = parse_lp(write_lp(m));
  EXPECT_EQ(lp.binaries, (std::vector<std::string>{"x_1_1", "x_1_2"}));
}

TEST(WriteLp, Deterministic) {
  TreeEnsemble ens = make_random_forest(2, 3, 3, 4);
  EXPECT_EQ(write_lp(build(FormulationKind::ExpsetElbow, ens)), write_lp(build(FormulationKind::ExpsetElbow, ens)));
}

TEST(WriteLp, ParseBackRecoversModel) {
  expect_round_trip(tiny_model());
  for (std::string_view name : kFixtureNames) {
    Fixture f = reference_fixture(name);
    for (FormulationKind k : kAllKinds) expect_round_trip(build_for(f, k));
  }
  TreeEnsemble ens = make_random_forest(3, 2, 4, 21);
  for (FormulationKind k : kAllKinds) expect_round_trip(build(k, ens));
  MipModel minimize = set_objective(build(FormulationKind::Facet, ens), ObjectiveKind::MinY);
  expect_round_trip(minimize);
}

TEST(ModelStats, ProjectedFiveFeatures) {
  TreeEnsemble ens = make_random_ensemble(5, 1, 4, 17);
  ModelStats st = model_stats(build(FormulationKind::Projected, ens));
  EXPECT_EQ(st.num_constraints, 11u);
  EXPECT_EQ(st.num_variables, ens.trees[0].num_leaves() + 5 + 1);
}

TEST(ModelStats, MisicSingleTreeScale) {
  TreeEnsemble ens = make_random_ensemble(2, 1, 4, 3);
  const std::size_t p = ens.trees[0].num_leaves();
  ModelStats st = model_stats(build(FormulationKind::Misic, ens));
  // two rows per split (p - 1 splits), ordering rows, one simplex row;
  // variables are z, x and y_t.
  EXPECT_LE(st.num_constraints, 3 * p);
  EXPECT_GE(st.num_constraints, 2 * (p - 1) + 1);
  EXPECT_LE(st.num_variables, 2 * p + 1);
}

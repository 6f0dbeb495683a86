#include <gtest/gtest.h>

#include <cmath>

#include "treemio/analysis.hpp"
#include "treemio/fixtures.hpp"
#include "treemio/formulations.hpp"
#include "treemio/solver.hpp"
#include "treemio/verify.hpp"

using namespace treemio;

// All formulations share one MIP optimum, which is the oracle's.
TEST(Properties, CrossFormulationEquality) {
  for (std::string_view name : kFixtureNames) {
    Fixture f = reference_fixture(name);
    const double oracle = oracle_optimum(f.ensemble, f.constraints).value;
    for (FormulationKind k : kAllKinds) {
      if (uses_split_indicators(k) && !f.constraints.empty()) continue;
      SolveResult r = solve_mip(build_for(f, k));
      ASSERT_TRUE(r.optimal()) << name << " " << to_string(k);
      EXPECT_NEAR(r.objective, oracle, 1e-6) << name << " " << to_string(k);
    }
    if (f.optimum && f.constraints.empty()) {
      EXPECT_NEAR(oracle, *f.optimum, 1e-12) << name;
    }
  }
  for (int inst = 0; inst < 20; ++inst) {
    const int d = 1 + inst % 3, T = 1 << (inst % 3), depth = 2 + inst % 3;
    TreeEnsemble ens = make_random_forest(d, T, depth, 1000 + inst);
    SplitIndex index = build_split_index(ens);
    const double oracle = oracle_optimum(ens).value;
    for (FormulationKind k : kAllKinds) {
      SolveResult r = solve_mip(build(k, ens, index));
      ASSERT_TRUE(r.optimal());
      EXPECT_NEAR(r.objective, oracle, 1e-6) << "inst " << inst << " " << to_string(k);
    }
  }
}

// LP bounds of the threshold-indicator family tighten as rows are added.
TEST(Properties, BoundNesting) {
  for (int inst = 0; inst < 20; ++inst) {
    TreeEnsemble ens = make_random_forest(1 + inst % 3, 1 + inst % 4, 4, 2000 + inst);
    SplitIndex index = build_split_index(ens);
    auto bound = [&](FormulationKind k) {
      SolveResult r = solve_lp(relax(build(k, ens, index)));
      EXPECT_TRUE(r.optimal());
      return r.objective;
    };
    const double misic = bound(FormulationKind::Misic), expset = bound(FormulationKind::Expset);
    const double elbow = bound(FormulationKind::Elbow), both = bound(FormulationKind::ExpsetElbow);
    EXPECT_LE(both, expset + 1e-6) << inst;
    EXPECT_LE(expset, misic + 1e-6) << inst;
    EXPECT_LE(elbow, misic + 1e-6) << inst;
    EXPECT_LE(both, elbow + 1e-6) << inst;
  }
}

// The projected relaxation of one tree never loses to the MIP; on d = 1 every
// threshold-indicator bound with expset rows is exact.
TEST(Properties, IdealCasesHaveZeroGap) {
  for (int inst = 0; inst < 8; ++inst) {
    TreeEnsemble single = make_random_ensemble(1 + inst % 4, 1, 4, 3000 + inst);
    EXPECT_NEAR(relaxation_gap(single, FormulationKind::Projected).gap_percent, 0.0, 1e-6);
    EXPECT_NEAR(relaxation_gap(single, FormulationKind::Facet).gap_percent, 0.0, 1e-6);
    TreeEnsemble one_d = make_random_forest(1, 1 + inst % 5, 4, 3100 + inst);
    EXPECT_NEAR(relaxation_gap(one_d, FormulationKind::Expset).gap_percent, 0.0, 1e-6);
    EXPECT_NEAR(relaxation_gap(one_d, FormulationKind::ExpsetElbow).gap_percent, 0.0, 1e-6);
  }
}

TEST(Suites, FastSuitesPass) {
  for (std::string_view name : {"examples", "sharp", "lemma2", "sizes", "containment"}) {
    SuiteResult r = run_suite(name, kDefaultSeed);
    EXPECT_TRUE(r.pass()) << name;
    for (const Check& c : r.checks) EXPECT_TRUE(c.pass) << name << ": " << c.label << " " << c.detail;
  }
  EXPECT_THROW(run_suite("nope", 1), Error);
}

TEST(Suites, ExamplesAreFast) {
  SuiteResult r = verify_examples();
  EXPECT_EQ(r.checks.size(), 7u);
  EXPECT_LT(r.seconds, 1.0);
}

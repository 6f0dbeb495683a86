#include <gtest/gtest.h>

#include <cmath>

#include "treemio/analysis.hpp"
#include "treemio/fixtures.hpp"
#include "treemio/formulations.hpp"
#include "treemio/solver.hpp"

using namespace treemio;
using detail::leaf;
using detail::split;

TEST(Oracle, TwoTreeEnsemble) {
  OracleResult r = oracle_optimum(reference_fixture("ex3").ensemble);
  EXPECT_DOUBLE_EQ(r.value, 3.5);
  ASSERT_EQ(r.w.size(), 1u);
  EXPECT_GT(r.w[0], 2.0);
  EXPECT_LE(r.w[0], 3.0);
  EXPECT_EQ(r.cells, 3u);
}

TEST(Oracle, SingleLeaf) {
  EXPECT_DOUBLE_EQ(oracle_optimum(detail::make_ensemble({leaf(7)}, {{0, 1}})).value, 7.0);
}

// With w1 + w2 <= 3 on [0,3]^2 the cell w1 > 2 (score 3) stays reachable,
// e.g. at (2.5, 0.5).
TEST(Oracle, SideConstraint) {
  Fixture f = reference_fixture("ex4");
  OracleResult r = oracle_optimum(f.ensemble, f.constraints);
  EXPECT_EQ(r.cells, 4u);
  EXPECT_DOUBLE_EQ(r.value, 3.0);
  EXPECT_LE(r.w[0] + r.w[1], 3.0 + 1e-9);
  EXPECT_GT(r.w[0], 2.0);
  // A tighter row leaves only the w1 <= 2 cells.
  OracleResult tight = oracle_optimum(f.ensemble, {{{1.0, 1.0}, Sense::LessEqual, 1.5}});
  EXPECT_DOUBLE_EQ(tight.value, 1.0);
}

// w1 <= 2 touches the cell w1 > 2 only on its excluded boundary.
TEST(Oracle, SideConstraintOnThresholdIsOpenOnTheRight) {
  Fixture f = reference_fixture("ex4");
  const std::vector<FeatureRow> rows{{{1.0, 0.0}, Sense::LessEqual, 2.0}};
  OracleResult open = oracle_optimum(f.ensemble, rows);
  EXPECT_DOUBLE_EQ(open.value, 2.0);
  EXPECT_EQ(open.feasible_cells, 2u);
  OracleOptions opts;
  opts.semantics = BoundarySemantics::Closed;
  OracleResult closed = oracle_optimum(f.ensemble, rows, opts);
  EXPECT_DOUBLE_EQ(closed.value, 3.0);
}

TEST(Oracle, Limits) {
  OracleOptions opts;
  opts.max_cells = 2;
  EXPECT_THROW(oracle_optimum(reference_fixture("ex4").ensemble, {}, opts), CellLimit);
  TreeEnsemble ens = reference_fixture("ex1").ensemble;
  ens.domain[0].upper = kInf;
  EXPECT_THROW(oracle_optimum(ens), UnboundedDomain);
}

// Two trees that disagree exactly at a shared threshold. The w-family uses
// closed leaf boxes, so at w = 1 each tree may pick its better side; the
// threshold-indicator family follows the ensemble's routing.
TEST(Oracle, BoundarySemanticsAtSharedThreshold) {
  TreeEnsemble ens = detail::make_ensemble({split(0, 1.0, leaf(5), leaf(0)), split(0, 1.0, leaf(0), leaf(5))}, {{0, 2}});
  OracleOptions closed;
  closed.semantics = BoundarySemantics::Closed;
  const double open_value = oracle_optimum(ens).value;
  const double closed_value = oracle_optimum(ens, {}, closed).value;
  EXPECT_DOUBLE_EQ(open_value, 2.5);
  EXPECT_DOUBLE_EQ(closed_value, 5.0);
  for (FormulationKind k : kAllKinds) {
    SolveResult r = solve_mip(build(k, ens));
    ASSERT_TRUE(r.optimal());
    EXPECT_NEAR(r.objective, uses_split_indicators(k) ? open_value : closed_value, 1e-9) << to_string(k);
  }
}

TEST(Gap, ProjectedSingleTreeIsZero) {
  for (int inst = 0; inst < 5; ++inst) {
    GapReport g = relaxation_gap(make_random_ensemble(1 + inst % 3, 1, 3, 10 + inst), FormulationKind::Projected);
    EXPECT_NEAR(g.gap_percent, 0.0, 1e-6);
  }
}

TEST(Gap, ExpsetOneDimensionalIsZero) {
  for (int T = 1; T <= 5; ++T) {
    GapReport g = relaxation_gap(make_random_forest(1, T, 3, 30 + T), FormulationKind::Expset);
    EXPECT_NEAR(g.gap_percent, 0.0, 1e-6) << "T=" << T;
  }
}

TEST(Gap, MisicNeverBelowExpset) {
  EXPECT_NEAR(relaxation_gap(reference_fixture("ex3").ensemble, FormulationKind::Misic).mip_opt, 3.5, 1e-9);
  int positive = 0;
  for (int seed = 0; seed < 10; ++seed) {
    TreeEnsemble ens = make_random_forest(2, 4, 4, 40 + seed);
    GapReport m = relaxation_gap(ens, FormulationKind::Misic);
    GapReport e = relaxation_gap(ens, FormulationKind::Expset);
    EXPECT_NEAR(m.mip_opt, e.mip_opt, 1e-6) << "seed=" << seed;
    EXPECT_GE(m.gap_percent, e.gap_percent - 1e-6) << "seed=" << seed;
    if (m.gap_percent > 1e-6) ++positive;
  }
  EXPECT_GT(positive, 0);
}

TEST(Gap, Formula) {
  EXPECT_DOUBLE_EQ(gap_percent(3.0, 2.0), 50.0);
  EXPECT_DOUBLE_EQ(gap_percent(1e-9, 0.0), 100.0);
}

TEST(Containment, Fig3a) {
  TreeEnsemble ens = reference_fixture("fig3a").ensemble;
  SplitIndex index = build_split_index(ens);
  MipModel misic = build_misic(ens, index), expset = build_expset(ens, index);
  ContainmentReport in = check_containment(expset, misic);
  EXPECT_TRUE(in.contained);
  EXPECT_LE(in.max_violation, 1e-7);
  ContainmentReport out = check_containment(misic, expset);
  EXPECT_FALSE(out.contained);
  EXPECT_GT(out.max_violation, 1e-6);
  EXPECT_TRUE(check_containment(misic, misic).contained);
}

TEST(Containment, RoleMismatch) {
  TreeEnsemble ens = reference_fixture("ex1").ensemble;
  EXPECT_THROW(check_containment(build(FormulationKind::Projected, ens), build(FormulationKind::Misic, ens)),
               RoleMismatch);
}

TEST(Probe, ProjectedSingleTree) {
  ProbeReport p = probe_integrality(build(FormulationKind::Projected, make_random_ensemble(3, 1, 4, 5)), {Role::Z}, 200, 1);
  EXPECT_EQ(p.fractional, 0);
  EXPECT_EQ(p.failed, 0);
  EXPECT_EQ(p.solved, 200);
}

TEST(Probe, MisicSegmentTreeFindsFractional) {
  ProbeReport p = probe_integrality(build(FormulationKind::Misic, reference_fixture("ex1").ensemble), {Role::X, Role::Z}, 200, 1);
  EXPECT_GE(p.fractional, 1);
  EXPECT_FALSE(p.first_fractional.empty());
}

TEST(Probe, ExpsetElbowOneDimensional) {
  for (int T = 1; T <= 4; ++T) {
    ProbeReport p = probe_integrality(build(FormulationKind::ExpsetElbow, make_random_forest(1, T, 3, 50 + T)),
                                      {Role::X, Role::Z}, 100, T);
    EXPECT_EQ(p.fractional, 0) << "T=" << T;
  }
}

TEST(Tu, SmallMatrices) {
  EXPECT_TRUE(check_tu({{1, -1}, {0, 1}}, 2));
  EXPECT_FALSE(check_tu({{1, 1}, {-1, 1}}, 2));
  EXPECT_THROW(check_tu({{2}}, 1), EntryRange);
  IntMatrix big(40, std::vector<int>(40, 0));
  EXPECT_THROW(check_tu(big, 9), SizeLimit);
}

TEST(Tu, TwoTreeOneDimensionalEnsemble) {
  TreeEnsemble ens = detail::make_ensemble(
      {split(0, 0.5, leaf(1), leaf(2)), split(0, 0.3, leaf(3), split(0, 0.7, leaf(1), leaf(0)))}, {{0, 1}});
  SplitIndex index = build_split_index(ens);
  IntMatrix a = expset_tu_matrix(ens, index);
  EXPECT_TRUE(check_tu(a, 9));
  EXPECT_THROW(expset_tu_matrix(reference_fixture("ex4").ensemble, build_split_index(reference_fixture("ex4").ensemble)),
               DimensionError);
}

TEST(Lemma2, Implied) {
  Fixture f = reference_fixture("elbow_segment");
  SplitIndex index = build_split_index(f.ensemble);
  Lemma2Report r = check_implication_lemma2(f.ensemble, index, *index.find(0, 0, 2.0), *index.find(0, 0, 5.0));
  EXPECT_TRUE(r.right_parent);
  EXPECT_TRUE(r.covering);
  EXPECT_TRUE(r.implied);
  EXPECT_LE(r.violation, 1e-7);
}

TEST(Lemma2, NotImplied) {
  Fixture f = reference_fixture("fig3b");
  SplitIndex index = build_split_index(f.ensemble);
  Lemma2Report r = check_implication_lemma2(f.ensemble, index, *index.find(0, 1, 4.0), *index.find(0, 1, 2.0));
  EXPECT_FALSE(r.right_parent);
  EXPECT_FALSE(r.covering);
  EXPECT_GT(r.violation, 1e-4);
}

TEST(Lemma2, NotNested) {
  Fixture f = reference_fixture("fig3a");
  SplitIndex index = build_split_index(f.ensemble);
  EXPECT_THROW(check_implication_lemma2(f.ensemble, index, *index.find(0, 1, 5.0), *index.find(0, 1, 2.0)), NotNested);
}

TEST(Sharpness, TwoTreeEnsemble) {
  TreeEnsemble ens = reference_fixture("ex3").ensemble;
  SharpnessReport a = check_sharpness_1d(ens, 1.0, 3.25, FormulationKind::Projected);
  EXPECT_TRUE(a.in_projection);
  EXPECT_FALSE(a.in_hull);
  SharpnessReport b = check_sharpness_1d(ens, 2.5, 3.5, FormulationKind::Projected);
  EXPECT_TRUE(b.in_projection);
  EXPECT_TRUE(b.in_hull);
  SharpnessReport c = check_sharpness_1d(ens, 2.5, 9.0, FormulationKind::Projected);
  EXPECT_FALSE(c.in_projection);
  EXPECT_FALSE(c.in_hull);
}

TEST(Sharpness, Errors) {
  EXPECT_THROW(check_sharpness_1d(reference_fixture("ex4").ensemble, 1, 1, FormulationKind::Projected), DimensionError);
  EXPECT_THROW(check_sharpness_1d(reference_fixture("ex3").ensemble, 1, 1, FormulationKind::Misic), UnsupportedFormulation);
}

TEST(Vertices, EnumerationFindsFixtureVertex) {
  Fixture f = reference_fixture("ex1");
  MipModel m = relax(build(FormulationKind::Misic, f.ensemble));
  std::vector<double> want = to_dense(m, complete_point(m, f.vertices[0].values));
  auto verts = enumerate_vertices(m);
  bool found = false;
  for (const auto& v : verts) {
    EXPECT_TRUE(is_vertex(m, v));
    bool eq = true;
    for (std::size_t j = 0; j < v.size(); ++j) eq = eq && std::abs(v[j] - want[j]) < 1e-9;
    found = found || eq;
  }
  EXPECT_TRUE(found);
}

TEST(Reports, JsonAndText) {
  GapReport g = relaxation_gap(reference_fixture("ex3").ensemble, FormulationKind::Misic);
  nlohmann::json j = to_json(g);
  EXPECT_EQ(j["kind"], "misic");
  EXPECT_NEAR(j["mip_opt"].get<double>(), 3.5, 1e-9);
  std::string text = to_text(j);
  EXPECT_NE(text.find("mip_opt"), std::string::npos);
  EXPECT_TRUE(to_json(oracle_optimum(reference_fixture("ex3").ensemble)).contains("value"));
}

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "treemio/analysis.hpp"
#include "treemio/fixtures.hpp"
#include "treemio/rng.hpp"
#include "treemio/solver.hpp"

using namespace treemio;

TEST(Pcg32, ReferenceVector) {
  Pcg32 rng(42, 54);
  EXPECT_EQ(rng.next(), 0xa15c02b7u);
  EXPECT_EQ(rng.next(), 0x7b47f409u);
  EXPECT_EQ(rng.next(), 0xba1d3330u);
}

TEST(Pcg32, BoundedAndUniformRanges) {
  Pcg32 rng(1);
  for (int k = 0; k < 10000; ++k) {
    EXPECT_LT(rng.below(7), 7u);
    double u = rng.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  std::uniform_int_distribution<int> dist(0, 3);
  EXPECT_LE(dist(rng), 3);  // usable as a standard URBG
}

TEST(TriangleData, TargetFormulaWithoutNoise) {
  for (int d : {1, 3}) {
    Dataset data = gen_triangle_data(d, 50, false, 3);
    for (std::size_t k = 0; k < data.size(); ++k) {
      double r = 0.0;
      for (double w : data.X[k]) {
        EXPECT_GE(w, -1.0);
        EXPECT_LE(w, 1.0);
        r += 1.0 - std::abs(w);
      }
      EXPECT_DOUBLE_EQ(data.r[k], r);
    }
  }
}

TEST(TriangleData, NoisyTargetsInRange) {
  Dataset data = gen_triangle_data(2, 200, true, 9);
  for (double r : data.r) {
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 4.0);
  }
}

TEST(TriangleData, Deterministic) {
  Dataset a = gen_triangle_data(2, 20, true, 11), b = gen_triangle_data(2, 20, true, 11);
  EXPECT_EQ(a.X, b.X);
  EXPECT_EQ(a.r, b.r);
}

TEST(Cart, TwoPointsSplitAtMidpoint) {
  Dataset data;
  data.X = {{0.0}, {1.0}};
  data.r = {0.0, 1.0};
  data.domain = {{-1.0, 2.0}};
  DecisionTree tree = train_cart(data, 1);
  const Node& root = tree.node(tree.root);
  ASSERT_FALSE(root.leaf);
  EXPECT_EQ(root.threshold, 0.5);
  EXPECT_EQ(tree.node(root.left).value, 0.0);
  EXPECT_EQ(tree.node(root.right).value, 1.0);
}

TEST(Cart, ConstantTargetIsDegenerate) {
  Dataset data;
  data.X = {{0.0}, {0.5}, {1.0}};
  data.r = {2.0, 2.0, 2.0};
  data.domain = {{-1.0, 2.0}};
  CartReport report;
  DecisionTree tree = train_cart(data, 3, 1, &report);
  EXPECT_TRUE(report.degenerate);
  ASSERT_EQ(tree.num_leaves(), 1u);
  EXPECT_EQ(tree.node(tree.root).value, 2.0);
}

TEST(Cart, PredictionsAreInLeafMeans) {
  Dataset data = gen_triangle_data(2, 40, true, 5);
  DecisionTree tree = train_cart(data, 3);
  const double lo = *std::min_element(data.r.begin(), data.r.end());
  const double hi = *std::max_element(data.r.begin(), data.r.end());
  std::map<int, std::pair<double, int>> sums;
  for (std::size_t k = 0; k < data.size(); ++k) {
    int leaf = leaf_of(tree, data.X[k]);
    sums[leaf].first += data.r[k];
    sums[leaf].second += 1;
  }
  for (const auto& [leaf, s] : sums) {
    const double v = tree.node(leaf).value;
    EXPECT_NEAR(v, s.first / s.second, 1e-12);
    EXPECT_GE(v, lo);
    EXPECT_LE(v, hi);
  }
}

TEST(Cart, SmallTriangleTreeMatchesOracle) {
  Dataset data = gen_triangle_data(1, 4, false, 13);
  TreeEnsemble ens;
  ens.num_features = 1;
  ens.domain = data.domain;
  ens.trees.push_back(train_cart(data, 2));
  ens.weights = {1.0};
  const double oracle = oracle_optimum(ens).value;
  for (FormulationKind k : kAllKinds) {
    SolveResult r = solve_mip(build(k, ens));
    ASSERT_TRUE(r.optimal()) << to_string(k);
    EXPECT_NEAR(r.objective, oracle, 1e-6) << to_string(k);
  }
}

TEST(Forest, WeightsAndCount) {
  TreeEnsemble ens = train_forest(gen_triangle_data(2, 30, true, 1), 4, 3, 77);
  ASSERT_EQ(ens.size(), 4u);
  for (double w : ens.weights) EXPECT_DOUBLE_EQ(w, 0.25);
}

TEST(Forest, SingleTreeOnTwoRows) {
  Dataset data;
  data.X = {{0.0}, {1.0}};
  data.r = {0.0, 1.0};
  data.domain = {{-1.0, 2.0}};
  TreeEnsemble ens = train_forest(data, 1, 2, 3);
  ASSERT_EQ(ens.size(), 1u);
  EXPECT_DOUBLE_EQ(ens.weights[0], 1.0);
}

TEST(Forest, Deterministic) {
  EXPECT_EQ(to_json_text(make_random_forest(2, 3, 3, 8)), to_json_text(make_random_forest(2, 3, 3, 8)));
}

TEST(Forest, MipMatchesOracleOnSmallInstances) {
  for (int d = 1; d <= 2; ++d) {
    for (int T : {1, 2, 4}) {
      for (int seed = 0; seed < 3; ++seed) {
        TreeEnsemble ens = make_random_forest(d, T, 3, 500 + seed);
        const double open = oracle_optimum(ens).value;
        OracleOptions opts;
        opts.semantics = BoundarySemantics::Closed;
        const double closed = oracle_optimum(ens, {}, opts).value;
        SolveResult w = solve_mip(build(FormulationKind::Projected, ens));
        SolveResult x = solve_mip(build(FormulationKind::Misic, ens));
        ASSERT_TRUE(w.optimal() && x.optimal());
        EXPECT_NEAR(w.objective, closed, 1e-6) << "d=" << d << " T=" << T << " seed=" << seed;
        EXPECT_NEAR(x.objective, open, 1e-6) << "d=" << d << " T=" << T << " seed=" << seed;
      }
    }
  }
}

TEST(Fixtures, Ex3) {
  Fixture f = reference_fixture("ex3");
  ASSERT_EQ(f.ensemble.size(), 2u);
  EXPECT_EQ(f.ensemble.trees[0].node(0).threshold, 1.0);
  EXPECT_EQ(f.ensemble.trees[1].node(0).threshold, 2.0);
  ASSERT_EQ(f.graph_points.size(), 2u);
  EXPECT_EQ(f.graph_points[0].w, 1.0);
  EXPECT_EQ(f.graph_points[0].y, 3.25);
}

TEST(Fixtures, Ex1AndEx2) {
  Fixture ex1 = reference_fixture("ex1");
  ASSERT_EQ(ex1.vertices.size(), 1u);
  EXPECT_EQ(ex1.vertices[0].values.at("z_1_2"), 0.5);
  EXPECT_EQ(ex1.vertices[0].values.at("x_1_1"), 0.5);
  Fixture ex2 = reference_fixture("ex2");
  EXPECT_EQ(ex2.options.bigm.fixed_m, 15.0);
  EXPECT_NEAR(ex2.vertices[0].values.at("a_1_0_l"), 1.0 / 3.0, 1e-15);
}

TEST(Fixtures, UnknownName) { EXPECT_THROW(reference_fixture("ex9"), UnknownFixture); }

#include <gtest/gtest.h>

#include <vector>

#include "treemio/fixtures.hpp"
#include "treemio/rng.hpp"
#include "treemio/tree_model.hpp"

using namespace treemio;

namespace {

const char* kSegmentJson = R"({
  "num_features": 1, "domain": [[0, 10]],
  "trees": [{"root": 0, "nodes": [
    {"id": 0, "feature": 0, "threshold": 5, "left": 1, "right": 4},
    {"id": 1, "feature": 0, "threshold": 2, "left": 2, "right": 3},
    {"id": 2, "value": 1}, {"id": 3, "value": 2}, {"id": 4, "value": 3}]}]})";

const char* kSingleLeafJson = R"({"num_features": 1, "domain": [[0, 1]],
  "trees": [{"root": 0, "nodes": [{"id": 0, "value": 7}]}]})";

std::vector<int> leaf_ids(const SplitInfo& s, std::vector<int> SplitInfo::*set) { return s.*set; }

}  // namespace

TEST(ParseEnsemble, SegmentTree) {
  TreeEnsemble ens = parse_ensemble(kSegmentJson);
  EXPECT_EQ(ens.size(), 1u);
  EXPECT_EQ(ens.num_features, 1);
  EXPECT_EQ(ens.trees[0].num_leaves(), 3u);
  SplitIndex index = build_split_index(ens);
  EXPECT_EQ(index.K(0), 2);
  EXPECT_DOUBLE_EQ(ens.weight(0), 1.0);
}

TEST(ParseEnsemble, SingleLeaf) {
  TreeEnsemble ens = parse_ensemble(kSingleLeafJson);
  EXPECT_EQ(ens.trees[0].num_leaves(), 1u);
  EXPECT_TRUE(build_split_index(ens).splits.empty());
}

TEST(ParseEnsemble, ThresholdOnBoundaryIsDomainError) {
  const char* json = R"({"num_features": 1, "domain": [[0, 10]], "trees": [{"root": 0, "nodes": [
    {"id": 0, "feature": 0, "threshold": 10, "left": 1, "right": 2},
    {"id": 1, "value": 1}, {"id": 2, "value": 2}]}]})";
  EXPECT_THROW(parse_ensemble(json), DomainError);
}

TEST(ParseEnsemble, EmptyDomainIsDomainError) {
  EXPECT_THROW(parse_ensemble(R"({"num_features": 1, "domain": [[1, 1]],
    "trees": [{"root": 0, "nodes": [{"id": 0, "value": 7}]}]})"),
               DomainError);
}

TEST(ParseEnsemble, SchemaErrors) {
  EXPECT_THROW(parse_ensemble("not json"), SchemaError);
  EXPECT_THROW(parse_ensemble(R"({"domain": [[0, 1]], "trees": []})"), SchemaError);
  EXPECT_THROW(parse_ensemble(R"({"num_features": 1, "domain": [[0, 1]],
    "trees": [{"root": 0, "nodes": [{"id": 0, "value": "x"}]}]})"),
               SchemaError);
}

TEST(ParseEnsemble, StructureErrors) {
  // cycle: 0 -> 1 -> 0
  EXPECT_THROW(parse_ensemble(R"({"num_features": 1, "domain": [[0, 10]], "trees": [{"root": 0, "nodes": [
    {"id": 0, "feature": 0, "threshold": 5, "left": 1, "right": 2},
    {"id": 1, "feature": 0, "threshold": 2, "left": 0, "right": 2},
    {"id": 2, "value": 1}]}]})"),
               StructureError);
  // orphan node 3
  EXPECT_THROW(parse_ensemble(R"({"num_features": 1, "domain": [[0, 10]], "trees": [{"root": 0, "nodes": [
    {"id": 0, "feature": 0, "threshold": 5, "left": 1, "right": 2},
    {"id": 1, "value": 1}, {"id": 2, "value": 2}, {"id": 3, "value": 3}]}]})"),
               StructureError);
}

TEST(Validate, ValidTreeHasNoDiagnostics) { EXPECT_TRUE(validate_json(kSegmentJson).empty()); }

TEST(Validate, LeafMissingScore) {
  TreeEnsemble ens = parse_ensemble(kSegmentJson);
  ens.trees[0].nodes[2].value = std::numeric_limits<double>::quiet_NaN();
  Diagnostics d = validate(ens);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].kind, DiagnosticKind::Structure);
}

TEST(Validate, FeatureOutOfRange) {
  TreeEnsemble ens = reference_fixture("ex4").ensemble;
  ens.trees[0].nodes[0].feature = 5;
  Diagnostics d = validate(ens);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].kind, DiagnosticKind::Schema);
}

TEST(ExtractLeaves, SegmentTree) {
  auto boxes = extract_leaves(parse_ensemble(kSegmentJson), 0);
  ASSERT_EQ(boxes.size(), 3u);
  EXPECT_EQ(boxes[0].lower[0], 0.0);
  EXPECT_EQ(boxes[0].upper[0], 2.0);
  EXPECT_FALSE(boxes[0].lower_open[0]);
  EXPECT_EQ(boxes[1].lower[0], 2.0);
  EXPECT_EQ(boxes[1].upper[0], 5.0);
  EXPECT_TRUE(boxes[1].lower_open[0]);
  EXPECT_EQ(boxes[2].lower[0], 5.0);
  EXPECT_EQ(boxes[2].upper[0], 10.0);
  EXPECT_TRUE(boxes[2].lower_open[0]);
  EXPECT_EQ(boxes[2].score, 3.0);
}

TEST(ExtractLeaves, TwoFeatureTree) {
  auto boxes = extract_leaves(reference_fixture("ex4").ensemble, 0);
  ASSERT_EQ(boxes.size(), 3u);
  const std::vector<std::vector<double>> u{{2, 2}, {2, 3}, {3, 3}}, b{{0, 0}, {0, 2}, {2, 0}};
  for (std::size_t l = 0; l < 3; ++l) {
    EXPECT_EQ(boxes[l].upper, u[l]) << "leaf " << l;
    EXPECT_EQ(boxes[l].lower, b[l]) << "leaf " << l;
  }
}

TEST(ExtractLeaves, SingleLeaf) {
  auto boxes = extract_leaves(parse_ensemble(kSingleLeafJson), 0);
  ASSERT_EQ(boxes.size(), 1u);
  EXPECT_EQ(boxes[0].lower[0], 0.0);
  EXPECT_EQ(boxes[0].upper[0], 1.0);
}

TEST(Evaluate, TwoTreeEnsemble) {
  TreeEnsemble ens = reference_fixture("ex3").ensemble;
  EXPECT_DOUBLE_EQ(evaluate(ens, std::vector<double>{1.5}), 3.0);
  EXPECT_DOUBLE_EQ(evaluate(ens, std::vector<double>{2.5}), 3.5);
  // ties go left
  EXPECT_DOUBLE_EQ(evaluate(ens, std::vector<double>{1.0}), 1.5);
  EXPECT_THROW(evaluate(ens, std::vector<double>{3.5}), OutOfDomain);
}

TEST(Evaluate, SingleLeaf) {
  TreeEnsemble ens = parse_ensemble(kSingleLeafJson);
  for (double w : {0.0, 0.3, 1.0}) EXPECT_EQ(evaluate(ens, std::vector<double>{w}), 7.0);
}

TEST(SplitIndex, Fig3aBelow) {
  TreeEnsemble ens = reference_fixture("fig3a").ensemble;
  SplitIndex index = build_split_index(ens);
  auto s = index.find(0, 1, 5.0);
  ASSERT_TRUE(s);
  EXPECT_EQ(leaf_ids(index.splits[*s], &SplitInfo::left), (std::vector<int>{2}));
  EXPECT_EQ(leaf_ids(index.splits[*s], &SplitInfo::below), (std::vector<int>{0, 2}));
}

TEST(SplitIndex, Fig3bLeftParent) {
  TreeEnsemble ens = reference_fixture("fig3b").ensemble;
  SplitIndex index = build_split_index(ens);
  std::size_t s = *index.find(0, 1, 4.0), parent = *index.find(0, 1, 2.0);
  EXPECT_EQ(index.splits[s].left_parent, (std::vector<std::size_t>{parent}));
  EXPECT_TRUE(index.splits[s].right_parent.empty());
}

TEST(SplitIndex, SingleSplitBaseCase) {
  TreeEnsemble ens = reference_fixture("ex3").ensemble;
  SplitIndex index = build_split_index(ens);
  for (const SplitInfo& s : index.splits) {
    if (s.tree != 0) continue;
    EXPECT_EQ(s.below, s.left);
    EXPECT_EQ(s.above, s.right);
    EXPECT_TRUE(s.left_parent.empty());
    EXPECT_TRUE(s.right_parent.empty());
  }
}

TEST(SplitIndex, RanksAscendAndPoolAcrossTrees) {
  TreeEnsemble ens = reference_fixture("ex3").ensemble;
  SplitIndex index = build_split_index(ens);
  EXPECT_EQ(index.thresholds[0], (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(index.splits[*index.find(0, 0, 1.0)].rank, 1);
  EXPECT_EQ(index.splits[*index.find(1, 0, 2.0)].rank, 2);
}

// Half-open cells tile the domain and agree with traversal.
TEST(TreeProperties, PartitionAndTraversal) {
  Pcg32 rng(7);
  for (int inst = 0; inst < 6; ++inst) {
    TreeEnsemble ens = make_random_ensemble(1 + inst % 3, 2, 4, 40 + inst);
    for (std::size_t t = 0; t < ens.size(); ++t) {
      auto boxes = extract_leaves(ens, t);
      for (int k = 0; k < 1000; ++k) {
        std::vector<double> w(static_cast<std::size_t>(ens.num_features));
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(ens.domain[i].lower, ens.domain[i].upper);
        int hits = 0;
        int hit_node = -1;
        for (const LeafBox& b : boxes) {
          if (b.contains(w)) {
            ++hits;
            hit_node = b.node;
          }
        }
        ASSERT_EQ(hits, 1);
        EXPECT_EQ(hit_node, leaf_of(ens.trees[t], w));
      }
    }
  }
}

// Leaves left of a split sit below its threshold; leaves right of it above.
TEST(TreeProperties, SplitSidesRespectThresholds) {
  for (int inst = 0; inst < 10; ++inst) {
    TreeEnsemble ens = make_random_forest(1 + inst % 3, 3, 4, 90 + inst);
    SplitIndex index = build_split_index(ens);
    for (const SplitInfo& s : index.splits) {
      auto boxes = extract_leaves(ens, s.tree);
      const auto f = static_cast<std::size_t>(s.feature);
      for (int l : s.left) EXPECT_LE(boxes[static_cast<std::size_t>(l)].upper[f], s.threshold);
      for (int l : s.right) EXPECT_GE(boxes[static_cast<std::size_t>(l)].lower[f], s.threshold);
      for (int l : s.left) EXPECT_TRUE(std::binary_search(s.below.begin(), s.below.end(), l));
      for (int l : s.right) EXPECT_TRUE(std::binary_search(s.above.begin(), s.above.end(), l));
    }
  }
}

TEST(Json, FixturesRoundTripExactly) {
  for (std::string_view name : kFixtureNames) {
    TreeEnsemble ens = reference_fixture(name).ensemble;
    std::string text = to_json_text(ens);
    EXPECT_EQ(to_json_text(parse_ensemble(text)), text) << name;
  }
}

TEST(Json, RandomForestRoundTripsBitExactly) {
  TreeEnsemble ens = make_random_forest(3, 4, 4, 5);
  TreeEnsemble back = parse_ensemble(to_json_text(ens));
  ASSERT_EQ(back.size(), ens.size());
  for (std::size_t t = 0; t < ens.size(); ++t) {
    ASSERT_EQ(back.trees[t].nodes.size(), ens.trees[t].nodes.size());
    for (std::size_t k = 0; k < ens.trees[t].nodes.size(); ++k) {
      const Node &a = ens.trees[t].nodes[k], &b = back.trees[t].nodes[k];
      if (a.leaf) {
        EXPECT_EQ(a.value, b.value);
      } else {
        EXPECT_EQ(a.threshold, b.threshold);
      }
    }
  }
}

#include <gtest/gtest.h>

#include "support.hpp"

using namespace facade;
using support::ecp;

namespace {

FacadeObject box(double cx, double cy, double w, double h, ClassId cls = 0) {
  FacadeObject o;
  o.class_id = cls;
  o.center = {cx, cy};
  o.size = {w, h};
  return o;
}

std::vector<FacadeObject> grid3x3() {
  std::vector<FacadeObject> v;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) v.push_back(box(20 + 30 * c, 20 + 40 * r, 10, 16));
  }
  return v;
}

SymmetryGroup all_of(std::size_t n, Axis axis) {
  SymmetryGroup g{0, axis, {}};
  for (std::size_t i = 0; i < n; ++i) g.members.push_back(i);
  return g;
}

}  // namespace

TEST(Grouping, GridGivesThreeRowsAndThreeColumns) {
  const auto objs = grid3x3();
  const auto rows = group_objects(objs, Axis::Horizontal, 0.5);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& g : rows) EXPECT_EQ(g.members.size(), 3u);
  EXPECT_EQ(rows[0].members, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(group_objects(objs, Axis::Vertical, 0.5).size(), 3u);
}

TEST(Grouping, SingletonAndIsolatedRow) {
  std::vector<FacadeObject> objs = {box(10, 10, 8, 10)};
  const auto g = group_objects(objs, Axis::Horizontal, 0.5);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].members.size(), 1u);

  objs = {box(10, 10, 8, 10), box(30, 11, 8, 10), box(50, 10 + 100, 8, 10)};
  const auto rows = group_objects(objs, Axis::Horizontal, 0.5);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].members, (std::vector<std::size_t>{2}));
}

TEST(Grouping, ClassesNeverMix) {
  std::vector<FacadeObject> objs = {box(10, 10, 8, 10, 0), box(30, 10, 8, 10, 2)};
  EXPECT_EQ(group_objects(objs, Axis::Horizontal, 0.5).size(), 2u);
}

TEST(Score, GapAndSizeVariances) {
  std::vector<FacadeObject> objs = {box(0, 5, 8, 8), box(10, 5, 8, 8), box(20, 5, 8, 8), box(42, 5, 8, 8)};
  EXPECT_DOUBLE_EQ(center_score(objs, all_of(4, Axis::Horizontal)), 32.0);

  objs = {box(0, 5, 8, 10), box(10, 5, 12, 10)};
  EXPECT_DOUBLE_EQ(size_score(objs, all_of(2, Axis::Horizontal)), 4.0);
  EXPECT_DOUBLE_EQ(center_score(objs, all_of(2, Axis::Horizontal)), 0.0);
}

TEST(Score, PerfectGridScoresZero) {
  const auto objs = grid3x3();
  for (const auto& g : group_objects(objs, Axis::Horizontal, 0.5)) {
    EXPECT_DOUBLE_EQ(score(objs, g, 100.0, 4.0).t, 0.0);
  }
}

TEST(Score, SigmoidMidpoint) {
  EXPECT_DOUBLE_EQ(sigmoid_weight(400.0, 100.0, 4.0), 0.5);
  EXPECT_LT(sigmoid_weight(0.0, 100.0, 4.0), 0.02);
  EXPECT_GT(sigmoid_weight(1e6, 100.0, 4.0), 0.999);
}

TEST(Score, UnsquaredSpacingCancels) {
  std::vector<FacadeObject> objs = {box(0, 5, 8, 8), box(10, 5, 8, 8), box(20, 5, 8, 8), box(42, 5, 8, 8)};
  EXPECT_NEAR(center_score(objs, all_of(4, Axis::Horizontal), false), 0.0, 1e-12);
}

TEST(Axis, LowerScoreWinsAndTiesGoVertical) {
  EXPECT_EQ(choose_axis(3.0, 7.0), Axis::Horizontal);
  EXPECT_EQ(choose_axis(7.0, 3.0), Axis::Vertical);
  EXPECT_EQ(choose_axis(5.0, 5.0), Axis::Vertical);
}

TEST(Axis, SingletonGroupsCarryNoWeight) {
  const std::vector<SymmetryGroup> groups = {{0, Axis::Horizontal, {0}}, {0, Axis::Horizontal, {1, 2}}};
  const std::vector<SymmetryScore> scores = {{0, 0, 100.0, 0}, {0, 0, 6.0, 0}};
  EXPECT_DOUBLE_EQ(aggregate_t(groups, scores), 6.0);
  EXPECT_TRUE(std::isinf(aggregate_t(std::span(groups).first(1), std::span(scores).first(1))));
}

TEST(Refine, WeightOneIsIdentityAndZeroCollapses) {
  std::vector<FacadeObject> objs = {box(0, 5, 8, 10), box(11, 7, 12, 14), box(19, 3, 10, 12)};
  const auto g = all_of(3, Axis::Horizontal);
  const auto same = refine(objs, g, 1.0);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(same[i].center, objs[i].center);
    EXPECT_EQ(same[i].size, objs[i].size);
  }
  const auto flat = refine(objs, g, 0.0);
  for (const auto& o : flat) {
    EXPECT_DOUBLE_EQ(o.center.y, 5.0);
    EXPECT_DOUBLE_EQ(o.size.x, 10.0);
    EXPECT_DOUBLE_EQ(o.size.y, 12.0);
  }
  EXPECT_DOUBLE_EQ(flat[1].center.x - flat[0].center.x, flat[2].center.x - flat[1].center.x);
  EXPECT_NEAR(score(flat, g, 1.0, 4.0).t, 0.0, 1e-12);
}

TEST(Refine, HalfWeightHalvesTheSpread) {
  std::vector<FacadeObject> objs = {box(0, 5, 8, 10), box(10, 5, 12, 10)};
  const auto r = refine(objs, all_of(2, Axis::Horizontal), 0.5);
  EXPECT_DOUBLE_EQ(r[0].size.x, 9.0);
  EXPECT_DOUBLE_EQ(r[1].size.x, 11.0);
}

TEST(Refine, VarianceScalesWithSquaredWeight) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<FacadeObject> objs;
    for (int k = 0; k < 5; ++k) objs.push_back(box(20 * k + n(rng), 30 + n(rng), 10 + n(rng), 14 + n(rng)));
    const auto g = all_of(5, Axis::Horizontal);
    const double before = score(objs, g, 1.0, 4.0).t;
    const double w = 0.3;
    const double after = score(refine(objs, g, w), g, 1.0, 4.0).t;
    EXPECT_NEAR(after, w * w * before, 1e-9 * (1 + before));
  }
}

TEST(Layout, JitteredGridImproves) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 2.0);
  auto objs = grid3x3();
  for (auto& o : objs) {
    o.center.x += n(rng);
    o.center.y += n(rng);
  }
  const auto layout = refine_layout(objs, {});
  ASSERT_EQ(layout.objects.size(), objs.size());
  ASSERT_FALSE(layout.groups.empty());
  for (const auto& g : layout.groups) EXPECT_LE(g.after.t, g.before.t + 1e-9);
  EXPECT_TRUE(std::any_of(layout.groups.begin(), layout.groups.end(),
                          [](const auto& g) { return g.after.t < g.before.t; }));
}

TEST(Layout, EmptyInputAndDisabledClass) {
  EXPECT_TRUE(refine_layout(std::vector<FacadeObject>{}, {}).objects.empty());
  auto objs = grid3x3();
  objs[0].center.x += 3;
  SymmetryConfig cfg;
  cfg.disabled_classes = {0};
  const auto layout = refine_layout(objs, cfg);
  EXPECT_EQ(layout.objects[0].center, objs[0].center);
  EXPECT_TRUE(layout.groups.empty());
}

TEST(Layout, ReportJsonHasGroups) {
  const auto layout = refine_layout(grid3x3(), {});
  const auto j = symmetry_report_to_json(layout, ecp());
  EXPECT_EQ(j["classes"].size(), 1u);
  EXPECT_EQ(j["groups"].size(), 3u);
  EXPECT_EQ(j["classes"][0]["class"], "window");
}

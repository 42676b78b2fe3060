#include <gtest/gtest.h>

#include "support.hpp"

using namespace facade;
using support::ecp;

namespace {

// Truth: top two rows window, bottom two wall. Prediction misses the second row.
std::pair<LabelMap, LabelMap> four_by_four() {
  LabelMap truth(4, 4, 1), pred(4, 4, 1);
  for (int x = 0; x < 4; ++x) {
    truth(x, 0) = truth(x, 1) = 0;
    pred(x, 0) = 0;
  }
  return {pred, truth};
}

}  // namespace

TEST(Confusion, CountsAndDerivedTerms) {
  const auto [pred, truth] = four_by_four();
  const auto c = confusion(pred, truth, ecp());
  EXPECT_EQ(c.total(), 16);
  EXPECT_EQ(c.at(0, 0), 4);
  EXPECT_EQ(c.at(0, 1), 4);
  EXPECT_EQ(c.at(1, 1), 8);
  EXPECT_EQ(c.tp(0), 4);
  EXPECT_EQ(c.fn(0), 4);
  EXPECT_EQ(c.fp(1), 4);
  EXPECT_EQ(c.trace(), 12);
}

TEST(Metrics, HandComputedValues) {
  const auto [pred, truth] = four_by_four();
  const auto r = evaluate(pred, truth, ecp());
  EXPECT_DOUBLE_EQ(*r.pixel_accuracy[0], 0.5);
  EXPECT_DOUBLE_EQ(*r.pixel_accuracy[1], 1.0);
  EXPECT_DOUBLE_EQ(*r.iou[0], 0.5);
  EXPECT_DOUBLE_EQ(*r.iou[1], 8.0 / 12.0);
  EXPECT_DOUBLE_EQ(r.total_accuracy, 0.75);
  EXPECT_DOUBLE_EQ(r.mean_iou, (0.5 + 8.0 / 12.0) / 2);
  for (std::size_t c = 2; c < ecp().size(); ++c) {
    EXPECT_FALSE(r.iou[c]);
    EXPECT_FALSE(r.pixel_accuracy[c]);
  }
}

TEST(Metrics, PerfectAndDisjoint) {
  const auto [pred, truth] = four_by_four();
  const auto perfect = evaluate(truth, truth, ecp());
  EXPECT_DOUBLE_EQ(perfect.total_accuracy, 1.0);
  EXPECT_DOUBLE_EQ(perfect.mean_iou, 1.0);
  const auto none = evaluate(LabelMap(4, 4, 2), LabelMap(4, 4, 3), ecp());
  EXPECT_DOUBLE_EQ(none.total_accuracy, 0.0);
  EXPECT_DOUBLE_EQ(none.mean_iou, 0.0);
}

TEST(Metrics, MismatchedSizes) {
  EXPECT_EQ(support::error_code([] { evaluate(LabelMap(4, 4, 1), LabelMap(4, 5, 1), ecp()); }),
            ErrorCode::DimensionMismatch);
}

TEST(Metrics, MatchOracleOnRandomMaps) {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 20; ++k) {
    const auto a = support::random_blob_map(rng, ecp(), 24, 20, 6);
    const auto b = support::random_blob_map(rng, ecp(), 24, 20, 6);
    const auto r = evaluate(a, b, ecp());
    const auto o = support::oracle_metrics(a, b, ecp().size());
    EXPECT_NEAR(r.total_accuracy, o.total, 1e-12);
    EXPECT_NEAR(r.mean_iou, o.miou, 1e-12);
    for (std::size_t c = 0; c < ecp().size(); ++c) {
      ASSERT_EQ(r.iou[c].has_value(), o.iou[c].has_value());
      if (o.iou[c]) EXPECT_NEAR(*r.iou[c], *o.iou[c], 1e-12);
    }
  }
}

TEST(Metrics, CountsAggregateAcrossImages) {
  const auto [pred, truth] = four_by_four();
  auto sum = confusion(pred, truth, ecp());
  sum += confusion(truth, truth, ecp());
  const auto r = make_report(sum, ecp());
  EXPECT_DOUBLE_EQ(r.total_accuracy, 28.0 / 32.0);
  EXPECT_DOUBLE_EQ(*r.iou[0], 12.0 / 16.0);
}

TEST(Ablation, IdenticalInputsGiveZeroDeltas) {
  const auto [pred, truth] = four_by_four();
  const auto r = ablation(pred, pred, truth, ecp());
  EXPECT_DOUBLE_EQ(r.mean_iou_delta, 0.0);
  EXPECT_DOUBLE_EQ(*r.iou_delta[0], 0.0);
  EXPECT_FALSE(r.iou_delta[3]);
  const auto better = ablation(pred, truth, truth, ecp());
  EXPECT_GT(better.mean_iou_delta, 0.0);
  const auto j = ablation_to_json(better);
  EXPECT_TRUE(j.contains("before"));
  EXPECT_TRUE(j.contains("after"));
}

#include <gtest/gtest.h>

#include "support.hpp"

using namespace facade;
using namespace facade::losses;

namespace {

FacadeObject at(double cx, double cy, double w = 8, double h = 8, ClassId cls = 0) {
  FacadeObject o;
  o.class_id = cls;
  o.center = {cx, cy};
  o.size = {w, h};
  const int x0 = int(cx - w / 2), y0 = int(cy - h / 2);
  const int x1 = int(cx + w / 2) - 1, y1 = int(cy + h / 2) - 1;
  o.corners = {Pixel{x0, y0}, Pixel{x1, y0}, Pixel{x1, y1}, Pixel{x0, y1}};
  return o;
}

TargetOptions window_only(int stride = 4) {
  TargetOptions t;
  t.stride = stride;
  t.channel_classes = {0};
  return t;
}

}  // namespace

TEST(Targets, CellAndOffset) {
  const std::vector<FacadeObject> objs = {at(8, 4)};
  const auto t = encode_targets(objs, 32, 24, window_only());
  EXPECT_EQ(t.object_cells[0], (Pixel{2, 1}));
  EXPECT_EQ(t.offsets[0], (Point2{0, 0}));
  EXPECT_EQ(t.heatmap.width(), 8);
  EXPECT_EQ(t.heatmap.height(), 6);
  EXPECT_DOUBLE_EQ(t.heatmap(2, 1, 0), 1.0);
  EXPECT_LT(t.heatmap(3, 1, 0), 1.0);
  EXPECT_GT(t.heatmap(3, 1, 0), 0.0);
}

TEST(Targets, TwoObjectsShareACell) {
  const std::vector<FacadeObject> objs = {at(9, 9), at(10.5, 10.5)};
  const auto t = encode_targets(objs, 32, 24, window_only());
  EXPECT_EQ(t.count(), 2u);
  EXPECT_EQ(t.object_cells[0], t.object_cells[1]);
  EXPECT_DOUBLE_EQ(t.heatmap(2, 2, 0), 1.0);
}

TEST(Targets, Rejections) {
  EXPECT_EQ(support::error_code([] {
              const std::vector<FacadeObject> objs = {at(40, 4)};
              encode_targets(objs, 32, 24, window_only());
            }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(support::error_code([] {
              const std::vector<FacadeObject> objs = {at(8, 4, 8, 8, 2)};
              encode_targets(objs, 32, 24, window_only());
            }),
            ErrorCode::UnknownClass);
}

TEST(CrossEntropy, UniformPrediction) {
  const int C = 4;
  DenseGrid pred(5, 3, C, 1.0 / C), truth(5, 3, C, 0.0);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 5; ++x) truth(x, y, (x + y) % C) = 1.0;
  }
  EXPECT_NO_THROW(check_distribution(pred));
  EXPECT_NEAR(cross_entropy(pred, truth), 15 * std::log(double(C)), 1e-12);
}

TEST(CrossEntropy, MatchesNaiveSumAndClamps) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  DenseGrid pred(6, 4, 3), truth(6, 4, 3);
  double naive = 0.0;
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 6; ++x) {
      double s = 0.0;
      for (int c = 0; c < 3; ++c) s += pred(x, y, c) = u(rng);
      for (int c = 0; c < 3; ++c) pred(x, y, c) /= s;
      const int k = int(rng() % 3);
      truth(x, y, k) = 1.0;
      naive -= std::log(pred(x, y, k));
    }
  }
  EXPECT_NEAR(cross_entropy(pred, truth), naive, 1e-10);

  DenseGrid zero(1, 1, 2, 0.0), one(1, 1, 2, 0.0);
  zero(0, 0, 1) = 1.0;
  one(0, 0, 0) = 1.0;
  CrossEntropyDiagnostics diag;
  EXPECT_TRUE(std::isfinite(cross_entropy(zero, one, &diag)));
  EXPECT_EQ(diag.clamped, 1u);
}

TEST(Focal, SinglePeakClosedForm) {
  DenseGrid truth(4, 4, 1, 0.0), pred(4, 4, 1, 0.0);
  truth(1, 2, 0) = 1.0;
  pred(1, 2, 0) = 0.5;
  EXPECT_NEAR(focal_loss(pred, truth, 1), -0.25 * std::log(0.5), 1e-12);
  EXPECT_NEAR(focal_loss(pred, truth, 2), -0.25 * std::log(0.5) / 2, 1e-12);
  EXPECT_EQ(support::error_code([&] { focal_loss(pred, truth, 0); }), ErrorCode::NoInstances);
}

TEST(Focal, MatchesNaiveSum) {
  const std::vector<FacadeObject> objs = {at(8, 4), at(20, 16)};
  const auto t = encode_targets(objs, 32, 24, window_only());
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  DenseGrid pred = t.heatmap;
  for (auto& v : pred.values()) v = u(rng);
  double naive = 0.0;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      const double p = pred(x, y, 0), Y = t.heatmap(x, y, 0);
      naive += Y == 1.0 ? std::pow(1 - p, 2) * std::log(p) : std::pow(1 - Y, 4) * p * p * std::log(1 - p);
    }
  }
  EXPECT_NEAR(focal_loss(pred, t.heatmap, 2), -naive / 2, 1e-12);
}

TEST(Size, SumFormAliasesSwappedDimensions) {
  const std::vector<Point2> target = {{9, 12}};
  EXPECT_DOUBLE_EQ(size_loss(std::vector<Point2>{{10, 12}}, target), 1.0);
  const std::vector<Point2> swapped = {{12, 9}};
  EXPECT_DOUBLE_EQ(size_loss(swapped, target), 0.0);
  EXPECT_DOUBLE_EQ(size_loss(swapped, target, SizeLossForm::PerDimension), 6.0);
  EXPECT_EQ(support::error_code([] { size_loss(std::vector<Point2>{}, std::vector<Point2>{}); }),
            ErrorCode::NoInstances);
}

TEST(Offset, ReadOnlyAtObjectCells) {
  const std::vector<FacadeObject> objs = {at(9, 6)};
  const auto t = encode_targets(objs, 32, 24, window_only());
  EXPECT_DOUBLE_EQ(t.offsets[0].x, 0.25);
  EXPECT_DOUBLE_EQ(t.offsets[0].y, 0.5);
  DenseGrid pred(t.heatmap.width(), t.heatmap.height(), 2, 7.0);
  pred(2, 1, 0) = 0.25;
  pred(2, 1, 1) = 0.0;
  EXPECT_DOUBLE_EQ(offset_loss(pred, t), 0.5);
}

TEST(Corner, ZeroForExactPrediction) {
  const std::vector<FacadeObject> objs = {at(9, 6), at(22, 14)};
  const auto t = encode_targets(objs, 32, 24, window_only());
  DenseGrid pred(t.heatmap.width(), t.heatmap.height(), 8, 0.0);
  for (std::size_t k = 0; k < t.count(); ++k) {
    for (int q = 0; q < 4; ++q) {
      const auto c = t.corner_cells[k][q];
      pred(c.x, c.y, 2 * q) = t.corner_offsets[k][2 * q];
      pred(c.x, c.y, 2 * q + 1) = t.corner_offsets[k][2 * q + 1];
    }
  }
  EXPECT_DOUBLE_EQ(corner_loss(pred, t), 0.0);
}

TEST(Total, WeightedSum) {
  const LossParts parts{1, 1, 1, 1, 1};
  EXPECT_DOUBLE_EQ(total_loss(parts), 5.0);
  EXPECT_DOUBLE_EQ(total_loss(parts, {2, 0, 0, 0}), 3.0);
  EXPECT_EQ(support::error_code([&] { total_loss(parts, {-1, 1, 1, 1}); }), ErrorCode::InvalidArgument);
}

TEST(Gradients, FiniteDifferenceSuitePasses) {
  for (const auto& row : gradient_suite(1, 5)) {
    EXPECT_TRUE(row.pass) << to_string(row.kind) << " max rel error " << row.max_rel_error;
    EXPECT_GT(row.checked, 0u);
  }
}

TEST(Gradients, RelativeErrorIgnoresRoundoffAroundZero) {
  EXPECT_DOUBLE_EQ(relative_error(0.0, 5e-11), 0.0);
  EXPECT_DOUBLE_EQ(relative_error(2.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(relative_error(0.0, 1e-3), 1.0);
}

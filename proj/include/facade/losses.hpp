#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "facade/error.hpp"
#include "facade/geometry.hpp"
#include "facade/instances.hpp"

// Reference implementations of the parser's training losses, evaluated on
// plain arrays. Each loss comes with its analytic gradient with respect to
// the predictions so the pair can be checked against finite differences.

namespace facade::losses {

inline constexpr double kLogClamp = 1e-12;

/// Channel-last dense tensor of shape (height, width, channels).
class DenseGrid {
 public:
  DenseGrid() = default;
  DenseGrid(int width, int height, int channels, double fill = 0.0)
      : width_(width), height_(height), channels_(channels) {
    if (width < 1 || height < 1 || channels < 1) {
      throw Error(ErrorCode::InvalidArgument, "dense grid dimensions must be >= 1");
    }
    values_.assign(std::size_t(width) * std::size_t(height) * std::size_t(channels), fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::size_t index(int x, int y, int c) const noexcept {
    return (std::size_t(y) * std::size_t(width_) + std::size_t(x)) * std::size_t(channels_) +
           std::size_t(c);
  }
  double& operator()(int x, int y, int c) { return values_[index(x, y, c)]; }
  double operator()(int x, int y, int c) const { return values_[index(x, y, c)]; }

  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  bool same_shape(const DenseGrid& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Target encoding

struct TargetOptions {
  int stride = 4;
  /// Object class for each heatmap channel.
  std::vector<ClassId> channel_classes;
  /// Gaussian radius in low-res cells is max(min_radius, min(w, h) / (2 * stride) * radius_scale).
  double radius_scale = 1.0;
  double min_radius = 1.0;
};

struct DetectionTargets {
  int stride = 4;
  DenseGrid heatmap;                             // one channel per object class
  std::vector<int> channel;                      // per object
  std::vector<Pixel> object_cells;               // floor(p / R)
  std::vector<Point2> offsets;                   // p / R - floor(p / R)
  std::vector<Point2> sizes;                     // (w, h)
  std::vector<std::array<Pixel, 4>> corner_cells;  // floor(q / R), TL TR BR BL
  std::vector<std::array<double, 8>> corner_offsets;

  std::size_t count() const noexcept { return object_cells.size(); }
};

inline int low_res(int extent, int stride) { return (extent + stride - 1) / stride; }

inline double heatmap_radius(const Point2& size, const TargetOptions& opt) {
  return std::max(opt.min_radius, std::min(size.x, size.y) / (2.0 * opt.stride) * opt.radius_scale);
}

/// Gaussian splat value at integer cell offset (dx, dy) for a given radius.
inline double splat(int dx, int dy, double radius) {
  const double sigma = (2.0 * radius + 1.0) / 6.0;
  return std::exp(-(double(dx) * dx + double(dy) * dy) / (2.0 * sigma * sigma));
}

inline DetectionTargets encode_targets(std::span<const FacadeObject> objects, int width, int height,
                                       const TargetOptions& opt) {
  if (opt.stride < 1) throw Error(ErrorCode::InvalidArgument, "stride must be >= 1");
  if (opt.channel_classes.empty()) throw Error(ErrorCode::InvalidArgument, "no heatmap channels");
  DetectionTargets t;
  t.stride = opt.stride;
  const int lw = low_res(width, opt.stride);
  const int lh = low_res(height, opt.stride);
  t.heatmap = DenseGrid(lw, lh, int(opt.channel_classes.size()), 0.0);
  const double r = opt.stride;

  for (const auto& o : objects) {
    if (!(o.center.x >= 0 && o.center.x < width && o.center.y >= 0 && o.center.y < height)) {
      throw Error(ErrorCode::InvalidArgument, "object center outside the image");
    }
    const auto ch = std::find(opt.channel_classes.begin(), opt.channel_classes.end(), o.class_id);
    if (ch == opt.channel_classes.end()) {
      throw Error(ErrorCode::UnknownClass, "object class has no heatmap channel");
    }
    const int c = int(ch - opt.channel_classes.begin());
    const Pixel cell{int(std::floor(o.center.x / r)), int(std::floor(o.center.y / r))};
    t.channel.push_back(c);
    t.object_cells.push_back(cell);
    t.offsets.push_back({o.center.x / r - cell.x, o.center.y / r - cell.y});
    t.sizes.push_back(o.size);

    std::array<Pixel, 4> qcells{};
    std::array<double, 8> qoff{};
    for (std::size_t k = 0; k < 4; ++k) {
      const double qx = o.corners[k].x / r;
      const double qy = o.corners[k].y / r;
      qcells[k] = {int(std::floor(qx)), int(std::floor(qy))};
      qoff[2 * k] = qx - qcells[k].x;
      qoff[2 * k + 1] = qy - qcells[k].y;
    }
    t.corner_cells.push_back(qcells);
    t.corner_offsets.push_back(qoff);

    const double radius = heatmap_radius(o.size, opt);
    const int reach = int(std::ceil(radius));
    for (int dy = -reach; dy <= reach; ++dy) {
      for (int dx = -reach; dx <= reach; ++dx) {
        const int x = cell.x + dx, y = cell.y + dy;
        if (x < 0 || y < 0 || x >= lw || y >= lh) continue;
        double& v = t.heatmap(x, y, c);
        v = std::max(v, splat(dx, dy, radius));
      }
    }
    t.heatmap(cell.x, cell.y, c) = 1.0;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Segmentation cross-entropy: L = -sum_c sum_i y_ic log p_ic

struct CrossEntropyDiagnostics {
  std::size_t clamped = 0;  // true-class probabilities raised to the clamp
};

inline void check_distribution(const DenseGrid& pred, double tol = 1e-6) {
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      double s = 0.0;
      for (int c = 0; c < pred.channels(); ++c) s += pred(x, y, c);
      if (std::abs(s - 1.0) > tol) {
        throw Error(ErrorCode::InvalidArgument, "class probabilities do not sum to 1");
      }
    }
  }
}

inline double cross_entropy(const DenseGrid& pred, const DenseGrid& truth,
                            CrossEntropyDiagnostics* diag = nullptr) {
  if (!pred.same_shape(truth)) throw Error(ErrorCode::DimensionMismatch, "cross-entropy shapes differ");
  double loss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double y = truth.values()[i];
    if (y == 0.0) continue;
    const double p = pred.values()[i];
    if (p < kLogClamp && diag) ++diag->clamped;
    loss -= y * std::log(std::max(p, kLogClamp));
  }
  return loss;
}

inline std::vector<double> cross_entropy_grad(const DenseGrid& pred, const DenseGrid& truth) {
  std::vector<double> g(pred.size(), 0.0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double y = truth.values()[i];
    const double p = pred.values()[i];
    if (y != 0.0 && p > kLogClamp) g[i] = -y / p;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Center-heatmap focal loss, normalized by the instance count N:
//   Y == 1 : (1 - p)^a log p
//   else   : (1 - Y)^b p^a log(1 - p)

struct FocalParams {
  double alpha = 2.0;
  double beta = 4.0;
};

inline double focal_loss(const DenseGrid& pred, const DenseGrid& truth, std::size_t num_instances,
                         const FocalParams& params = {}) {
  if (num_instances == 0) throw Error(ErrorCode::NoInstances, "focal loss needs N >= 1");
  if (!pred.same_shape(truth)) throw Error(ErrorCode::DimensionMismatch, "focal-loss shapes differ");
  const double a = params.alpha, b = params.beta;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = pred.values()[i];
    const double y = truth.values()[i];
    if (y == 1.0) {
      sum += std::pow(1.0 - p, a) * std::log(std::max(p, kLogClamp));
    } else {
      sum += std::pow(1.0 - y, b) * std::pow(p, a) * std::log(std::max(1.0 - p, kLogClamp));
    }
  }
  return -sum / double(num_instances);
}

inline std::vector<double> focal_loss_grad(const DenseGrid& pred, const DenseGrid& truth,
                                           std::size_t num_instances, const FocalParams& params = {}) {
  if (num_instances == 0) throw Error(ErrorCode::NoInstances, "focal loss needs N >= 1");
  const double a = params.alpha, b = params.beta;
  const double scale = -1.0 / double(num_instances);
  std::vector<double> g(pred.size(), 0.0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = pred.values()[i];
    const double y = truth.values()[i];
    double d;
    if (y == 1.0) {
      d = -a * std::pow(1.0 - p, a - 1.0) * std::log(p) + std::pow(1.0 - p, a) / p;
    } else {
      const double w = std::pow(1.0 - y, b);
      d = w * (a * std::pow(p, a - 1.0) * std::log(1.0 - p) - std::pow(p, a) / (1.0 - p));
    }
    g[i] = scale * d;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Size regression

enum class SizeLossForm {
  SumOfDimensions,  // |w' + h' - (w + h)|
  PerDimension,     // |w' - w| + |h' - h|
};

inline double size_loss(std::span<const Point2> pred, std::span<const Point2> target,
                        SizeLossForm form = SizeLossForm::SumOfDimensions) {
  if (pred.size() != target.size()) throw Error(ErrorCode::DimensionMismatch, "size-loss lengths differ");
  if (pred.empty()) throw Error(ErrorCode::NoInstances, "size loss needs N >= 1");
  double s = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    if (form == SizeLossForm::SumOfDimensions) {
      s += std::abs(pred[k].x + pred[k].y - (target[k].x + target[k].y));
    } else {
      s += std::abs(pred[k].x - target[k].x) + std::abs(pred[k].y - target[k].y);
    }
  }
  return s / double(pred.size());
}

inline double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

/// Gradient laid out as (w0, h0, w1, h1, ...).
inline std::vector<double> size_loss_grad(std::span<const Point2> pred, std::span<const Point2> target,
                                          SizeLossForm form = SizeLossForm::SumOfDimensions) {
  std::vector<double> g(2 * pred.size(), 0.0);
  const double inv = 1.0 / double(pred.size());
  for (std::size_t k = 0; k < pred.size(); ++k) {
    if (form == SizeLossForm::SumOfDimensions) {
      const double s = sign(pred[k].x + pred[k].y - (target[k].x + target[k].y)) * inv;
      g[2 * k] = g[2 * k + 1] = s;
    } else {
      g[2 * k] = sign(pred[k].x - target[k].x) * inv;
      g[2 * k + 1] = sign(pred[k].y - target[k].y) * inv;
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Offset and corner regression: masked L1 read only at object (corner) cells.

inline double offset_loss(const DenseGrid& pred, const DetectionTargets& t) {
  if (pred.channels() != 2) throw Error(ErrorCode::DimensionMismatch, "offset map needs 2 channels");
  if (t.count() == 0) throw Error(ErrorCode::NoInstances, "offset loss needs N >= 1");
  double s = 0.0;
  for (std::size_t k = 0; k < t.count(); ++k) {
    const auto& cell = t.object_cells[k];
    s += std::abs(pred(cell.x, cell.y, 0) - t.offsets[k].x);
    s += std::abs(pred(cell.x, cell.y, 1) - t.offsets[k].y);
  }
  return s / double(t.count());
}

inline std::vector<double> offset_loss_grad(const DenseGrid& pred, const DetectionTargets& t) {
  std::vector<double> g(pred.size(), 0.0);
  const double inv = 1.0 / double(t.count());
  for (std::size_t k = 0; k < t.count(); ++k) {
    const auto& cell = t.object_cells[k];
    g[pred.index(cell.x, cell.y, 0)] += sign(pred(cell.x, cell.y, 0) - t.offsets[k].x) * inv;
    g[pred.index(cell.x, cell.y, 1)] += sign(pred(cell.x, cell.y, 1) - t.offsets[k].y) * inv;
  }
  return g;
}

/// Corner k of each object is read at its own cell from channels (2k, 2k+1).
inline double corner_loss(const DenseGrid& pred, const DetectionTargets& t) {
  if (pred.channels() != 8) throw Error(ErrorCode::DimensionMismatch, "corner map needs 8 channels");
  if (t.count() == 0) throw Error(ErrorCode::NoInstances, "corner loss needs N >= 1");
  double s = 0.0;
  for (std::size_t k = 0; k < t.count(); ++k) {
    for (int q = 0; q < 4; ++q) {
      const auto& cell = t.corner_cells[k][q];
      s += std::abs(pred(cell.x, cell.y, 2 * q) - t.corner_offsets[k][2 * q]);
      s += std::abs(pred(cell.x, cell.y, 2 * q + 1) - t.corner_offsets[k][2 * q + 1]);
    }
  }
  return s / double(t.count());
}

inline std::vector<double> corner_loss_grad(const DenseGrid& pred, const DetectionTargets& t) {
  std::vector<double> g(pred.size(), 0.0);
  const double inv = 1.0 / double(t.count());
  for (std::size_t k = 0; k < t.count(); ++k) {
    for (int q = 0; q < 4; ++q) {
      const auto& cell = t.corner_cells[k][q];
      for (int c = 2 * q; c < 2 * q + 2; ++c) {
        g[pred.index(cell.x, cell.y, c)] += sign(pred(cell.x, cell.y, c) - t.corner_offsets[k][c]) * inv;
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------

struct LossParts {
  double ce = 0.0;
  double det = 0.0;
  double wh = 0.0;
  double off = 0.0;
  double corner = 0.0;
};

struct LossWeights {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double lambda3 = 1.0;
  double lambda4 = 1.0;
};

inline double total_loss(const LossParts& p, const LossWeights& w = {}) {
  if (w.lambda1 < 0 || w.lambda2 < 0 || w.lambda3 < 0 || w.lambda4 < 0) {
    throw Error(ErrorCode::InvalidArgument, "loss weights must be nonnegative");
  }
  return p.ce + w.lambda1 * p.det + w.lambda2 * p.wh + w.lambda3 * p.off + w.lambda4 * p.corner;
}

}  // namespace facade::losses

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facade/losses.hpp"

namespace facade::losses {

/// Scalar function of a flat prediction vector with its analytic gradient.
/// `kink_distance(x, i)` reports how far coordinate i sits from a
/// non-differentiable point (infinity for smooth losses).
struct Objective {
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
  std::function<double(std::span<const double>, std::size_t)> kink_distance;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

/// Relative error |a - n| / max(|a|, |n|). Differences below 1e-8 count as
/// agreement: a true zero (two L1 terms cancelling) still picks up roundoff
/// in the central difference.
inline double relative_error(double analytic, double numeric) {
  if (std::abs(analytic - numeric) < 1e-8) return 0.0;
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  return std::abs(analytic - numeric) / scale;
}

/// Compares the analytic gradient with central differences on up to
/// `max_coords` coordinates (evenly strided when the point is larger).
/// Coordinates within 10*eps of an L1 kink are skipped.
inline GradCheckResult grad_check(const Objective& f, std::span<const double> point, double eps,
                                  std::size_t max_coords = 256) {
  GradCheckResult r;
  const auto analytic = f.gradient(point);
  std::vector<double> x(point.begin(), point.end());
  const std::size_t n = x.size();
  const std::size_t step = std::max<std::size_t>(1, n / std::max<std::size_t>(1, max_coords));
  for (std::size_t i = 0; i < n; i += step) {
    if (f.kink_distance && f.kink_distance(point, i) < 10.0 * eps) {
      ++r.skipped;
      continue;
    }
    const double orig = x[i];
    x[i] = orig + eps;
    const double up = f.value(x);
    x[i] = orig - eps;
    const double down = f.value(x);
    x[i] = orig;
    const double numeric = (up - down) / (2.0 * eps);
    r.max_rel_error = std::max(r.max_rel_error, relative_error(analytic[i], numeric));
    ++r.checked;
  }
  return r;
}

enum class LossKind { CrossEntropy, Focal, Size, Offset, Corner };

inline std::string_view to_string(LossKind k) {
  switch (k) {
    case LossKind::CrossEntropy: return "cross_entropy";
    case LossKind::Focal: return "focal";
    case LossKind::Size: return "size";
    case LossKind::Offset: return "offset";
    case LossKind::Corner: return "corner";
  }
  return "unknown";
}

inline constexpr LossKind kAllLosses[] = {LossKind::CrossEntropy, LossKind::Focal, LossKind::Size,
                                          LossKind::Offset, LossKind::Corner};

/// A randomized loss instance: fixed targets plus an interior prediction.
struct LossProblem {
  LossKind kind;
  Objective objective;
  std::vector<double> point;
};

struct ProblemOptions {
  FocalParams focal;
  SizeLossForm size_form = SizeLossForm::SumOfDimensions;
  int stride = 4;
};

namespace detail {

/// Random facade objects with centers and corners inside a width x height image.
inline std::vector<FacadeObject> random_objects(std::mt19937_64& rng, int width, int height, int count) {
  std::uniform_real_distribution<double> ux(2.0, width - 2.0), uy(2.0, height - 2.0);
  std::uniform_real_distribution<double> us(2.0, 12.0);
  std::vector<FacadeObject> out;
  for (int k = 0; k < count; ++k) {
    FacadeObject o;
    o.class_id = ClassId(k % 2);
    o.center = {ux(rng), uy(rng)};
    o.size = {us(rng), us(rng)};
    const int x1 = std::clamp(int(o.center.x - o.size.x / 2), 0, width - 1);
    const int x2 = std::clamp(int(o.center.x + o.size.x / 2), 0, width - 1);
    const int y1 = std::clamp(int(o.center.y - o.size.y / 2), 0, height - 1);
    const int y2 = std::clamp(int(o.center.y + o.size.y / 2), 0, height - 1);
    o.corners = {Pixel{x1, y1}, Pixel{x2, y1}, Pixel{x2, y2}, Pixel{x1, y2}};
    o.pixel_count = 1;
    out.push_back(o);
  }
  return out;
}

inline DenseGrid with_values(const DenseGrid& shape, std::span<const double> v) {
  DenseGrid g = shape;
  std::copy(v.begin(), v.end(), g.values().begin());
  return g;
}

}  // namespace detail

/// Builds a seeded random instance of one loss at an interior point.
inline LossProblem make_problem(LossKind kind, std::uint64_t seed, const ProblemOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LossProblem prob{kind, {}, {}};
  switch (kind) {
    case LossKind::CrossEntropy: {
      const int w = 6, h = 5, m = 4;
      DenseGrid truth(w, h, m, 0.0), pred(w, h, m, 0.0);
      std::uniform_int_distribution<int> cls(0, m - 1);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          truth(x, y, cls(rng)) = 1.0;
          double s = 0.0;
          for (int c = 0; c < m; ++c) s += (pred(x, y, c) = 0.05 + unit(rng));
          for (int c = 0; c < m; ++c) pred(x, y, c) /= s;
        }
      }
      prob.point = pred.values();
      prob.objective.value = [truth, pred](std::span<const double> v) {
        return cross_entropy(detail::with_values(pred, v), truth);
      };
      prob.objective.gradient = [truth, pred](std::span<const double> v) {
        return cross_entropy_grad(detail::with_values(pred, v), truth);
      };
      break;
    }
    case LossKind::Focal: {
      const auto objects = detail::random_objects(rng, 32, 24, 3);
      TargetOptions topt;
      topt.stride = opt.stride;
      topt.channel_classes = {0, 1};
      const auto targets = encode_targets(objects, 32, 24, topt);
      DenseGrid pred = targets.heatmap;
      for (auto& v : pred.values()) v = 0.05 + 0.9 * unit(rng);
      prob.point = pred.values();
      const auto truth = targets.heatmap;
      const auto n = targets.count();
      const auto fp = opt.focal;
      prob.objective.value = [truth, pred, n, fp](std::span<const double> v) {
        return focal_loss(detail::with_values(pred, v), truth, n, fp);
      };
      prob.objective.gradient = [truth, pred, n, fp](std::span<const double> v) {
        return focal_loss_grad(detail::with_values(pred, v), truth, n, fp);
      };
      break;
    }
    case LossKind::Size: {
      const int n = 6;
      std::vector<Point2> target(n);
      for (auto& t : target) t = {2.0 + 20.0 * unit(rng), 2.0 + 20.0 * unit(rng)};
      for (int k = 0; k < n; ++k) {
        prob.point.push_back(target[k].x + 4.0 * (unit(rng) - 0.5));
        prob.point.push_back(target[k].y + 4.0 * (unit(rng) - 0.5));
      }
      const auto form = opt.size_form;
      auto unpack = [](std::span<const double> v) {
        std::vector<Point2> p(v.size() / 2);
        for (std::size_t k = 0; k < p.size(); ++k) p[k] = {v[2 * k], v[2 * k + 1]};
        return p;
      };
      prob.objective.value = [target, form, unpack](std::span<const double> v) {
        return size_loss(unpack(v), target, form);
      };
      prob.objective.gradient = [target, form, unpack](std::span<const double> v) {
        return size_loss_grad(unpack(v), target, form);
      };
      prob.objective.kink_distance = [target, form](std::span<const double> v, std::size_t i) {
        const std::size_t k = i / 2;
        if (form == SizeLossForm::SumOfDimensions) {
          return std::abs(v[2 * k] + v[2 * k + 1] - (target[k].x + target[k].y));
        }
        return std::abs(v[i] - (i % 2 == 0 ? target[k].x : target[k].y));
      };
      break;
    }
    case LossKind::Offset:
    case LossKind::Corner: {
      const auto objects = detail::random_objects(rng, 32, 24, 3);
      TargetOptions topt;
      topt.stride = opt.stride;
      topt.channel_classes = {0, 1};
      const auto targets = encode_targets(objects, 32, 24, topt);
      const int channels = kind == LossKind::Offset ? 2 : 8;
      DenseGrid pred(targets.heatmap.width(), targets.heatmap.height(), channels);
      for (auto& v : pred.values()) v = unit(rng);
      prob.point = pred.values();
      if (kind == LossKind::Offset) {
        prob.objective.value = [targets, pred](std::span<const double> v) {
          return offset_loss(detail::with_values(pred, v), targets);
        };
        prob.objective.gradient = [targets, pred](std::span<const double> v) {
          return offset_loss_grad(detail::with_values(pred, v), targets);
        };
      } else {
        prob.objective.value = [targets, pred](std::span<const double> v) {
          return corner_loss(detail::with_values(pred, v), targets);
        };
        prob.objective.gradient = [targets, pred](std::span<const double> v) {
          return corner_loss_grad(detail::with_values(pred, v), targets);
        };
      }
      // Distance to the nearest kink among all targets read at this coordinate.
      prob.objective.kink_distance = [targets, pred, kind](std::span<const double> v, std::size_t i) {
        double best = std::numeric_limits<double>::infinity();
        const int ch = pred.channels();
        for (std::size_t k = 0; k < targets.count(); ++k) {
          if (kind == LossKind::Offset) {
            const auto& c = targets.object_cells[k];
            for (int d = 0; d < 2; ++d) {
              if (pred.index(c.x, c.y, d) == i) {
                best = std::min(best, std::abs(v[i] - (d == 0 ? targets.offsets[k].x : targets.offsets[k].y)));
              }
            }
          } else {
            for (int q = 0; q < 4; ++q) {
              const auto& c = targets.corner_cells[k][q];
              for (int d = 2 * q; d < 2 * q + 2 && d < ch; ++d) {
                if (pred.index(c.x, c.y, d) == i) {
                  best = std::min(best, std::abs(v[i] - targets.corner_offsets[k][d]));
                }
              }
            }
          }
        }
        return best;
      };
      break;
    }
  }
  return prob;
}

struct SuiteRow {
  LossKind kind;
  int points = 0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  double max_rel_error = 0.0;
  bool pass = false;
};

/// Gradient checks for every loss at `points` seeded interior points.
inline std::vector<SuiteRow> gradient_suite(std::uint64_t seed, int points = 20, const ProblemOptions& opt = {},
                                            double eps = 1e-6, double tolerance = 1e-4) {
  std::vector<SuiteRow> rows;
  for (const LossKind kind : kAllLosses) {
    SuiteRow row{kind, points};
    for (int k = 0; k < points; ++k) {
      const auto prob = make_problem(kind, seed * 1000003u + std::uint64_t(k), opt);
      const auto r = grad_check(prob.objective, prob.point, eps);
      row.checked += r.checked;
      row.skipped += r.skipped;
      row.max_rel_error = std::max(row.max_rel_error, r.max_rel_error);
    }
    row.pass = row.checked > 0 && row.max_rel_error < tolerance;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace facade::losses

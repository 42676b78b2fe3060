#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "facade/error.hpp"

namespace facade {

/// Integer pixel index (column x, row y).
struct Pixel {
  int x = 0;
  int y = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
  friend auto operator<=>(const Pixel& a, const Pixel& b) {
    // Raster order: row first.
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Axis-aligned box over inclusive pixel indices.
struct BBox {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  friend bool operator==(const BBox&, const BBox&) = default;

  bool contains(const Pixel& p) const noexcept {
    return p.x >= x1 && p.x <= x2 && p.y >= y1 && p.y <= y2;
  }
};

inline std::int64_t cross(const Pixel& o, const Pixel& a, const Pixel& b) {
  return std::int64_t(a.x - o.x) * (b.y - o.y) - std::int64_t(a.y - o.y) * (b.x - o.x);
}

/// Convex hull by monotone chain. Vertices come back counter-clockwise
/// (positive signed area in x/y coordinates), collinear boundary points
/// dropped. One distinct point yields {p}; collinear input yields its two
/// endpoints.
inline std::vector<Pixel> convex_hull(std::span<const Pixel> points) {
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "convex hull of an empty set");
  std::vector<Pixel> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Pixel& a, const Pixel& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  std::vector<Pixel> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = pts.size() - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

inline BBox min_bbox(std::span<const Pixel> points) {
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "bounding box of an empty set");
  BBox box{points[0].x, points[0].y, points[0].x, points[0].y};
  for (const auto& p : points) {
    box.x1 = std::min(box.x1, p.x);
    box.y1 = std::min(box.y1, p.y);
    box.x2 = std::max(box.x2, p.x);
    box.y2 = std::max(box.y2, p.y);
  }
  return box;
}

/// Inside-or-on test against a counter-clockwise convex polygon (degenerate
/// hulls included).
inline bool in_convex_polygon(std::span<const Pixel> hull, const Pixel& p) {
  if (hull.empty()) return false;
  if (hull.size() == 1) return hull[0] == p;
  if (hull.size() == 2) {
    if (cross(hull[0], hull[1], p) != 0) return false;
    return p.x >= std::min(hull[0].x, hull[1].x) && p.x <= std::max(hull[0].x, hull[1].x) &&
           p.y >= std::min(hull[0].y, hull[1].y) && p.y <= std::max(hull[0].y, hull[1].y);
  }
  for (std::size_t i = 0; i < hull.size(); ++i) {
    if (cross(hull[i], hull[(i + 1) % hull.size()], p) < 0) return false;
  }
  return true;
}

}  // namespace facade

#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "facade/error.hpp"
#include "facade/instances.hpp"
#include "facade/labelmap.hpp"

namespace facade {

/// Object classes in paint order, first to last.
using DrawOrder = std::vector<ClassId>;

/// Balcony, then door, then window; object classes with other names are
/// painted first, in id order.
inline DrawOrder default_draw_order(const ClassPalette& palette) {
  DrawOrder order;
  const std::vector<std::string> preferred = {"balcony", "door", "window"};
  for (const ClassId id : palette.object_classes()) {
    const auto n = detail::lower(palette.name(id));
    if (std::find(preferred.begin(), preferred.end(), n) == preferred.end()) order.push_back(id);
  }
  for (const auto& name : preferred) {
    if (auto id = palette.find(name); id && palette.is_object(*id)) order.push_back(*id);
  }
  return order;
}

inline DrawOrder draw_order_from_names(std::span<const std::string> names, const ClassPalette& palette) {
  DrawOrder order;
  for (const auto& n : names) order.push_back(palette.require(n));
  return order;
}

inline void validate_draw_order(const DrawOrder& order, const ClassPalette& palette) {
  auto objects = palette.object_classes();
  auto sorted = order;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != objects) {
    throw Error(ErrorCode::InvalidArgument,
                "draw order must list every object class exactly once");
  }
}

struct RasterWarning {
  std::string code;
  std::string message;
  std::size_t object_index = 0;

  nlohmann::json to_json() const {
    return {{"warning", code}, {"message", message}, {"object", object_index}};
  }
};

/// Pixel span [begin, end) covered by an interval with round-half-up edges.
inline std::pair<int, int> pixel_span(double center, double extent) {
  const int begin = int(std::floor(center - extent / 2 + 0.5));
  const int end = int(std::floor(center + extent / 2 + 0.5));
  return {begin, end};
}

/// Replaces every object-class pixel by a multi-source fill from the
/// non-object pixels: pixels are reached in breadth-first layers, and each
/// one takes the most frequent class among its already-filled 4-neighbours
/// (ties to the smaller id).
inline LabelMap clear_objects(const LabelMap& map, const ClassPalette& palette) {
  validate_labelmap(map, palette);
  LabelMap out = map;
  std::vector<std::uint8_t> filled(map.size(), 0);
  std::vector<std::size_t> frontier;
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const auto i = map.index(x, y);
      if (!palette.is_object(map.data()[i])) {
        filled[i] = 1;
        frontier.push_back(i);
      }
    }
  }
  if (frontier.empty()) throw Error(ErrorCode::NoBackground, "map has no non-object pixels");

  static constexpr int dx[] = {1, -1, 0, 0};
  static constexpr int dy[] = {0, 0, 1, -1};
  std::vector<std::size_t> next;
  std::vector<int> votes(palette.size(), 0);
  while (!frontier.empty()) {
    // Collect the next layer in raster order so the result is deterministic.
    next.clear();
    for (const auto i : frontier) {
      const int x = int(i % std::size_t(map.width()));
      const int y = int(i / std::size_t(map.width()));
      for (int k = 0; k < 4; ++k) {
        const int nx = x + dx[k], ny = y + dy[k];
        if (!map.contains(nx, ny)) continue;
        const auto ni = map.index(nx, ny);
        if (filled[ni] == 0) {
          filled[ni] = 2;  // queued
          next.push_back(ni);
        }
      }
    }
    std::sort(next.begin(), next.end());
    for (const auto i : next) {
      const int x = int(i % std::size_t(map.width()));
      const int y = int(i / std::size_t(map.width()));
      std::fill(votes.begin(), votes.end(), 0);
      for (int k = 0; k < 4; ++k) {
        const int nx = x + dx[k], ny = y + dy[k];
        if (!map.contains(nx, ny)) continue;
        const auto ni = map.index(nx, ny);
        if (filled[ni] == 1) ++votes[out.data()[ni]];
      }
      const auto best = std::max_element(votes.begin(), votes.end()) - votes.begin();
      out.data()[i] = ClassId(best);
    }
    for (const auto i : next) filled[i] = 1;
    frontier.swap(next);
  }
  return out;
}

/// Paints each object as a filled axis-aligned rectangle over `background`,
/// class by class in `order`. Objects whose clipped rectangle is empty are
/// skipped and reported.
inline LabelMap rasterize(const LabelMap& background, std::span<const FacadeObject> objects,
                          const DrawOrder& order, std::vector<RasterWarning>* warnings = nullptr) {
  LabelMap out = background;
  std::vector<bool> placed(objects.size(), false);
  for (const ClassId cls : order) {
    for (std::size_t i = 0; i < objects.size(); ++i) {
      const auto& o = objects[i];
      if (o.class_id != cls) continue;
      placed[i] = true;
      auto [x0, x1] = pixel_span(o.center.x, o.size.x);
      auto [y0, y1] = pixel_span(o.center.y, o.size.y);
      x0 = std::max(x0, 0);
      y0 = std::max(y0, 0);
      x1 = std::min(x1, out.width());
      y1 = std::min(y1, out.height());
      if (x0 >= x1 || y0 >= y1) {
        if (warnings) {
          warnings->push_back({"ObjectOutOfBounds",
                               "object rectangle is empty after clipping to the image", i});
        }
        continue;
      }
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) out(x, y) = cls;
      }
    }
  }
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (!placed[i] && warnings) {
      warnings->push_back({"ClassNotInDrawOrder", "object class is not in the draw order", i});
    }
  }
  return out;
}

}  // namespace facade

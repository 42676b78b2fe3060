#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <vector>

#include <json.hpp>

#include "facade/error.hpp"
#include "facade/geometry.hpp"
#include "facade/grid.hpp"
#include "facade/labelmap.hpp"

namespace facade {

enum class Connectivity { Four = 4, Eight = 8 };

/// One parametric facade object.
///
/// Geometry lives in the continuous pixel-edge frame: pixel (i, j) covers
/// [i, i+1) x [j, j+1). A component whose inclusive pixel box is
/// (x1, y1, x2, y2) therefore has center ((x1 + x2 + 1) / 2, (y1 + y2 + 1) / 2)
/// and size (x2 - x1 + 1, y2 - y1 + 1). Corners are pixel indices ordered
/// TL, TR, BR, BL.
struct FacadeObject {
  ClassId class_id = 0;
  Point2 center;
  Point2 size;  // (w, h)
  std::array<Pixel, 4> corners{};
  std::int64_t pixel_count = 0;
  std::int64_t source_component = -1;
  bool overlaps = false;

  double left() const noexcept { return center.x - size.x / 2; }
  double right() const noexcept { return center.x + size.x / 2; }
  double top() const noexcept { return center.y - size.y / 2; }
  double bottom() const noexcept { return center.y + size.y / 2; }
};

struct ExtractOptions {
  std::int64_t min_area = 16;
  Connectivity connectivity = Connectivity::Four;
};

/// Maximal connected regions of `class_id`, each listed in raster order.
/// Regions are ordered by their first pixel in raster order.
inline std::vector<std::vector<Pixel>> connected_components(
    const LabelMap& map, ClassId class_id, Connectivity connectivity = Connectivity::Four) {
  std::vector<std::vector<Pixel>> out;
  std::vector<std::uint8_t> seen(map.size(), 0);
  static constexpr int dx4[] = {1, -1, 0, 0};
  static constexpr int dy4[] = {0, 0, 1, -1};
  static constexpr int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
  const int n_neighbors = connectivity == Connectivity::Four ? 4 : 8;
  const int* dx = connectivity == Connectivity::Four ? dx4 : dx8;
  const int* dy = connectivity == Connectivity::Four ? dy4 : dy8;

  std::deque<Pixel> queue;
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const auto idx = map.index(x, y);
      if (seen[idx] || map.data()[idx] != class_id) continue;
      std::vector<Pixel> region;
      seen[idx] = 1;
      queue.push_back({x, y});
      while (!queue.empty()) {
        const Pixel p = queue.front();
        queue.pop_front();
        region.push_back(p);
        for (int k = 0; k < n_neighbors; ++k) {
          const int nx = p.x + dx[k];
          const int ny = p.y + dy[k];
          if (!map.contains(nx, ny)) continue;
          const auto nidx = map.index(nx, ny);
          if (seen[nidx] || map.data()[nidx] != class_id) continue;
          seen[nidx] = 1;
          queue.push_back({nx, ny});
        }
      }
      std::sort(region.begin(), region.end());
      out.push_back(std::move(region));
    }
  }
  return out;
}

/// Corner points by nearest-to-image-corner search. Distance ties prefer
/// smaller y, then smaller x.
inline std::array<Pixel, 4> extract_corners(std::span<const Pixel> points, int width, int height) {
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "corners of an empty set");
  const std::array<Pixel, 4> anchors = {
      Pixel{0, 0}, Pixel{width - 1, 0}, Pixel{width - 1, height - 1}, Pixel{0, height - 1}};
  std::array<Pixel, 4> out{};
  for (std::size_t k = 0; k < 4; ++k) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (const auto& p : points) {
      const std::int64_t ddx = p.x - anchors[k].x;
      const std::int64_t ddy = p.y - anchors[k].y;
      const std::int64_t d = ddx * ddx + ddy * ddy;
      if (d < best || (d == best && p < out[k])) {
        best = d;
        out[k] = p;
      }
    }
  }
  return out;
}

inline FacadeObject object_from_pixels(ClassId class_id, std::span<const Pixel> pixels, int width,
                                       int height) {
  const auto hull = convex_hull(pixels);
  const BBox box = min_bbox(hull);
  FacadeObject obj;
  obj.class_id = class_id;
  obj.center = {(box.x1 + box.x2 + 1) / 2.0, (box.y1 + box.y2 + 1) / 2.0};
  obj.size = {double(box.x2 - box.x1 + 1), double(box.y2 - box.y1 + 1)};
  obj.corners = extract_corners(pixels, width, height);
  obj.pixel_count = std::int64_t(pixels.size());
  return obj;
}

inline bool boxes_intersect(const FacadeObject& a, const FacadeObject& b) {
  return a.left() < b.right() && b.left() < a.right() && a.top() < b.bottom() &&
         b.top() < a.bottom();
}

/// One object per connected component of every object class, in
/// (class id, raster-first pixel) order. Components smaller than
/// `min_area` are dropped. Objects whose box intersects an object of a
/// different class get `overlaps = true`.
inline std::vector<FacadeObject> extract_instances(const LabelMap& map, const ClassPalette& palette,
                                                   const ExtractOptions& options = {}) {
  validate_labelmap(map, palette);
  std::vector<FacadeObject> objects;
  std::int64_t component_id = 0;
  for (const ClassId cls : palette.object_classes()) {
    for (const auto& region : connected_components(map, cls, options.connectivity)) {
      const auto id = component_id++;
      if (std::int64_t(region.size()) < options.min_area) continue;
      auto obj = object_from_pixels(cls, region, map.width(), map.height());
      obj.source_component = id;
      objects.push_back(obj);
    }
  }
  for (std::size_t i = 0; i < objects.size(); ++i) {
    for (std::size_t j = i + 1; j < objects.size(); ++j) {
      if (objects[i].class_id != objects[j].class_id && boxes_intersect(objects[i], objects[j])) {
        objects[i].overlaps = objects[j].overlaps = true;
      }
    }
  }
  return objects;
}

/// Instances file: {"width", "height", "objects": [{class, class_id, center,
/// size, corners, pixels, component, overlaps}]}.
struct InstancesDoc {
  int width = 0;
  int height = 0;
  std::vector<FacadeObject> objects;
};

inline nlohmann::json object_to_json(const FacadeObject& o, const ClassPalette& palette) {
  auto corners = nlohmann::json::array();
  for (const auto& c : o.corners) corners.push_back({c.x, c.y});
  return {{"class", palette.name(o.class_id)},
          {"class_id", o.class_id},
          {"center", {o.center.x, o.center.y}},
          {"size", {o.size.x, o.size.y}},
          {"corners", corners},
          {"pixels", o.pixel_count},
          {"component", o.source_component},
          {"overlaps", o.overlaps}};
}

inline FacadeObject object_from_json(const nlohmann::json& j, const ClassPalette& palette) {
  try {
    FacadeObject o;
    if (j.contains("class") && j.at("class").is_string()) {
      o.class_id = palette.require(j.at("class").get<std::string>());
    } else {
      const int id = j.at("class_id").get<int>();
      if (id < 0 || !palette.contains(ClassId(id))) {
        throw Error(ErrorCode::UnknownClass, "class id " + std::to_string(id));
      }
      o.class_id = ClassId(id);
    }
    o.center = {j.at("center").at(0).get<double>(), j.at("center").at(1).get<double>()};
    o.size = {j.at("size").at(0).get<double>(), j.at("size").at(1).get<double>()};
    if (j.contains("corners")) {
      for (std::size_t k = 0; k < 4; ++k) {
        o.corners[k] = {j.at("corners").at(k).at(0).get<int>(), j.at("corners").at(k).at(1).get<int>()};
      }
    }
    o.pixel_count = j.value("pixels", std::int64_t(0));
    o.source_component = j.value("component", std::int64_t(-1));
    o.overlaps = j.value("overlaps", false);
    return o;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseFailure, std::string("instance record: ") + e.what());
  }
}

inline nlohmann::json instances_to_json(const InstancesDoc& doc, const ClassPalette& palette) {
  auto objs = nlohmann::json::array();
  for (const auto& o : doc.objects) objs.push_back(object_to_json(o, palette));
  return {{"width", doc.width}, {"height", doc.height}, {"objects", objs}};
}

/// Accepts the full document or a bare object array (width/height then 0,
/// meaning unbounded).
inline InstancesDoc instances_from_json(const nlohmann::json& j, const ClassPalette& palette) {
  InstancesDoc doc;
  const nlohmann::json* list = &j;
  if (j.is_object()) {
    doc.width = j.value("width", 0);
    doc.height = j.value("height", 0);
    if (!j.contains("objects")) throw Error(ErrorCode::ParseFailure, "instances file lacks 'objects'");
    list = &j.at("objects");
  }
  if (!list->is_array()) throw Error(ErrorCode::ParseFailure, "instances must be an array");
  for (const auto& item : *list) doc.objects.push_back(object_from_json(item, palette));
  return doc;
}

}  // namespace facade

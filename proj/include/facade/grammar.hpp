#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "facade/error.hpp"
#include "facade/instances.hpp"
#include "facade/labelmap.hpp"
#include "facade/symmetry.hpp"

namespace facade {

/// One (x, y, w, h) element: center and size in pixels.
struct Element {
  std::string cls;
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const Element&, const Element&) = default;
};

/// Vertical extents are half-open [y_top, y_bottom) in pixels.
struct Floor {
  int index = 0;  // 0 = ground
  double y_top = 0.0;
  double y_bottom = 0.0;
  std::vector<Element> elements;

  friend bool operator==(const Floor&, const Floor&) = default;
};

/// Non-floor horizontal band: "sky", "roof" or "shop".
struct Band {
  std::string name;
  double y_top = 0.0;
  double y_bottom = 0.0;

  friend bool operator==(const Band&, const Band&) = default;
};

struct GrammarDoc {
  std::string version = "v1";
  int width = 0;
  int height = 0;
  double pixel_scale = 0.05;  // meters per pixel
  /// Floors come from window rows; no floor annotations exist in the input.
  std::string floor_rule = "window-rows";
  std::map<std::string, Rgb> materials;
  std::vector<Band> bands;    // top to bottom
  std::vector<Floor> floors;  // ground floor first

  std::size_t element_count() const {
    std::size_t n = 0;
    for (const auto& f : floors) n += f.elements.size();
    return n;
  }

  const Band* band(std::string_view name) const {
    for (const auto& b : bands) {
      if (b.name == name) return &b;
    }
    return nullptr;
  }

  friend bool operator==(const GrammarDoc&, const GrammarDoc&) = default;
};

struct FacadeBands {
  int sky_end = 0;     // [0, sky_end)
  int roof_end = 0;    // [sky_end, roof_end)
  int shop_begin = 0;  // [shop_begin, height)
  int height = 0;

  int wall_top() const noexcept { return roof_end; }
  int wall_bottom() const noexcept { return shop_begin; }
};

/// Splits the facade rows into sky/roof at the top, shop at the bottom and
/// the wall band between. Each row is labelled with the majority class of
/// its non-object pixels (rows without any inherit the previous label).
inline FacadeBands detect_bands(const LabelMap& map, const ClassPalette& palette) {
  enum class Kind { Wall, Sky, Roof, Shop };
  auto kind_of = [&](ClassId id) {
    const auto n = detail::lower(palette.name(id));
    if (n == "sky") return Kind::Sky;
    if (n == "roof" || n == "chimney") return Kind::Roof;
    if (n == "shop") return Kind::Shop;
    return Kind::Wall;
  };
  std::vector<Kind> rows(std::size_t(map.height()), Kind::Wall);
  std::vector<int> votes(palette.size());
  Kind prev = Kind::Wall;
  for (int y = 0; y < map.height(); ++y) {
    std::fill(votes.begin(), votes.end(), 0);
    int any = 0;
    for (int x = 0; x < map.width(); ++x) {
      const ClassId c = map(x, y);
      if (palette.is_object(c)) continue;
      ++votes[c];
      ++any;
    }
    if (any > 0) {
      prev = kind_of(ClassId(std::max_element(votes.begin(), votes.end()) - votes.begin()));
    }
    rows[std::size_t(y)] = prev;
  }
  FacadeBands b;
  b.height = map.height();
  int y = 0;
  while (y < map.height() && rows[std::size_t(y)] == Kind::Sky) ++y;
  b.sky_end = y;
  while (y < map.height() && (rows[std::size_t(y)] == Kind::Roof || rows[std::size_t(y)] == Kind::Sky)) ++y;
  b.roof_end = y;
  int s = map.height();
  while (s > b.roof_end && rows[std::size_t(s - 1)] == Kind::Shop) --s;
  b.shop_begin = s;
  if (b.wall_bottom() <= b.wall_top()) {
    throw Error(ErrorCode::MissingWall, "facade has no wall band between roof and shop");
  }
  return b;
}

struct GrammarOptions {
  double pixel_scale = 0.05;
  double gap_factor = 0.5;
  Rgb glass_color{70, 130, 180};
  Rgb default_material{128, 128, 128};
};

/// Floors from window rows: each floor reaches halfway to its neighbouring
/// rows and the outermost floors extend to the wall band edges. Elements go
/// to the floor containing their center; centers outside the wall band go to
/// the nearest floor.
inline std::vector<Floor> derive_floors(std::span<const FacadeObject> objects, const LabelMap& map,
                                        const ClassPalette& palette, double gap_factor = 0.5) {
  const auto bands = detect_bands(map, palette);
  const double top = bands.wall_top();
  const double bottom = bands.wall_bottom();

  std::vector<double> row_centers;
  if (auto window = palette.find("window")) {
    std::vector<FacadeObject> windows;
    for (const auto& o : objects) {
      if (o.class_id == *window) windows.push_back(o);
    }
    for (const auto& g : group_objects(windows, Axis::Horizontal, gap_factor)) {
      double s = 0.0;
      for (auto i : g.members) s += windows[i].center.y;
      const double cy = s / double(g.members.size());
      if (cy >= top && cy < bottom) row_centers.push_back(cy);
    }
  }
  std::sort(row_centers.begin(), row_centers.end());

  // Boundaries top to bottom.
  std::vector<double> edges{top};
  for (std::size_t k = 1; k < row_centers.size(); ++k) {
    edges.push_back(0.5 * (row_centers[k - 1] + row_centers[k]));
  }
  edges.push_back(bottom);

  const std::size_t n = edges.size() - 1;
  std::vector<Floor> floors(n);
  for (std::size_t k = 0; k < n; ++k) {
    // floors[0] is the ground floor, i.e. the bottom-most slice.
    const std::size_t slice = n - 1 - k;
    floors[k].index = int(k);
    floors[k].y_top = edges[slice];
    floors[k].y_bottom = edges[slice + 1];
  }
  for (const auto& o : objects) {
    std::size_t target = 0;
    if (o.center.y < top) {
      target = n - 1;
    } else if (o.center.y >= bottom) {
      target = 0;
    } else {
      for (std::size_t k = 0; k < n; ++k) {
        if (o.center.y >= floors[k].y_top && o.center.y < floors[k].y_bottom) target = k;
      }
    }
    floors[target].elements.push_back(
        {palette.name(o.class_id), o.center.x, o.center.y, o.size.x, o.size.y});
  }
  return floors;
}

/// Mean color per class, with the window class overridden by the glass
/// color and absent classes given the default material.
inline std::map<std::string, Rgb> sample_materials(const FacadeImage& image, const LabelMap& map,
                                                   const ClassPalette& palette,
                                                   const GrammarOptions& opt = {}) {
  if (!same_dimensions(image, map)) throw Error(ErrorCode::DimensionMismatch, "image and label map sizes differ");
  std::vector<std::array<std::int64_t, 4>> acc(palette.size(), {0, 0, 0, 0});
  for (std::size_t i = 0; i < map.size(); ++i) {
    auto& a = acc[map.data()[i]];
    a[0] += image.data()[i].r;
    a[1] += image.data()[i].g;
    a[2] += image.data()[i].b;
    a[3] += 1;
  }
  std::map<std::string, Rgb> out;
  for (const auto& e : palette.entries()) {
    const auto& a = acc[e.id];
    Rgb c = opt.default_material;
    if (a[3] > 0) {
      auto avg = [&](std::int64_t s) { return std::uint8_t((2 * s + a[3]) / (2 * a[3])); };
      c = {avg(a[0]), avg(a[1]), avg(a[2])};
    }
    if (detail::lower(e.name) == "window") c = opt.glass_color;
    out[e.name] = c;
  }
  return out;
}

inline GrammarDoc emit_grammar(std::span<const FacadeObject> objects, const LabelMap& map,
                               const FacadeImage& image, const ClassPalette& palette,
                               const GrammarOptions& opt = {}) {
  if (!(opt.pixel_scale > 0)) throw Error(ErrorCode::InvalidArgument, "pixel_scale must be positive");
  GrammarDoc doc;
  doc.width = map.width();
  doc.height = map.height();
  doc.pixel_scale = opt.pixel_scale;
  doc.materials = sample_materials(image, map, palette, opt);
  const auto b = detect_bands(map, palette);
  if (b.sky_end > 0) doc.bands.push_back({"sky", 0.0, double(b.sky_end)});
  if (b.roof_end > b.sky_end) doc.bands.push_back({"roof", double(b.sky_end), double(b.roof_end)});
  if (b.shop_begin < b.height) doc.bands.push_back({"shop", double(b.shop_begin), double(b.height)});
  doc.floors = derive_floors(objects, map, palette, opt.gap_factor);
  return doc;
}

inline nlohmann::json grammar_to_json(const GrammarDoc& g) {
  auto materials = nlohmann::json::object();
  for (const auto& [name, c] : g.materials) materials[name] = {c.r, c.g, c.b};
  auto bands = nlohmann::json::array();
  for (const auto& b : g.bands) bands.push_back({{"name", b.name}, {"y_top", b.y_top}, {"y_bottom", b.y_bottom}});
  auto floors = nlohmann::json::array();
  for (const auto& f : g.floors) {
    auto elems = nlohmann::json::array();
    for (const auto& e : f.elements) {
      elems.push_back({{"class", e.cls}, {"x", e.x}, {"y", e.y}, {"w", e.w}, {"h", e.h}});
    }
    floors.push_back({{"index", f.index}, {"y_top", f.y_top}, {"y_bottom", f.y_bottom}, {"elements", elems}});
  }
  return {{"version", g.version},
          {"extent", {g.width, g.height}},
          {"pixel_scale", g.pixel_scale},
          {"floor_rule", g.floor_rule},
          {"materials", materials},
          {"bands", bands},
          {"floors", floors}};
}

inline GrammarDoc grammar_from_json(const nlohmann::json& j) {
  GrammarDoc g;
  try {
    g.version = j.at("version").get<std::string>();
    if (g.version != "v1") throw Error(ErrorCode::ParseFailure, "unsupported grammar version " + g.version);
    g.width = j.at("extent").at(0).get<int>();
    g.height = j.at("extent").at(1).get<int>();
    g.pixel_scale = j.at("pixel_scale").get<double>();
    if (!(g.pixel_scale > 0)) throw Error(ErrorCode::ParseFailure, "pixel_scale must be positive");
    g.floor_rule = j.value("floor_rule", std::string("window-rows"));
    for (const auto& [name, c] : j.at("materials").items()) {
      g.materials[name] = {c.at(0).get<std::uint8_t>(), c.at(1).get<std::uint8_t>(), c.at(2).get<std::uint8_t>()};
    }
    for (const auto& b : j.at("bands")) {
      g.bands.push_back({b.at("name").get<std::string>(), b.at("y_top").get<double>(), b.at("y_bottom").get<double>()});
    }
    for (const auto& f : j.at("floors")) {
      Floor fl;
      fl.index = f.at("index").get<int>();
      fl.y_top = f.at("y_top").get<double>();
      fl.y_bottom = f.at("y_bottom").get<double>();
      for (const auto& e : f.at("elements")) {
        fl.elements.push_back({e.at("class").get<std::string>(), e.at("x").get<double>(), e.at("y").get<double>(),
                               e.at("w").get<double>(), e.at("h").get<double>()});
      }
      g.floors.push_back(std::move(fl));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseFailure, std::string("grammar JSON: ") + e.what());
  }
  return g;
}

}  // namespace facade

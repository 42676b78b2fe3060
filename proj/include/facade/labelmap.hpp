#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "facade/error.hpp"
#include "facade/grid.hpp"

namespace facade {

struct ClassEntry {
  ClassId id = 0;
  std::string name;
  Rgb color;
  bool is_object = false;
};

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return out;
}

inline bool is_wall_name(std::string_view name) {
  const auto n = lower(name);
  return n == "wall" || n == "background";
}

inline std::uint32_t pack(const Rgb& c) {
  return (std::uint32_t(c.r) << 16) | (std::uint32_t(c.g) << 8) | std::uint32_t(c.b);
}

}  // namespace detail

/// Ordered, validated set of segmentation classes.
///
/// Ids are unique and contiguous from 0, colors are unique, and exactly one
/// class is the wall/background class. Entry order is the order given at
/// construction; lookups by id go through an index.
class ClassPalette {
 public:
  ClassPalette() = default;

  explicit ClassPalette(std::vector<ClassEntry> entries) : entries_(std::move(entries)) {
    validate();
  }

  const std::vector<ClassEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  bool contains(ClassId id) const noexcept { return id < by_id_.size(); }

  const ClassEntry& entry(ClassId id) const {
    if (!contains(id)) {
      throw Error(ErrorCode::UnknownClass, "class id " + std::to_string(id) + " not in palette");
    }
    return entries_[by_id_[id]];
  }

  const std::string& name(ClassId id) const { return entry(id).name; }
  Rgb color(ClassId id) const { return entry(id).color; }
  bool is_object(ClassId id) const { return entry(id).is_object; }
  ClassId wall_id() const noexcept { return wall_; }

  std::optional<ClassId> find(std::string_view name) const {
    const auto key = detail::lower(name);
    for (const auto& e : entries_) {
      if (detail::lower(e.name) == key) return e.id;
    }
    return std::nullopt;
  }

  ClassId require(std::string_view name) const {
    if (auto id = find(name)) return *id;
    throw Error(ErrorCode::UnknownClass, "palette has no class named '" + std::string(name) + "'");
  }

  std::optional<ClassId> find_color(const Rgb& c) const {
    auto it = by_color_.find(detail::pack(c));
    if (it == by_color_.end()) return std::nullopt;
    return it->second;
  }

  /// Object classes in ascending id order.
  std::vector<ClassId> object_classes() const {
    std::vector<ClassId> out;
    for (ClassId id = 0; id < by_id_.size(); ++id) {
      if (is_object(id)) out.push_back(id);
    }
    return out;
  }

  /// Copy of this palette with one more class appended at id size().
  ClassPalette with_class(std::string name, Rgb color, bool is_object) const {
    auto entries = entries_;
    entries.push_back({ClassId(entries.size()), std::move(name), color, is_object});
    return ClassPalette(std::move(entries));
  }

  friend bool operator==(const ClassPalette& a, const ClassPalette& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i) {
      const auto& x = a.entries_[i];
      const auto& y = b.entries_[i];
      if (x.id != y.id || x.name != y.name || !(x.color == y.color) || x.is_object != y.is_object) {
        return false;
      }
    }
    return true;
  }

 private:
  void validate() {
    if (entries_.empty()) throw Error(ErrorCode::ParseFailure, "palette has no entries");
    by_id_.assign(entries_.size(), entries_.size());
    by_color_.clear();
    std::optional<ClassId> wall;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      if (e.id >= entries_.size()) {
        throw Error(ErrorCode::NonContiguousIds,
                    "class ids must be contiguous from 0; got " + std::to_string(e.id));
      }
      if (by_id_[e.id] != entries_.size()) {
        throw Error(ErrorCode::DuplicateId, "duplicate class id " + std::to_string(e.id));
      }
      by_id_[e.id] = i;
      if (!by_color_.emplace(detail::pack(e.color), e.id).second) {
        throw Error(ErrorCode::DuplicateColor, "class '" + e.name + "' reuses a color");
      }
      if (detail::is_wall_name(e.name)) {
        if (wall) throw Error(ErrorCode::MissingWall, "more than one wall/background class");
        if (e.is_object) throw Error(ErrorCode::MissingWall, "wall class cannot be an object class");
        wall = e.id;
      }
    }
    if (!wall) throw Error(ErrorCode::MissingWall, "palette needs a class named 'wall' or 'background'");
    wall_ = *wall;
  }

  std::vector<ClassEntry> entries_;
  std::vector<std::size_t> by_id_;
  std::unordered_map<std::uint32_t, ClassId> by_color_;
  ClassId wall_ = 0;
};

// Palette JSON: [{"id": 0, "name": "window", "color": [255, 0, 0], "object": true}, ...]

inline ClassPalette parse_palette(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseFailure, std::string("palette JSON: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::ParseFailure, "palette must be a JSON array");
  std::vector<ClassEntry> entries;
  try {
    for (const auto& item : doc) {
      ClassEntry e;
      const int id = item.at("id").get<int>();
      if (id < 0 || id > 0xFFFF) throw Error(ErrorCode::ParseFailure, "class id out of range");
      e.id = ClassId(id);
      e.name = item.at("name").get<std::string>();
      const auto& c = item.at("color");
      if (!c.is_array() || c.size() != 3) throw Error(ErrorCode::ParseFailure, "color must be [r,g,b]");
      std::uint8_t rgb[3];
      for (int k = 0; k < 3; ++k) {
        const int v = c[k].get<int>();
        if (v < 0 || v > 255) throw Error(ErrorCode::ParseFailure, "color channel out of 0..255");
        rgb[k] = std::uint8_t(v);
      }
      e.color = {rgb[0], rgb[1], rgb[2]};
      e.is_object = item.value("object", false);
      entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseFailure, std::string("palette entry: ") + e.what());
  }
  return ClassPalette(std::move(entries));
}

inline ClassPalette load_palette(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open palette " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_palette(ss.str());
}

inline nlohmann::json palette_to_json(const ClassPalette& palette) {
  auto out = nlohmann::json::array();
  for (const auto& e : palette.entries()) {
    out.push_back({{"id", e.id},
                   {"name", e.name},
                   {"color", {e.color.r, e.color.g, e.color.b}},
                   {"object", e.is_object}});
  }
  return out;
}

struct DecodeOptions {
  /// When false every pixel must match a palette color exactly.
  bool nearest = false;
  /// Largest accepted squared RGB distance in nearest mode; negative means unlimited.
  int max_squared_distance = -1;
};

inline LabelMap decode_labelmap(const FacadeImage& image, const ClassPalette& palette,
                                const DecodeOptions& options = {}) {
  LabelMap map(image.width(), image.height());
  // Distinct colors are few; cache their resolution.
  std::unordered_map<std::uint32_t, ClassId> cache;
  for (std::size_t i = 0; i < image.size(); ++i) {
    const Rgb px = image.data()[i];
    const auto key = detail::pack(px);
    if (auto it = cache.find(key); it != cache.end()) {
      map.data()[i] = it->second;
      continue;
    }
    ClassId id = 0;
    if (auto exact = palette.find_color(px)) {
      id = *exact;
    } else if (!options.nearest) {
      throw Error(ErrorCode::UnknownColor, "pixel color (" + std::to_string(px.r) + "," +
                                               std::to_string(px.g) + "," + std::to_string(px.b) +
                                               ") is not in the palette");
    } else {
      int best = -1;
      int runner_up = -1;
      for (const auto& e : palette.entries()) {
        const int d = squared_distance(px, e.color);
        if (best < 0 || d < best) {
          runner_up = best;
          best = d;
          id = e.id;
        } else if (runner_up < 0 || d < runner_up) {
          runner_up = d;
        }
      }
      if (best == runner_up) {
        throw Error(ErrorCode::AmbiguousColor, "pixel color (" + std::to_string(px.r) + "," +
                                                   std::to_string(px.g) + "," +
                                                   std::to_string(px.b) +
                                                   ") is equidistant from two palette colors");
      }
      if (options.max_squared_distance >= 0 && best > options.max_squared_distance) {
        throw Error(ErrorCode::UnknownColor, "pixel color too far from every palette color");
      }
    }
    cache.emplace(key, id);
    map.data()[i] = id;
  }
  return map;
}

inline void validate_labelmap(const LabelMap& map, const ClassPalette& palette) {
  for (const ClassId id : map.data()) {
    if (!palette.contains(id)) {
      throw Error(ErrorCode::UnknownClass, "label map holds class id " + std::to_string(id) +
                                               " outside a " + std::to_string(palette.size()) +
                                               "-class palette");
    }
  }
}

inline FacadeImage encode_labelmap(const LabelMap& map, const ClassPalette& palette) {
  validate_labelmap(map, palette);
  FacadeImage image(map.width(), map.height());
  for (std::size_t i = 0; i < map.size(); ++i) image.data()[i] = palette.color(map.data()[i]);
  return image;
}

}  // namespace facade

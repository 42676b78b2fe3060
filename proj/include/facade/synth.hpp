#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "facade/error.hpp"
#include "facade/labelmap.hpp"
#include "facade/raster.hpp"

namespace facade {

/// Synthetic facade layout: a rows x cols window grid centered in the wall
/// band, optional roof and shop bands, a door and per-window balconies.
/// Spacings are center to center; all lengths in pixels.
struct SynthSpec {
  int width = 200;
  int height = 300;
  int rows = 3;
  int cols = 4;
  double window_w = 20;
  double window_h = 30;
  double spacing_x = 45;
  double spacing_y = 75;
  int roof_height = 30;  // 0 disables the band
  int shop_height = 40;  // 0 disables the band
  bool door = false;
  bool balconies = false;
  double center_sigma = 0.0;
  double size_sigma = 0.0;
  double occlusion = 0.0;  // fraction of pixels covered by vegetation
  std::uint64_t seed = 0;
};

struct SynthRect {
  ClassId class_id = 0;
  double cx = 0, cy = 0, w = 0, h = 0;
};

struct SynthResult {
  ClassPalette palette;  // input palette plus "vegetation"
  LabelMap truth;
  LabelMap jittered;
  LabelMap occluded;
  std::vector<SynthRect> objects;  // unjittered layout
};

inline constexpr Rgb kVegetationColor{34, 139, 34};

inline nlohmann::json synth_spec_to_json(const SynthSpec& s) {
  return {{"width", s.width},         {"height", s.height},           {"rows", s.rows},
          {"cols", s.cols},           {"window_w", s.window_w},       {"window_h", s.window_h},
          {"spacing_x", s.spacing_x}, {"spacing_y", s.spacing_y},     {"roof_height", s.roof_height},
          {"shop_height", s.shop_height}, {"door", s.door},           {"balconies", s.balconies},
          {"center_sigma", s.center_sigma}, {"size_sigma", s.size_sigma},
          {"occlusion", s.occlusion}, {"seed", s.seed}};
}

inline SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec s;
  try {
    for (const auto& [key, _] : j.items()) {
      static const std::vector<std::string> known = {
          "width", "height", "rows", "cols", "window_w", "window_h", "spacing_x", "spacing_y",
          "roof_height", "shop_height", "door", "balconies", "center_sigma", "size_sigma",
          "occlusion", "seed"};
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw Error(ErrorCode::ConfigError, "unknown synth key '" + key + "'");
      }
    }
    s.width = j.value("width", s.width);
    s.height = j.value("height", s.height);
    s.rows = j.value("rows", s.rows);
    s.cols = j.value("cols", s.cols);
    s.window_w = j.value("window_w", s.window_w);
    s.window_h = j.value("window_h", s.window_h);
    s.spacing_x = j.value("spacing_x", s.spacing_x);
    s.spacing_y = j.value("spacing_y", s.spacing_y);
    s.roof_height = j.value("roof_height", s.roof_height);
    s.shop_height = j.value("shop_height", s.shop_height);
    s.door = j.value("door", s.door);
    s.balconies = j.value("balconies", s.balconies);
    s.center_sigma = j.value("center_sigma", s.center_sigma);
    s.size_sigma = j.value("size_sigma", s.size_sigma);
    s.occlusion = j.value("occlusion", s.occlusion);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseFailure, std::string("synth spec: ") + e.what());
  }
  return s;
}

/// Vertical gap between a window and its balcony: 2 px, widened so that
/// jittered windows and balconies never touch.
inline double balcony_offset(const SynthSpec& s) {
  return std::max(2.0, std::ceil(2 * (3 * s.center_sigma + 1.5 * s.size_sigma) + 2));
}

namespace detail {

inline void paint_rect(LabelMap& map, const SynthRect& r) {
  auto [x0, x1] = pixel_span(r.cx, r.w);
  auto [y0, y1] = pixel_span(r.cy, r.h);
  for (int y = std::max(y0, 0); y < std::min(y1, map.height()); ++y) {
    for (int x = std::max(x0, 0); x < std::min(x1, map.width()); ++x) map(x, y) = r.class_id;
  }
}

}  // namespace detail

/// Unjittered object rectangles for a spec; throws LayoutOverflow when the
/// layout (widened by the maximal 3-sigma jitter) leaves the image or lets
/// neighbours touch.
inline std::vector<SynthRect> synth_layout(const SynthSpec& s, const ClassPalette& palette) {
  if (s.width < 1 || s.height < 1 || s.rows < 1 || s.cols < 1 || s.window_w < 1 || s.window_h < 1) {
    throw Error(ErrorCode::InvalidArgument, "synth dimensions and counts must be >= 1");
  }
  if (s.center_sigma < 0 || s.size_sigma < 0 || s.occlusion < 0 || s.occlusion > 1 || s.roof_height < 0 ||
      s.shop_height < 0) {
    throw Error(ErrorCode::InvalidArgument, "synth sigmas, bands and occlusion must be nonnegative");
  }
  const ClassId window = palette.require("window");
  const double wall_top = s.roof_height;
  const double wall_bottom = s.height - s.shop_height;
  // Largest displacement of an object edge under truncated jitter, plus rounding.
  const double reach = 3 * s.center_sigma + 1.5 * s.size_sigma;
  const double margin = reach + 1.0;
  const double balcony_gap = balcony_offset(s);

  std::vector<SynthRect> rects;
  const double mid_x = s.width / 2.0;
  const double mid_y = (wall_top + wall_bottom) / 2.0;
  for (int i = 0; i < s.rows; ++i) {
    for (int j = 0; j < s.cols; ++j) {
      rects.push_back({window, mid_x + (j - (s.cols - 1) / 2.0) * s.spacing_x,
                       mid_y + (i - (s.rows - 1) / 2.0) * s.spacing_y, s.window_w, s.window_h});
    }
  }
  const double unit_w = s.window_w + (s.balconies ? 6 : 0);
  const double unit_h = s.window_h + (s.balconies ? balcony_gap + 5 : 0);
  if (s.cols > 1 && s.spacing_x - unit_w < 2 * margin + 1) {
    throw Error(ErrorCode::LayoutOverflow, "horizontal spacing too small for the window width and jitter");
  }
  if (s.rows > 1 && s.spacing_y - unit_h < 2 * margin + 1) {
    throw Error(ErrorCode::LayoutOverflow, "vertical spacing too small for the window height and jitter");
  }
  if (s.balconies) {
    const ClassId balcony = palette.require("balcony");
    const std::size_t n = rects.size();
    for (std::size_t k = 0; k < n; ++k) {
      const auto& w = rects[k];
      rects.push_back({balcony, w.cx, w.cy + w.h / 2 + balcony_gap + 2.5, w.w + 6, 5});
    }
  }
  for (const auto& r : rects) {
    if (r.cx - r.w / 2 - margin < 0 || r.cx + r.w / 2 + margin > s.width || r.cy - r.h / 2 - margin < wall_top ||
        r.cy + r.h / 2 + margin > wall_bottom) {
      throw Error(ErrorCode::LayoutOverflow, "window grid does not fit inside the wall band");
    }
  }
  if (s.door) {
    const ClassId door = palette.require("door");
    const double dw = std::max(4.0, std::round(s.window_w * 1.2));
    if (s.shop_height > 0) {
      const double dh = std::max(2.0, std::floor(s.shop_height * 0.8));
      rects.push_back({door, mid_x, s.height - dh / 2, dw, dh});
    } else {
      const double dh = std::round(s.window_h * 1.5);
      const SynthRect d{door, mid_x, wall_bottom - dh / 2, dw, dh};
      for (const auto& r : rects) {
        if (std::abs(r.cx - d.cx) * 2 < r.w + d.w + 2 * margin + 2 &&
            std::abs(r.cy - d.cy) * 2 < r.h + d.h + 2 * margin + 2) {
          throw Error(ErrorCode::LayoutOverflow, "door overlaps the window grid");
        }
      }
      rects.push_back(d);
    }
  }
  return rects;
}

inline SynthResult generate(const SynthSpec& s, const ClassPalette& base_palette) {
  SynthResult out;
  out.palette = base_palette.find("vegetation") ? base_palette
                                                : base_palette.with_class("vegetation", kVegetationColor, false);
  out.objects = synth_layout(s, out.palette);

  LabelMap background(s.width, s.height, out.palette.wall_id());
  if (s.roof_height > 0) {
    const ClassId roof = out.palette.require("roof");
    for (int y = 0; y < std::min(s.roof_height, s.height); ++y) {
      for (int x = 0; x < s.width; ++x) background(x, y) = roof;
    }
  }
  if (s.shop_height > 0) {
    const ClassId shop = out.palette.require("shop");
    for (int y = std::max(0, s.height - s.shop_height); y < s.height; ++y) {
      for (int x = 0; x < s.width; ++x) background(x, y) = shop;
    }
  }

  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto jitter = [&](double sigma) {
    const double z = std::clamp(normal(rng), -3.0, 3.0);
    return sigma * z;
  };

  out.truth = background;
  out.jittered = background;
  for (const auto& r : out.objects) {
    detail::paint_rect(out.truth, r);
    SynthRect j = r;
    j.cx += jitter(s.center_sigma);
    j.cy += jitter(s.center_sigma);
    j.w = std::max(1.0, j.w + jitter(s.size_sigma));
    j.h = std::max(1.0, j.h + jitter(s.size_sigma));
    detail::paint_rect(out.jittered, j);
  }

  out.occluded = out.jittered;
  if (s.occlusion > 0) {
    const ClassId veg = out.palette.require("vegetation");
    const double target = s.occlusion * double(out.occluded.size());
    const double lo = 0.04 * std::min(s.width, s.height);
    const double hi = 0.12 * std::min(s.width, s.height);
    std::uniform_real_distribution<double> ux(0.0, s.width), uy(0.0, s.height), ur(lo, hi);
    std::size_t covered = 0;
    for (int iter = 0; iter < 10000 && double(covered) < target; ++iter) {
      const double cx = ux(rng), cy = uy(rng), rx = ur(rng), ry = ur(rng);
      for (int y = std::max(0, int(cy - ry)); y <= std::min(s.height - 1, int(cy + ry)); ++y) {
        for (int x = std::max(0, int(cx - rx)); x <= std::min(s.width - 1, int(cx + rx)); ++x) {
          const double nx = (x + 0.5 - cx) / rx, ny = (y + 0.5 - cy) / ry;
          if (nx * nx + ny * ny > 1.0 || out.occluded(x, y) == veg) continue;
          out.occluded(x, y) = veg;
          if (double(++covered) >= target) break;
        }
        if (double(covered) >= target) break;
      }
    }
  }
  return out;
}

}  // namespace facade

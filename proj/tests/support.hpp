#pragma once

// Shared fixtures and brute-force oracles for the unit and acceptance suites.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "facade/facade.hpp"

namespace support {

using namespace facade;

inline std::string data_path(const std::string& rel) { return std::string(FACADE_TEST_DATA) + "/" + rel; }

/// Error code thrown by `fn`, or nullopt when it returns normally.
template <typename F>
std::optional<ErrorCode> error_code(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline const ClassPalette& ecp() {
  static const ClassPalette p = load_palette(data_path("data/palettes/ecp.json"));
  return p;
}

/// Label map from rows of characters; `legend` maps each character to a class name.
inline LabelMap ascii_map(const std::vector<std::string>& rows, const ClassPalette& palette,
                          const std::vector<std::pair<char, std::string>>& legend) {
  LabelMap m(int(rows.at(0).size()), int(rows.size()), 0);
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      const char c = rows[std::size_t(y)].at(std::size_t(x));
      auto it = std::find_if(legend.begin(), legend.end(), [&](const auto& e) { return e.first == c; });
      if (it == legend.end()) throw std::runtime_error(std::string("unmapped fixture char ") + c);
      m(x, y) = palette.require(it->second);
    }
  }
  return m;
}

inline const std::vector<std::pair<char, std::string>>& ecp_legend() {
  static const std::vector<std::pair<char, std::string>> l = {
      {'.', "wall"}, {'W', "window"}, {'B', "balcony"}, {'D', "door"},
      {'S', "shop"}, {'K', "sky"},    {'C', "chimney"}, {'R', "roof"}};
  return l;
}

/// Fixture file: one row per line; blank lines and lines starting with '#' ignored.
inline std::vector<std::string> read_fixture(const std::string& name) {
  std::ifstream in(data_path("tests/fixtures/" + name));
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::vector<std::string> rows;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    rows.push_back(line);
  }
  return rows;
}

/// A random synth spec whose layout fits with the given jitter. `min_grid`
/// bounds rows and columns from below.
inline SynthSpec random_spec(std::mt19937_64& rng, double center_sigma, double size_sigma, bool extras = true,
                             int min_grid = 1) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  SynthSpec s;
  s.rows = pick(min_grid, 4);
  s.cols = pick(min_grid, 5);
  s.window_w = pick(8, 24);
  s.window_h = pick(10, 30);
  s.balconies = extras && pick(0, 1) == 1;
  s.door = extras && pick(0, 1) == 1;
  s.center_sigma = center_sigma;
  s.size_sigma = size_sigma;
  const double margin = 3 * center_sigma + 1.5 * size_sigma + 1.0;
  const double bgap = balcony_offset(s);
  const int gap = int(std::ceil(2 * margin + 1)) + pick(2, 14);
  const double unit_w = s.window_w + (s.balconies ? 6 : 0);
  const double unit_h = s.window_h + (s.balconies ? bgap + 5 : 0);
  s.spacing_x = unit_w + gap;
  s.spacing_y = unit_h + gap;
  s.roof_height = pick(0, 1) == 1 ? pick(10, 30) : 0;
  s.shop_height = pick(0, 1) == 1 ? pick(20, 40) : 0;
  const int side = int(std::ceil(margin)) + pick(4, 20);
  s.width = int(std::ceil((s.cols - 1) * s.spacing_x + unit_w + 2 * side));
  const double door_room = (s.door && s.shop_height == 0) ? 2 * std::round(s.window_h * 1.5) + 2 * margin + 4 : 0;
  const double grid_h = (s.rows - 1) * s.spacing_y + s.window_h + 2 * (unit_h - s.window_h) + door_room;
  s.height = int(std::ceil(grid_h + 2 * side)) + s.roof_height + s.shop_height;
  s.seed = rng();
  return s;
}

// ---- extraction oracles ----

/// Components by repeated exhaustive sweeps: grow each seed until no pixel changes.
inline std::vector<std::set<std::pair<int, int>>> oracle_components(const LabelMap& m, ClassId cls) {
  Grid<int> label(m.width(), m.height(), -1);
  int next = 0;
  std::vector<std::set<std::pair<int, int>>> out;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (m(x, y) != cls || label(x, y) >= 0) continue;
      label(x, y) = next;
      for (bool changed = true; changed;) {
        changed = false;
        for (int yy = 0; yy < m.height(); ++yy) {
          for (int xx = 0; xx < m.width(); ++xx) {
            if (m(xx, yy) != cls || label(xx, yy) >= 0) continue;
            const bool touch = (xx > 0 && label(xx - 1, yy) == next) || (xx + 1 < m.width() && label(xx + 1, yy) == next) ||
                               (yy > 0 && label(xx, yy - 1) == next) || (yy + 1 < m.height() && label(xx, yy + 1) == next);
            if (touch) {
              label(xx, yy) = next;
              changed = true;
            }
          }
        }
      }
      std::set<std::pair<int, int>> comp;
      for (int yy = 0; yy < m.height(); ++yy) {
        for (int xx = 0; xx < m.width(); ++xx) {
          if (label(xx, yy) == next) comp.insert({xx, yy});
        }
      }
      out.push_back(std::move(comp));
      ++next;
    }
  }
  return out;
}

/// Hull vertices by the cubic test: p is a vertex unless it lies inside or on
/// the boundary segment of some triangle or segment formed by other points.
inline std::set<std::pair<int, int>> oracle_hull(const std::vector<Pixel>& pts) {
  std::set<std::pair<int, int>> uniq;
  for (auto p : pts) uniq.insert({p.x, p.y});
  std::vector<Pixel> u;
  for (auto [x, y] : uniq) u.push_back({x, y});
  std::set<std::pair<int, int>> out;
  if (u.size() <= 2) {
    for (auto p : u) out.insert({p.x, p.y});
    return out;
  }
  // An edge (a, b) is a hull edge if every point is on its left or on the
  // closed segment; its endpoints are then vertices.
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (i == j) continue;
      bool ok = true;
      for (std::size_t k = 0; k < u.size() && ok; ++k) {
        const auto c = cross(u[i], u[j], u[k]);
        if (c < 0) ok = false;
        if (c == 0) {
          const bool within = std::min(u[i].x, u[j].x) <= u[k].x && u[k].x <= std::max(u[i].x, u[j].x) &&
                              std::min(u[i].y, u[j].y) <= u[k].y && u[k].y <= std::max(u[i].y, u[j].y);
          if (!within) ok = false;
        }
      }
      if (ok) {
        out.insert({u[i].x, u[i].y});
        out.insert({u[j].x, u[j].y});
      }
    }
  }
  return out;
}

inline std::array<Pixel, 4> oracle_corners(const std::vector<Pixel>& pts, int w, int h) {
  const std::array<Pixel, 4> anchors{Pixel{0, 0}, Pixel{w - 1, 0}, Pixel{w - 1, h - 1}, Pixel{0, h - 1}};
  std::array<Pixel, 4> out{};
  for (int k = 0; k < 4; ++k) {
    long best = -1;
    for (const auto& p : pts) {
      const long dx = p.x - anchors[k].x, dy = p.y - anchors[k].y;
      const long d = dx * dx + dy * dy;
      if (best < 0 || d < best || (d == best && (p.y < out[k].y || (p.y == out[k].y && p.x < out[k].x)))) {
        best = d;
        out[k] = p;
      }
    }
  }
  return out;
}

/// Random map of overlapping rectangles and discs of a few classes on wall.
inline LabelMap random_blob_map(std::mt19937_64& rng, const ClassPalette& p, int w, int h, int blobs) {
  LabelMap m(w, h, p.wall_id());
  std::uniform_int_distribution<int> ux(0, w - 1), uy(0, h - 1), ur(1, 6), ucls(0, int(p.size()) - 1), shape(0, 1);
  for (int b = 0; b < blobs; ++b) {
    const int cx = ux(rng), cy = uy(rng), rx = ur(rng), ry = ur(rng);
    const auto cls = ClassId(ucls(rng));
    const bool disc = shape(rng) == 1;
    for (int y = std::max(0, cy - ry); y <= std::min(h - 1, cy + ry); ++y) {
      for (int x = std::max(0, cx - rx); x <= std::min(w - 1, cx + rx); ++x) {
        const double nx = double(x - cx) / rx, ny = double(y - cy) / ry;
        if (!disc || nx * nx + ny * ny <= 1.0) m(x, y) = cls;
      }
    }
  }
  return m;
}

// ---- metric oracle ----

struct OracleMetrics {
  std::vector<std::optional<double>> acc, iou;
  double total = 0.0, miou = 0.0;
};

inline OracleMetrics oracle_metrics(const LabelMap& pred, const LabelMap& truth, std::size_t classes) {
  OracleMetrics r;
  long correct = 0, all = 0;
  double sum = 0.0;
  int present = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    long tp = 0, fp = 0, fn = 0, t = 0;
    for (int y = 0; y < truth.height(); ++y) {
      for (int x = 0; x < truth.width(); ++x) {
        const bool is_t = truth(x, y) == c, is_p = pred(x, y) == c;
        tp += is_t && is_p;
        fp += !is_t && is_p;
        fn += is_t && !is_p;
        t += is_t;
      }
    }
    if (t == 0) {
      r.acc.push_back(std::nullopt);
      r.iou.push_back(std::nullopt);
      continue;
    }
    r.acc.push_back(double(tp) / double(t));
    r.iou.push_back(double(tp) / double(tp + fp + fn));
    sum += *r.iou.back();
    ++present;
  }
  for (int y = 0; y < truth.height(); ++y) {
    for (int x = 0; x < truth.width(); ++x) {
      correct += pred(x, y) == truth(x, y);
      ++all;
    }
  }
  r.total = double(correct) / double(all);
  r.miou = present ? sum / present : 0.0;
  return r;
}

// ---- pipeline helpers ----

inline LabelMap refine_map(const LabelMap& map, const ClassPalette& p, const SymmetryConfig& cfg = {}) {
  const auto objects = extract_instances(map, p);
  const auto layout = refine_layout(objects, cfg, map.width(), map.height());
  return rasterize(clear_objects(map, p), layout.objects, default_draw_order(p));
}

/// Object-class mean IoU against truth, over object classes present in truth.
inline double object_miou(const LabelMap& pred, const LabelMap& truth, const ClassPalette& p) {
  const auto report = evaluate(pred, truth, p);
  const auto objs = p.object_classes();
  return report.mean_iou_over(objs).value_or(0.0);
}

/// Random grammar: a few floors of windows, balconies and doors, optional bands.
inline GrammarDoc random_grammar(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GrammarDoc g;
  g.width = 100 + int(200 * u(rng));
  const int floors = 1 + int(4 * u(rng));
  const double floor_h = 40 + 40 * u(rng);
  const double roof = u(rng) < 0.5 ? 20 + 20 * u(rng) : 0.0;
  const double shop = u(rng) < 0.5 ? 20 + 30 * u(rng) : 0.0;
  g.height = int(std::ceil(roof + shop + floors * floor_h));
  g.pixel_scale = 0.02 + 0.08 * u(rng);
  g.materials = {{"wall", {200, 180, 160}}, {"window", {70, 130, 180}}, {"balcony", {90, 90, 90}},
                 {"door", {120, 60, 30}},   {"roof", {150, 40, 40}},    {"shop", {30, 120, 60}}};
  if (roof > 0) g.bands.push_back({"roof", 0.0, roof});
  if (shop > 0) g.bands.push_back({"shop", g.height - shop, double(g.height)});
  const double wall_bottom = g.height - shop;
  for (int f = 0; f < floors; ++f) {
    Floor fl;
    fl.index = f;
    fl.y_bottom = wall_bottom - f * floor_h;
    fl.y_top = fl.y_bottom - floor_h;
    const int cols = 1 + int(5 * u(rng));
    const double ww = 6 + 10 * u(rng), wh = 10 + 15 * u(rng);
    const double cy = 0.5 * (fl.y_top + fl.y_bottom);
    for (int c = 0; c < cols; ++c) {
      const double cx = (c + 0.5) * g.width / cols;
      fl.elements.push_back({"window", cx, cy, ww, wh});
      if (u(rng) < 0.4) fl.elements.push_back({"balcony", cx, cy + wh / 2 + 4, ww + 6, 5 + 3 * u(rng)});
    }
    if (f == 0 && u(rng) < 0.5) fl.elements.push_back({"door", g.width / 2.0, fl.y_bottom - 15, 12, 30});
    g.floors.push_back(std::move(fl));
  }
  return g;
}

}  // namespace support

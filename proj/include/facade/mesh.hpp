#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "facade/error.hpp"
#include "facade/grammar.hpp"

// Procedural building mesh. World frame: X right, Y up, Z out of the facade
// plane (z = 0). Raster rows are flipped: world Y = (H - y) * pixel_scale.

namespace facade {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z); }

using Triangle = std::array<std::uint32_t, 3>;

/// Unit-cube geometry scaled onto an element. Local u, v, t in [0, 1] map to
/// width, height and depth; t = 1 is the front. Inset templates occupy
/// z in [-depth, 0], protruding ones z in [0, depth].
struct Template {
  std::string cls;
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  double depth = 0.15;
  bool protrudes = false;
  std::string material;
};

inline void validate_template(const Template& t) {
  if (t.vertices.empty() || t.triangles.empty()) {
    throw Error(ErrorCode::InvalidArgument, "template '" + t.cls + "' has no geometry");
  }
  for (const auto& tri : t.triangles) {
    for (auto i : tri) {
      if (i >= t.vertices.size()) {
        throw Error(ErrorCode::InvalidArgument, "template '" + t.cls + "' has an out-of-range index");
      }
    }
  }
  Vec3 lo = t.vertices[0], hi = t.vertices[0];
  for (const auto& v : t.vertices) {
    lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
    hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
  }
  if (!(lo == Vec3{0, 0, 0}) || !(hi == Vec3{1, 1, 1})) {
    throw Error(ErrorCode::InvalidArgument, "template '" + t.cls + "' is not normalized to [0,1]^3");
  }
  if (!(t.depth > 0)) throw Error(ErrorCode::InvalidArgument, "template depth must be positive");
}

namespace detail {

/// Appends an axis-aligned box with outward-facing counter-clockwise faces.
inline void add_box(Template& t, Vec3 lo, Vec3 hi) {
  const auto base = std::uint32_t(t.vertices.size());
  for (int i = 0; i < 8; ++i) {
    t.vertices.push_back({(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y, (i & 4) ? hi.z : lo.z});
  }
  static constexpr std::array<std::array<std::uint32_t, 4>, 6> quads = {{
      {0, 4, 6, 2},  // -x
      {1, 3, 7, 5},  // +x
      {0, 1, 5, 4},  // -y
      {2, 6, 7, 3},  // +y
      {0, 2, 3, 1},  // -z
      {4, 5, 7, 6},  // +z
  }};
  for (const auto& q : quads) {
    t.triangles.push_back({base + q[0], base + q[1], base + q[2]});
    t.triangles.push_back({base + q[0], base + q[2], base + q[3]});
  }
}

}  // namespace detail

inline Template box_template(std::string cls, double depth, bool protrudes, std::string material) {
  Template t{std::move(cls), {}, {}, depth, protrudes, std::move(material)};
  detail::add_box(t, {0, 0, 0}, {1, 1, 1});
  return t;
}

/// Mono-pitch roof: wedge rising from the facade front (t = 1) at the bottom
/// to the back (t = 0) at the top.
inline Template roof_template(double depth, std::string material = "roof") {
  Template t{"roof", {}, {}, depth, false, std::move(material)};
  t.vertices = {{0, 0, 1}, {1, 0, 1}, {0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  t.triangles = {{0, 2, 3}, {0, 3, 1},   // bottom
                 {2, 4, 5}, {2, 5, 3},   // back
                 {0, 1, 5}, {0, 5, 4},   // slope
                 {0, 4, 2}, {1, 3, 5}};  // caps
  return t;
}

using TemplateLibrary = std::map<std::string, Template>;

/// Window: inset box with a glass pane; door: inset box; balcony:
/// protruding floor slab with three railing slats.
inline TemplateLibrary builtin_templates() {
  TemplateLibrary lib;
  {
    auto t = box_template("window", 0.15, false, "window");
    const auto base = std::uint32_t(t.vertices.size());
    t.vertices.insert(t.vertices.end(), {{0, 0, 0.5}, {1, 0, 0.5}, {1, 1, 0.5}, {0, 1, 0.5}});
    t.triangles.push_back({base, base + 1, base + 2});
    t.triangles.push_back({base, base + 2, base + 3});
    lib["window"] = t;
  }
  lib["door"] = box_template("door", 0.1, false, "door");
  {
    Template t{"balcony", {}, {}, 0.6, true, "balcony"};
    detail::add_box(t, {0, 0, 0}, {1, 0.15, 1});
    for (double x0 : {0.0, 0.47, 0.94}) detail::add_box(t, {x0, 0.15, 0.9}, {x0 + 0.06, 1.0, 1.0});
    lib["balcony"] = t;
  }
  for (const auto& [_, t] : lib) validate_template(t);
  return lib;
}

inline Template template_from_json(const nlohmann::json& j) {
  try {
    Template t;
    t.cls = j.at("class").get<std::string>();
    for (const auto& v : j.at("vertices")) t.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>()});
    for (const auto& f : j.at("triangles")) {
      t.triangles.push_back({f.at(0).get<std::uint32_t>(), f.at(1).get<std::uint32_t>(), f.at(2).get<std::uint32_t>()});
    }
    t.depth = j.value("depth", 0.15);
    t.protrudes = j.value("protrudes", false);
    t.material = j.value("material", t.cls);
    validate_template(t);
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseFailure, std::string("template JSON: ") + e.what());
  }
}

/// Template file: {"templates": [{"class", "vertices", "triangles", "depth", "protrudes", "material"}]}.
/// Entries replace the built-ins of the same class.
inline TemplateLibrary load_templates(const std::filesystem::path& path, TemplateLibrary base = builtin_templates()) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open template file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseFailure, std::string("template file: ") + e.what());
  }
  if (!j.contains("templates")) throw Error(ErrorCode::ParseFailure, "template file lacks 'templates'");
  for (const auto& item : j.at("templates")) {
    auto t = template_from_json(item);
    base[t.cls] = std::move(t);
  }
  return base;
}

struct MeshFragment {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;  // local indices
};

/// Scales the template to (w, h) pixels times pixel_scale and its depth, and
/// centers it on the element in world coordinates.
inline MeshFragment place_template(const Template& tpl, const Element& e, double pixel_scale,
                                   double facade_height_px) {
  if (!(e.w > 0) || !(e.h > 0)) {
    throw Error(ErrorCode::InvalidArgument, "element '" + e.cls + "' has nonpositive size");
  }
  MeshFragment f;
  f.triangles = tpl.triangles;
  const double cx = e.x * pixel_scale;
  const double cy = (facade_height_px - e.y) * pixel_scale;
  const double sw = e.w * pixel_scale;
  const double sh = e.h * pixel_scale;
  f.vertices.reserve(tpl.vertices.size());
  for (const auto& v : tpl.vertices) {
    const double z = tpl.protrudes ? v.z * tpl.depth : (v.z - 1.0) * tpl.depth;
    f.vertices.push_back({cx + (v.x - 0.5) * sw, cy + (v.y - 0.5) * sh, z});
  }
  return f;
}

struct MeshGroup {
  std::string name;
  std::string cls;
  std::string material;
  std::size_t first_vertex = 0;
  std::size_t vertex_count = 0;
  std::size_t first_triangle = 0;
  std::size_t triangle_count = 0;
  Element element;  // the four-tuple this group realizes
};

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;  // global indices
  std::vector<MeshGroup> groups;

  void append(const MeshFragment& f, MeshGroup g) {
    g.first_vertex = vertices.size();
    g.vertex_count = f.vertices.size();
    g.first_triangle = triangles.size();
    g.triangle_count = f.triangles.size();
    const auto base = std::uint32_t(vertices.size());
    vertices.insert(vertices.end(), f.vertices.begin(), f.vertices.end());
    for (const auto& t : f.triangles) triangles.push_back({base + t[0], base + t[1], base + t[2]});
    groups.push_back(std::move(g));
  }
};

struct MeshOptions {
  double wall_thickness = 0.3;
  double roof_pitch_deg = 30.0;
  /// Balconies with area below this fraction of the median balcony area are omitted.
  double balcony_threshold = 0.25;
};

inline double triangle_area(const Mesh& m, const Triangle& t) {
  return 0.5 * norm(cross(m.vertices[t[1]] - m.vertices[t[0]], m.vertices[t[2]] - m.vertices[t[0]]));
}

/// Floor slabs (ground first), then roof and shop bands, then each floor's
/// elements in grammar order.
inline Mesh build_mesh(const GrammarDoc& g, const TemplateLibrary& templates, const MeshOptions& opt = {}) {
  if (!(g.pixel_scale > 0)) throw Error(ErrorCode::InvalidArgument, "pixel_scale must be positive");
  if (g.width < 1 || g.height < 1) throw Error(ErrorCode::InvalidArgument, "grammar extent must be positive");
  if (!(opt.roof_pitch_deg > 0 && opt.roof_pitch_deg < 90)) {
    throw Error(ErrorCode::InvalidArgument, "roof pitch must lie in (0, 90) degrees");
  }
  Mesh mesh;
  const double W = g.width;
  const double H = g.height;
  const auto slab = box_template("wall", opt.wall_thickness, false, "wall");

  auto band_element = [&](const std::string& cls, double top, double bottom) {
    return Element{cls, W / 2, (top + bottom) / 2, W, bottom - top};
  };

  for (const auto& f : g.floors) {
    if (f.y_bottom <= f.y_top) continue;
    const auto e = band_element("wall", f.y_top, f.y_bottom);
    mesh.append(place_template(slab, e, g.pixel_scale, H),
                {"floor_" + std::to_string(f.index), "wall", "wall", 0, 0, 0, 0, e});
  }
  if (g.floors.empty()) {
    // No floors: one slab between the upper bands and the shop.
    double top = 0.0, bottom = H;
    for (const auto& b : g.bands) {
      if (b.name == "shop") bottom = std::min(bottom, b.y_top);
      else top = std::max(top, b.y_bottom);
    }
    if (bottom > top) {
      const auto e = band_element("wall", top, bottom);
      mesh.append(place_template(slab, e, g.pixel_scale, H), {"floor_0", "wall", "wall", 0, 0, 0, 0, e});
    }
  }
  if (const Band* roof = g.band("roof"); roof && roof->y_bottom > roof->y_top) {
    const double h_m = (roof->y_bottom - roof->y_top) * g.pixel_scale;
    const auto tpl = roof_template(h_m / std::tan(opt.roof_pitch_deg * std::numbers::pi / 180.0));
    const auto e = band_element("roof", roof->y_top, roof->y_bottom);
    mesh.append(place_template(tpl, e, g.pixel_scale, H), {"roof", "roof", "roof", 0, 0, 0, 0, e});
  }
  if (const Band* shop = g.band("shop"); shop && shop->y_bottom > shop->y_top) {
    const auto tpl = box_template("shop", opt.wall_thickness, false, "shop");
    const auto e = band_element("shop", shop->y_top, shop->y_bottom);
    mesh.append(place_template(tpl, e, g.pixel_scale, H), {"shop", "shop", "shop", 0, 0, 0, 0, e});
  }

  std::vector<double> balcony_areas;
  for (const auto& f : g.floors) {
    for (const auto& e : f.elements) {
      if (e.cls == "balcony") balcony_areas.push_back(e.w * e.h);
    }
  }
  const double min_balcony = opt.balcony_threshold * detail::median(balcony_areas);

  for (const auto& f : g.floors) {
    for (std::size_t k = 0; k < f.elements.size(); ++k) {
      const auto& e = f.elements[k];
      if (e.cls == "balcony" && e.w * e.h < min_balcony) continue;
      auto it = templates.find(e.cls);
      if (it == templates.end()) throw Error(ErrorCode::MissingTemplate, "no template for class '" + e.cls + "'");
      mesh.append(place_template(it->second, e, g.pixel_scale, H),
                  {"floor_" + std::to_string(f.index) + "_" + e.cls + "_" + std::to_string(k), e.cls,
                   it->second.material, 0, 0, 0, 0, e});
    }
  }
  return mesh;
}

namespace detail {

inline void put_fixed(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  // Values that round to zero print without a sign.
  out += std::string_view(buf) == "-0.000000" ? "0.000000" : buf;
}

}  // namespace detail

/// Wavefront OBJ text: mtllib line, then per group `o`, `usemtl`, its `v`
/// records and its `f` records (1-based global indices).
inline std::string obj_text(const Mesh& mesh, const std::string& mtl_name) {
  std::string out = "# facadekit procedural building\nmtllib " + mtl_name + "\n";
  for (const auto& g : mesh.groups) {
    out += "o " + g.name + "\nusemtl " + g.material + "\n";
    for (std::size_t i = g.first_vertex; i < g.first_vertex + g.vertex_count; ++i) {
      const auto& v = mesh.vertices[i];
      out += "v ";
      detail::put_fixed(out, v.x);
      out += ' ';
      detail::put_fixed(out, v.y);
      out += ' ';
      detail::put_fixed(out, v.z);
      out += '\n';
    }
    for (std::size_t t = g.first_triangle; t < g.first_triangle + g.triangle_count; ++t) {
      const auto& tri = mesh.triangles[t];
      out += "f " + std::to_string(tri[0] + 1) + ' ' + std::to_string(tri[1] + 1) + ' ' +
             std::to_string(tri[2] + 1) + '\n';
    }
  }
  return out;
}

/// MTL text for every material the mesh uses, sorted by name. Kd is the
/// material color over 255; unknown materials are mid grey.
inline std::string mtl_text(const Mesh& mesh, const std::map<std::string, Rgb>& materials) {
  std::set<std::string> used;
  for (const auto& g : mesh.groups) used.insert(g.material);
  std::string out;
  for (const auto& name : used) {
    Rgb c{128, 128, 128};
    if (auto it = materials.find(name); it != materials.end()) c = it->second;
    out += "newmtl " + name + "\nKd ";
    detail::put_fixed(out, c.r / 255.0);
    out += ' ';
    detail::put_fixed(out, c.g / 255.0);
    out += ' ';
    detail::put_fixed(out, c.b / 255.0);
    out += "\n\n";
  }
  return out;
}

struct ExportedFiles {
  std::filesystem::path obj;
  std::filesystem::path mtl;
};

inline ExportedFiles export_obj(const Mesh& mesh, const std::map<std::string, Rgb>& materials,
                                const std::filesystem::path& obj_path) {
  ExportedFiles files{obj_path, obj_path};
  files.mtl.replace_extension(".mtl");
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + p.string());
  };
  write(files.obj, obj_text(mesh, files.mtl.filename().string()));
  write(files.mtl, mtl_text(mesh, materials));
  return files;
}

/// Parsed OBJ: the mesh (groups carry name and material only) and the
/// mtllib reference.
struct ObjDocument {
  Mesh mesh;
  std::string mtllib;
};

/// Reads the subset of OBJ written by obj_text: `o`, `usemtl`, `v` and
/// triangular `f` records. Face indices are 1-based and must be in range.
inline ObjDocument parse_obj(std::string_view text) {
  ObjDocument doc;
  auto& m = doc.mesh;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::ParseFailure, "OBJ line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "mtllib") {
      ls >> doc.mtllib;
    } else if (tag == "o") {
      MeshGroup g;
      ls >> g.name;
      g.first_vertex = m.vertices.size();
      g.first_triangle = m.triangles.size();
      m.groups.push_back(std::move(g));
    } else if (tag == "usemtl") {
      if (m.groups.empty()) fail("usemtl before any object");
      ls >> m.groups.back().material;
    } else if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x >> v.y >> v.z)) fail("bad vertex");
      m.vertices.push_back(v);
      if (!m.groups.empty()) ++m.groups.back().vertex_count;
    } else if (tag == "f") {
      long a = 0, b = 0, c = 0;
      if (!(ls >> a >> b >> c)) fail("bad face");
      std::string extra;
      if (ls >> extra) fail("only triangles are supported");
      for (long i : {a, b, c}) {
        if (i < 1 || std::size_t(i) > m.vertices.size()) fail("face index out of range");
      }
      m.triangles.push_back({std::uint32_t(a - 1), std::uint32_t(b - 1), std::uint32_t(c - 1)});
      if (!m.groups.empty()) ++m.groups.back().triangle_count;
    } else {
      fail("unsupported record '" + tag + "'");
    }
  }
  return doc;
}

}  // namespace facade

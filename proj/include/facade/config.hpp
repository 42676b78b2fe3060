#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>
#include <toml.hpp>

#include "facade/error.hpp"
#include "facade/gradcheck.hpp"
#include "facade/grammar.hpp"
#include "facade/instances.hpp"
#include "facade/labelmap.hpp"
#include "facade/losses.hpp"
#include "facade/mesh.hpp"
#include "facade/raster.hpp"
#include "facade/symmetry.hpp"

namespace facade {

/// Every tunable of the pipeline. Loaded from TOML; command-line flags are
/// applied on top. Unknown sections or keys are rejected.
struct PipelineConfig {
  std::string palette_path;
  bool decode_nearest = false;
  int decode_max_distance = -1;

  std::int64_t min_area = 16;
  int connectivity = 4;

  double gap_factor = 0.5;
  std::string sigmoid_tau_mode = "median_diagonal";
  double sigmoid_tau = 1.0;
  double sigmoid_shift = 4.0;
  bool squared_spacing = true;
  bool literal_center_blend = false;
  std::vector<std::string> disabled_classes;

  std::vector<std::string> draw_order;  // empty: balcony, door, window

  double pixel_scale = 0.05;
  std::array<int, 3> glass_color{70, 130, 180};
  std::array<int, 3> default_material{128, 128, 128};

  double balcony_threshold = 0.25;
  double roof_pitch_deg = 30.0;
  double wall_thickness = 0.3;
  std::string template_file;

  double alpha = 2.0;
  double beta = 4.0;
  double lambda1 = 1.0, lambda2 = 1.0, lambda3 = 1.0, lambda4 = 1.0;
  int stride = 4;
  std::string size_form = "sum";

  std::uint64_t seed = 0;
  int jobs = 1;

  void validate() const {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigError, m); };
    if (decode_max_distance < -1) fail("decode.max_distance must be >= -1");
    if (min_area < 1) fail("instances.min_area must be >= 1");
    if (connectivity != 4 && connectivity != 8) fail("instances.connectivity must be 4 or 8");
    if (!(gap_factor > 0) || !std::isfinite(gap_factor)) fail("symmetry.gap_factor must be > 0");
    if (sigmoid_tau_mode != "median_diagonal" && sigmoid_tau_mode != "fixed") {
      fail("symmetry.sigmoid_tau_mode must be 'median_diagonal' or 'fixed'");
    }
    if (!(sigmoid_tau > 0) || !std::isfinite(sigmoid_tau)) fail("symmetry.sigmoid_tau must be > 0");
    if (!std::isfinite(sigmoid_shift)) fail("symmetry.sigmoid_shift must be finite");
    if (!(pixel_scale > 0) || !std::isfinite(pixel_scale)) fail("grammar.pixel_scale must be > 0");
    for (const auto* c : {&glass_color, &default_material}) {
      for (int v : *c) {
        if (v < 0 || v > 255) fail("colors must have channels in 0..255");
      }
    }
    if (!(balcony_threshold >= 0)) fail("mesh.balcony_threshold must be >= 0");
    if (!(roof_pitch_deg > 0 && roof_pitch_deg < 90)) fail("mesh.roof_pitch_deg must lie in (0, 90)");
    if (!(wall_thickness > 0)) fail("mesh.wall_thickness must be > 0");
    if (!(alpha >= 0) || !(beta >= 0)) fail("losses.alpha and losses.beta must be >= 0");
    if (!(lambda1 >= 0 && lambda2 >= 0 && lambda3 >= 0 && lambda4 >= 0)) fail("loss weights must be >= 0");
    if (stride < 1) fail("losses.stride must be >= 1");
    if (size_form != "sum" && size_form != "per_dimension") fail("losses.size_form must be 'sum' or 'per_dimension'");
    if (jobs < 1) fail("run.jobs must be >= 1");
  }

  DecodeOptions decode_options() const { return {decode_nearest, decode_max_distance}; }

  ExtractOptions extract_options() const {
    return {min_area, connectivity == 8 ? Connectivity::Eight : Connectivity::Four};
  }

  SymmetryConfig symmetry_config(const ClassPalette& palette) const {
    SymmetryConfig c;
    c.gap_factor = gap_factor;
    c.tau_mode = sigmoid_tau_mode == "fixed" ? TauMode::Fixed : TauMode::MedianDiagonal;
    c.fixed_tau = sigmoid_tau;
    c.sigmoid_shift = sigmoid_shift;
    c.squared_spacing = squared_spacing;
    c.literal_center_blend = literal_center_blend;
    for (const auto& n : disabled_classes) c.disabled_classes.insert(palette.require(n));
    return c;
  }

  DrawOrder draw_order_for(const ClassPalette& palette) const {
    auto order = draw_order.empty() ? default_draw_order(palette) : draw_order_from_names(draw_order, palette);
    validate_draw_order(order, palette);
    return order;
  }

  GrammarOptions grammar_options() const {
    auto rgb = [](const std::array<int, 3>& c) {
      return Rgb{std::uint8_t(c[0]), std::uint8_t(c[1]), std::uint8_t(c[2])};
    };
    return {pixel_scale, gap_factor, rgb(glass_color), rgb(default_material)};
  }

  MeshOptions mesh_options() const { return {wall_thickness, roof_pitch_deg, balcony_threshold}; }

  TemplateLibrary templates() const {
    return template_file.empty() ? builtin_templates() : load_templates(template_file);
  }

  losses::LossWeights loss_weights() const { return {lambda1, lambda2, lambda3, lambda4}; }

  losses::ProblemOptions loss_problem_options() const {
    return {{alpha, beta},
            size_form == "sum" ? losses::SizeLossForm::SumOfDimensions : losses::SizeLossForm::PerDimension,
            stride};
  }

  nlohmann::json to_json() const {
    return {
        {"palette", {{"path", palette_path}}},
        {"decode", {{"nearest", decode_nearest}, {"max_distance", decode_max_distance}}},
        {"instances", {{"min_area", min_area}, {"connectivity", connectivity}}},
        {"symmetry",
         {{"gap_factor", gap_factor},
          {"sigmoid_tau_mode", sigmoid_tau_mode},
          {"sigmoid_tau", sigmoid_tau},
          {"sigmoid_shift", sigmoid_shift},
          {"squared_spacing", squared_spacing},
          {"literal_center_blend", literal_center_blend},
          {"disabled_classes", disabled_classes}}},
        {"raster", {{"draw_order", draw_order}}},
        {"grammar", {{"pixel_scale", pixel_scale}, {"glass_color", glass_color}, {"default_material", default_material}}},
        {"mesh",
         {{"balcony_threshold", balcony_threshold},
          {"roof_pitch_deg", roof_pitch_deg},
          {"wall_thickness", wall_thickness},
          {"template_file", template_file}}},
        {"losses",
         {{"alpha", alpha},
          {"beta", beta},
          {"lambda1", lambda1},
          {"lambda2", lambda2},
          {"lambda3", lambda3},
          {"lambda4", lambda4},
          {"stride", stride},
          {"size_form", size_form}}},
        {"run", {{"seed", seed}, {"jobs", jobs}}},
    };
  }
};

namespace detail {

class TomlReader {
 public:
  explicit TomlReader(const toml::table& root) : root_(root) {}

  void section(const std::string& name, const std::set<std::string>& keys) {
    known_[name] = keys;
  }

  void check_unknown() const {
    for (const auto& [key, node] : root_) {
      const std::string k(key.str());
      auto it = known_.find(k);
      if (it == known_.end()) throw Error(ErrorCode::ConfigError, "unknown config section [" + k + "]");
      const auto* tbl = node.as_table();
      if (!tbl) throw Error(ErrorCode::ConfigError, "[" + k + "] must be a table");
      for (const auto& [sub, _] : *tbl) {
        if (!it->second.count(std::string(sub.str()))) {
          throw Error(ErrorCode::ConfigError, "unknown config key " + k + "." + std::string(sub.str()));
        }
      }
    }
  }

  template <typename T>
  void get(const std::string& sec, const std::string& key, T& out) const {
    const auto node = root_[sec][key];
    if (!node) return;
    if constexpr (std::is_same_v<T, double>) {
      if (auto v = node.template value<double>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_same_v<T, bool>) {
      if (auto v = node.template value_exact<bool>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_integral_v<T>) {
      if (auto v = node.template value_exact<std::int64_t>()) {
        out = T(*v);
        return;
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (auto v = node.template value_exact<std::string>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      if (const auto* arr = node.as_array()) {
        out.clear();
        for (const auto& e : *arr) {
          auto s = e.template value_exact<std::string>();
          if (!s) throw Error(ErrorCode::ConfigError, sec + "." + key + " must be an array of strings");
          out.push_back(*s);
        }
        return;
      }
    } else if constexpr (std::is_same_v<T, std::array<int, 3>>) {
      if (const auto* arr = node.as_array(); arr && arr->size() == 3) {
        for (std::size_t i = 0; i < 3; ++i) {
          auto v = (*arr)[i].template value_exact<std::int64_t>();
          if (!v) throw Error(ErrorCode::ConfigError, sec + "." + key + " must be [r, g, b]");
          out[i] = int(*v);
        }
        return;
      }
    }
    throw Error(ErrorCode::ConfigError, "config key " + sec + "." + key + " has the wrong type");
  }

 private:
  const toml::table& root_;
  std::map<std::string, std::set<std::string>> known_;
};

}  // namespace detail

inline PipelineConfig parse_config(std::string_view text, PipelineConfig cfg = {}) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("TOML: ") + std::string(e.description()));
  }
  detail::TomlReader r(root);
  r.section("palette", {"path"});
  r.section("decode", {"nearest", "max_distance"});
  r.section("instances", {"min_area", "connectivity"});
  r.section("symmetry", {"gap_factor", "sigmoid_tau_mode", "sigmoid_tau", "sigmoid_shift", "squared_spacing",
                         "literal_center_blend", "disabled_classes"});
  r.section("raster", {"draw_order"});
  r.section("grammar", {"pixel_scale", "glass_color", "default_material"});
  r.section("mesh", {"balcony_threshold", "roof_pitch_deg", "wall_thickness", "template_file"});
  r.section("losses", {"alpha", "beta", "lambda1", "lambda2", "lambda3", "lambda4", "stride", "size_form"});
  r.section("run", {"seed", "jobs"});
  r.check_unknown();

  r.get("palette", "path", cfg.palette_path);
  r.get("decode", "nearest", cfg.decode_nearest);
  r.get("decode", "max_distance", cfg.decode_max_distance);
  r.get("instances", "min_area", cfg.min_area);
  r.get("instances", "connectivity", cfg.connectivity);
  r.get("symmetry", "gap_factor", cfg.gap_factor);
  r.get("symmetry", "sigmoid_tau_mode", cfg.sigmoid_tau_mode);
  r.get("symmetry", "sigmoid_tau", cfg.sigmoid_tau);
  r.get("symmetry", "sigmoid_shift", cfg.sigmoid_shift);
  r.get("symmetry", "squared_spacing", cfg.squared_spacing);
  r.get("symmetry", "literal_center_blend", cfg.literal_center_blend);
  r.get("symmetry", "disabled_classes", cfg.disabled_classes);
  r.get("raster", "draw_order", cfg.draw_order);
  r.get("grammar", "pixel_scale", cfg.pixel_scale);
  r.get("grammar", "glass_color", cfg.glass_color);
  r.get("grammar", "default_material", cfg.default_material);
  r.get("mesh", "balcony_threshold", cfg.balcony_threshold);
  r.get("mesh", "roof_pitch_deg", cfg.roof_pitch_deg);
  r.get("mesh", "wall_thickness", cfg.wall_thickness);
  r.get("mesh", "template_file", cfg.template_file);
  r.get("losses", "alpha", cfg.alpha);
  r.get("losses", "beta", cfg.beta);
  r.get("losses", "lambda1", cfg.lambda1);
  r.get("losses", "lambda2", cfg.lambda2);
  r.get("losses", "lambda3", cfg.lambda3);
  r.get("losses", "lambda4", cfg.lambda4);
  r.get("losses", "stride", cfg.stride);
  r.get("losses", "size_form", cfg.size_form);
  r.get("run", "seed", cfg.seed);
  r.get("run", "jobs", cfg.jobs);
  cfg.validate();
  return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  auto cfg = parse_config(ss.str());
  // Relative palette/template paths resolve against the config file.
  const auto base = path.parent_path();
  if (!cfg.palette_path.empty() && std::filesystem::path(cfg.palette_path).is_relative()) {
    cfg.palette_path = (base / cfg.palette_path).string();
  }
  if (!cfg.template_file.empty() && std::filesystem::path(cfg.template_file).is_relative()) {
    cfg.template_file = (base / cfg.template_file).string();
  }
  return cfg;
}

}  // namespace facade

#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "facade/facade.hpp"

namespace facade::cli {

namespace fs = std::filesystem;
using nlohmann::json;

/// Process exit statuses.
enum Exit : int {
  kOk = 0,
  kCheckFailed = 1,
  kUsage = 2,
  kConfig = 3,
  kIo = 4,
  kBadInput = 5,
  kPipeline = 6,
  kInternal = 70,
};

inline int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
      return kConfig;
    case ErrorCode::IoError:
      return kIo;
    case ErrorCode::ParseFailure:
    case ErrorCode::DuplicateId:
    case ErrorCode::DuplicateColor:
    case ErrorCode::NonContiguousIds:
    case ErrorCode::UnknownColor:
    case ErrorCode::AmbiguousColor:
    case ErrorCode::UnknownClass:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::MissingTemplate:
      return kBadInput;
    default:
      return kPipeline;
  }
}

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + p.string());
}

inline json read_json(const fs::path& p) {
  try {
    return json::parse(read_text(p));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseFailure, p.string() + ": " + e.what());
  }
}

inline void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

/// Flags shared by every subcommand. Optional values override the config.
struct CommonFlags {
  std::string config;
  std::string palette;
  std::string report;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  bool nearest = false;
  std::optional<int> max_color_distance;
  std::optional<std::int64_t> min_area;
  std::optional<int> connectivity;
  std::optional<double> gap_factor;
  std::optional<double> pixel_scale;
  std::optional<double> balcony_threshold;
  std::optional<double> roof_pitch;
  std::optional<std::string> templates;
};

/// Per-invocation state: resolved config, palette and the report skeleton.
class Session {
 public:
  Session(std::string command, const CommonFlags& flags, std::ostream& out, std::ostream& err)
      : command_(std::move(command)), flags_(flags), out_(out), err_(err), start_(std::chrono::steady_clock::now()) {
    if (!flags.config.empty()) {
      cfg_ = load_config(flags.config);
      inputs_["config"] = flags.config;
    }
    if (!flags.palette.empty()) cfg_.palette_path = flags.palette;
    if (flags.seed) cfg_.seed = *flags.seed;
    if (flags.jobs) cfg_.jobs = *flags.jobs;
    if (flags.nearest) cfg_.decode_nearest = true;
    if (flags.max_color_distance) cfg_.decode_max_distance = *flags.max_color_distance;
    if (flags.min_area) cfg_.min_area = *flags.min_area;
    if (flags.connectivity) cfg_.connectivity = *flags.connectivity;
    if (flags.gap_factor) cfg_.gap_factor = *flags.gap_factor;
    if (flags.pixel_scale) cfg_.pixel_scale = *flags.pixel_scale;
    if (flags.balcony_threshold) cfg_.balcony_threshold = *flags.balcony_threshold;
    if (flags.roof_pitch) cfg_.roof_pitch_deg = *flags.roof_pitch;
    if (flags.templates) cfg_.template_file = *flags.templates;
    cfg_.validate();
  }

  PipelineConfig& config() { return cfg_; }
  std::ostream& out() { return out_; }

  const ClassPalette& palette() {
    if (!palette_) {
      if (cfg_.palette_path.empty()) {
        throw Error(ErrorCode::ConfigError, "no palette given (use --palette or [palette] path)");
      }
      palette_ = load_palette(cfg_.palette_path);
      inputs_["palette"] = cfg_.palette_path;
    }
    return *palette_;
  }

  void input(const std::string& key, const fs::path& p) { inputs_[key] = p.string(); }
  void output(const std::string& key, const fs::path& p) { outputs_[key] = p.string(); }
  json& metrics() { return metrics_; }

  void warn(const json& w) {
    err_ << w.dump() << "\n";
    warnings_.push_back(w);
  }

  json report() const {
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    return {{"command", command_},       {"config_echo", cfg_.to_json()}, {"inputs", inputs_},
            {"outputs", outputs_},       {"metrics", metrics_},           {"warnings", warnings_},
            {"duration_ms", ms}};
  }

  void write_report(const fs::path& extra = {}) {
    if (!extra.empty()) write_json(extra, report());
    if (!flags_.report.empty()) write_json(flags_.report, report());
  }

 private:
  std::string command_;
  CommonFlags flags_;
  std::ostream& out_;
  std::ostream& err_;
  std::chrono::steady_clock::time_point start_;
  PipelineConfig cfg_;
  std::optional<ClassPalette> palette_;
  json inputs_ = json::object();
  json outputs_ = json::object();
  json metrics_ = json::object();
  json warnings_ = json::array();
};

inline LabelMap load_map(Session& s, const fs::path& p) {
  s.input(p.stem().string(), p);
  return read_labelmap(p, s.palette(), s.config().decode_options());
}

inline InstancesDoc load_instances(Session& s, const fs::path& p) {
  s.input("instances", p);
  return instances_from_json(read_json(p), s.palette());
}

inline json layout_metrics(const RefinedLayout& layout) {
  double before = 0.0, after = 0.0;
  for (const auto& g : layout.groups) {
    before += g.before.t;
    after += g.after.t;
  }
  return {{"objects", layout.objects.size()},
          {"groups", layout.groups.size()},
          {"t_before", before},
          {"t_after", after}};
}

// ---- subcommands ----

inline int cmd_extract(Session& s, const fs::path& in, const fs::path& out) {
  const auto map = load_map(s, in);
  InstancesDoc doc{map.width(), map.height(), extract_instances(map, s.palette(), s.config().extract_options())};
  write_json(out, instances_to_json(doc, s.palette()));
  s.output("instances", out);
  s.metrics()["objects"] = doc.objects.size();
  std::size_t overlapping = 0;
  for (const auto& o : doc.objects) overlapping += o.overlaps ? 1 : 0;
  s.metrics()["overlapping"] = overlapping;
  s.write_report();
  return kOk;
}

inline int cmd_refine(Session& s, const fs::path& in, const fs::path& out, const fs::path& sym_report) {
  auto doc = load_instances(s, in);
  const auto layout = refine_layout(doc.objects, s.config().symmetry_config(s.palette()), doc.width, doc.height);
  doc.objects = layout.objects;
  write_json(out, instances_to_json(doc, s.palette()));
  s.output("instances", out);
  if (!sym_report.empty()) {
    write_json(sym_report, symmetry_report_to_json(layout, s.palette()));
    s.output("symmetry_report", sym_report);
  }
  s.metrics() = layout_metrics(layout);
  s.write_report();
  return kOk;
}

inline LabelMap rasterize_into(Session& s, const LabelMap& source, std::span<const FacadeObject> objects) {
  std::vector<RasterWarning> warnings;
  auto out = rasterize(clear_objects(source, s.palette()), objects, s.config().draw_order_for(s.palette()), &warnings);
  for (const auto& w : warnings) s.warn(w.to_json());
  return out;
}

inline int cmd_rasterize(Session& s, const fs::path& in, const fs::path& background, const fs::path& out) {
  const auto doc = load_instances(s, in);
  LabelMap base = [&] {
    if (!background.empty()) return load_map(s, background);
    if (doc.width < 1 || doc.height < 1) {
      throw Error(ErrorCode::InvalidArgument, "instances lack an extent; pass --background");
    }
    return LabelMap(doc.width, doc.height, s.palette().wall_id());
  }();
  const auto map = rasterize_into(s, base, doc.objects);
  write_labelmap(out, map, s.palette());
  s.output("labelmap", out);
  s.metrics()["objects"] = doc.objects.size();
  s.write_report();
  return kOk;
}

inline std::vector<fs::path> list_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && detail::lower(e.path().extension().string()) == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

/// Runs `work(i)` for i in [0, n) on up to `jobs` threads. The first
/// exception is rethrown after all workers stop.
template <typename F>
void parallel_for(std::size_t n, int jobs, F&& work) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        work(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, int(n)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline std::string fmt_pct(const std::optional<double>& v) {
  if (!v) return "n/a";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << 100.0 * *v;
  return ss.str();
}

inline void print_table(std::ostream& out, const EvalReport& r) {
  out << std::left << std::setw(12) << "class" << std::right << std::setw(10) << "accuracy" << std::setw(10) << "IoU"
      << "\n";
  for (std::size_t c = 0; c < r.class_names.size(); ++c) {
    out << std::left << std::setw(12) << r.class_names[c] << std::right << std::setw(10) << fmt_pct(r.pixel_accuracy[c])
        << std::setw(10) << fmt_pct(r.iou[c]) << "\n";
  }
  out << std::left << std::setw(12) << "total" << std::right << std::setw(10) << fmt_pct(r.total_accuracy)
      << std::setw(10) << fmt_pct(r.mean_iou) << "\n";
}

inline void print_ablation(std::ostream& out, const AblationReport& r) {
  out << std::left << std::setw(12) << "class" << std::right << std::setw(10) << "before" << std::setw(10) << "after"
      << std::setw(10) << "delta" << "\n";
  auto row = [&](const std::string& name, std::optional<double> b, std::optional<double> a,
                 std::optional<double> d) {
    out << std::left << std::setw(12) << name << std::right << std::setw(10) << fmt_pct(b) << std::setw(10)
        << fmt_pct(a) << std::setw(10) << fmt_pct(d) << "\n";
  };
  for (std::size_t c = 0; c < r.before.class_names.size(); ++c) {
    row(r.before.class_names[c], r.before.iou[c], r.after.iou[c], r.iou_delta[c]);
  }
  row("accuracy", r.before.total_accuracy, r.after.total_accuracy,
      r.after.total_accuracy - r.before.total_accuracy);
  row("mIoU", r.before.mean_iou, r.after.mean_iou, r.mean_iou_delta);
}

inline int cmd_evaluate(Session& s, const fs::path& pred_dir, const fs::path& truth_dir, const fs::path& raw_dir,
                        const fs::path& json_out) {
  const auto& palette = s.palette();
  s.input("pred", pred_dir);
  s.input("truth", truth_dir);
  const auto files = list_pngs(truth_dir);
  if (files.empty()) throw Error(ErrorCode::IoError, "no PNG files in " + truth_dir.string());
  const bool abl = !raw_dir.empty();
  if (abl) s.input("raw", raw_dir);

  const auto n = palette.size();
  std::vector<ConfusionCounts> after(files.size(), ConfusionCounts(n)), before(files.size(), ConfusionCounts(n));
  const auto dopt = s.config().decode_options();
  parallel_for(files.size(), s.config().jobs, [&](std::size_t i) {
    const auto name = files[i].filename();
    if (!fs::exists(pred_dir / name)) throw Error(ErrorCode::IoError, "missing prediction " + (pred_dir / name).string());
    const auto truth = read_labelmap(files[i], palette, dopt);
    after[i] = confusion(read_labelmap(pred_dir / name, palette, dopt), truth, palette);
    if (abl) {
      if (!fs::exists(raw_dir / name)) throw Error(ErrorCode::IoError, "missing raw map " + (raw_dir / name).string());
      before[i] = confusion(read_labelmap(raw_dir / name, palette, dopt), truth, palette);
    }
  });
  ConfusionCounts total_after(n), total_before(n);
  for (std::size_t i = 0; i < files.size(); ++i) {
    total_after += after[i];
    total_before += before[i];
  }

  json result;
  if (abl) {
    const auto r = ablation_from_counts(total_before, total_after, palette);
    print_ablation(s.out(), r);
    result = ablation_to_json(r);
  } else {
    const auto r = make_report(total_after, palette);
    print_table(s.out(), r);
    result = report_to_json(r);
  }
  result["images"] = files.size();
  if (!json_out.empty()) {
    write_json(json_out, result);
    s.output("evaluation", json_out);
  }
  s.metrics() = result;
  s.write_report();
  return kOk;
}

inline int cmd_grammar(Session& s, const fs::path& in, const fs::path& image_path, const fs::path& instances,
                       const fs::path& out) {
  const auto map = load_map(s, in);
  const FacadeImage image = image_path.empty() ? encode_labelmap(map, s.palette()) : read_png(image_path);
  if (!image_path.empty()) s.input("image", image_path);
  const auto objects = instances.empty() ? extract_instances(map, s.palette(), s.config().extract_options())
                                         : load_instances(s, instances).objects;
  const auto g = emit_grammar(objects, map, image, s.palette(), s.config().grammar_options());
  write_json(out, grammar_to_json(g));
  s.output("grammar", out);
  s.metrics() = {{"floors", g.floors.size()}, {"elements", g.element_count()}, {"bands", g.bands.size()}};
  s.write_report();
  return kOk;
}

inline json mesh_metrics(const Mesh& m) {
  return {{"vertices", m.vertices.size()}, {"triangles", m.triangles.size()}, {"groups", m.groups.size()}};
}

inline int cmd_mesh(Session& s, const fs::path& in, const fs::path& out, bool scale_flag) {
  s.input("grammar", in);
  auto g = grammar_from_json(read_json(in));
  if (scale_flag) g.pixel_scale = s.config().pixel_scale;
  const auto mesh = build_mesh(g, s.config().templates(), s.config().mesh_options());
  const auto files = export_obj(mesh, g.materials, out);
  s.output("obj", files.obj);
  s.output("mtl", files.mtl);
  s.metrics() = mesh_metrics(mesh);
  s.write_report();
  return kOk;
}

inline int cmd_synth(Session& s, SynthSpec spec, const fs::path& out_dir) {
  const auto r = generate(spec, s.palette());
  const auto truth = out_dir / "truth.png";
  const auto jittered = out_dir / "jittered.png";
  const auto occluded = out_dir / "occluded.png";
  fs::create_directories(out_dir);
  write_labelmap(truth, r.truth, r.palette);
  write_labelmap(jittered, r.jittered, r.palette);
  write_labelmap(occluded, r.occluded, r.palette);
  write_json(out_dir / "spec.json", synth_spec_to_json(spec));
  write_json(out_dir / "palette.json", palette_to_json(r.palette));
  s.output("truth", truth);
  s.output("jittered", jittered);
  s.output("occluded", occluded);
  s.output("spec", out_dir / "spec.json");
  s.output("palette", out_dir / "palette.json");
  s.metrics() = {{"objects", r.objects.size()}, {"seed", spec.seed}};
  s.write_report();
  return kOk;
}

inline int cmd_losses_check(Session& s, int points) {
  const auto rows = losses::gradient_suite(s.config().seed, points, s.config().loss_problem_options());
  auto& out = s.out();
  out << std::left << std::setw(15) << "loss" << std::right << std::setw(8) << "points" << std::setw(10) << "checked"
      << std::setw(10) << "skipped" << std::setw(14) << "max rel err" << "  result\n";
  bool ok = true;
  json table = json::array();
  for (const auto& r : rows) {
    std::ostringstream err;
    err << std::scientific << std::setprecision(2) << r.max_rel_error;
    out << std::left << std::setw(15) << losses::to_string(r.kind) << std::right << std::setw(8) << r.points
        << std::setw(10) << r.checked << std::setw(10) << r.skipped << std::setw(14) << err.str() << "  "
        << (r.pass ? "PASS" : "FAIL") << "\n";
    ok = ok && r.pass;
    table.push_back({{"loss", losses::to_string(r.kind)},
                     {"points", r.points},
                     {"checked", r.checked},
                     {"skipped", r.skipped},
                     {"max_rel_error", r.max_rel_error},
                     {"pass", r.pass}});
  }
  s.metrics() = {{"losses", table}, {"pass", ok}};
  s.write_report();
  return ok ? kOk : kCheckFailed;
}

/// decode -> extract -> refine -> rasterize -> grammar -> mesh.
inline int cmd_reconstruct(Session& s, const fs::path& in, const fs::path& out_dir) {
  const auto& palette = s.palette();
  s.input("image", in);
  const auto image = read_png(in);
  const auto map = decode_labelmap(image, palette, s.config().decode_options());
  const auto objects = extract_instances(map, palette, s.config().extract_options());
  const auto layout = refine_layout(objects, s.config().symmetry_config(palette), map.width(), map.height());
  const auto refined = rasterize_into(s, map, layout.objects);

  fs::create_directories(out_dir);
  const auto refined_png = out_dir / "refined.png";
  write_labelmap(refined_png, refined, palette);
  s.output("refined", refined_png);

  const auto g = emit_grammar(layout.objects, map, image, palette, s.config().grammar_options());
  write_json(out_dir / "grammar.json", grammar_to_json(g));
  s.output("grammar", out_dir / "grammar.json");

  const auto mesh = build_mesh(g, s.config().templates(), s.config().mesh_options());
  const auto files = export_obj(mesh, g.materials, out_dir / "model.obj");
  s.output("obj", files.obj);
  s.output("mtl", files.mtl);
  s.output("report", out_dir / "report.json");

  auto m = layout_metrics(layout);
  m["extracted"] = objects.size();
  m["floors"] = g.floors.size();
  m["mesh"] = mesh_metrics(mesh);
  s.metrics() = m;
  s.write_report(out_dir / "report.json");
  return kOk;
}

// ---- entry point ----

inline void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config, "TOML config file")->check(CLI::ExistingFile);
  sub->add_option("--palette", f.palette, "palette JSON");
  sub->add_option("--report", f.report, "write a JSON run summary here");
  sub->add_option("--seed", f.seed, "random seed (default 0)");
  sub->add_option("--jobs", f.jobs, "worker threads");
  sub->add_flag("--nearest", f.nearest, "decode colors by nearest palette entry");
  sub->add_option("--max-color-distance", f.max_color_distance, "squared RGB distance bound for --nearest");
  sub->add_option("--min-area", f.min_area, "drop components smaller than this");
  sub->add_option("--connectivity", f.connectivity, "4 or 8");
  sub->add_option("--gap-factor", f.gap_factor, "grouping threshold relative to median extent");
}

/// Runs the tool with argv-style arguments. Never throws.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Facade parsing and reconstruction toolkit", "facade"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  CommonFlags flags;
  std::string in, in2, in3, output, aux, aux2;
  int points = 20;

  auto* extract = app.add_subcommand("extract", "label map PNG -> instances JSON");
  extract->add_option("labelmap", in, "label map PNG")->required();
  extract->add_option("-o,--out", output, "instances JSON")->required();

  auto* refine = app.add_subcommand("refine", "instances JSON -> refined instances JSON");
  refine->add_option("instances", in, "instances JSON")->required();
  refine->add_option("-o,--out", output, "refined instances JSON")->required();
  refine->add_option("--symmetry-report", aux, "per-group symmetry report JSON");

  auto* raster = app.add_subcommand("rasterize", "instances JSON -> label map PNG");
  raster->add_option("instances", in, "instances JSON")->required();
  raster->add_option("--background", aux, "label map whose object pixels are cleared and repainted");
  raster->add_option("-o,--out", output, "label map PNG")->required();

  auto* eval = app.add_subcommand("evaluate", "score predicted label maps against truth");
  eval->add_option("pred", in, "directory of predicted maps")->required();
  eval->add_option("truth", in2, "directory of ground-truth maps")->required();
  eval->add_option("--ablation", in3, "directory of unrefined maps for a before/after report");
  eval->add_option("--json", output, "write the metrics JSON here");

  auto* grammar = app.add_subcommand("grammar", "label map -> grammar JSON");
  grammar->add_option("labelmap", in, "label map PNG")->required();
  grammar->add_option("--image", aux, "color facade image for material sampling");
  grammar->add_option("--instances", aux2, "use these (refined) instances instead of extracting");
  grammar->add_option("-o,--out", output, "grammar JSON")->required();
  grammar->add_option("--pixel-scale", flags.pixel_scale, "meters per pixel");

  auto* mesh = app.add_subcommand("mesh", "grammar JSON -> OBJ/MTL");
  mesh->add_option("grammar", in, "grammar JSON")->required();
  mesh->add_option("-o,--out", output, "OBJ path (MTL written alongside)")->required();
  mesh->add_option("--pixel-scale", flags.pixel_scale, "meters per pixel (overrides the grammar)");
  mesh->add_option("--balcony-threshold", flags.balcony_threshold, "fraction of the median balcony area");
  mesh->add_option("--roof-pitch", flags.roof_pitch, "roof pitch in degrees");
  mesh->add_option("--templates", flags.templates, "template library JSON");

  SynthSpec spec;
  std::string spec_file;
  auto* synth = app.add_subcommand("synth", "generate a synthetic facade");
  synth->add_option("--spec", spec_file, "spec JSON (flags override)");
  synth->add_option("-o,--out", output, "output directory")->required();
  synth->add_option("--width", spec.width);
  synth->add_option("--height", spec.height);
  synth->add_option("--rows", spec.rows);
  synth->add_option("--cols", spec.cols);
  synth->add_option("--window-w", spec.window_w);
  synth->add_option("--window-h", spec.window_h);
  synth->add_option("--spacing-x", spec.spacing_x);
  synth->add_option("--spacing-y", spec.spacing_y);
  synth->add_option("--roof-height", spec.roof_height);
  synth->add_option("--shop-height", spec.shop_height);
  synth->add_flag("--door", spec.door);
  synth->add_flag("--balconies", spec.balconies);
  synth->add_option("--center-sigma", spec.center_sigma);
  synth->add_option("--size-sigma", spec.size_sigma);
  synth->add_option("--occlusion", spec.occlusion, "fraction of pixels hidden by vegetation");

  auto* lcheck = app.add_subcommand("losses-check", "finite-difference gradient checks of every loss");
  lcheck->add_option("--points", points, "random points per loss")->check(CLI::PositiveNumber);

  auto* recon = app.add_subcommand("reconstruct", "full chain from a label map to a textured model");
  recon->add_option("labelmap", in, "label map PNG")->required();
  recon->add_option("--out", output, "output directory")->required();

  for (auto* sub : {extract, refine, raster, eval, grammar, mesh, synth, lcheck, recon}) add_common(sub, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const auto* chosen = app.get_subcommands().front();
  try {
    Session s(chosen->get_name(), flags, out, err);
    if (chosen == extract) return cmd_extract(s, in, output);
    if (chosen == refine) return cmd_refine(s, in, output, aux);
    if (chosen == raster) return cmd_rasterize(s, in, aux, output);
    if (chosen == eval) return cmd_evaluate(s, in, in2, in3, output);
    if (chosen == grammar) return cmd_grammar(s, in, aux, aux2, output);
    if (chosen == mesh) return cmd_mesh(s, in, output, flags.pixel_scale.has_value());
    if (chosen == synth) {
      SynthSpec merged = spec;
      if (!spec_file.empty()) {
        s.input("spec", spec_file);
        const auto j = read_json(spec_file);
        merged = synth_spec_from_json(j);
        // Flags given explicitly win over the file.
        for (const auto* opt : synth->get_options()) {
          if (opt->count() == 0) continue;
          const auto name = opt->get_name();
          if (name == "--width") merged.width = spec.width;
          if (name == "--height") merged.height = spec.height;
          if (name == "--rows") merged.rows = spec.rows;
          if (name == "--cols") merged.cols = spec.cols;
          if (name == "--window-w") merged.window_w = spec.window_w;
          if (name == "--window-h") merged.window_h = spec.window_h;
          if (name == "--spacing-x") merged.spacing_x = spec.spacing_x;
          if (name == "--spacing-y") merged.spacing_y = spec.spacing_y;
          if (name == "--roof-height") merged.roof_height = spec.roof_height;
          if (name == "--shop-height") merged.shop_height = spec.shop_height;
          if (name == "--door") merged.door = spec.door;
          if (name == "--balconies") merged.balconies = spec.balconies;
          if (name == "--center-sigma") merged.center_sigma = spec.center_sigma;
          if (name == "--size-sigma") merged.size_sigma = spec.size_sigma;
          if (name == "--occlusion") merged.occlusion = spec.occlusion;
        }
        if (flags.seed || !j.contains("seed")) merged.seed = s.config().seed;
      } else {
        merged.seed = s.config().seed;
      }
      return cmd_synth(s, merged, output);
    }
    if (chosen == lcheck) return cmd_losses_check(s, points);
    if (chosen == recon) return cmd_reconstruct(s, in, output);
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: IoError: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace facade::cli

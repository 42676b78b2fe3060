#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "facade/error.hpp"
#include "facade/instances.hpp"

// Translational-symmetry scoring and refinement.
//
// A group is a row (horizontal axis) or column (vertical axis) of same-class
// objects. For a horizontal group with centers (x_i, y_i) sorted by x:
//
//   t_c = mean_i (y_i - mean y)^2 + mean_i (dx_i - mean dx)^2
//   t_s = mean_i [(w_i - mean w)^2 + (h_i - mean h)^2]
//   t   = t_c + t_s
//   t~  = logistic(t / tau - shift)
//
// where dx_i are the consecutive center gaps. The vertical case swaps x and y.
// Refinement blends every quantity toward its symmetric target with weight t~
// on the original value.

namespace facade {

enum class Axis { Horizontal, Vertical };

inline std::string_view to_string(Axis a) {
  return a == Axis::Horizontal ? "horizontal" : "vertical";
}

enum class TauMode { MedianDiagonal, Fixed };

struct SymmetryConfig {
  double gap_factor = 0.5;
  TauMode tau_mode = TauMode::MedianDiagonal;
  double fixed_tau = 1.0;  // used when tau_mode == Fixed
  double sigmoid_shift = 4.0;
  bool squared_spacing = true;
  /// Blend the symmetric coordinate toward the plain group mean instead of
  /// the equal-spacing sequence.
  bool literal_center_blend = false;
  std::set<ClassId> disabled_classes;
};

struct SymmetryGroup {
  ClassId class_id = 0;
  Axis axis = Axis::Horizontal;
  std::vector<std::size_t> members;  // indices into the object list
};

struct SymmetryScore {
  double t_c = 0.0;
  double t_s = 0.0;
  double t = 0.0;
  double t_tilde = 0.0;
};

namespace detail {

inline double along(const FacadeObject& o, Axis axis) {
  return axis == Axis::Horizontal ? o.center.x : o.center.y;
}
inline double across(const FacadeObject& o, Axis axis) {
  return axis == Axis::Horizontal ? o.center.y : o.center.x;
}
inline double extent_across(const FacadeObject& o, Axis axis) {
  return axis == Axis::Horizontal ? o.size.y : o.size.x;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

/// Biased (1/N) variance.
inline double variance(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / double(v.size());
}

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace detail

/// Clusters same-class objects into rows (horizontal) or columns (vertical)
/// by 1-D single linkage on the orthogonal center coordinate. Two objects
/// link when their orthogonal distance is at most gap_factor times the
/// class's median orthogonal extent. Groups come back ordered by class id,
/// then by orthogonal position; members are sorted along the axis.
inline std::vector<SymmetryGroup> group_objects(std::span<const FacadeObject> objects, Axis axis,
                                                double gap_factor) {
  std::set<ClassId> classes;
  for (const auto& o : objects) classes.insert(o.class_id);

  std::vector<SymmetryGroup> groups;
  for (const ClassId cls : classes) {
    std::vector<std::size_t> idx;
    std::vector<double> extents;
    for (std::size_t i = 0; i < objects.size(); ++i) {
      if (objects[i].class_id != cls) continue;
      idx.push_back(i);
      extents.push_back(detail::extent_across(objects[i], axis));
    }
    const double threshold = gap_factor * detail::median(extents);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return detail::across(objects[a], axis) < detail::across(objects[b], axis);
    });

    std::vector<std::size_t> current;
    auto flush = [&] {
      if (current.empty()) return;
      std::stable_sort(current.begin(), current.end(), [&](std::size_t a, std::size_t b) {
        const double pa = detail::along(objects[a], axis);
        const double pb = detail::along(objects[b], axis);
        if (pa != pb) return pa < pb;
        return detail::across(objects[a], axis) < detail::across(objects[b], axis);
      });
      groups.push_back({cls, axis, std::move(current)});
      current.clear();
    };
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (k > 0 && detail::across(objects[idx[k]], axis) - detail::across(objects[idx[k - 1]], axis) >
                       threshold) {
        flush();
      }
      current.push_back(idx[k]);
    }
    flush();
  }
  return groups;
}

/// Center term. With `squared_spacing == false` the spacing deviations are
/// summed unsquared, which always cancels to (numerically) zero.
inline double center_score(std::span<const FacadeObject> objects, const SymmetryGroup& group,
                           bool squared_spacing = true) {
  const auto n = group.members.size();
  if (n == 0) return 0.0;
  std::vector<double> across_v, along_v;
  for (auto i : group.members) {
    across_v.push_back(detail::across(objects[i], group.axis));
    along_v.push_back(detail::along(objects[i], group.axis));
  }
  double t_c = detail::variance(across_v);
  if (n >= 2) {
    std::vector<double> gaps(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) gaps[k] = along_v[k + 1] - along_v[k];
    if (squared_spacing) {
      t_c += detail::variance(gaps);
    } else {
      const double m = detail::mean(gaps);
      double acc = 0.0;
      for (double g : gaps) acc += g - m;
      t_c += acc / double(gaps.size());
    }
  }
  return t_c;
}

inline double size_score(std::span<const FacadeObject> objects, const SymmetryGroup& group) {
  std::vector<double> w, h;
  for (auto i : group.members) {
    w.push_back(objects[i].size.x);
    h.push_back(objects[i].size.y);
  }
  return detail::variance(w) + detail::variance(h);
}

/// Squared median diagonal of one class's objects; 1 when degenerate.
inline double median_diagonal_sq(std::span<const FacadeObject> objects, ClassId cls) {
  std::vector<double> diag;
  for (const auto& o : objects) {
    if (o.class_id == cls) diag.push_back(std::hypot(o.size.x, o.size.y));
  }
  const double d = detail::median(diag);
  return d > 0 ? d * d : 1.0;
}

inline double sigmoid_weight(double t, double tau, double shift) {
  return detail::logistic(t / tau - shift);
}

inline SymmetryScore score(std::span<const FacadeObject> objects, const SymmetryGroup& group,
                           double tau, double shift, bool squared_spacing = true) {
  SymmetryScore s;
  s.t_c = center_score(objects, group, squared_spacing);
  s.t_s = size_score(objects, group);
  s.t = s.t_c + s.t_s;
  s.t_tilde = sigmoid_weight(s.t, tau, shift);
  return s;
}

/// Member-weighted mean of group t values over groups with at least two
/// members. Singletons say nothing about repetition, so an axis made only of
/// singletons scores +infinity.
inline double aggregate_t(std::span<const SymmetryGroup> groups, std::span<const SymmetryScore> scores) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].members.size() < 2) continue;
    num += double(groups[g].members.size()) * scores[g].t;
    den += double(groups[g].members.size());
  }
  return den > 0 ? num / den : std::numeric_limits<double>::infinity();
}

/// Horizontal only when strictly more symmetric horizontally.
inline Axis choose_axis(double t_h, double t_v) {
  return t_h < t_v ? Axis::Horizontal : Axis::Vertical;
}

inline Axis choose_axis(const SymmetryScore& h, const SymmetryScore& v) { return choose_axis(h.t, v.t); }

struct RefineOptions {
  bool literal_center_blend = false;
  // Image bounds for clamping; 0 disables clamping on that axis.
  double width = 0.0;
  double height = 0.0;
};

/// Blends the group's members toward their symmetric targets with weight
/// `t_tilde` on the original values. Returns refined copies in group order.
inline std::vector<FacadeObject> refine(std::span<const FacadeObject> objects,
                                        const SymmetryGroup& group, double t_tilde,
                                        const RefineOptions& options = {}) {
  const auto n = group.members.size();
  std::vector<FacadeObject> out;
  out.reserve(n);
  if (n == 0) return out;

  std::vector<double> along_v, across_v, w, h;
  for (auto i : group.members) {
    along_v.push_back(detail::along(objects[i], group.axis));
    across_v.push_back(detail::across(objects[i], group.axis));
    w.push_back(objects[i].size.x);
    h.push_back(objects[i].size.y);
  }
  const double along_mean = detail::mean(along_v);
  const double across_mean = detail::mean(across_v);
  const double w_mean = detail::mean(w);
  const double h_mean = detail::mean(h);
  const double gap_mean = n >= 2 ? (along_v.back() - along_v.front()) / double(n - 1) : 0.0;

  const double keep = t_tilde;
  const double pull = 1.0 - t_tilde;
  for (std::size_t k = 0; k < n; ++k) {
    FacadeObject o = objects[group.members[k]];
    const double target =
        options.literal_center_blend
            ? along_mean
            : along_mean + (double(k) - double(n - 1) / 2.0) * gap_mean;
    const double new_along = keep * along_v[k] + pull * target;
    const double new_across = keep * across_v[k] + pull * across_mean;
    if (group.axis == Axis::Horizontal) {
      o.center = {new_along, new_across};
    } else {
      o.center = {new_across, new_along};
    }
    o.size = {keep * w[k] + pull * w_mean, keep * h[k] + pull * h_mean};
    if (options.width > 0) {
      o.size.x = std::clamp(o.size.x, 0.0, options.width);
      o.center.x = std::clamp(o.center.x, 0.0, options.width);
    }
    if (options.height > 0) {
      o.size.y = std::clamp(o.size.y, 0.0, options.height);
      o.center.y = std::clamp(o.center.y, 0.0, options.height);
    }
    out.push_back(o);
  }
  return out;
}

struct GroupReport {
  ClassId class_id = 0;
  Axis axis = Axis::Horizontal;
  std::vector<std::size_t> members;
  SymmetryScore before;
  SymmetryScore after;
};

struct ClassAxisReport {
  ClassId class_id = 0;
  double t_horizontal = 0.0;
  double t_vertical = 0.0;
  Axis chosen = Axis::Vertical;
};

struct RefinedLayout {
  std::vector<FacadeObject> objects;
  std::vector<GroupReport> groups;
  std::vector<ClassAxisReport> classes;
};

inline double tau_for(std::span<const FacadeObject> objects, ClassId cls, const SymmetryConfig& cfg) {
  return cfg.tau_mode == TauMode::Fixed ? cfg.fixed_tau : median_diagonal_sq(objects, cls);
}

/// Per class: group along both axes, pick the more symmetric axis, refine
/// every group along it. Object order and count are preserved.
inline RefinedLayout refine_layout(std::span<const FacadeObject> objects, const SymmetryConfig& cfg,
                                   double width = 0.0, double height = 0.0) {
  if (cfg.fixed_tau <= 0) throw Error(ErrorCode::InvalidArgument, "sigmoid tau must be positive");
  RefinedLayout layout;
  layout.objects.assign(objects.begin(), objects.end());

  const auto rows = group_objects(objects, Axis::Horizontal, cfg.gap_factor);
  const auto cols = group_objects(objects, Axis::Vertical, cfg.gap_factor);

  std::set<ClassId> classes;
  for (const auto& o : objects) classes.insert(o.class_id);

  const RefineOptions ropts{cfg.literal_center_blend, width, height};
  for (const ClassId cls : classes) {
    if (cfg.disabled_classes.count(cls)) continue;
    const double tau = tau_for(objects, cls, cfg);

    auto score_all = [&](const std::vector<SymmetryGroup>& all) {
      std::vector<SymmetryGroup> mine;
      std::vector<SymmetryScore> scores;
      for (const auto& g : all) {
        if (g.class_id != cls) continue;
        mine.push_back(g);
        scores.push_back(score(objects, g, tau, cfg.sigmoid_shift, cfg.squared_spacing));
      }
      return std::pair{mine, scores};
    };
    const auto [h_groups, h_scores] = score_all(rows);
    const auto [v_groups, v_scores] = score_all(cols);
    const double t_h = aggregate_t(h_groups, h_scores);
    const double t_v = aggregate_t(v_groups, v_scores);
    const Axis axis = choose_axis(t_h, t_v);
    layout.classes.push_back({cls, t_h, t_v, axis});

    const auto& groups = axis == Axis::Horizontal ? h_groups : v_groups;
    const auto& scores = axis == Axis::Horizontal ? h_scores : v_scores;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto refined = refine(objects, groups[g], scores[g].t_tilde, ropts);
      for (std::size_t k = 0; k < refined.size(); ++k) {
        layout.objects[groups[g].members[k]] = refined[k];
      }
      GroupReport report{cls, axis, groups[g].members, scores[g], {}};
      report.after = score(layout.objects, groups[g], tau, cfg.sigmoid_shift, cfg.squared_spacing);
      layout.groups.push_back(std::move(report));
    }
  }
  return layout;
}

inline nlohmann::json score_to_json(const SymmetryScore& s) {
  return {{"t_c", s.t_c}, {"t_s", s.t_s}, {"t", s.t}, {"t_tilde", s.t_tilde}};
}

inline nlohmann::json symmetry_report_to_json(const RefinedLayout& layout, const ClassPalette& palette) {
  auto classes = nlohmann::json::array();
  for (const auto& c : layout.classes) {
    classes.push_back({{"class", palette.name(c.class_id)},
                       {"t_horizontal", c.t_horizontal},
                       {"t_vertical", c.t_vertical},
                       {"axis", to_string(c.chosen)}});
  }
  auto groups = nlohmann::json::array();
  for (const auto& g : layout.groups) {
    const auto& b = g.before;
    groups.push_back({{"class", palette.name(g.class_id)},
                      {"axis", to_string(g.axis)},
                      {"members", g.members},
                      {"t_c", b.t_c},
                      {"t_s", b.t_s},
                      {"t", b.t},
                      {"t_tilde", b.t_tilde},
                      {"before", score_to_json(g.before)},
                      {"after", score_to_json(g.after)}});
  }
  return {{"classes", classes}, {"groups", groups}};
}

}  // namespace facade

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "facade/error.hpp"
#include "facade/labelmap.hpp"

namespace facade {

/// Full confusion matrix, indexed [truth][pred]. Counts from several images
/// merge by addition.
class ConfusionCounts {
 public:
  ConfusionCounts() = default;
  explicit ConfusionCounts(std::size_t num_classes)
      : n_(num_classes), m_(num_classes * num_classes, 0) {}

  std::size_t num_classes() const noexcept { return n_; }

  std::int64_t& at(std::size_t truth, std::size_t pred) { return m_[truth * n_ + pred]; }
  std::int64_t at(std::size_t truth, std::size_t pred) const { return m_[truth * n_ + pred]; }

  std::int64_t tp(std::size_t c) const { return at(c, c); }
  std::int64_t fn(std::size_t c) const { return truth_count(c) - tp(c); }
  std::int64_t fp(std::size_t c) const { return pred_count(c) - tp(c); }

  std::int64_t truth_count(std::size_t c) const {
    std::int64_t s = 0;
    for (std::size_t p = 0; p < n_; ++p) s += at(c, p);
    return s;
  }
  std::int64_t pred_count(std::size_t c) const {
    std::int64_t s = 0;
    for (std::size_t t = 0; t < n_; ++t) s += at(t, c);
    return s;
  }
  std::int64_t total() const {
    std::int64_t s = 0;
    for (auto v : m_) s += v;
    return s;
  }
  std::int64_t trace() const {
    std::int64_t s = 0;
    for (std::size_t c = 0; c < n_; ++c) s += at(c, c);
    return s;
  }

  ConfusionCounts& operator+=(const ConfusionCounts& other) {
    if (other.n_ != n_) throw Error(ErrorCode::DimensionMismatch, "class counts differ");
    for (std::size_t i = 0; i < m_.size(); ++i) m_[i] += other.m_[i];
    return *this;
  }

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::int64_t> m_;
};

inline ConfusionCounts confusion(const LabelMap& pred, const LabelMap& truth, const ClassPalette& palette) {
  if (!same_dimensions(pred, truth)) {
    throw Error(ErrorCode::DimensionMismatch,
                "prediction is " + std::to_string(pred.width()) + "x" + std::to_string(pred.height()) +
                    ", truth is " + std::to_string(truth.width()) + "x" + std::to_string(truth.height()));
  }
  validate_labelmap(pred, palette);
  validate_labelmap(truth, palette);
  ConfusionCounts counts(palette.size());
  for (std::size_t i = 0; i < pred.size(); ++i) ++counts.at(truth.data()[i], pred.data()[i]);
  return counts;
}

/// Per-class entries are empty for classes absent from the truth.
struct EvalReport {
  std::vector<std::string> class_names;
  std::vector<std::optional<double>> pixel_accuracy;
  std::vector<std::optional<double>> iou;
  double total_accuracy = 0.0;
  double mean_iou = 0.0;

  /// Mean IoU over a subset of classes, skipping those absent from truth.
  std::optional<double> mean_iou_over(std::span<const ClassId> classes) const {
    double sum = 0.0;
    int n = 0;
    for (auto c : classes) {
      if (c < iou.size() && iou[c]) {
        sum += *iou[c];
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
  }
};

struct AccuracyScores {
  std::vector<std::optional<double>> per_class;
  double total = 0.0;
};

inline AccuracyScores pixel_accuracy(const ConfusionCounts& counts) {
  AccuracyScores s;
  std::int64_t correct = 0, all = 0;
  for (std::size_t c = 0; c < counts.num_classes(); ++c) {
    const auto denom = counts.tp(c) + counts.fn(c);
    if (denom == 0) {
      s.per_class.push_back(std::nullopt);
      continue;
    }
    s.per_class.push_back(double(counts.tp(c)) / double(denom));
    correct += counts.tp(c);
    all += denom;
  }
  s.total = all > 0 ? double(correct) / double(all) : 0.0;
  return s;
}

struct IouScores {
  std::vector<std::optional<double>> per_class;
  double mean = 0.0;
};

inline IouScores iou(const ConfusionCounts& counts) {
  IouScores s;
  double sum = 0.0;
  int present = 0;
  for (std::size_t c = 0; c < counts.num_classes(); ++c) {
    if (counts.truth_count(c) == 0) {
      s.per_class.push_back(std::nullopt);
      continue;
    }
    const auto denom = counts.tp(c) + counts.fp(c) + counts.fn(c);
    const double v = double(counts.tp(c)) / double(denom);
    s.per_class.push_back(v);
    sum += v;
    ++present;
  }
  s.mean = present > 0 ? sum / present : 0.0;
  return s;
}

inline EvalReport make_report(const ConfusionCounts& counts, const ClassPalette& palette) {
  EvalReport r;
  for (ClassId c = 0; c < palette.size(); ++c) r.class_names.push_back(palette.name(c));
  const auto acc = pixel_accuracy(counts);
  const auto j = iou(counts);
  r.pixel_accuracy = acc.per_class;
  r.total_accuracy = acc.total;
  r.iou = j.per_class;
  r.mean_iou = j.mean;
  return r;
}

inline EvalReport evaluate(const LabelMap& pred, const LabelMap& truth, const ClassPalette& palette) {
  return make_report(confusion(pred, truth, palette), palette);
}

struct AblationReport {
  EvalReport before;
  EvalReport after;
  std::vector<std::optional<double>> iou_delta;
  double mean_iou_delta = 0.0;
};

inline AblationReport ablation_from_counts(const ConfusionCounts& before, const ConfusionCounts& after,
                                           const ClassPalette& palette) {
  AblationReport r{make_report(before, palette), make_report(after, palette), {}, 0.0};
  for (std::size_t c = 0; c < r.before.iou.size(); ++c) {
    if (r.before.iou[c] && r.after.iou[c]) {
      r.iou_delta.push_back(*r.after.iou[c] - *r.before.iou[c]);
    } else {
      r.iou_delta.push_back(std::nullopt);
    }
  }
  r.mean_iou_delta = r.after.mean_iou - r.before.mean_iou;
  return r;
}

inline AblationReport ablation(const LabelMap& before, const LabelMap& after, const LabelMap& truth,
                               const ClassPalette& palette) {
  return ablation_from_counts(confusion(before, truth, palette), confusion(after, truth, palette), palette);
}

namespace detail {
inline nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}
}  // namespace detail

inline nlohmann::json report_to_json(const EvalReport& r) {
  auto classes = nlohmann::json::array();
  for (std::size_t c = 0; c < r.class_names.size(); ++c) {
    classes.push_back({{"class", r.class_names[c]},
                       {"pixel_accuracy", detail::opt(r.pixel_accuracy[c])},
                       {"iou", detail::opt(r.iou[c])}});
  }
  return {{"classes", classes}, {"total_accuracy", r.total_accuracy}, {"mean_iou", r.mean_iou}};
}

inline nlohmann::json ablation_to_json(const AblationReport& r) {
  auto deltas = nlohmann::json::object();
  for (std::size_t c = 0; c < r.iou_delta.size(); ++c) {
    deltas[r.before.class_names[c]] = detail::opt(r.iou_delta[c]);
  }
  return {{"before", report_to_json(r.before)},
          {"after", report_to_json(r.after)},
          {"iou_delta", deltas},
          {"mean_iou_delta", r.mean_iou_delta}};
}

}  // namespace facade

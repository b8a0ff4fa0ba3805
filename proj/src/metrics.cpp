#include "avrefine/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "avrefine/distance.hpp"
#include "avrefine/errors.hpp"
#include "avrefine/kernels.hpp"
#include "avrefine/skeleton.hpp"

namespace avr {

std::uint64_t Confusion::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

double Confusion::accuracy() const {
  const std::uint64_t n = total();
  if (n == 0) return kUndefined;
  return static_cast<double>(counts[0] + counts[4] + counts[8]) / static_cast<double>(n);
}

double Confusion::macro_f1() const {
  double sum = 0.0;
  int classes = 0;
  for (std::size_t c : {std::size_t{1}, std::size_t{2}}) {
    const std::uint64_t tp = counts[c * 3 + c];
    std::uint64_t predicted = 0;
    std::uint64_t actual = 0;
    for (std::size_t o = 0; o < 3; ++o) {
      predicted += counts[o * 3 + c];
      actual += counts[c * 3 + o];
    }
    const std::uint64_t denom = predicted + actual;  // 2TP + FP + FN
    if (denom == 0) continue;
    sum += 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
    ++classes;
  }
  return classes == 0 ? kUndefined : sum / classes;
}

Confusion confusion(const LabelMap& pred, const LabelMap& gt, const BinaryMap& mask) {
  if (!pred.same_shape(gt) || !pred.same_shape(mask)) throw InputError("confusion: dimension mismatch");
  return Confusion{kernels::omp::confusion(pred.values(), gt.values(), mask.values())};
}

BinaryMap centerline_mask(const BinaryMap& pred_vessel) { return thin(pred_vessel).bits; }

BinaryMap major_centerline_mask(const BinaryMap& pred_vessel) {
  BinaryMap center = centerline_mask(pred_vessel);
  const Grid<std::int32_t> chamfer = chamfer_distance(pred_vessel);
  Grid<int> comp;
  const int n = label_components(center, comp);
  std::vector<std::size_t> sizes(static_cast<std::size_t>(n), 0);
  for (int c : comp.values()) {
    if (c >= 0) ++sizes[static_cast<std::size_t>(c)];
  }
  for (int y = 0; y < center.height(); ++y) {
    for (int x = 0; x < center.width(); ++x) {
      if (!center(x, y)) continue;
      const bool long_enough = sizes[static_cast<std::size_t>(comp(x, y))] >= 3;
      const bool wide_enough = local_width(chamfer, {x, y}) >= 2.0;
      if (!long_enough || !wide_enough) center(x, y) = 0;
    }
  }
  return center;
}

double vessel_discovery(const BinaryMap& pred_vessel, const BinaryMap& gt_vessel) {
  if (!pred_vessel.same_shape(gt_vessel)) throw InputError("vessel_discovery: dimension mismatch");
  std::uint64_t hit = 0;
  std::uint64_t total = 0;
  const auto p = pred_vessel.values();
  const auto g = gt_vessel.values();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g[k]) continue;
    ++total;
    hit += p[k] != 0;
  }
  return total == 0 ? kUndefined : static_cast<double>(hit) / static_cast<double>(total);
}

double roc_auc(std::span<const float> scores, std::span<const std::uint8_t> positive) {
  if (scores.size() != positive.size()) throw InputError("roc_auc: dimension mismatch");
  const std::size_t n = scores.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return scores[a] < scores[b] || (scores[a] == scores[b] && a < b);
  });

  // Sum of doubled midranks of the positives keeps everything integral.
  std::uint64_t n_pos = 0;
  std::uint64_t rank_sum_x2 = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const std::uint64_t midrank_x2 = static_cast<std::uint64_t>(i + 1) + static_cast<std::uint64_t>(j);
    for (std::size_t k = i; k < j; ++k) {
      if (positive[order[k]]) {
        ++n_pos;
        rank_sum_x2 += midrank_x2;
      }
    }
    i = j;
  }
  const std::uint64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return kUndefined;
  const std::uint64_t u_x2 = rank_sum_x2 - n_pos * (n_pos + 1);
  return static_cast<double>(u_x2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double roc_auc(const RealGrid& scores, const BinaryMap& gt_vessel) {
  if (!scores.same_shape(gt_vessel)) throw InputError("roc_auc: dimension mismatch");
  return roc_auc(scores.values(), gt_vessel.values());
}

EvalReport evaluate(const LabelMap& pred, const LabelMap& gt, const BinaryMap& gt_vessel,
                    const RealGrid* vessel_scores) {
  if (!pred.same_shape(gt) || !pred.same_shape(gt_vessel)) throw InputError("evaluate: dimension mismatch");
  if (vessel_scores && !vessel_scores->same_shape(pred)) throw InputError("evaluate: vessel map dimension mismatch");

  const BinaryMap pred_vessel = vessel_mask(pred);
  const BinaryMap everything(pred.width(), pred.height(), 1);

  EvalReport r;
  r.full = confusion(pred, gt, everything);
  r.center = confusion(pred, gt, centerline_mask(pred_vessel));
  r.center2px = confusion(pred, gt, major_centerline_mask(pred_vessel));
  r.full_image_acc = r.full.accuracy();
  r.center_acc = r.center.accuracy();
  r.center_f1 = r.center.macro_f1();
  r.center2px_acc = r.center2px.accuracy();
  r.center2px_f1 = r.center2px.macro_f1();
  r.vessel_discovery = vessel_discovery(pred_vessel, gt_vessel);
  if (vessel_scores) r.segmentation_auc = roc_auc(*vessel_scores, gt_vessel);
  return r;
}

EvalReport mean_report(std::span<const EvalReport> reports) {
  EvalReport out;
  const auto mean_of = [&](double EvalReport::*field) {
    double sum = 0.0;
    int n = 0;
    for (const EvalReport& r : reports) {
      if (std::isnan(r.*field)) continue;
      sum += r.*field;
      ++n;
    }
    return n == 0 ? kUndefined : sum / n;
  };
  for (auto field : {&EvalReport::full_image_acc, &EvalReport::center_acc, &EvalReport::center_f1,
                     &EvalReport::center2px_acc, &EvalReport::center2px_f1, &EvalReport::vessel_discovery,
                     &EvalReport::segmentation_auc}) {
    out.*field = mean_of(field);
  }
  for (const EvalReport& r : reports) {
    for (std::size_t k = 0; k < 9; ++k) {
      out.full.counts[k] += r.full.counts[k];
      out.center.counts[k] += r.center.counts[k];
      out.center2px.counts[k] += r.center2px.counts[k];
    }
  }
  return out;
}

namespace {

nlohmann::ordered_json number_or_null(double v) {
  return std::isnan(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v);
}

nlohmann::ordered_json matrix_json(const Confusion& c) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t g = 0; g < 3; ++g) {
    rows.push_back({c.counts[g * 3], c.counts[g * 3 + 1], c.counts[g * 3 + 2]});
  }
  return rows;
}

std::string cell(double v) {
  if (std::isnan(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["full_image_acc"] = number_or_null(r.full_image_acc);
  j["center_acc"] = number_or_null(r.center_acc);
  j["center_f1"] = number_or_null(r.center_f1);
  j["center2px_acc"] = number_or_null(r.center2px_acc);
  j["center2px_f1"] = number_or_null(r.center2px_f1);
  j["vessel_discovery"] = number_or_null(r.vessel_discovery);
  j["segmentation_auc"] = number_or_null(r.segmentation_auc);
  j["pixel_counts"] = {{"order", "rows=ground truth, cols=prediction; background, artery, vein"},
                       {"full", matrix_json(r.full)},
                       {"center", matrix_json(r.center)},
                       {"center2px", matrix_json(r.center2px)}};
  return j;
}

std::string format_table(std::span<const std::pair<std::string, EvalReport>> rows) {
  const std::vector<std::string> header{"Image", "Full Image", "Center Acc", "Center F1",
                                        "Center>=2px Acc", "Center>=2px F1", "Vessel", "AUC"};
  std::vector<std::vector<std::string>> table{header};
  for (const auto& [name, r] : rows) {
    table.push_back({name, cell(r.full_image_acc), cell(r.center_acc), cell(r.center_f1), cell(r.center2px_acc),
                     cell(r.center2px_f1), cell(r.vessel_discovery), cell(r.segmentation_auc)});
  }
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::ostringstream out;
  for (std::size_t r = 0; r < table.size(); ++r) {
    for (std::size_t c = 0; c < table[r].size(); ++c) {
      if (c) out << " | ";
      const std::string& s = table[r][c];
      if (c == 0) {
        out << s << std::string(widths[c] - s.size(), ' ');
      } else {
        out << std::string(widths[c] - s.size(), ' ') << s;
      }
    }
    out << '\n';
    if (r == 0) {
      for (std::size_t c = 0; c < widths.size(); ++c) {
        if (c) out << "-+-";
        out << std::string(widths[c], '-');
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace avr

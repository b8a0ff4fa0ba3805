#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "avrefine/grid.hpp"
#include "avrefine/raster.hpp"

namespace avr {

inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

/// 3x3 counts over {background, artery, vein}; rows are ground truth.
struct Confusion {
  std::array<std::uint64_t, 9> counts{};

  std::uint64_t at(Label gt, Label pred) const {
    return counts[static_cast<std::size_t>(gt) * 3 + static_cast<std::size_t>(pred)];
  }
  std::uint64_t total() const;
  double accuracy() const;  // NaN when empty
  // Macro F1 over artery and vein. A class that appears in neither prediction
  // nor ground truth is left out; NaN when both are.
  double macro_f1() const;
};

Confusion confusion(const LabelMap& pred, const LabelMap& gt, const BinaryMap& mask);

/// Skeleton of the predicted vessels.
BinaryMap centerline_mask(const BinaryMap& pred_vessel);

/// Centerline pixels of vessels at least 2 px wide (2 x chamfer distance),
/// ignoring centerline fragments shorter than three pixels.
BinaryMap major_centerline_mask(const BinaryMap& pred_vessel);

/// |pred & gt| / |gt|; NaN when gt is empty.
double vessel_discovery(const BinaryMap& pred_vessel, const BinaryMap& gt_vessel);

/// Mann-Whitney AUC with midranks for ties. NaN unless both classes occur.
double roc_auc(std::span<const float> scores, std::span<const std::uint8_t> positive);
double roc_auc(const RealGrid& scores, const BinaryMap& gt_vessel);

struct EvalReport {
  double full_image_acc = kUndefined;
  double center_acc = kUndefined;
  double center_f1 = kUndefined;
  double center2px_acc = kUndefined;
  double center2px_f1 = kUndefined;
  double vessel_discovery = kUndefined;
  double segmentation_auc = kUndefined;
  Confusion full;
  Confusion center;
  Confusion center2px;
};

/// Full evaluation. The AUC is computed only when vessel scores are given.
EvalReport evaluate(const LabelMap& pred, const LabelMap& gt, const BinaryMap& gt_vessel,
                    const RealGrid* vessel_scores = nullptr);

/// Metric-wise mean over reports, skipping undefined entries.
EvalReport mean_report(std::span<const EvalReport> reports);

nlohmann::ordered_json to_json(const EvalReport& report);

/// Aligned text table with one row per named report.
std::string format_table(std::span<const std::pair<std::string, EvalReport>> rows);

}  // namespace avr

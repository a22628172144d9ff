#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pbseg/geometry.hpp"
#include "pbseg/types.hpp"

namespace pbseg {

/// How a precision/recall curve is turned into AP.
enum class PrIntegration {
  /// Step widths from the ScanNet benchmark script: each PR sample is
  /// weighted by half the recall gap to its two neighbours.
  kScanNet,
  /// VOC-style all-point interpolation over the monotone precision envelope.
  kAllPoint,
};

PrIntegration parse_integration(const std::string& name);
std::string to_string(PrIntegration mode);

/// 0.50, 0.55, ..., 0.95.
std::vector<double> default_overlaps();

struct EvalOptions {
  std::vector<double> overlaps = default_overlaps();
  PrIntegration integration = PrIntegration::kScanNet;
};

struct ClassAp {
  ClassId class_id = 0;
  std::string name;
  std::size_t gt_count = 0;
  std::size_t pred_count = 0;
  /// Aligned with EvalReport::overlaps.
  std::vector<double> ap;
  double map = 0.0;  // mean of `ap`
  double ap50 = 0.0;
  double ap25 = 0.0;
  /// Precision and recall of the score-descending greedy match at IoU 0.5.
  double precision50 = 0.0;
  double recall50 = 0.0;
};

struct OffsetDirection {
  double value = 0.0;
  std::size_t included = 0;
  /// Points skipped because the predicted or target offset is zero.
  std::size_t excluded = 0;
};

struct EvalReport {
  std::vector<double> overlaps;
  PrIntegration integration = PrIntegration::kScanNet;
  /// Only classes with at least one ground-truth instance.
  std::vector<ClassAp> classes;
  double map = 0.0;
  double ap50 = 0.0;
  double ap25 = 0.0;
  double mean_precision50 = 0.0;
  double mean_recall50 = 0.0;
  std::size_t gt_instances = 0;
  std::size_t pred_instances = 0;

  std::optional<double> offset_distance;
  std::optional<OffsetDirection> offset_direction;
  std::optional<double> mean_dice;
};

/// AP of one ranked list. `is_tp` flags each prediction as matched; scores
/// and flags share an order. gt_count > 0.
double integrate_pr(std::span<const double> scores, std::span<const std::uint8_t> is_tp,
                    std::size_t gt_count, PrIntegration mode);

/// Greedy matching for one class and overlap: predictions in descending
/// score (ties by lower position) each take the unmatched ground-truth
/// instance with the highest IoU >= overlap. Returns TP flags per prediction
/// in the input order.
std::vector<std::uint8_t> match_predictions(std::span<const InstanceProposal> predictions,
                                            const std::vector<std::vector<PointIndex>>& gt,
                                            double overlap);

/// AP per class at each overlap, at 0.5 and at 0.25, averaged over classes
/// that have ground truth. Prediction scores come from InstanceProposal::score.
EvalReport average_precision(std::span<const InstanceProposal> predictions,
                             const GroundTruthInstances& gt, const ClassCatalog& catalog,
                             const EvalOptions& options = {});

/// Mean over masked points of |o_i - g_i|. Throws on an empty mask.
double offset_distance_metric(std::span<const Point3> offsets,
                              std::span<const Point3> gt_offsets,
                              std::span<const std::uint8_t> mask);

/// -mean cosine(o_i, g_i) over masked points with both vectors non-zero.
/// Throws when no point qualifies.
OffsetDirection offset_direction_metric(std::span<const Point3> offsets,
                                        std::span<const Point3> gt_offsets,
                                        std::span<const std::uint8_t> mask);

/// 2|P ∩ G| / (|P| + |G|) over ascending index lists. Throws on empty G.
double dice_metric(std::span<const PointIndex> pred, std::span<const PointIndex> gt);

/// Mean over ground-truth instances of the dice with their best-IoU
/// prediction (0 when nothing overlaps).
double mean_dice(std::span<const InstanceProposal> predictions, const GroundTruthInstances& gt);

}  // namespace pbseg

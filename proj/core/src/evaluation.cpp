#include "pbseg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "pbseg/scoring_nms.hpp"

namespace pbseg {

PrIntegration parse_integration(const std::string& name) {
  if (name == "scannet") return PrIntegration::kScanNet;
  if (name == "all_point") return PrIntegration::kAllPoint;
  throw Error(ErrorCode::kInvalidArgument, "unknown PR integration '" + name + "'");
}

std::string to_string(PrIntegration mode) {
  return mode == PrIntegration::kScanNet ? "scannet" : "all_point";
}

std::vector<double> default_overlaps() {
  std::vector<double> out;
  for (int i = 0; i < 10; ++i) out.push_back((50.0 + 5.0 * i) / 100.0);
  return out;
}

namespace {

// Recall is tracked as integer TP counts so the step widths telescope
// exactly; a perfect ranking integrates to exactly 1.
double scannet_ap(const std::vector<std::pair<double, std::uint8_t>>& ascending,
                  std::size_t gt_count) {
  const std::size_t n = ascending.size();
  std::vector<std::size_t> cumsum(n + 1, 0);  // cumsum[i] = TPs among first i
  for (std::size_t i = 0; i < n; ++i) cumsum[i + 1] = cumsum[i] + ascending[i].second;
  const std::size_t total_tp = cumsum[n];

  std::vector<double> precision;
  std::vector<std::size_t> recall_tp;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && ascending[i].first == ascending[i - 1].first) continue;  // first of a score
    const std::size_t tp = total_tp - cumsum[i];
    const std::size_t fp = n - i - tp;
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    recall_tp.push_back(tp);
  }
  precision.push_back(1.0);
  recall_tp.push_back(0);

  // Each sample weighs half the recall gap between its neighbours.
  const std::size_t m = recall_tp.size();
  double sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t left = k == 0 ? recall_tp[0] : recall_tp[k - 1];
    const std::size_t right = k + 1 < m ? recall_tp[k + 1] : 0;
    sum += precision[k] * static_cast<double>(left - right);
  }
  return sum / (2.0 * static_cast<double>(gt_count));
}

double all_point_ap(const std::vector<std::pair<double, std::uint8_t>>& ascending,
                    std::size_t gt_count) {
  // Walk from the highest score down, one PR sample per distinct score.
  std::vector<double> precision;
  std::vector<std::size_t> recall_tp;
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = ascending.size(); i-- > 0;) {
    tp += ascending[i].second;
    ++seen;
    if (i > 0 && ascending[i - 1].first == ascending[i].first) continue;
    precision.push_back(static_cast<double>(tp) / static_cast<double>(seen));
    recall_tp.push_back(tp);
  }
  for (std::size_t k = precision.size(); k-- > 1;) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double sum = 0.0;
  std::size_t prev = 0;
  for (std::size_t k = 0; k < precision.size(); ++k) {
    sum += static_cast<double>(recall_tp[k] - prev) * precision[k];
    prev = recall_tp[k];
  }
  return sum / static_cast<double>(gt_count);
}

std::vector<std::size_t> score_order(std::span<const InstanceProposal> preds) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return preds[a].score > preds[b].score;
  });
  return order;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double integrate_pr(std::span<const double> scores, std::span<const std::uint8_t> is_tp,
                    std::size_t gt_count, PrIntegration mode) {
  if (scores.size() != is_tp.size()) {
    throw Error(ErrorCode::kInvalidArgument, "integrate_pr: misaligned inputs");
  }
  if (gt_count == 0) throw Error(ErrorCode::kInvalidArgument, "integrate_pr: no ground truth");
  if (scores.empty()) return 0.0;
  std::vector<std::pair<double, std::uint8_t>> ascending(scores.size());
  std::size_t tps = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    ascending[i] = {scores[i], is_tp[i] ? 1 : 0};
    tps += ascending[i].second;
  }
  if (tps > gt_count) throw Error(ErrorCode::kInvalidArgument, "more matches than ground truth");
  std::stable_sort(ascending.begin(), ascending.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  return mode == PrIntegration::kScanNet ? scannet_ap(ascending, gt_count)
                                         : all_point_ap(ascending, gt_count);
}

std::vector<std::uint8_t> match_predictions(std::span<const InstanceProposal> predictions,
                                            const std::vector<std::vector<PointIndex>>& gt,
                                            double overlap) {
  std::vector<std::uint8_t> tp(predictions.size(), 0);
  std::vector<std::uint8_t> taken(gt.size(), 0);
  for (std::size_t p : score_order(predictions)) {
    std::size_t best = gt.size();
    double best_iou = -1.0;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (taken[g]) continue;
      const double iou = set_iou(predictions[p].point_indices, gt[g]);
      if (iou >= overlap && iou > best_iou) {
        best = g;
        best_iou = iou;
      }
    }
    if (best < gt.size()) {
      taken[best] = 1;
      tp[p] = 1;
    }
  }
  return tp;
}

EvalReport average_precision(std::span<const InstanceProposal> predictions,
                             const GroundTruthInstances& gt, const ClassCatalog& catalog,
                             const EvalOptions& options) {
  EvalReport report;
  report.overlaps = options.overlaps;
  report.integration = options.integration;
  report.gt_instances = gt.size();
  report.pred_instances = predictions.size();

  std::map<ClassId, std::vector<std::vector<PointIndex>>> gt_by_class;
  for (std::size_t k = 0; k < gt.size(); ++k) gt_by_class[gt.class_ids[k]].push_back(gt.members[k]);

  auto ap_at = [&](std::span<const InstanceProposal> preds,
                   const std::vector<std::vector<PointIndex>>& g, double overlap) {
    if (preds.empty()) return 0.0;
    const auto tp = match_predictions(preds, g, overlap);
    std::vector<double> scores(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) scores[i] = preds[i].score;
    return integrate_pr(scores, tp, g.size(), options.integration);
  };

  std::vector<double> maps, ap50s, ap25s, precs, recs;
  for (const auto& [cls, g] : gt_by_class) {
    std::vector<InstanceProposal> preds;
    for (const auto& p : predictions) {
      if (p.class_id == cls) preds.push_back(p);
    }
    ClassAp c;
    c.class_id = cls;
    c.name = catalog.valid_id(cls) ? catalog.at(cls).name : std::to_string(cls);
    c.gt_count = g.size();
    c.pred_count = preds.size();
    for (double t : options.overlaps) c.ap.push_back(ap_at(preds, g, t));
    c.map = mean_of(c.ap);
    c.ap50 = ap_at(preds, g, 0.5);
    c.ap25 = ap_at(preds, g, 0.25);
    const auto tp50 = match_predictions(preds, g, 0.5);
    const auto n_tp = static_cast<double>(std::count(tp50.begin(), tp50.end(), 1));
    c.precision50 = preds.empty() ? 0.0 : n_tp / static_cast<double>(preds.size());
    c.recall50 = n_tp / static_cast<double>(g.size());
    maps.push_back(c.map);
    ap50s.push_back(c.ap50);
    ap25s.push_back(c.ap25);
    precs.push_back(c.precision50);
    recs.push_back(c.recall50);
    report.classes.push_back(std::move(c));
  }
  report.map = mean_of(maps);
  report.ap50 = mean_of(ap50s);
  report.ap25 = mean_of(ap25s);
  report.mean_precision50 = mean_of(precs);
  report.mean_recall50 = mean_of(recs);
  return report;
}

double offset_distance_metric(std::span<const Point3> offsets, std::span<const Point3> gt_offsets,
                              std::span<const std::uint8_t> mask) {
  if (offsets.size() != gt_offsets.size() || offsets.size() != mask.size()) {
    throw Error(ErrorCode::kInvalidArgument, "offset metric inputs misaligned");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (!mask[i]) continue;
    sum += norm(offsets[i] - gt_offsets[i]);
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "offset metric over empty foreground");
  return sum / static_cast<double>(n);
}

OffsetDirection offset_direction_metric(std::span<const Point3> offsets,
                                        std::span<const Point3> gt_offsets,
                                        std::span<const std::uint8_t> mask) {
  if (offsets.size() != gt_offsets.size() || offsets.size() != mask.size()) {
    throw Error(ErrorCode::kInvalidArgument, "offset metric inputs misaligned");
  }
  OffsetDirection out;
  double sum = 0.0;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (!mask[i]) continue;
    const double a = norm(offsets[i]);
    const double b = norm(gt_offsets[i]);
    if (a == 0.0 || b == 0.0) {
      ++out.excluded;
      continue;
    }
    sum += dot(offsets[i], gt_offsets[i]) / (a * b);
    ++out.included;
  }
  if (out.included == 0) {
    throw Error(ErrorCode::kInvalidArgument, "direction metric has no non-zero offsets");
  }
  out.value = -sum / static_cast<double>(out.included);
  return out;
}

double dice_metric(std::span<const PointIndex> pred, std::span<const PointIndex> gt) {
  if (gt.empty()) throw Error(ErrorCode::kInvalidArgument, "dice against empty ground truth");
  const std::size_t inter = intersection_size(pred, gt);
  return 2.0 * static_cast<double>(inter) / static_cast<double>(pred.size() + gt.size());
}

double mean_dice(std::span<const InstanceProposal> predictions, const GroundTruthInstances& gt) {
  if (gt.size() == 0) return 0.0;
  double sum = 0.0;
  for (const auto& g : gt.members) {
    double best_iou = 0.0;
    const InstanceProposal* best = nullptr;
    for (const auto& p : predictions) {
      const double iou = set_iou(p.point_indices, g);
      if (iou > best_iou) {
        best_iou = iou;
        best = &p;
      }
    }
    if (best != nullptr) sum += dice_metric(best->point_indices, g);
  }
  return sum / static_cast<double>(gt.size());
}

}  // namespace pbseg

#include "pbseg/scoring_nms.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

#include "pbseg/geometry.hpp"

namespace pbseg {

ScorerKind parse_scorer(std::string_view name) {
  if (name == "heuristic") return ScorerKind::kHeuristic;
  if (name == "oracle") return ScorerKind::kOracle;
  if (name == "constant") return ScorerKind::kConstant;
  throw Error(ErrorCode::kInvalidArgument, "unknown scorer '" + std::string(name) + "'");
}

std::string_view to_string(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::kHeuristic:
      return "heuristic";
    case ScorerKind::kOracle:
      return "oracle";
    case ScorerKind::kConstant:
      return "constant";
  }
  return "heuristic";
}

std::size_t intersection_size(std::span<const PointIndex> a, std::span<const PointIndex> b) {
  std::size_t i = 0, j = 0, n = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

double set_iou(std::span<const PointIndex> a, std::span<const PointIndex> b) {
  const std::size_t inter = intersection_size(a, b);
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double pairwise_iou(const InstanceProposal& a, const InstanceProposal& b) {
  return set_iou(a.point_indices, b.point_indices);
}

namespace {

std::vector<double> heuristic_scores(std::span<const InstanceProposal> proposals,
                                     const ScoringInputs& in) {
  // Class mean counts from the catalog, else from this proposal set.
  std::map<ClassId, std::pair<double, std::size_t>> scene_mean;
  for (const auto& p : proposals) {
    auto& [sum, n] = scene_mean[p.class_id];
    sum += static_cast<double>(p.size());
    ++n;
  }
  std::vector<double> out;
  out.reserve(proposals.size());
  for (const auto& p : proposals) {
    double mean_count = 0.0;
    if (in.catalog != nullptr && in.catalog->valid_id(p.class_id)) {
      mean_count = in.catalog->at(p.class_id).mean_points;
    }
    if (!(mean_count > 0.0)) {
      const auto& [sum, n] = scene_mean[p.class_id];
      mean_count = sum / static_cast<double>(n);
    }
    const double size_factor =
        std::clamp(static_cast<double>(p.size()) / mean_count, 0.0, 1.0);

    double density_factor = 1.0;
    if (!in.density.empty() && in.density_threshold > 0 && p.size() > 0) {
      double sum = 0.0;
      for (PointIndex i : p.point_indices) sum += in.density[i];
      const double mean = sum / static_cast<double>(p.size());
      density_factor = std::clamp(mean / in.density_threshold, 0.0, 1.0);
    }
    out.push_back(size_factor * density_factor);
  }
  return out;
}

std::vector<double> oracle_scores(std::span<const InstanceProposal> proposals,
                                  const ScoringInputs& in) {
  if (in.cloud == nullptr || !in.cloud->has_ground_truth()) {
    throw Error(ErrorCode::kMissingGroundTruth, "oracle scorer needs ground truth");
  }
  const auto gt = ground_truth_instances(*in.cloud);
  std::unordered_map<InstanceId, std::size_t> gt_size;
  for (std::size_t k = 0; k < gt.size(); ++k) gt_size[gt.instance_ids[k]] = gt.members[k].size();
  const auto& labels = *in.cloud->gt_instance;

  std::vector<double> out;
  out.reserve(proposals.size());
  for (const auto& p : proposals) {
    std::map<InstanceId, std::size_t> inter;
    for (PointIndex i : p.point_indices) {
      if (labels[i] != kBackgroundInstance) ++inter[labels[i]];
    }
    double best = 0.0;
    for (const auto& [id, n] : inter) {
      const double iou = static_cast<double>(n) /
                         static_cast<double>(p.size() + gt_size[id] - n);
      best = std::max(best, iou);
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace

std::vector<double> score_proposals(std::span<const InstanceProposal> proposals,
                                    const ScoringInputs& inputs, ScorerKind kind) {
  switch (kind) {
    case ScorerKind::kConstant:
      return std::vector<double>(proposals.size(), 1.0);
    case ScorerKind::kOracle:
      return oracle_scores(proposals, inputs);
    case ScorerKind::kHeuristic:
      break;
  }
  return heuristic_scores(proposals, inputs);
}

std::vector<std::size_t> nms(std::span<const InstanceProposal> proposals,
                             std::span<const double> scores, double iou_threshold) {
  if (scores.size() != proposals.size()) {
    throw Error(ErrorCode::kInvalidArgument, "nms: scores not aligned with proposals");
  }
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "nms: iou threshold outside [0,1]");
  }
  std::vector<std::size_t> order(proposals.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::uint8_t> removed(proposals.size(), 0);
  std::vector<std::size_t> kept;
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const std::size_t a = order[oi];
    if (removed[a]) continue;
    kept.push_back(a);
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      const std::size_t b = order[oj];
      if (!removed[b] && pairwise_iou(proposals[a], proposals[b]) > iou_threshold) {
        removed[b] = 1;
      }
    }
  }
  return kept;
}

}  // namespace pbseg

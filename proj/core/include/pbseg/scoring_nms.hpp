#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pbseg/types.hpp"

namespace pbseg {

inline constexpr double kDefaultNmsIou = 0.3;

enum class ScorerKind {
  /// size / class mean count times mean member density / theta_d, each
  /// clamped to [0, 1].
  kHeuristic,
  /// Highest IoU against any ground-truth instance.
  kOracle,
  /// Always 1.0.
  kConstant,
};

ScorerKind parse_scorer(std::string_view name);
std::string_view to_string(ScorerKind kind);

/// |A ∩ B| / |A ∪ B| over ascending index lists. Two empty sets give 0.
double set_iou(std::span<const PointIndex> a, std::span<const PointIndex> b);
std::size_t intersection_size(std::span<const PointIndex> a, std::span<const PointIndex> b);

double pairwise_iou(const InstanceProposal& a, const InstanceProposal& b);

struct ScoringInputs {
  const LabeledCloud* cloud = nullptr;
  const ClassCatalog* catalog = nullptr;
  /// Shifted-space density per cloud point (zero where not computed).
  std::span<const std::uint32_t> density;
  std::uint32_t density_threshold = 30;
};

/// Scores in [0, 1], aligned with proposals. The oracle scorer throws
/// kMissingGroundTruth when the cloud has no ground truth.
std::vector<double> score_proposals(std::span<const InstanceProposal> proposals,
                                    const ScoringInputs& inputs, ScorerKind kind);

/// Greedy NMS: repeatedly keeps the best remaining proposal (higher score,
/// then lower id) and drops every remaining one with IoU > iou_threshold
/// against it. Returns kept ids in keep order.
std::vector<std::size_t> nms(std::span<const InstanceProposal> proposals,
                             std::span<const double> scores, double iou_threshold);

}  // namespace pbseg

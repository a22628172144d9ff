#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pbseg/binarize.hpp"
#include "pbseg/clustering.hpp"
#include "pbseg/local_scene.hpp"
#include "pbseg/lp_voting.hpp"
#include "pbseg/scoring_nms.hpp"
#include "pbseg/types.hpp"

namespace pbseg {

enum class ClusteringMode { kBinary, kDistance };
enum class RefinerKind { kIdentity, kMergeNearby };

ClusteringMode parse_clustering_mode(std::string_view name);
std::string_view to_string(ClusteringMode mode);
RefinerKind parse_refiner(std::string_view name);
std::string_view to_string(RefinerKind kind);
VotingMode parse_voting_mode(std::string_view name);
std::string_view to_string(VotingMode mode);

struct PipelineConfig {
  double density_radius = kDefaultDensityRadius;
  std::uint32_t density_threshold = kDefaultDensityThreshold;
  /// HP link radius; defaults to density_radius.
  std::optional<double> link_radius;
  std::size_t secondary_count = kDefaultSecondaryCount;
  double nms_iou = kDefaultNmsIou;
  /// Proposals smaller than this are dropped before NMS; defaults to
  /// density_threshold.
  std::optional<std::uint32_t> min_proposal_points;
  ScorerKind scorer = ScorerKind::kHeuristic;
  ClusteringMode clustering = ClusteringMode::kBinary;
  bool voting = true;
  VotingMode voting_mode = VotingMode::kFrozenVoters;
  bool local_scenes = true;
  RefinerKind refiner = RefinerKind::kIdentity;
  /// Reach of the merge_nearby refiner as a fraction of r_m.
  double merge_reach = 0.5;
  /// Component size filter of the distance baseline.
  std::uint32_t distance_min_points = kDefaultDistanceMinPoints;
  unsigned threads = 1;

  double effective_link_radius() const { return link_radius.value_or(density_radius); }
  std::uint32_t effective_min_proposal_points() const {
    return min_proposal_points.value_or(density_threshold);
  }
  void validate() const;
};

struct StageTiming {
  std::string stage;
  double milliseconds = 0.0;
};

struct RunMetadata {
  std::size_t points = 0;
  std::size_t foreground_points = 0;
  std::size_t hp_count = 0;
  std::size_t lp_count = 0;
  /// Points dropped by the distance baseline's component filter.
  std::size_t ignored_points = 0;
  std::size_t fallback_lps = 0;
  std::size_t unassignable_lps = 0;
  std::size_t preliminary_instances = 0;
  std::size_t small_proposals_dropped = 0;
  std::size_t proposals_before_nms = 0;
  std::size_t proposals_after_nms = 0;
  std::vector<StageTiming> timings;
};

struct SegmentResult {
  /// Kept proposals in ascending order of their smallest member index.
  std::vector<InstanceProposal> proposals;
  /// Local scenes of the pre-refinement instances, when enabled.
  std::vector<LocalScene> scenes;
  /// Pre-refinement instances the scenes index into.
  std::vector<InstanceProposal> instances;
  /// Shifted-space density per cloud point (0 for background).
  std::vector<std::uint32_t> density;
  /// 1 for HPs, 0 otherwise, per cloud point.
  std::vector<std::uint8_t> high_density;
  RunMetadata meta;
};

/// Background removal, offset shift, binarization, HP grouping (or the
/// distance baseline), LP voting, local scenes with the refiner hook,
/// scoring and NMS. `refiner` overrides config.refiner when non-null.
SegmentResult segment(const LabeledCloud& cloud, const ClassCatalog& catalog,
                      const PipelineConfig& config, const Refiner* refiner = nullptr);

}  // namespace pbseg

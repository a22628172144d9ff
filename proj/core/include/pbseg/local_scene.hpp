#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pbseg/types.hpp"

namespace pbseg {

inline constexpr std::size_t kDefaultSecondaryCount = 7;

/// A primary instance plus its nearest secondary instances. Instance ids are
/// positions in the proposal list the scene was built from.
struct LocalScene {
  std::size_t primary = 0;
  /// Ascending centroid distance from the primary.
  std::vector<std::size_t> secondaries;
  /// Primary points first, then each secondary's points in rank order.
  std::vector<PointIndex> points;
  /// Weight per entry of `points`.
  std::vector<double> weights;
  /// Predicted-class semantic score per entry of `points`; empty when the
  /// cloud carries no scores.
  std::vector<double> semantic_scores;
};

/// Ids of the min(K, N - 1) proposals whose centroids are closest to the
/// primary's, ascending by distance then id. Throws on unknown primary.
std::vector<std::size_t> nearest_instances(std::span<const InstanceProposal> proposals,
                                           std::size_t primary, std::size_t k);

/// Weight of the rank-th closest secondary (rank is 1-based):
/// (min(K, N-1) - rank) / min(K, N-1).
double secondary_weight(std::size_t rank, std::size_t k, std::size_t instance_count);

/// Per-point weights for a scene: 1.0 on primary points, the rank weight on
/// each secondary's points. With a single instance every weight is 1.0.
std::vector<double> weight_mask(const LocalScene& scene,
                                std::span<const InstanceProposal> proposals,
                                std::size_t k);

LocalScene build_local_scene(std::span<const InstanceProposal> proposals,
                             std::size_t primary, std::size_t k,
                             const LabeledCloud* cloud = nullptr,
                             std::size_t class_count = 0);

/// One scene per proposal, in proposal order.
std::vector<LocalScene> build_local_scenes(std::span<const InstanceProposal> proposals,
                                           std::size_t k,
                                           const LabeledCloud* cloud = nullptr,
                                           std::size_t class_count = 0,
                                           unsigned threads = 1);

/// Maps a local scene to a replacement point set for its primary. The result
/// must be a subset of scene.points.
using Refiner = std::function<std::vector<PointIndex>(
    const LocalScene& scene, std::span<const InstanceProposal> proposals)>;

/// Returns the primary's own points unchanged.
Refiner identity_refiner();

/// Absorbs same-class secondaries whose weight is at least min_weight, whose
/// centroid lies within reach_fraction * r_m of the primary centroid, and
/// which hold at most fragment_fraction of the primary's point count.
/// A learning-free stand-in for mask refinement against over-segmentation;
/// the size test keeps whole neighbouring objects in contact from merging.
Refiner merge_nearby_refiner(const ClassCatalog& catalog, double reach_fraction = 0.5,
                             double min_weight = 0.0, double fragment_fraction = 0.5);

/// Runs the refiner and enforces its contract: output is sorted, unique,
/// non-empty and inside the scene. Throws kInvalidArgument otherwise.
std::vector<PointIndex> refine_primary(const Refiner& refiner, const LocalScene& scene,
                                       std::span<const InstanceProposal> proposals);

}  // namespace pbseg

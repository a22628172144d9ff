#include "pbseg/local_scene.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "pbseg/parallel.hpp"

namespace pbseg {

std::vector<std::size_t> nearest_instances(std::span<const InstanceProposal> proposals,
                                           std::size_t primary, std::size_t k) {
  if (primary >= proposals.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown primary instance " + std::to_string(primary));
  }
  const Point3& c = proposals[primary].centroid;
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(proposals.size() - 1);
  for (std::size_t j = 0; j < proposals.size(); ++j) {
    if (j != primary) order.emplace_back(squared_distance(c, proposals[j].centroid), j);
  }
  const std::size_t m = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end());
  std::vector<std::size_t> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = order[i].second;
  return out;
}

double secondary_weight(std::size_t rank, std::size_t k, std::size_t instance_count) {
  const std::size_t m = std::min(k, instance_count == 0 ? 0 : instance_count - 1);
  if (m == 0 || rank < 1 || rank > m) {
    throw Error(ErrorCode::kInvalidArgument,
                "secondary rank " + std::to_string(rank) + " outside [1, " +
                    std::to_string(m) + "]");
  }
  return static_cast<double>(m - rank) / static_cast<double>(m);
}

std::vector<double> weight_mask(const LocalScene& scene,
                                std::span<const InstanceProposal> proposals,
                                std::size_t k) {
  std::vector<double> w;
  w.reserve(scene.points.size());
  w.insert(w.end(), proposals[scene.primary].size(), 1.0);
  for (std::size_t r = 0; r < scene.secondaries.size(); ++r) {
    const double wr = secondary_weight(r + 1, k, proposals.size());
    w.insert(w.end(), proposals[scene.secondaries[r]].size(), wr);
  }
  return w;
}

LocalScene build_local_scene(std::span<const InstanceProposal> proposals,
                             std::size_t primary, std::size_t k, const LabeledCloud* cloud,
                             std::size_t class_count) {
  LocalScene scene;
  scene.primary = primary;
  scene.secondaries = nearest_instances(proposals, primary, k);
  const auto& own = proposals[primary].point_indices;
  scene.points.insert(scene.points.end(), own.begin(), own.end());
  for (std::size_t s : scene.secondaries) {
    const auto& pts = proposals[s].point_indices;
    scene.points.insert(scene.points.end(), pts.begin(), pts.end());
  }
  scene.weights = weight_mask(scene, proposals, k);
  if (cloud != nullptr && class_count > 0 && !cloud->semantic_scores.empty()) {
    scene.semantic_scores.reserve(scene.points.size());
    for (PointIndex p : scene.points) {
      const auto cls = static_cast<std::size_t>(cloud->semantic[p]);
      scene.semantic_scores.push_back(cloud->semantic_scores[p * class_count + cls]);
    }
  }
  return scene;
}

std::vector<LocalScene> build_local_scenes(std::span<const InstanceProposal> proposals,
                                           std::size_t k, const LabeledCloud* cloud,
                                           std::size_t class_count, unsigned threads) {
  std::vector<LocalScene> scenes(proposals.size());
  parallel_for(proposals.size(), threads, [&](std::size_t i) {
    scenes[i] = build_local_scene(proposals, i, k, cloud, class_count);
  });
  return scenes;
}

Refiner identity_refiner() {
  return [](const LocalScene& scene, std::span<const InstanceProposal> proposals) {
    return proposals[scene.primary].point_indices;
  };
}

Refiner merge_nearby_refiner(const ClassCatalog& catalog, double reach_fraction,
                             double min_weight, double fragment_fraction) {
  return [catalog, reach_fraction, min_weight, fragment_fraction](
             const LocalScene& scene, std::span<const InstanceProposal> proposals) {
    const InstanceProposal& primary = proposals[scene.primary];
    const double reach = reach_fraction * catalog.mean_size(primary.class_id);
    std::vector<PointIndex> out = primary.point_indices;
    std::size_t offset = primary.size();
    for (std::size_t s : scene.secondaries) {
      const InstanceProposal& sec = proposals[s];
      const double w = scene.weights[offset];
      offset += sec.size();
      if (sec.class_id != primary.class_id || w < min_weight) continue;
      if (distance(sec.centroid, primary.centroid) > reach) continue;
      if (static_cast<double>(sec.size()) > fragment_fraction * static_cast<double>(primary.size())) {
        continue;
      }
      out.insert(out.end(), sec.point_indices.begin(), sec.point_indices.end());
    }
    std::sort(out.begin(), out.end());
    return out;
  };
}

std::vector<PointIndex> refine_primary(const Refiner& refiner, const LocalScene& scene,
                                       std::span<const InstanceProposal> proposals) {
  std::vector<PointIndex> out = refiner(scene, proposals);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "refiner returned no points");
  std::vector<PointIndex> allowed = scene.points;
  std::sort(allowed.begin(), allowed.end());
  if (!std::includes(allowed.begin(), allowed.end(), out.begin(), out.end())) {
    throw Error(ErrorCode::kInvalidArgument, "refiner left the local scene");
  }
  return out;
}

}  // namespace pbseg

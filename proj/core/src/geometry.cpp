#include "pbseg/geometry.hpp"

#include <map>

namespace pbseg {

Point3 centroid(std::span<const Point3> points) {
  if (points.empty()) throw Error(ErrorCode::kEmptyInstance, "empty instance");
  Point3 sum;
  for (const auto& p : points) sum += p;
  return sum * (1.0 / static_cast<double>(points.size()));
}

Point3 centroid(std::span<const Point3> points, std::span<const PointIndex> indices) {
  if (indices.empty()) throw Error(ErrorCode::kEmptyInstance, "empty instance");
  Point3 sum;
  for (PointIndex i : indices) sum += points[i];
  return sum * (1.0 / static_cast<double>(indices.size()));
}

std::vector<Point3> apply_offsets(const LabeledCloud& cloud) {
  if (cloud.offsets.size() != cloud.points.size()) {
    throw Error(ErrorCode::kInvalidCloud, "offsets missing or misaligned");
  }
  std::vector<Point3> shifted(cloud.points.size());
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    shifted[i] = cloud.points[i] + cloud.offsets[i];
  }
  return shifted;
}

std::vector<Point3> ground_truth_offsets(const LabeledCloud& cloud) {
  const auto instances = ground_truth_instances(cloud);
  std::vector<Point3> offsets(cloud.size());
  for (const auto& members : instances.members) {
    const Point3 c = centroid(cloud.points, members);
    for (PointIndex i : members) offsets[i] = c - cloud.points[i];
  }
  return offsets;
}

std::vector<PointIndex> foreground_indices(const LabeledCloud& cloud,
                                           const ClassCatalog& catalog) {
  std::vector<PointIndex> out;
  out.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!catalog.is_background(cloud.semantic[i])) {
      out.push_back(static_cast<PointIndex>(i));
    }
  }
  return out;
}

GroundTruthInstances ground_truth_instances(const LabeledCloud& cloud) {
  if (!cloud.gt_instance) {
    throw Error(ErrorCode::kMissingGroundTruth, "cloud has no ground-truth instances");
  }
  const auto& gt = *cloud.gt_instance;
  std::map<InstanceId, std::size_t> slot;
  GroundTruthInstances out;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == kBackgroundInstance) continue;
    slot.emplace(gt[i], 0);
  }
  for (auto& [id, k] : slot) {
    k = out.instance_ids.size();
    out.instance_ids.push_back(id);
  }
  out.members.resize(slot.size());
  out.class_ids.assign(slot.size(), 0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == kBackgroundInstance) continue;
    const std::size_t k = slot[gt[i]];
    if (out.members[k].empty()) {
      out.class_ids[k] = cloud.gt_semantic ? (*cloud.gt_semantic)[i] : cloud.semantic[i];
    }
    out.members[k].push_back(static_cast<PointIndex>(i));
  }
  return out;
}

}  // namespace pbseg

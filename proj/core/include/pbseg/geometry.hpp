#pragma once

#include <span>
#include <vector>

#include "pbseg/types.hpp"

namespace pbseg {

/// Component-wise mean. Throws kEmptyInstance on an empty list.
Point3 centroid(std::span<const Point3> points);

/// Mean of points[i] over the given indices. Throws kEmptyInstance when empty.
Point3 centroid(std::span<const Point3> points, std::span<const PointIndex> indices);

/// shifted[i] = points[i] + offsets[i] for every point of the cloud.
std::vector<Point3> apply_offsets(const LabeledCloud& cloud);

/// Target offsets c_map(i) - p_i from the ground-truth instances. Points with
/// the background sentinel receive the zero vector.
/// Throws kMissingGroundTruth when gt_instance is absent.
std::vector<Point3> ground_truth_offsets(const LabeledCloud& cloud);

/// Indices of points whose predicted class is a foreground class, ascending.
std::vector<PointIndex> foreground_indices(const LabeledCloud& cloud,
                                           const ClassCatalog& catalog);

/// Ground-truth instance point sets, keyed by dense position; background
/// points are skipped. `instance_ids[k]` is the original id of set k.
struct GroundTruthInstances {
  std::vector<InstanceId> instance_ids;
  std::vector<ClassId> class_ids;
  std::vector<std::vector<PointIndex>> members;

  std::size_t size() const { return members.size(); }
};

/// Groups points by gt_instance (ascending original id). Class of an instance
/// is the gt_semantic of its first member, or the predicted class when
/// gt_semantic is absent. Throws kMissingGroundTruth without gt_instance.
GroundTruthInstances ground_truth_instances(const LabeledCloud& cloud);

}  // namespace pbseg

#include "pbseg/types.hpp"

#include <algorithm>
#include <string>

#include "pbseg/geometry.hpp"

namespace pbseg {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid_argument";
    case ErrorCode::kInvalidCloud:
      return "invalid_cloud";
    case ErrorCode::kMissingGroundTruth:
      return "missing_ground_truth";
    case ErrorCode::kEmptyInstance:
      return "empty_instance";
    case ErrorCode::kInfeasiblePlacement:
      return "infeasible_placement";
    case ErrorCode::kMalformedFile:
      return "malformed_file";
    case ErrorCode::kIo:
      return "io_error";
  }
  return "unknown";
}

ClassCatalog::ClassCatalog(std::vector<ClassInfo> classes)
    : classes_(std::move(classes)) {}

const ClassInfo& ClassCatalog::at(ClassId id) const {
  if (!valid_id(id)) {
    throw Error(ErrorCode::kInvalidArgument,
                "class id " + std::to_string(id) + " not in catalog");
  }
  return classes_[static_cast<std::size_t>(id)];
}

std::vector<ClassId> ClassCatalog::foreground_ids() const {
  std::vector<ClassId> ids;
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (!classes_[i].background) ids.push_back(static_cast<ClassId>(i));
  }
  return ids;
}

void ClassCatalog::validate() const {
  bool any_foreground = false;
  for (const auto& c : classes_) {
    if (c.background) continue;
    any_foreground = true;
    if (!(c.mean_size > 0.0) || !std::isfinite(c.mean_size)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "class '" + c.name + "' needs mean_size > 0");
    }
  }
  if (!any_foreground) {
    throw Error(ErrorCode::kInvalidArgument, "catalog has no foreground class");
  }
}

void LabeledCloud::validate(const ClassCatalog& catalog) const {
  const std::size_t n = points.size();
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidCloud, msg);
  };
  if (semantic.size() != n) fail("semantic length mismatch");
  if (!offsets.empty() && offsets.size() != n) fail("offsets length mismatch");
  if (!semantic_scores.empty() &&
      semantic_scores.size() != n * catalog.size()) {
    fail("semantic_scores shape mismatch");
  }
  if (gt_instance && gt_instance->size() != n) fail("gt_instance length mismatch");
  if (gt_semantic && gt_semantic->size() != n) fail("gt_semantic length mismatch");
  for (const auto& p : points) {
    if (!p.finite()) fail("non-finite coordinate");
  }
  for (const auto& o : offsets) {
    if (!o.finite()) fail("non-finite offset");
  }
  for (ClassId c : semantic) {
    if (!catalog.valid_id(c)) fail("semantic id " + std::to_string(c) + " out of range");
  }
  if (gt_semantic) {
    for (ClassId c : *gt_semantic) {
      if (!catalog.valid_id(c)) fail("gt_semantic id out of range");
    }
  }
  if (gt_instance) {
    for (InstanceId id : *gt_instance) {
      if (id < kBackgroundInstance) fail("gt_instance id below sentinel");
    }
  }
  for (double s : semantic_scores) {
    if (!(s >= 0.0 && s <= 1.0)) fail("semantic score outside [0,1]");
  }
}

InstanceProposal make_proposal(std::vector<PointIndex> indices, ClassId class_id,
                               const std::vector<Point3>& points) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  InstanceProposal p;
  p.centroid = centroid(points, indices);
  p.point_indices = std::move(indices);
  p.class_id = class_id;
  return p;
}

}  // namespace pbseg

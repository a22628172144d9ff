#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pbseg/types.hpp"

namespace pbseg {

enum class Shape { kBox, kSphere, kCylinder, kLShape };

Shape parse_shape(std::string_view name);
std::string_view to_string(Shape shape);

/// A foreground object class of the generator. Size ranges are per axis:
///   box / L-shape: (width, depth, height)
///   cylinder:      (radius, unused, height)
///   sphere:        (radius, unused, unused)
struct ClassTemplate {
  std::string name;
  Shape shape = Shape::kBox;
  Point3 size_min;
  Point3 size_max;
  double weight = 1.0;
};

/// Six foreground classes (chair, table, sofa, cabinet, bin, ball).
std::vector<ClassTemplate> default_class_templates();

struct SceneConfig {
  std::size_t num_objects = 10;
  std::vector<ClassTemplate> classes = default_class_templates();
  /// Surface samples per square meter.
  double surface_density = 600.0;
  std::size_t min_points_per_instance = 100;
  /// Chance that an object is placed as a same-class partner next to an
  /// already placed one.
  double adjacency_probability = 0.0;
  /// Footprint gap between partners in meters; <= 0 means touching.
  double adjacency_gap = 0.0;
  /// Room side length; 0 derives it from the objects' footprints.
  double room_extent = 0.0;
  /// Minimum footprint separation between non-partner objects.
  double clearance = 0.25;
  /// Floor (background) samples per square meter; 0 disables the floor.
  double floor_density = 60.0;
  std::uint64_t seed = 0;
  std::size_t max_placement_attempts = 2000;

  void validate() const;
};

enum class OffsetNoiseKind { kGaussian, kHeavyTail, kBoundaryPull };

OffsetNoiseKind parse_noise_kind(std::string_view name);
std::string_view to_string(OffsetNoiseKind kind);

struct NoiseModel {
  OffsetNoiseKind kind = OffsetNoiseKind::kGaussian;
  /// Per-axis scale in meters (standard deviation for gaussian).
  double sigma = 0.0;
  /// Fraction of the way from a boundary point's own centroid to the
  /// midpoint between it and its partner's centroid (boundary_pull only).
  double boundary_pull = 1.0;
  /// Same-class pairs whose closest points are within this distance are
  /// in contact.
  double boundary_band = 0.1;
  /// Pulled points per meter of pull path. Each side of a contact pulls
  /// this many of its points nearest the partner, so the bridge stays
  /// sparse but unbroken.
  double boundary_points_per_meter = 150.0;
  /// Extra per-axis jitter on pulled points.
  double pull_jitter = 0.005;
  double semantic_error_rate = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Placement record of a generated object.
struct SceneObject {
  InstanceId instance = 0;
  ClassId class_id = 0;
  Shape shape = Shape::kBox;
  Point3 size;
  /// Footprint corner (x, y); objects stand on z = 0.
  double x0 = 0.0;
  double y0 = 0.0;
  double width = 0.0;
  double depth = 0.0;
  /// Instance this object was placed against, or -1.
  InstanceId partner = -1;
};

struct SynthScene {
  /// Ground truth filled; predictions equal ground truth.
  LabeledCloud cloud;
  ClassCatalog catalog;
  std::vector<SceneObject> objects;
  double room_extent = 0.0;
  std::uint64_t seed = 0;
};

/// Class 0 is the background floor; foreground class i + 1 is config.classes[i].
/// Throws kInfeasiblePlacement when objects cannot be placed.
SynthScene generate_scene(const SceneConfig& config);

/// Catalog with r_m = mean bounding-sphere diameter (twice the largest
/// centroid distance) and mean point count per class, measured on the
/// ground truth of `cloud`. Classes absent from the cloud keep `fallback`.
ClassCatalog measure_catalog(const LabeledCloud& cloud, const ClassCatalog& fallback);

/// Predicted offsets: ground-truth offsets plus noise. Background points get
/// zero. Requires ground truth.
std::vector<Point3> perturb_offsets(const LabeledCloud& cloud, const NoiseModel& noise);

/// Each foreground point independently switches to a uniformly chosen other
/// foreground class with probability error_rate.
std::vector<ClassId> perturb_semantics(const LabeledCloud& cloud, const ClassCatalog& catalog,
                                       double error_rate, std::uint64_t seed);

/// Oracle predictor: applies both perturbations to a generated scene.
void apply_noise(SynthScene& scene, const NoiseModel& noise);

/// Same-class ground-truth instance pairs whose closest points are within
/// `band`, as (lower id, higher id) in ascending order.
std::vector<std::pair<InstanceId, InstanceId>> contact_pairs(const LabeledCloud& cloud,
                                                             double band);

}  // namespace pbseg

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pbseg {

using PointIndex = std::uint32_t;
using ClassId = std::int32_t;
using InstanceId = std::int32_t;

/// Ground-truth instance id carried by background points. Never a valid id.
inline constexpr InstanceId kBackgroundInstance = -1;

/// Machine-readable error category. The CLI prints it on stderr.
enum class ErrorCode {
  kInvalidArgument,
  kInvalidCloud,
  kMissingGroundTruth,
  kEmptyInstance,
  kInfeasiblePlacement,
  kMalformedFile,
  kIo,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Point3& operator+=(const Point3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Point3& operator-=(const Point3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Point3& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }

  friend constexpr Point3 operator+(Point3 a, const Point3& b) { return a += b; }
  friend constexpr Point3 operator-(Point3 a, const Point3& b) { return a -= b; }
  friend constexpr Point3 operator*(Point3 a, double s) { return a *= s; }
  friend constexpr Point3 operator*(double s, Point3 a) { return a *= s; }
  friend constexpr bool operator==(const Point3&, const Point3&) = default;

  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

constexpr double dot(const Point3& a, const Point3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

constexpr double squared_distance(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

inline double norm(const Point3& a) { return std::sqrt(dot(a, a)); }

inline double distance(const Point3& a, const Point3& b) {
  return std::sqrt(squared_distance(a, b));
}

struct ClassInfo {
  std::string name;
  bool background = false;
  /// Mean object size r_m in meters (mean bounding-sphere diameter).
  /// Only meaningful for foreground classes.
  double mean_size = 0.0;
  /// Mean number of points per instance; 0 when unknown.
  double mean_points = 0.0;

  friend bool operator==(const ClassInfo&, const ClassInfo&) = default;
};

/// Class catalog. Class id == position in `classes`.
class ClassCatalog {
 public:
  ClassCatalog() = default;
  explicit ClassCatalog(std::vector<ClassInfo> classes);

  std::size_t size() const { return classes_.size(); }
  const ClassInfo& at(ClassId id) const;
  const std::vector<ClassInfo>& classes() const { return classes_; }

  bool valid_id(ClassId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < classes_.size();
  }
  bool is_background(ClassId id) const { return at(id).background; }
  double mean_size(ClassId id) const { return at(id).mean_size; }

  std::vector<ClassId> foreground_ids() const;

  /// Throws kInvalidArgument unless at least one foreground class exists and
  /// every foreground class has r_m > 0.
  void validate() const;

  friend bool operator==(const ClassCatalog&, const ClassCatalog&) = default;

 private:
  std::vector<ClassInfo> classes_;
};

/// Point cloud with per-point predictions and optional ground truth.
struct LabeledCloud {
  std::vector<Point3> points;
  std::vector<ClassId> semantic;
  /// Row-major N x num_classes, empty when absent.
  std::vector<double> semantic_scores;
  /// Predicted offsets o_i; empty when absent.
  std::vector<Point3> offsets;
  std::optional<std::vector<InstanceId>> gt_instance;
  std::optional<std::vector<ClassId>> gt_semantic;

  std::size_t size() const { return points.size(); }
  bool has_offsets() const { return !offsets.empty() || points.empty(); }
  bool has_ground_truth() const { return gt_instance.has_value(); }

  /// Throws kInvalidCloud on length mismatch, non-finite values or class ids
  /// outside the catalog.
  void validate(const ClassCatalog& catalog) const;

  friend bool operator==(const LabeledCloud&, const LabeledCloud&) = default;
};

struct InstanceProposal {
  /// Ascending, duplicate-free indices into the cloud.
  std::vector<PointIndex> point_indices;
  ClassId class_id = 0;
  /// Mean of the member points in original coordinates.
  Point3 centroid;
  double score = 0.0;

  std::size_t size() const { return point_indices.size(); }
};

/// Builds a proposal from member indices; sorts them and computes the centroid.
InstanceProposal make_proposal(std::vector<PointIndex> indices, ClassId class_id,
                               const std::vector<Point3>& points);

}  // namespace pbseg

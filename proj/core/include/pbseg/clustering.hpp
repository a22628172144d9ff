#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "pbseg/types.hpp"

namespace pbseg {

inline constexpr InstanceId kUnassigned = -1;
inline constexpr std::uint32_t kDefaultDistanceMinPoints = 50;

/// Disjoint-set forest with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

/// Instance ids over an input point list. Points outside the grouped set
/// carry kUnassigned. Ids are dense and ordered by each instance's smallest
/// member index.
struct PreliminaryAssignment {
  std::vector<InstanceId> instance;
  std::vector<ClassId> instance_class;
  /// Points dropped by the distance baseline's size filter, ascending.
  std::vector<PointIndex> ignored;

  std::size_t instance_count() const { return instance_class.size(); }
  /// Member lists per instance, each ascending.
  std::vector<std::vector<PointIndex>> members() const;
};

/// Connected components over the HPs, where two HPs are linked iff they share
/// a predicted class and lie within link_radius of each other. Classes are
/// processed independently (in parallel when threads > 1).
PreliminaryAssignment group_hps(std::span<const Point3> shifted,
                                std::span<const std::uint8_t> hp_mask,
                                std::span<const ClassId> semantic, double link_radius,
                                unsigned threads = 1);

/// Distance-clustering baseline: same-class components over every input
/// point; components smaller than min_points are dropped into `ignored`.
PreliminaryAssignment distance_cluster(std::span<const Point3> shifted,
                                       std::span<const ClassId> semantic,
                                       double link_radius,
                                       std::uint32_t min_points = kDefaultDistanceMinPoints,
                                       unsigned threads = 1);

}  // namespace pbseg

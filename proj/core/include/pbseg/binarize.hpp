#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pbseg/spatial_index.hpp"
#include "pbseg/types.hpp"

namespace pbseg {

inline constexpr double kDefaultDensityRadius = 0.04;
inline constexpr std::uint32_t kDefaultDensityThreshold = 30;

/// Per-point neighbor counts in shifted space. Each point counts itself.
struct DensityField {
  std::vector<std::uint32_t> density;
  double radius = kDefaultDensityRadius;
};

enum class PointClass : std::uint8_t { kLow = 0, kHigh = 1 };

struct BinaryLabel {
  std::vector<PointClass> label;
  std::uint32_t threshold = kDefaultDensityThreshold;

  bool high(std::size_t i) const { return label[i] == PointClass::kHigh; }
  std::size_t high_count() const;
};

/// density[i] = |{j : |shifted[j] - shifted[i]| <= radius}|, self included.
/// Throws kInvalidArgument unless radius > 0.
DensityField point_densities(std::span<const Point3> shifted, double radius,
                             unsigned threads = 1);

/// Same, reusing an index already built over `shifted`.
DensityField point_densities(const SpatialIndex& index, double radius,
                             unsigned threads = 1);

/// HP iff density > threshold (strict).
BinaryLabel binarize(const DensityField& densities, std::uint32_t threshold);

}  // namespace pbseg

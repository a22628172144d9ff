#include "pbseg/binarize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pbseg/parallel.hpp"

namespace pbseg {

std::size_t BinaryLabel::high_count() const {
  return static_cast<std::size_t>(
      std::count(label.begin(), label.end(), PointClass::kHigh));
}

DensityField point_densities(std::span<const Point3> shifted, double radius,
                             unsigned threads) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::kInvalidArgument,
                "density radius must be > 0, got " + std::to_string(radius));
  }
  const SpatialIndex index(shifted);
  return point_densities(index, radius, threads);
}

DensityField point_densities(const SpatialIndex& index, double radius, unsigned threads) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::kInvalidArgument,
                "density radius must be > 0, got " + std::to_string(radius));
  }
  DensityField field;
  field.radius = radius;
  field.density.resize(index.size());
  const auto& pts = index.points();
  parallel_for(pts.size(), threads, [&](std::size_t i) {
    field.density[i] = static_cast<std::uint32_t>(index.radius_count(pts[i], radius));
  });
  return field;
}

BinaryLabel binarize(const DensityField& densities, std::uint32_t threshold) {
  BinaryLabel out;
  out.threshold = threshold;
  out.label.resize(densities.density.size());
  for (std::size_t i = 0; i < out.label.size(); ++i) {
    out.label[i] = densities.density[i] > threshold ? PointClass::kHigh : PointClass::kLow;
  }
  return out;
}

}  // namespace pbseg

#include "pbseg/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

namespace pbseg {
namespace {

double axis(const Point3& p, int dim) {
  return dim == 0 ? p.x : (dim == 1 ? p.y : p.z);
}

double sq(double v) { return v * v; }

}  // namespace

SpatialIndex::SpatialIndex(std::span<const Point3> points, std::size_t leaf_size)
    : points_(points.begin(), points.end()) {
  if (points_.size() >= std::numeric_limits<PointIndex>::max()) {
    throw Error(ErrorCode::kInvalidArgument, "too many points for SpatialIndex");
  }
  for (const auto& p : points_) {
    if (!p.finite()) throw Error(ErrorCode::kInvalidArgument, "non-finite point in index");
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), PointIndex{0});
  if (points_.empty()) return;
  nodes_.reserve(2 * points_.size() / std::max<std::size_t>(leaf_size, 1) + 1);
  build(0, static_cast<std::uint32_t>(points_.size()), std::max<std::size_t>(leaf_size, 1));
  packed_.resize(points_.size());
  for (std::size_t s = 0; s < order_.size(); ++s) packed_[s] = points_[order_[s]];
}

std::int32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end,
                                 std::size_t leaf_size) {
  Box box{points_[order_[begin]], points_[order_[begin]]};
  for (std::uint32_t s = begin + 1; s < end; ++s) {
    const Point3& p = points_[order_[s]];
    box.lo = {std::min(box.lo.x, p.x), std::min(box.lo.y, p.y), std::min(box.lo.z, p.z)};
    box.hi = {std::max(box.hi.x, p.x), std::max(box.hi.y, p.y), std::max(box.hi.z, p.z)};
  }
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{box, begin, end, -1, -1});

  const Point3 extent = box.hi - box.lo;
  int dim = 0;
  if (extent.y > extent.x) dim = 1;
  if (extent.z > axis(extent, dim)) dim = 2;
  // Coincident points cannot be separated; keep them in one leaf.
  if (end - begin <= leaf_size || axis(extent, dim) <= 0.0) return id;

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](PointIndex a, PointIndex b) {
                     const double va = axis(points_[a], dim);
                     const double vb = axis(points_[b], dim);
                     return va < vb || (va == vb && a < b);
                   });
  const std::int32_t left = build(begin, mid, leaf_size);
  const std::int32_t right = build(mid, end, leaf_size);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

double SpatialIndex::checked_radius_sq(double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw Error(ErrorCode::kInvalidArgument,
                "radius must be finite and >= 0, got " + std::to_string(r));
  }
  return r * r;
}

double SpatialIndex::min_squared_distance(const Box& box, const Point3& p) {
  double d = 0.0;
  if (p.x < box.lo.x) d += sq(box.lo.x - p.x); else if (p.x > box.hi.x) d += sq(p.x - box.hi.x);
  if (p.y < box.lo.y) d += sq(box.lo.y - p.y); else if (p.y > box.hi.y) d += sq(p.y - box.hi.y);
  if (p.z < box.lo.z) d += sq(box.lo.z - p.z); else if (p.z > box.hi.z) d += sq(p.z - box.hi.z);
  return d;
}

double SpatialIndex::max_squared_distance(const Box& box, const Point3& p) {
  // Farthest corner. Each term bounds its member coordinate's term exactly,
  // since subtraction and squaring are monotone under rounding.
  const double dx = std::max(p.x - box.lo.x, box.hi.x - p.x);
  const double dy = std::max(p.y - box.lo.y, box.hi.y - p.y);
  const double dz = std::max(p.z - box.lo.z, box.hi.z - p.z);
  return dx * dx + dy * dy + dz * dz;
}

std::vector<PointIndex> SpatialIndex::radius_query(const Point3& center, double r) const {
  std::vector<PointIndex> out;
  visit_ball(
      center, r,
      [&](std::size_t, std::span<const PointIndex> members) {
        out.insert(out.end(), members.begin(), members.end());
      },
      [&](PointIndex i, double) { out.push_back(i); });
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t SpatialIndex::radius_count(const Point3& center, double r) const {
  std::size_t count = 0;
  visit_ball(
      center, r,
      [&](std::size_t, std::span<const PointIndex> members) { count += members.size(); },
      [&](PointIndex, double) { ++count; });
  return count;
}

std::vector<Neighbor> SpatialIndex::knn_query(const Point3& center, std::size_t k) const {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "knn_query needs k >= 1");
  if (!center.finite()) throw Error(ErrorCode::kInvalidArgument, "non-finite query center");
  if (nodes_.empty()) return {};
  k = std::min(k, order_.size());

  using Entry = std::pair<double, PointIndex>;  // lexicographic: distance, then index
  std::priority_queue<Entry> best;              // max-heap, worst on top
  auto worst = [&] {
    return best.size() < k ? std::numeric_limits<double>::infinity() : best.top().first;
  };

  std::vector<std::pair<double, std::int32_t>> stack;
  stack.emplace_back(0.0, 0);
  while (!stack.empty()) {
    const auto [bound, id] = stack.back();
    stack.pop_back();
    // Equal bounds are still visited so lower-index ties can enter.
    if (bound > worst()) continue;
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.leaf()) {
      for (std::uint32_t s = n.begin; s < n.end; ++s) {
        const Entry e{squared_distance(packed_[s], center), order_[s]};
        if (best.size() < k) {
          best.push(e);
        } else if (e < best.top()) {
          best.pop();
          best.push(e);
        }
      }
      continue;
    }
    const double dl = min_squared_distance(nodes_[static_cast<std::size_t>(n.left)].box, center);
    const double dr = min_squared_distance(nodes_[static_cast<std::size_t>(n.right)].box, center);
    // Push the farther child first so the nearer one is expanded next.
    if (dl <= dr) {
      stack.emplace_back(dr, n.right);
      stack.emplace_back(dl, n.left);
    } else {
      stack.emplace_back(dl, n.left);
      stack.emplace_back(dr, n.right);
    }
  }

  std::vector<Neighbor> out(best.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = Neighbor{best.top().second, std::sqrt(best.top().first)};
    best.pop();
  }
  return out;
}

}  // namespace pbseg

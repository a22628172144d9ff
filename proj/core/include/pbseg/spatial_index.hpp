#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pbseg/types.hpp"

namespace pbseg {

struct Neighbor {
  PointIndex index = 0;
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Static kd-tree over a fixed point set with exact closed-ball radius and
/// k-nearest-neighbor queries (Euclidean). Read-only after construction, so
/// concurrent queries need no synchronization.
class SpatialIndex {
 public:
  static constexpr std::size_t kDefaultLeafSize = 12;

  struct Box {
    Point3 lo;
    Point3 hi;
  };

  struct Node {
    Box box;
    std::uint32_t begin = 0;  // range into order()
    std::uint32_t end = 0;
    std::int32_t left = -1;   // -1 for leaves
    std::int32_t right = -1;

    bool leaf() const { return left < 0; }
    std::uint32_t count() const { return end - begin; }
  };

  SpatialIndex() = default;
  explicit SpatialIndex(std::span<const Point3> points,
                        std::size_t leaf_size = kDefaultLeafSize);

  std::size_t size() const { return order_.size(); }
  bool empty() const { return order_.empty(); }

  /// Indexed points in original order.
  const std::vector<Point3>& points() const { return points_; }

  /// Indices i with |points[i] - center| <= r, ascending. Throws on r < 0.
  std::vector<PointIndex> radius_query(const Point3& center, double r) const;

  /// Size of radius_query(center, r) without materializing it.
  std::size_t radius_count(const Point3& center, double r) const;

  /// min(k, N) nearest points ordered by (distance, index). Throws on k == 0.
  std::vector<Neighbor> knn_query(const Point3& center, std::size_t k) const;

  /// Calls on_point(index, squared_distance) for every point in the closed
  /// ball, in tree order.
  template <class PointFn>
  void for_each_in_ball(const Point3& center, double r, PointFn&& on_point) const;

  /// Like for_each_in_ball, but a subtree lying entirely inside the ball is
  /// reported once as on_node(node_id, member indices) instead of per point.
  template <class NodeFn, class PointFn>
  void visit_ball(const Point3& center, double r, NodeFn&& on_node,
                  PointFn&& on_point) const;

  std::size_t node_count() const { return nodes_.size(); }
  const Node& node(std::size_t id) const { return nodes_[id]; }
  /// Original indices of a node's points.
  std::span<const PointIndex> node_members(std::size_t id) const {
    const Node& n = nodes_[id];
    return {order_.data() + n.begin, n.count()};
  }

  static double min_squared_distance(const Box& box, const Point3& p);
  static double max_squared_distance(const Box& box, const Point3& p);

 private:
  std::int32_t build(std::uint32_t begin, std::uint32_t end, std::size_t leaf_size);
  static double checked_radius_sq(double r);

  std::vector<Point3> points_;
  std::vector<Point3> packed_;        // points_ permuted into tree order
  std::vector<PointIndex> order_;     // tree slot -> original index
  std::vector<Node> nodes_;
};

template <class NodeFn, class PointFn>
void SpatialIndex::visit_ball(const Point3& center, double r, NodeFn&& on_node,
                              PointFn&& on_point) const {
  const double r2 = checked_radius_sq(r);
  if (nodes_.empty()) return;
  std::int32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& n = nodes_[static_cast<std::size_t>(stack[--top])];
    if (min_squared_distance(n.box, center) > r2) continue;
    if (max_squared_distance(n.box, center) <= r2) {
      on_node(static_cast<std::size_t>(&n - nodes_.data()),
              std::span<const PointIndex>(order_.data() + n.begin, n.count()));
      continue;
    }
    if (n.leaf()) {
      for (std::uint32_t s = n.begin; s < n.end; ++s) {
        const double d2 = squared_distance(packed_[s], center);
        if (d2 <= r2) on_point(order_[s], d2);
      }
      continue;
    }
    stack[top++] = n.right;
    stack[top++] = n.left;
  }
}

template <class PointFn>
void SpatialIndex::for_each_in_ball(const Point3& center, double r,
                                    PointFn&& on_point) const {
  visit_ball(
      center, r,
      [&](std::size_t node_id, std::span<const PointIndex>) {
        const Node& n = nodes_[node_id];
        for (std::uint32_t s = n.begin; s < n.end; ++s) {
          on_point(order_[s], squared_distance(packed_[s], center));
        }
      },
      on_point);
}

}  // namespace pbseg

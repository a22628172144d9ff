#include "pbseg/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "pbseg/parallel.hpp"
#include "pbseg/spatial_index.hpp"

namespace pbseg {
namespace {

struct Component {
  ClassId class_id;
  std::vector<PointIndex> members;  // ascending global indices
};

// Components of one class's point set.
std::vector<Component> class_components(std::span<const Point3> points,
                                        std::span<const PointIndex> global_ids,
                                        ClassId class_id, double radius) {
  std::vector<Point3> local(global_ids.size());
  for (std::size_t i = 0; i < local.size(); ++i) local[i] = points[global_ids[i]];
  const SpatialIndex index(local);
  UnionFind uf(local.size());
  // A subtree fully inside some query ball has all its points within radius
  // of the query point; after its first merge a single link suffices.
  std::vector<std::uint8_t> merged(index.node_count(), 0);
  for (std::size_t i = 0; i < local.size(); ++i) {
    const auto self = static_cast<std::uint32_t>(i);
    index.visit_ball(
        local[i], radius,
        [&](std::size_t node, std::span<const PointIndex> members) {
          if (!merged[node]) {
            for (PointIndex m : members) uf.unite(self, m);
            merged[node] = 1;
          } else {
            uf.unite(self, members.front());
          }
        },
        [&](PointIndex j, double) { uf.unite(self, j); });
  }

  std::map<std::uint32_t, std::size_t> root_slot;
  std::vector<Component> out;
  for (std::size_t i = 0; i < local.size(); ++i) {
    const std::uint32_t root = uf.find(static_cast<std::uint32_t>(i));
    auto [it, inserted] = root_slot.emplace(root, out.size());
    if (inserted) out.push_back(Component{class_id, {}});
    out[it->second].members.push_back(global_ids[i]);
  }
  return out;
}

PreliminaryAssignment cluster_by_class(std::span<const Point3> points,
                                       std::span<const std::uint8_t> mask,
                                       std::span<const ClassId> semantic, double radius,
                                       unsigned threads) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::kInvalidArgument,
                "link radius must be > 0, got " + std::to_string(radius));
  }
  if (semantic.size() != points.size() || mask.size() != points.size()) {
    throw Error(ErrorCode::kInvalidArgument, "clustering inputs misaligned");
  }
  std::map<ClassId, std::vector<PointIndex>> by_class;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (mask[i]) by_class[semantic[i]].push_back(static_cast<PointIndex>(i));
  }
  std::vector<std::pair<ClassId, std::vector<PointIndex>>> tasks(by_class.begin(),
                                                                 by_class.end());
  std::vector<std::vector<Component>> per_class(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t t) {
    per_class[t] = class_components(points, tasks[t].second, tasks[t].first, radius);
  });

  std::vector<Component> all;
  for (auto& comps : per_class) {
    for (auto& c : comps) all.push_back(std::move(c));
  }
  std::sort(all.begin(), all.end(), [](const Component& a, const Component& b) {
    return a.members.front() < b.members.front();
  });

  PreliminaryAssignment out;
  out.instance.assign(points.size(), kUnassigned);
  out.instance_class.reserve(all.size());
  for (std::size_t id = 0; id < all.size(); ++id) {
    for (PointIndex m : all[id].members) out.instance[m] = static_cast<InstanceId>(id);
    out.instance_class.push_back(all[id].class_id);
  }
  return out;
}

}  // namespace

std::vector<std::vector<PointIndex>> PreliminaryAssignment::members() const {
  std::vector<std::vector<PointIndex>> out(instance_count());
  for (std::size_t i = 0; i < instance.size(); ++i) {
    if (instance[i] != kUnassigned) {
      out[static_cast<std::size_t>(instance[i])].push_back(static_cast<PointIndex>(i));
    }
  }
  return out;
}

PreliminaryAssignment group_hps(std::span<const Point3> shifted,
                                std::span<const std::uint8_t> hp_mask,
                                std::span<const ClassId> semantic, double link_radius,
                                unsigned threads) {
  return cluster_by_class(shifted, hp_mask, semantic, link_radius, threads);
}

PreliminaryAssignment distance_cluster(std::span<const Point3> shifted,
                                       std::span<const ClassId> semantic,
                                       double link_radius, std::uint32_t min_points,
                                       unsigned threads) {
  if (min_points < 1) {
    throw Error(ErrorCode::kInvalidArgument, "distance_cluster needs min_points >= 1");
  }
  const std::vector<std::uint8_t> all(shifted.size(), 1);
  PreliminaryAssignment raw = cluster_by_class(shifted, all, semantic, link_radius, threads);

  std::vector<std::size_t> sizes(raw.instance_count(), 0);
  for (InstanceId id : raw.instance) ++sizes[static_cast<std::size_t>(id)];

  std::vector<InstanceId> remap(raw.instance_count(), kUnassigned);
  PreliminaryAssignment out;
  for (std::size_t id = 0; id < raw.instance_count(); ++id) {
    if (sizes[id] >= min_points) {
      remap[id] = static_cast<InstanceId>(out.instance_class.size());
      out.instance_class.push_back(raw.instance_class[id]);
    }
  }
  out.instance.resize(raw.instance.size());
  for (std::size_t i = 0; i < raw.instance.size(); ++i) {
    out.instance[i] = remap[static_cast<std::size_t>(raw.instance[i])];
    if (out.instance[i] == kUnassigned) out.ignored.push_back(static_cast<PointIndex>(i));
  }
  return out;
}

}  // namespace pbseg

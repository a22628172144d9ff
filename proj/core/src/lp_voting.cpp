#include "pbseg/lp_voting.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <optional>

#include "pbseg/parallel.hpp"
#include "pbseg/spatial_index.hpp"

namespace pbseg {
namespace {

struct VoterSet {
  struct ClassVoters {
    SpatialIndex index;
    std::vector<PointIndex> global;
  };
  std::map<ClassId, ClassVoters> by_class;
  SpatialIndex all;
  std::vector<PointIndex> all_global;

  VoterSet(std::span<const Point3> original, std::span<const InstanceId> instance,
           std::span<const ClassId> semantic) {
    std::map<ClassId, std::vector<Point3>> pts;
    std::vector<Point3> all_pts;
    for (std::size_t i = 0; i < instance.size(); ++i) {
      if (instance[i] == kUnassigned) continue;
      pts[semantic[i]].push_back(original[i]);
      by_class[semantic[i]].global.push_back(static_cast<PointIndex>(i));
      all_pts.push_back(original[i]);
      all_global.push_back(static_cast<PointIndex>(i));
    }
    for (auto& [c, v] : by_class) v.index = SpatialIndex(pts[c]);
    all = SpatialIndex(all_pts);
  }

  bool empty() const { return all_global.empty(); }
};

struct Tally {
  InstanceId id;
  std::uint32_t count;
  double nearest_d2;
};

// Majority vote among same-class voters within radius; nullopt if none.
std::optional<InstanceId> vote(const VoterSet& voters, std::span<const InstanceId> instance,
                               const Point3& p, ClassId cls, double radius) {
  const auto it = voters.by_class.find(cls);
  if (it == voters.by_class.end()) return std::nullopt;
  const auto& cv = it->second;
  std::vector<Tally> tallies;
  cv.index.for_each_in_ball(p, radius, [&](PointIndex local, double d2) {
    const InstanceId id = instance[cv.global[local]];
    auto t = std::find_if(tallies.begin(), tallies.end(),
                          [&](const Tally& x) { return x.id == id; });
    if (t == tallies.end()) {
      tallies.push_back(Tally{id, 1, d2});
    } else {
      ++t->count;
      t->nearest_d2 = std::min(t->nearest_d2, d2);
    }
  });
  if (tallies.empty()) return std::nullopt;
  const auto best = std::min_element(tallies.begin(), tallies.end(),
                                     [](const Tally& a, const Tally& b) {
                                       if (a.count != b.count) return a.count > b.count;
                                       if (a.nearest_d2 != b.nearest_d2) {
                                         return a.nearest_d2 < b.nearest_d2;
                                       }
                                       return a.id < b.id;
                                     });
  return best->id;
}

}  // namespace

FullAssignment assign_lps(std::span<const Point3> original,
                          const PreliminaryAssignment& preliminary,
                          std::span<const std::uint8_t> lp_mask,
                          std::span<const ClassId> semantic, const ClassCatalog& catalog,
                          const VotingOptions& options) {
  const std::size_t n = original.size();
  if (preliminary.instance.size() != n || lp_mask.size() != n || semantic.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "assign_lps inputs misaligned");
  }
  FullAssignment out;
  out.instance = preliminary.instance;

  std::vector<PointIndex> pending;
  for (std::size_t i = 0; i < n; ++i) {
    if (!lp_mask[i]) continue;
    if (preliminary.instance[i] != kUnassigned) {
      throw Error(ErrorCode::kInvalidArgument, "point is both grouped and LP");
    }
    pending.push_back(static_cast<PointIndex>(i));
  }
  if (pending.empty()) return out;

  for (PointIndex p : pending) {
    const double r = catalog.mean_size(semantic[p]);
    if (!(r > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "class '" + catalog.at(semantic[p]).name + "' has no mean size");
    }
  }

  const std::size_t max_rounds =
      options.mode == VotingMode::kFrozenVoters ? 1 : std::numeric_limits<std::size_t>::max();
  std::optional<VoterSet> voters;
  for (std::size_t round = 0; round < max_rounds && !pending.empty(); ++round) {
    voters.emplace(original, out.instance, semantic);
    if (voters->empty()) break;
    std::vector<InstanceId> result(pending.size(), kUnassigned);
    parallel_for(pending.size(), options.threads, [&](std::size_t k) {
      const PointIndex p = pending[k];
      const auto id = vote(*voters, out.instance, original[p], semantic[p],
                           catalog.mean_size(semantic[p]));
      if (id) result[k] = *id;
    });
    std::vector<PointIndex> still;
    for (std::size_t k = 0; k < pending.size(); ++k) {
      if (result[k] == kUnassigned) {
        still.push_back(pending[k]);
      } else {
        out.instance[pending[k]] = result[k];
      }
    }
    const bool progressed = still.size() != pending.size();
    pending = std::move(still);
    if (!progressed) break;
  }
  if (pending.empty()) return out;

  // Fallback voters are those of the last round, so frozen mode uses HPs only.
  if (!voters || voters->empty()) {
    out.unassignable = std::move(pending);
    return out;
  }
  std::vector<InstanceId> result(pending.size(), kUnassigned);
  parallel_for(pending.size(), options.threads, [&](std::size_t k) {
    const auto nn = voters->all.knn_query(original[pending[k]], 1);
    result[k] = out.instance[voters->all_global[nn.front().index]];
  });
  for (std::size_t k = 0; k < pending.size(); ++k) out.instance[pending[k]] = result[k];
  out.fallback_count = pending.size();
  return out;
}

}  // namespace pbseg

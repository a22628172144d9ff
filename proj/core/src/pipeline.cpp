#include "pbseg/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "pbseg/geometry.hpp"
#include "pbseg/spatial_index.hpp"

namespace pbseg {

ClusteringMode parse_clustering_mode(std::string_view name) {
  if (name == "binary") return ClusteringMode::kBinary;
  if (name == "distance") return ClusteringMode::kDistance;
  throw Error(ErrorCode::kInvalidArgument, "unknown clustering mode '" + std::string(name) + "'");
}

std::string_view to_string(ClusteringMode mode) {
  return mode == ClusteringMode::kBinary ? "binary" : "distance";
}

RefinerKind parse_refiner(std::string_view name) {
  if (name == "identity") return RefinerKind::kIdentity;
  if (name == "merge_nearby") return RefinerKind::kMergeNearby;
  throw Error(ErrorCode::kInvalidArgument, "unknown refiner '" + std::string(name) + "'");
}

std::string_view to_string(RefinerKind kind) {
  return kind == RefinerKind::kIdentity ? "identity" : "merge_nearby";
}

VotingMode parse_voting_mode(std::string_view name) {
  if (name == "frozen") return VotingMode::kFrozenVoters;
  if (name == "multi_round") return VotingMode::kMultiRound;
  throw Error(ErrorCode::kInvalidArgument, "unknown voting mode '" + std::string(name) + "'");
}

std::string_view to_string(VotingMode mode) {
  return mode == VotingMode::kFrozenVoters ? "frozen" : "multi_round";
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidArgument, m); };
  if (!(density_radius > 0.0) || !std::isfinite(density_radius)) fail("r_d must be > 0");
  if (link_radius && (!(*link_radius > 0.0) || !std::isfinite(*link_radius))) {
    fail("link_radius must be > 0");
  }
  if (!(nms_iou >= 0.0 && nms_iou <= 1.0)) fail("nms_iou must be in [0,1]");
  if (distance_min_points < 1) fail("distance_min_points must be >= 1");
  if (!(merge_reach >= 0.0)) fail("merge_reach must be >= 0");
}

namespace {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& out) : out_(out) {}

  template <class Fn>
  auto run(const char* stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record(stage, start);
    } else {
      auto value = fn();
      record(stage, start);
      return value;
    }
  }

 private:
  void record(const char* stage, std::chrono::steady_clock::time_point start) {
    const std::chrono::duration<double, std::milli> ms = std::chrono::steady_clock::now() - start;
    out_.push_back({stage, ms.count()});
  }
  std::vector<StageTiming>& out_;
};

}  // namespace

SegmentResult segment(const LabeledCloud& cloud, const ClassCatalog& catalog,
                      const PipelineConfig& config, const Refiner* refiner) {
  config.validate();
  catalog.validate();
  cloud.validate(catalog);
  if (cloud.offsets.size() != cloud.size()) {
    throw Error(ErrorCode::kInvalidCloud, "segment needs predicted offsets");
  }

  SegmentResult result;
  RunMetadata& meta = result.meta;
  StageClock clock(meta.timings);
  meta.points = cloud.size();
  result.density.assign(cloud.size(), 0);
  result.high_density.assign(cloud.size(), 0);

  // Background removal and the offset branch.
  std::vector<PointIndex> fg;
  std::vector<Point3> shifted, original;
  std::vector<ClassId> semantic;
  clock.run("offset_shift", [&] {
    fg = foreground_indices(cloud, catalog);
    shifted.reserve(fg.size());
    original.reserve(fg.size());
    semantic.reserve(fg.size());
    for (PointIndex i : fg) {
      shifted.push_back(cloud.points[i] + cloud.offsets[i]);
      original.push_back(cloud.points[i]);
      semantic.push_back(cloud.semantic[i]);
    }
  });
  meta.foreground_points = fg.size();
  if (fg.empty()) return result;

  BinaryLabel labels;
  clock.run("binarize", [&] {
    const SpatialIndex index(shifted);
    const DensityField field = point_densities(index, config.density_radius, config.threads);
    labels = binarize(field, config.density_threshold);
    for (std::size_t k = 0; k < fg.size(); ++k) {
      result.density[fg[k]] = field.density[k];
      result.high_density[fg[k]] = labels.high(k) ? 1 : 0;
    }
  });
  meta.hp_count = labels.high_count();
  meta.lp_count = fg.size() - meta.hp_count;

  std::vector<InstanceId> assignment;
  std::vector<ClassId> instance_class;
  if (config.clustering == ClusteringMode::kBinary) {
    std::vector<std::uint8_t> hp_mask(fg.size()), lp_mask(fg.size());
    for (std::size_t k = 0; k < fg.size(); ++k) {
      hp_mask[k] = labels.high(k) ? 1 : 0;
      lp_mask[k] = hp_mask[k] ? 0 : 1;
    }
    const PreliminaryAssignment pre = clock.run("group_hps", [&] {
      return group_hps(shifted, hp_mask, semantic, config.effective_link_radius(), config.threads);
    });
    instance_class = pre.instance_class;
    if (config.voting) {
      const FullAssignment full = clock.run("vote_lps", [&] {
        return assign_lps(original, pre, lp_mask, semantic, catalog,
                          VotingOptions{config.voting_mode, config.threads});
      });
      assignment = full.instance;
      meta.fallback_lps = full.fallback_count;
      meta.unassignable_lps = full.unassignable.size();
    } else {
      assignment = pre.instance;
    }
  } else {
    const PreliminaryAssignment pre = clock.run("distance_cluster", [&] {
      return distance_cluster(shifted, semantic, config.effective_link_radius(),
                              config.distance_min_points, config.threads);
    });
    assignment = pre.instance;
    instance_class = pre.instance_class;
    meta.ignored_points = pre.ignored.size();
  }
  meta.preliminary_instances = instance_class.size();

  std::vector<std::vector<PointIndex>> members(instance_class.size());
  for (std::size_t k = 0; k < fg.size(); ++k) {
    if (assignment[k] != kUnassigned) members[static_cast<std::size_t>(assignment[k])].push_back(fg[k]);
  }
  std::vector<InstanceProposal> instances;
  instances.reserve(members.size());
  for (std::size_t id = 0; id < members.size(); ++id) {
    instances.push_back(make_proposal(std::move(members[id]), instance_class[id], cloud.points));
  }

  std::vector<InstanceProposal> proposals;
  if (config.local_scenes) {
    clock.run("local_scene", [&] {
      result.scenes = build_local_scenes(instances, config.secondary_count, &cloud, catalog.size(),
                                         config.threads);
      Refiner chosen = refiner != nullptr ? *refiner
                       : config.refiner == RefinerKind::kMergeNearby
                           ? merge_nearby_refiner(catalog, config.merge_reach)
                           : identity_refiner();
      proposals.resize(instances.size());
      for (std::size_t i = 0; i < instances.size(); ++i) {
        proposals[i] = make_proposal(refine_primary(chosen, result.scenes[i], instances),
                                     instances[i].class_id, cloud.points);
      }
    });
  } else {
    proposals = instances;
  }

  clock.run("post_process", [&] {
    const std::uint32_t min_points = config.effective_min_proposal_points();
    std::vector<InstanceProposal> sized;
    for (auto& p : proposals) {
      if (p.size() >= min_points) sized.push_back(std::move(p));
    }
    meta.small_proposals_dropped = proposals.size() - sized.size();
    meta.proposals_before_nms = sized.size();

    const ScoringInputs inputs{&cloud, &catalog, result.density, config.density_threshold};
    const std::vector<double> scores = score_proposals(sized, inputs, config.scorer);
    std::vector<std::size_t> kept = nms(sized, scores, config.nms_iou);
    std::sort(kept.begin(), kept.end());
    for (std::size_t k : kept) {
      sized[k].score = scores[k];
      result.proposals.push_back(std::move(sized[k]));
    }
    std::sort(result.proposals.begin(), result.proposals.end(),
              [](const InstanceProposal& a, const InstanceProposal& b) {
                return a.point_indices.front() < b.point_indices.front();
              });
  });
  meta.proposals_after_nms = result.proposals.size();
  result.instances = std::move(instances);
  return result;
}

}  // namespace pbseg

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "pbseg/binarize.hpp"
#include "pbseg/clustering.hpp"
#include "pbseg/evaluation.hpp"
#include "pbseg/geometry.hpp"
#include "pbseg/scene_synth.hpp"

using namespace pbseg;

namespace {

SceneConfig chair_pair(std::uint64_t seed) {
  SceneConfig c;
  c.classes = {default_class_templates()[0]};
  c.num_objects = 2;
  c.adjacency_probability = 1.0;
  c.seed = seed;
  return c;
}

std::vector<std::uint8_t> foreground_mask(const LabeledCloud& c) {
  std::vector<std::uint8_t> m(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) m[i] = (*c.gt_instance)[i] >= 0 ? 1 : 0;
  return m;
}

}  // namespace

TEST(GenerateScene, SingleSphere) {
  SceneConfig c;
  c.classes = {{"ball", Shape::kSphere, {0.2, 0, 0}, {0.2, 0, 0}, 1.0}};
  c.num_objects = 1;
  c.surface_density = 100.0;  // area * density < 1000, so the minimum applies
  c.min_points_per_instance = 1000;
  c.floor_density = 0.0;
  const SynthScene s = generate_scene(c);
  ASSERT_EQ(s.cloud.size(), 1000u);
  for (std::size_t i = 0; i < 1000; ++i) {
    EXPECT_EQ((*s.cloud.gt_instance)[i], 0);
    EXPECT_EQ((*s.cloud.gt_semantic)[i], 1);
  }
  const Point3 center = oracle::mean(s.cloud.points);
  for (const auto& p : s.cloud.points) EXPECT_NEAR(std::sqrt(oracle::d2(p, center)), 0.2, 0.02);
}

TEST(GenerateScene, DeterministicAndSeedSensitive) {
  SceneConfig c;
  c.seed = 17;
  c.adjacency_probability = 0.4;
  const SynthScene a = generate_scene(c), b = generate_scene(c);
  EXPECT_EQ(a.cloud, b.cloud);
  EXPECT_EQ(a.catalog, b.catalog);
  c.seed = 18;
  EXPECT_FALSE(generate_scene(c).cloud == a.cloud);
}

TEST(GenerateScene, InvariantsAcrossSeeds) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SceneConfig c;
    c.seed = seed;
    c.adjacency_probability = 0.5;
    const SynthScene s = generate_scene(c);
    s.cloud.validate(s.catalog);
    s.catalog.validate();
    EXPECT_EQ(s.catalog.size(), 7u);
    EXPECT_TRUE(s.catalog.is_background(0));
    const auto gt = ground_truth_instances(s.cloud);
    EXPECT_EQ(gt.size(), c.num_objects);
    for (const auto& m : gt.members) EXPECT_GE(m.size(), c.min_points_per_instance);
    for (std::size_t i = 0; i < s.cloud.size(); ++i) {
      EXPECT_EQ(s.catalog.is_background((*s.cloud.gt_semantic)[i]),
                (*s.cloud.gt_instance)[i] < 0);
    }
  }
}

TEST(GenerateScene, ContactPairTouches) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SynthScene s = generate_scene(chair_pair(seed));
    ASSERT_EQ(s.objects[1].partner, 0);
    std::vector<Point3> a, b;
    for (std::size_t i = 0; i < s.cloud.size(); ++i) {
      const InstanceId g = (*s.cloud.gt_instance)[i];
      if (g == 0) a.push_back(s.cloud.points[i]);
      if (g == 1) b.push_back(s.cloud.points[i]);
    }
    double best = 1e300;
    for (const auto& p : b) best = std::min(best, oracle::knn(a, p, 1).front().second);
    EXPECT_LE(std::sqrt(best), kDefaultDensityRadius) << "seed " << seed;
    EXPECT_EQ(contact_pairs(s.cloud, kDefaultDensityRadius),
              (std::vector<std::pair<InstanceId, InstanceId>>{{0, 1}}));
  }
}

TEST(GenerateScene, InfeasiblePlacementThrows) {
  SceneConfig c;
  c.num_objects = 30;
  c.room_extent = 2.0;
  c.max_placement_attempts = 20;
  try {
    generate_scene(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasiblePlacement);
    EXPECT_NE(std::string(e.what()).find("attempts"), std::string::npos);
  }
}

TEST(MeasureCatalog, RecomputableFromGroundTruth) {
  SceneConfig c;
  c.seed = 5;
  const SynthScene s = generate_scene(c);
  std::map<ClassId, std::vector<double>> diam, pts;
  std::map<InstanceId, std::vector<Point3>> members;
  std::map<InstanceId, ClassId> cls;
  for (std::size_t i = 0; i < s.cloud.size(); ++i) {
    const InstanceId g = (*s.cloud.gt_instance)[i];
    if (g < 0) continue;
    members[g].push_back(s.cloud.points[i]);
    cls[g] = (*s.cloud.gt_semantic)[i];
  }
  for (const auto& [g, m] : members) {
    const Point3 ctr = oracle::mean(m);
    double r2 = 0;
    for (const auto& p : m) r2 = std::max(r2, oracle::d2(p, ctr));
    diam[cls[g]].push_back(2 * std::sqrt(r2));
    pts[cls[g]].push_back(static_cast<double>(m.size()));
  }
  for (const auto& [k, d] : diam) {
    double sd = 0, sp = 0;
    for (std::size_t j = 0; j < d.size(); ++j) {
      sd += d[j];
      sp += pts[k][j];
    }
    EXPECT_NEAR(s.catalog.mean_size(k), sd / d.size(), 1e-9);
    EXPECT_NEAR(s.catalog.at(k).mean_points, sp / d.size(), 1e-9);
  }
}

TEST(MeasureCatalog, StableAcrossFiftyScenes) {
  std::map<ClassId, std::vector<double>> per_scene;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SceneConfig c;
    c.seed = 300 + seed;
    const SynthScene s = generate_scene(c);
    const auto gt = ground_truth_instances(s.cloud);
    std::set<ClassId> present(gt.class_ids.begin(), gt.class_ids.end());
    for (ClassId k : present) per_scene[k].push_back(s.catalog.mean_size(k));
  }
  for (const auto& [k, v] : per_scene) {
    ASSERT_GE(v.size(), 10u) << "class " << k;
    const std::size_t h = v.size() / 2;
    const double first = std::accumulate(v.begin(), v.begin() + h, 0.0) / h;
    const double second = std::accumulate(v.begin() + h, v.end(), 0.0) / (v.size() - h);
    EXPECT_LT(std::abs(first - second) / first, 0.10) << "class " << k;
  }
}

TEST(PerturbOffsets, ZeroNoiseIsGroundTruth) {
  SceneConfig c;
  c.seed = 9;
  const SynthScene s = generate_scene(c);
  NoiseModel n;
  n.seed = 4;
  EXPECT_EQ(perturb_offsets(s.cloud, n), ground_truth_offsets(s.cloud));
}

TEST(PerturbOffsets, GaussianMagnitudeMatchesChiMean) {
  SceneConfig c;
  c.seed = 10;
  c.num_objects = 20;
  const SynthScene s = generate_scene(c);
  NoiseModel n;
  n.sigma = 0.05;
  n.seed = 11;
  const auto o = perturb_offsets(s.cloud, n);
  const auto mask = foreground_mask(s.cloud);
  ASSERT_GE(std::count(mask.begin(), mask.end(), 1), 10000);
  // Mean of a chi(3) variable: sigma * sqrt(2) * Gamma(2) / Gamma(1.5).
  const double expected = 0.05 * std::sqrt(2.0) / std::tgamma(1.5);
  EXPECT_NEAR(expected, 0.0798, 1e-4);
  const double measured = offset_distance_metric(o, ground_truth_offsets(s.cloud), mask);
  EXPECT_NEAR(measured, expected, 0.05 * expected);
  for (std::size_t i = 0; i < s.cloud.size(); ++i) {
    if (!mask[i]) { EXPECT_EQ(o[i], Point3{}); }
  }
}

TEST(PerturbOffsets, DeterministicPerSeed) {
  SceneConfig c;
  const SynthScene s = generate_scene(c);
  NoiseModel n;
  n.sigma = 0.02;
  n.seed = 1;
  const auto a = perturb_offsets(s.cloud, n);
  EXPECT_EQ(perturb_offsets(s.cloud, n), a);
  n.seed = 2;
  EXPECT_NE(perturb_offsets(s.cloud, n), a);
}

TEST(PerturbOffsets, BoundaryPullMergesContactPairUnderDistanceClustering) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SynthScene s = generate_scene(chair_pair(seed));
    NoiseModel n;
    n.kind = OffsetNoiseKind::kBoundaryPull;
    n.boundary_pull = 1.0;
    n.seed = seed;
    apply_noise(s, n);

    std::vector<Point3> shifted;
    std::vector<ClassId> sem;
    std::vector<InstanceId> truth;
    for (std::size_t i = 0; i < s.cloud.size(); ++i) {
      if ((*s.cloud.gt_instance)[i] < 0) continue;
      shifted.push_back(s.cloud.points[i] + s.cloud.offsets[i]);
      sem.push_back(s.cloud.semantic[i]);
      truth.push_back((*s.cloud.gt_instance)[i]);
    }
    const auto merged = distance_cluster(shifted, sem, kDefaultDensityRadius);
    // One component holds nearly all of both instances.
    std::map<InstanceId, std::map<InstanceId, std::size_t>> gt_in;
    std::map<InstanceId, std::size_t> sizes;
    for (std::size_t k = 0; k < shifted.size(); ++k) {
      ++sizes[truth[k]];
      if (merged.instance[k] >= 0) ++gt_in[merged.instance[k]][truth[k]];
    }
    bool joined = false;
    for (auto& [id, counts] : gt_in) {
      joined |= counts[0] * 10 > sizes[0] * 9 && counts[1] * 10 > sizes[1] * 9;
    }
    EXPECT_TRUE(joined) << "seed " << seed;

    // Without the pull, the same pair stays apart.
    SynthScene clean = generate_scene(chair_pair(seed));
    std::vector<Point3> exact;
    for (std::size_t i = 0; i < clean.cloud.size(); ++i) {
      if ((*clean.cloud.gt_instance)[i] >= 0) exact.push_back(clean.cloud.points[i] + clean.cloud.offsets[i]);
    }
    EXPECT_EQ(distance_cluster(exact, sem, kDefaultDensityRadius).instance_class.size(), 2u);
  }
}

TEST(PerturbSemantics, Rates) {
  const ClassCatalog cat({{"floor", true, 0, 0}, {"a", false, 1, 0}, {"b", false, 1, 0}, {"c", false, 1, 0}});
  LabeledCloud c;
  const std::size_t n = 100000;
  c.points.assign(n, Point3{});
  for (std::size_t i = 0; i < n; ++i) c.semantic.push_back(static_cast<ClassId>(i % 4));
  c.gt_semantic = c.semantic;

  EXPECT_EQ(perturb_semantics(c, cat, 0.0, 3), c.semantic);

  const auto all = perturb_semantics(c, cat, 1.0, 3);
  for (std::size_t i = 0; i < n; ++i) {
    if (c.semantic[i] == 0) {
      EXPECT_EQ(all[i], 0);
    } else {
      EXPECT_NE(all[i], c.semantic[i]);
      EXPECT_GE(all[i], 1);
    }
  }

  const auto some = perturb_semantics(c, cat, 0.1, 3);
  std::size_t fg = 0, flipped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (c.semantic[i] == 0) continue;
    ++fg;
    flipped += some[i] != c.semantic[i];
  }
  const double rate = static_cast<double>(flipped) / static_cast<double>(fg);
  EXPECT_GE(rate, 0.09);
  EXPECT_LE(rate, 0.11);
  EXPECT_THROW(perturb_semantics(c, cat, 1.5, 3), Error);
}

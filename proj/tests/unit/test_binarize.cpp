#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "pbseg/binarize.hpp"
#include "pbseg/geometry.hpp"
#include "pbseg/scene_synth.hpp"
#include "pbseg/spatial_index.hpp"

using namespace pbseg;

TEST(PointDensities, IsolatedPointCountsItself) {
  const auto f = point_densities(std::vector<Point3>{{0, 0, 0}, {1, 0, 0}}, 0.04);
  EXPECT_EQ(f.density, (std::vector<std::uint32_t>{1, 1}));
}

// Centre plus six neighbours inside the ball, as in the illustrated density of 7.
TEST(PointDensities, IllustratedDensityOfSeven) {
  const double r = 0.04, a = 0.03;
  std::vector<Point3> pts{{0, 0, 0}, {a, 0, 0}, {-a, 0, 0}, {0, a, 0},
                          {0, -a, 0}, {0, 0, a}, {0, 0, -a}, {0.2, 0.2, 0.2}};
  const auto f = point_densities(pts, r);
  EXPECT_EQ(f.density[0], 7u);
  EXPECT_EQ(f.density[7], 1u);
}

TEST(PointDensities, MatchesPairwiseCount) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const auto pts = oracle::clustered_cloud(rng, 500, 4, 0.5, 0.03);
    EXPECT_EQ(point_densities(pts, 0.04).density, oracle::densities(pts, 0.04));
  }
}

TEST(PointDensities, ThreadCountDoesNotMatter) {
  std::mt19937_64 rng(22);
  const auto pts = oracle::clustered_cloud(rng, 3000, 6, 1.0, 0.03);
  const auto one = point_densities(pts, 0.05, 1);
  const auto many = point_densities(pts, 0.05, 7);
  EXPECT_EQ(one.density, many.density);
}

TEST(PointDensities, RejectsNonPositiveRadius) {
  const std::vector<Point3> pts{{0, 0, 0}};
  EXPECT_THROW(point_densities(pts, 0.0), Error);
  EXPECT_THROW(point_densities(pts, -0.1), Error);
}

TEST(PointDensities, MonotoneInRadius) {
  std::mt19937_64 rng(23);
  const auto pts = oracle::clustered_cloud(rng, 1500, 5, 1.0, 0.05);
  const SpatialIndex index(pts);
  auto prev = point_densities(index, 0.01).density;
  for (double r : {0.02, 0.04, 0.08}) {
    const auto cur = point_densities(index, r).density;
    for (std::size_t i = 0; i < cur.size(); ++i) ASSERT_LE(prev[i], cur[i]);
    prev = cur;
  }
}

TEST(PointDensities, PermutationEquivariant) {
  std::mt19937_64 rng(24);
  const auto pts = oracle::clustered_cloud(rng, 1200, 5, 1.0, 0.04);
  std::vector<std::size_t> perm(pts.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Point3> shuffled(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) shuffled[i] = pts[perm[i]];
  const auto a = point_densities(pts, 0.04).density;
  const auto b = point_densities(shuffled, 0.04).density;
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(b[i], a[perm[i]]);
}

TEST(Binarize, ZeroThresholdMakesEverythingHigh) {
  DensityField f{{1, 2, 3, 1}, 0.04};
  const auto b = binarize(f, 0);
  EXPECT_EQ(b.high_count(), 4u);
}

TEST(Binarize, DensityEqualToThresholdIsLow) {
  DensityField f{{29, 30, 31}, 0.04};
  const auto b = binarize(f, 30);
  EXPECT_FALSE(b.high(0));
  EXPECT_FALSE(b.high(1));
  EXPECT_TRUE(b.high(2));
}

TEST(Binarize, MonotoneInThreshold) {
  std::mt19937_64 rng(25);
  const auto pts = oracle::clustered_cloud(rng, 1500, 5, 1.0, 0.04);
  const auto f = point_densities(pts, 0.04);
  for (std::uint32_t t = 0; t < 60; t += 5) {
    const auto lo = binarize(f, t), hi = binarize(f, t + 5);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (hi.high(i)) { EXPECT_TRUE(lo.high(i)); }
    }
  }
}

// Under ground-truth offsets each instance collapses to one coordinate, so an
// instance with more than theta_d members is entirely HP.
TEST(Binarize, CollapsedInstancesAreHigh) {
  std::mt19937_64 rng(26);
  std::vector<Point3> shifted;
  std::vector<std::size_t> sizes{31, 30, 5, 100};
  std::vector<std::size_t> owner;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    for (std::size_t i = 0; i < sizes[k]; ++i) {
      shifted.push_back({double(k), 0, 0});
      owner.push_back(k);
    }
  }
  const auto b = binarize(point_densities(shifted, 0.04), 30);
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    EXPECT_EQ(b.high(i), sizes[owner[i]] >= 31) << i;
  }
}

// Two chairs in contact with boundary-pull offsets: the pulled bridge points
// are sparse and fall below the threshold.
TEST(Binarize, ContactBoundaryPointsAreLow) {
  SceneConfig sc;
  sc.num_objects = 2;
  sc.classes = {default_class_templates()[0]};
  sc.adjacency_probability = 1.0;
  sc.floor_density = 0.0;
  sc.seed = 4;
  SynthScene scene = generate_scene(sc);
  ASSERT_EQ(contact_pairs(scene.cloud, 0.1).size(), 1u);
  NoiseModel nm;
  nm.kind = OffsetNoiseKind::kBoundaryPull;
  nm.sigma = 0.01;
  nm.seed = 9;
  apply_noise(scene, nm);
  const auto shifted = apply_offsets(scene.cloud);
  const auto f = point_densities(shifted, kDefaultDensityRadius);
  EXPECT_EQ(f.density, oracle::densities(shifted, kDefaultDensityRadius));
  const auto b = binarize(f, kDefaultDensityThreshold);

  // Points whose shifted position left their own instance's collapsed core
  // by more than 4 sigma are the pulled ones.
  const auto gt = ground_truth_instances(scene.cloud);
  std::size_t pulled = 0, pulled_high = 0;
  for (std::size_t k = 0; k < gt.members.size(); ++k) {
    const Point3 c = centroid(scene.cloud.points, gt.members[k]);
    for (PointIndex i : gt.members[k]) {
      if (distance(shifted[i], c) > 0.06) {
        ++pulled;
        pulled_high += b.high(i);
      }
    }
  }
  ASSERT_GT(pulled, 10u);
  EXPECT_LT(static_cast<double>(pulled_high), 0.05 * static_cast<double>(pulled));
}

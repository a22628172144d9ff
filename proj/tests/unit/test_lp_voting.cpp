#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "pbseg/lp_voting.hpp"

using namespace pbseg;

namespace {

ClassCatalog catalog_with_sizes(double a, double b) {
  return ClassCatalog({{"floor", true, 0.0, 0.0}, {"a", false, a, 0.0}, {"b", false, b, 0.0}});
}

struct VoteCase {
  std::vector<Point3> pts;
  std::vector<ClassId> cls;
  PreliminaryAssignment pre;
  std::vector<std::uint8_t> lp;

  void hp(Point3 p, ClassId c, InstanceId id) {
    pts.push_back(p);
    cls.push_back(c);
    pre.instance.push_back(id);
    lp.push_back(0);
    while (pre.instance_class.size() <= static_cast<std::size_t>(id)) pre.instance_class.push_back(c);
  }
  std::size_t low(Point3 p, ClassId c) {
    pts.push_back(p);
    cls.push_back(c);
    pre.instance.push_back(kUnassigned);
    lp.push_back(1);
    return pts.size() - 1;
  }
  FullAssignment run(const ClassCatalog& cat, VotingOptions opt = {}) const {
    return assign_lps(pts, pre, lp, cls, cat, opt);
  }
};

}  // namespace

TEST(AssignLps, UnanimousVote) {
  VoteCase v;
  for (int i = 0; i < 5; ++i) v.hp({0.01 * i, 0, 0}, 1, 0);
  v.hp({5, 5, 5}, 1, 1);
  const auto lp = v.low({0.02, 0.01, 0}, 1);
  const auto out = v.run(catalog_with_sizes(0.5, 0.5));
  EXPECT_EQ(out.instance[lp], 0);
  EXPECT_EQ(out.fallback_count, 0u);
}

TEST(AssignLps, MajorityWins) {
  VoteCase v;
  for (int i = 0; i < 5; ++i) v.hp({0.1 + 0.01 * i, 0, 0}, 1, 0);
  for (int i = 0; i < 3; ++i) v.hp({-0.05 - 0.01 * i, 0, 0}, 1, 1);  // closer, fewer
  const auto lp = v.low({0, 0, 0}, 1);
  const auto out = v.run(catalog_with_sizes(0.3, 0.3));
  EXPECT_EQ(out.instance[lp], 0);
}

TEST(AssignLps, TieGoesToNearestVoterThenLowerId) {
  VoteCase v;
  v.hp({0.2, 0, 0}, 1, 0);
  v.hp({-0.1, 0, 0}, 1, 1);
  const auto lp = v.low({0, 0, 0}, 1);
  EXPECT_EQ(v.run(catalog_with_sizes(0.5, 0.5)).instance[lp], 1);

  VoteCase w;
  w.hp({0.1, 0, 0}, 1, 0);
  w.hp({-0.1, 0, 0}, 1, 1);
  const auto lp2 = w.low({0, 0, 0}, 1);
  EXPECT_EQ(w.run(catalog_with_sizes(0.5, 0.5)).instance[lp2], 0);
}

TEST(AssignLps, OtherClassHpsDoNotVote) {
  VoteCase v;
  for (int i = 0; i < 9; ++i) v.hp({0.01 * i, 0, 0}, 2, 0);
  v.hp({0.3, 0, 0}, 1, 1);
  const auto lp = v.low({0, 0, 0}, 1);
  EXPECT_EQ(v.run(catalog_with_sizes(0.5, 0.5)).instance[lp], 1);
}

TEST(AssignLps, NearestHpFallback) {
  VoteCase v;
  v.hp({0.05, 0, 0}, 2, 0);  // instance C: nearest overall, other class
  v.hp({3, 0, 0}, 1, 1);     // same class but outside r_m
  const auto lp = v.low({0, 0, 0}, 1);
  const auto out = v.run(catalog_with_sizes(0.5, 0.5));
  EXPECT_EQ(out.instance[lp], 0);
  EXPECT_EQ(out.fallback_count, 1u);
}

TEST(AssignLps, NoHpsLeavesLpsUnassignable) {
  VoteCase v;
  v.low({0, 0, 0}, 1);
  v.low({1, 0, 0}, 2);
  const auto out = v.run(catalog_with_sizes(0.5, 0.5));
  EXPECT_EQ(out.unassignable, (std::vector<PointIndex>{0, 1}));
  EXPECT_EQ(out.instance, (std::vector<InstanceId>{kUnassigned, kUnassigned}));
}

TEST(AssignLps, GroupedLpIsRejected) {
  VoteCase v;
  v.hp({0, 0, 0}, 1, 0);
  v.lp[0] = 1;
  EXPECT_THROW(v.run(catalog_with_sizes(0.5, 0.5)), Error);
}

namespace {

VoteCase random_case(std::mt19937_64& rng, std::size_t n) {
  VoteCase v;
  const auto pts = oracle::clustered_cloud(rng, n, 5, 1.0, 0.08);
  const InstanceId instances = 6;
  for (const Point3& p : pts) {
    const ClassId c = 1 + static_cast<ClassId>(rng() % 2);
    if (rng() % 3 == 0) {
      v.low(p, c);
    } else {
      const InstanceId id = static_cast<InstanceId>(rng() % instances);
      v.pts.push_back(p);
      v.cls.push_back(c);
      v.pre.instance.push_back(id);
      v.lp.push_back(0);
    }
  }
  v.pre.instance_class.assign(instances, 1);
  return v;
}

}  // namespace

TEST(AssignLps, EveryVoteMatchesBruteForceRecount) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const auto v = random_case(rng, 100 + rng() % 400);
    const double ra = 0.02 + 0.05 * static_cast<double>(rng() % 5);
    const double rb = 0.02 + 0.05 * static_cast<double>(rng() % 5);
    const auto cat = catalog_with_sizes(ra, rb);
    const auto out = v.run(cat, VotingOptions{VotingMode::kFrozenVoters, 1 + unsigned(trial % 4)});
    const std::vector<double> r_m{0.0, ra, rb};
    for (std::size_t i = 0; i < v.pts.size(); ++i) {
      if (!v.lp[i]) {
        EXPECT_EQ(out.instance[i], v.pre.instance[i]) << "HP changed";
        continue;
      }
      EXPECT_EQ(out.instance[i], oracle::recount_vote(v.pts, v.pre.instance, v.cls, r_m, i))
          << "trial " << trial << " lp " << i;
    }
  }
}

TEST(AssignLps, CompleteAndOrderIndependent) {
  std::mt19937_64 rng(42);
  const auto v = random_case(rng, 3000);
  const auto cat = catalog_with_sizes(0.1, 0.2);
  const auto out = v.run(cat);
  for (std::size_t i = 0; i < v.pts.size(); ++i) EXPECT_NE(out.instance[i], kUnassigned);

  // Reverse the point order; each point's assignment must follow it.
  VoteCase r;
  for (std::size_t k = v.pts.size(); k-- > 0;) {
    r.pts.push_back(v.pts[k]);
    r.cls.push_back(v.cls[k]);
    r.pre.instance.push_back(v.pre.instance[k]);
    r.lp.push_back(v.lp[k]);
  }
  r.pre.instance_class = v.pre.instance_class;
  const auto rout = r.run(cat, VotingOptions{VotingMode::kFrozenVoters, 6});
  for (std::size_t k = 0; k < v.pts.size(); ++k) {
    // Ties among equidistant voters resolve by id, never by position, except
    // the fallback which breaks exact distance ties by index.
    EXPECT_EQ(rout.instance[v.pts.size() - 1 - k], out.instance[k]);
  }
}

// A larger r_m only adds voters: the voter set for each LP grows monotonically.
TEST(AssignLps, LargerMeanSizeOnlyAddsVoters) {
  std::mt19937_64 rng(43);
  const auto v = random_case(rng, 800);
  for (std::size_t i = 0; i < v.pts.size(); ++i) {
    if (!v.lp[i]) continue;
    std::vector<PointIndex> small, large;
    for (std::size_t j = 0; j < v.pts.size(); ++j) {
      if (v.pre.instance[j] < 0 || v.cls[j] != v.cls[i]) continue;
      const double d = oracle::d2(v.pts[i], v.pts[j]);
      if (d <= 0.05 * 0.05) small.push_back(static_cast<PointIndex>(j));
      if (d <= 0.15 * 0.15) large.push_back(static_cast<PointIndex>(j));
    }
    EXPECT_TRUE(std::includes(large.begin(), large.end(), small.begin(), small.end()));
  }
  // And the implementation agrees with the recount at both radii.
  for (double r : {0.05, 0.15}) {
    const auto out = v.run(catalog_with_sizes(r, r));
    const std::vector<double> r_m{0.0, r, r};
    for (std::size_t i = 0; i < v.pts.size(); ++i) {
      if (v.lp[i]) { EXPECT_EQ(out.instance[i], oracle::recount_vote(v.pts, v.pre.instance, v.cls, r_m, i)); }
    }
  }
}

TEST(AssignLps, MultiRoundLetsAssignedLpsVote) {
  // A chain of LPs leading away from a single HP: frozen mode resolves the
  // far ones by fallback, multi-round by propagation.
  VoteCase v;
  v.hp({0, 0, 0}, 1, 0);
  v.hp({10, 0, 0}, 2, 1);
  for (int i = 1; i <= 5; ++i) v.low({0.1 * i, 0, 0}, 1);
  const auto cat = catalog_with_sizes(0.15, 0.15);
  const auto frozen = v.run(cat);
  EXPECT_EQ(frozen.fallback_count, 4u);
  const auto multi = v.run(cat, VotingOptions{VotingMode::kMultiRound, 1});
  EXPECT_EQ(multi.fallback_count, 0u);
  for (std::size_t i = 2; i < v.pts.size(); ++i) {
    EXPECT_EQ(frozen.instance[i], 0);
    EXPECT_EQ(multi.instance[i], 0);
  }
}

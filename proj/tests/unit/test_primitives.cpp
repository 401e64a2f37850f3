#include <gtest/gtest.h>

#include <cmath>

#include "canonimanip/errors.hpp"
#include "canonimanip/primitives.hpp"
#include "canonimanip/random.hpp"
#include "support.hpp"

using namespace canonimanip;
using namespace testing_support;

TEST(CanonicalAxes, SixSignedAxesInDefaultOrder) {
  const DirectionCandidateSet s = canonical_axis_candidates();
  ASSERT_EQ(s.directions.size(), 6u);
  EXPECT_EQ(s.directions[0], Vec3(0, 0, 1));
  EXPECT_EQ(s.directions[2], Vec3(1, 0, 0));
  EXPECT_EQ(s.directions[5], Vec3(0, -1, 0));
  for (std::size_t i = 0; i < 6; ++i) {
    bool has_opposite = false;
    for (std::size_t j = 0; j < 6; ++j) {
      if (i == j) continue;
      const double a = direction_angle(s.directions[i], s.directions[j]);
      EXPECT_TRUE(std::abs(a - M_PI / 2) < 1e-12 || std::abs(a - M_PI) < 1e-12);
      if ((s.directions[i] + s.directions[j]).norm() < 1e-15) has_opposite = true;
    }
    EXPECT_TRUE(has_opposite);
  }
}

TEST(OrderByScores, HighestFirstStable) {
  const DirectionCandidateSet s = order_by_scores(canonical_axis_candidates(), {0.1, 0.9, 0.3, 0.3, 0.0, 0.2});
  EXPECT_EQ(s.directions[0], Vec3(0, 0, -1));
  EXPECT_EQ(s.directions[1], Vec3(1, 0, 0));
  EXPECT_EQ(s.directions[2], Vec3(-1, 0, 0));
  ASSERT_TRUE(s.scores);
  EXPECT_TRUE(std::is_sorted(s.scores->rbegin(), s.scores->rend()));
  EXPECT_THROW(order_by_scores(canonical_axis_candidates(), {1.0}), InvalidArgument);
}

TEST(RefineDirections, ConeAroundZ) {
  const double half = deg(15);
  const DirectionCandidateSet s = refine_directions(Vec3::UnitZ(), 6, half);
  ASSERT_EQ(s.directions.size(), 6u);
  for (std::size_t k = 0; k < 6; ++k) {
    const Vec3& u = s.directions[k];
    EXPECT_NEAR(u.norm(), 1.0, 1e-12);
    EXPECT_NEAR(u.z(), std::cos(half), 1e-12);
    EXPECT_NEAR(direction_angle(u, Vec3::UnitZ()), half, 1e-9);
    const double az = std::atan2(u.y(), u.x());
    const double expected = 2 * M_PI * k / 6;
    EXPECT_NEAR(std::remainder(az - expected, 2 * M_PI), 0.0, 1e-9);
  }
  // Phase reference is the +x projection.
  EXPECT_GT(s.directions[0].x(), 0.0);
  EXPECT_NEAR(s.directions[0].y(), 0.0, 1e-15);
}

TEST(RefineDirections, ParallelToXFallsBackToY) {
  const DirectionCandidateSet s = refine_directions(Vec3::UnitX(), 4, deg(10));
  EXPECT_NEAR(s.directions[0].z(), 0.0, 1e-15);
  EXPECT_GT(s.directions[0].y(), 0.0);
}

TEST(RefineDirections, EquivariantUpToPhase) {
  Rng rng(31);
  for (int i = 0; i < 20; ++i) {
    const Vec3 v = rng.unit_vector();
    const Rotation R = rng.rotation();
    const DirectionCandidateSet a = refine_directions(v, 6, deg(15));
    const DirectionCandidateSet b = refine_directions(R.rotate(v), 6, deg(15));
    // Rotated fan lies on the rotated cone and keeps the 60 degree spacing.
    for (const Vec3& u : a.directions) {
      const Vec3 ru = R.rotate(u);
      EXPECT_NEAR(direction_angle(ru, R.rotate(v)), deg(15), 1e-9);
    }
    for (std::size_t k = 0; k < 6; ++k) {
      const Vec3& p = b.directions[k];
      const Vec3& q = b.directions[(k + 1) % 6];
      const Vec3 w = R.rotate(v);
      const Vec3 pp = (p - p.dot(w) * w).normalized(), qq = (q - q.dot(w) * w).normalized();
      EXPECT_NEAR(std::acos(std::clamp(pp.dot(qq), -1.0, 1.0)), M_PI / 3, 1e-9);
    }
    // The set of rotated outputs equals the fan on R v after a phase shift:
    // the same cone, so every rotated output is within one 60 degree gap of
    // some output of b.
    for (const Vec3& u : a.directions) {
      double best = M_PI;
      for (const Vec3& w : b.directions) best = std::min(best, direction_angle(R.rotate(u), w));
      EXPECT_LE(best, 2 * std::sin(deg(15)) * std::sin(M_PI / 6) + 1e-9);
    }
  }
}

TEST(RefineDirections, DistinctForSmallCounts) {
  for (int n = 1; n <= 12; ++n) {
    const DirectionCandidateSet s = refine_directions(Vec3(0, 0.6, 0.8), n, deg(15));
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) EXPECT_GT((s.directions[i] - s.directions[j]).norm(), 1e-6);
    }
  }
}

TEST(RefineDirections, Errors) {
  EXPECT_THROW(refine_directions(Vec3(0, 0, 2)), NotUnit);
  EXPECT_THROW(refine_directions(Vec3::UnitZ(), 0), InvalidArgument);
  EXPECT_THROW(refine_directions(Vec3::UnitZ(), 6, 0.0), InvalidArgument);
  EXPECT_THROW(refine_directions(Vec3::UnitZ(), 6, M_PI / 2), InvalidArgument);
}

TEST(PrimitiveToWorld, Examples) {
  auto o = make_object("o", {{0, 0, 0}});
  const InteractionPrimitive p{{1, 0, 0}, {1, 0, 0}, "x"};
  WorldPrimitive w = primitive_to_world(p, place(o));
  EXPECT_EQ(w.point, Vec3(1, 0, 0));
  EXPECT_EQ(w.direction, Vec3(1, 0, 0));

  w = primitive_to_world(p, place(o, {Rotation::from_axis_angle(Vec3::UnitZ(), M_PI / 2), Vec3::Zero()}));
  EXPECT_LT((w.point - Vec3(0, 1, 0)).norm(), 1e-12);
  EXPECT_LT((w.direction - Vec3(0, 1, 0)).norm(), 1e-12);

  const InteractionPrimitive q{{0, 0, 0.1}, {0, 0, 1}, "top"};
  w = primitive_to_world(q, place(o, Pose::from_translation({0, 0, 1}), 2.0));
  EXPECT_LT((w.point - Vec3(0, 0, 1.2)).norm(), 1e-12);
  EXPECT_EQ(w.direction, Vec3(0, 0, 1));
}

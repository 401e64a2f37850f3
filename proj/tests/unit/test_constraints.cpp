#include <gtest/gtest.h>

#include <cmath>

#include "canonimanip/constraints.hpp"
#include "canonimanip/errors.hpp"
#include "canonimanip/random.hpp"
#include "support.hpp"

using namespace canonimanip;
using namespace testing_support;

namespace {

struct Pair {
  SceneObject a, p;
};

Pair pair_at(const Pose& pa, const Pose& pp) {
  return {place(make_object("a", {{0, 0, 0}}), pa), place(make_object("p", {{0, 0, 0}}), pp)};
}

}  // namespace

TEST(Residual, Examples) {
  Pair s = pair_at({}, {});
  SpatialConstraint c = make_constraint("a", Vec3::Zero(), Vec3::UnitZ(), "p", Vec3::Zero(), Vec3::UnitZ(), 0.0, 0.0);
  EXPECT_EQ(constraint_residual(c, s.a, s.p), 0.0);

  s = pair_at({}, Pose::from_translation({0.1, 0, 0}));
  c = make_constraint("a", Vec3::Zero(), Vec3::UnitZ(), "p", Vec3::Zero(), -Vec3::UnitZ(), 0.1, M_PI);
  EXPECT_NEAR(constraint_residual(c, s.a, s.p), 0.0, 1e-24);

  s = pair_at({}, Pose::from_translation({0.2, 0, 0}));
  c = make_constraint("a", Vec3::Zero(), Vec3::UnitZ(), "p", Vec3::Zero(), Vec3::UnitZ(), 0.1, 0.0);
  c.weight_d = 1.0;
  EXPECT_NEAR(constraint_residual(c, s.a, s.p), 0.01, 1e-15);
}

TEST(Residual, MatchesHandFormula) {
  Rng rng(12);
  for (int i = 0; i < 50; ++i) {
    const Pair s = pair_at({rng.rotation(), rng.unit_vector()}, {rng.rotation(), rng.unit_vector()});
    const Vec3 va = rng.unit_vector(), vp = rng.unit_vector();
    const Vec3 pa(0.01, 0.02, 0.03), pp(-0.02, 0.0, 0.05);
    SpatialConstraint c = make_constraint("a", pa, va, "p", pp, vp, 0.3, 1.0);
    c.weight_d = 7.0;
    c.weight_theta = 0.5;
    const Vec3 wa = transform_point(s.a.pose, pa), wp = transform_point(s.p.pose, pp);
    const Vec3 da = s.a.pose.rotation.matrix() * va, dp = s.p.pose.rotation.matrix() * vp;
    const double ang = std::acos(std::clamp(da.dot(dp) / (da.norm() * dp.norm()), -1.0, 1.0));
    const double oracle = 7.0 * std::pow((wa - wp).norm() - 0.3, 2) + 0.5 * std::pow(ang - 1.0, 2);
    EXPECT_NEAR(constraint_residual(c, s.a, s.p), oracle, 1e-9);
  }
}

TEST(Residual, InvariantUnderCommonRigidMotion) {
  Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    const Pose pa{rng.rotation(), rng.unit_vector()}, pp{rng.rotation(), rng.unit_vector()};
    const Pose g{rng.rotation(), rng.unit_vector()};
    const SpatialConstraint c =
        make_constraint("a", {0.1, 0, 0}, rng.unit_vector(), "p", {0, 0.1, 0}, rng.unit_vector(), 0.2, 0.8);
    const Pair s = pair_at(pa, pp), t = pair_at(compose_poses(g, pa), compose_poses(g, pp));
    EXPECT_NEAR(constraint_residual(c, s.a, s.p), constraint_residual(c, t.a, t.p), 1e-9);
  }
}

TEST(Residual, ContinuousUnderSmallPerturbations) {
  Rng rng(14);
  const SpatialConstraint c =
      make_constraint("a", {0.1, 0, 0}, Vec3::UnitZ(), "p", {0, 0, 0}, Vec3::UnitX(), 0.05, 0.5);
  for (int i = 0; i < 50; ++i) {
    const Pose pa{rng.rotation(), rng.unit_vector() * 0.3};
    const Pair s = pair_at(pa, {});
    const double eps = 1e-4;
    Twist xi;
    xi.linear = rng.unit_vector() * eps;
    xi.angular = rng.unit_vector() * eps;
    const Pair t = pair_at(compose_poses(exp_twist(xi), pa), {});
    // Gradient magnitude is bounded for this setup; generous factor.
    EXPECT_LT(std::abs(constraint_residual(c, s.a, s.p) - constraint_residual(c, t.a, t.p)), 100.0 * eps);
  }
}

TEST(Residual, UnknownObjectInScene) {
  Scene scene;
  scene.objects.push_back(place(make_object("a", {{0, 0, 0}})));
  const SpatialConstraint c = make_constraint("a", Vec3::Zero(), Vec3::UnitZ(), "mug", Vec3::Zero(), Vec3::UnitZ(), 0, 0.0);
  EXPECT_THROW(constraint_residual(c, scene), UnknownObject);
  EXPECT_THROW(constraint_satisfied(c, scene), UnknownObject);
}

TEST(Satisfied, Examples) {
  const Tolerances tol;
  SpatialConstraint c = make_constraint("a", Vec3::Zero(), Vec3::UnitZ(), "p", Vec3::Zero(), Vec3::UnitZ(), 0.1, 0.0);
  Pair s = pair_at({}, Pose::from_translation({0.1, 0, 0}));
  EXPECT_TRUE(constraint_satisfied(c, s.a, s.p, tol));
  s = pair_at({}, Pose::from_translation({0.1 + 2 * tol.distance, 0, 0}));
  EXPECT_FALSE(constraint_satisfied(c, s.a, s.p, tol));
  s = pair_at({Rotation::from_axis_angle(Vec3::UnitX(), 2 * tol.angle), Vec3::Zero()},
              Pose::from_translation({0.1 + 0.5 * tol.distance, 0, 0}));
  EXPECT_FALSE(constraint_satisfied(c, s.a, s.p, tol));
}

TEST(Satisfied, ZeroResidualIffExactlySatisfied) {
  const Tolerances zero{0.0, 0.0};
  SpatialConstraint c = make_constraint("a", Vec3::Zero(), Vec3::UnitZ(), "p", Vec3::Zero(), Vec3::UnitZ(), 0.0, 0.0);
  Pair s = pair_at({}, {});
  EXPECT_EQ(constraint_residual(c, s.a, s.p), 0.0);
  EXPECT_TRUE(constraint_satisfied(c, s.a, s.p, zero));
  s = pair_at({}, Pose::from_translation({1e-6, 0, 0}));
  EXPECT_GT(constraint_residual(c, s.a, s.p), 0.0);
  EXPECT_FALSE(constraint_satisfied(c, s.a, s.p, zero));
}

TEST(NoAngleTarget, AngularTermDropped) {
  const SpatialConstraint c = make_constraint("a", Vec3::Zero(), Vec3::UnitZ(), "p", Vec3::Zero(), Vec3::UnitX(), 0.0, std::nullopt);
  const Pair s = pair_at({}, {});
  EXPECT_EQ(constraint_residual(c, s.a, s.p), 0.0);
}

TEST(Validate, RejectsOutOfRange) {
  SpatialConstraint c = make_constraint("a", Vec3::Zero(), Vec3::UnitZ(), "p", Vec3::Zero(), Vec3::UnitZ(), -0.1, 0.0);
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.target_distance = 0.1;
  c.target_angle = 4.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.target_angle = 1.0;
  c.weight_theta = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.target_angle.reset();
  EXPECT_NO_THROW(c.validate());
}

TEST(SatisfyingPose, HoldsExactly) {
  Rng rng(15);
  for (int i = 0; i < 50; ++i) {
    const Pair s = pair_at({rng.rotation(), rng.unit_vector()}, {rng.rotation(), rng.unit_vector()});
    const double theta = rng.uniform(0.0, M_PI);
    const SpatialConstraint c =
        make_constraint("a", {0.02, 0.01, 0}, rng.unit_vector(), "p", {0, 0, 0.04}, rng.unit_vector(), 0.05, theta);
    SceneObject moved = s.a;
    moved.pose = satisfying_active_pose(c, s.a, s.p);
    EXPECT_LT(constraint_residual(c, moved, s.p), 1e-18);
  }
}

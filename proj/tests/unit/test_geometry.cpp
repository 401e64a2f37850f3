#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "canonimanip/errors.hpp"
#include "canonimanip/geometry.hpp"
#include "canonimanip/random.hpp"

using namespace canonimanip;

namespace {

Rotation rot_z(double deg) { return Rotation::from_axis_angle(Vec3::UnitZ(), deg * M_PI / 180.0); }

void expect_vec_near(const Vec3& a, const Vec3& b, double tol) {
  EXPECT_LT((a - b).norm(), tol) << a.transpose() << " vs " << b.transpose();
}

}  // namespace

TEST(TransformPoint, IdentityTranslationRotation) {
  expect_vec_near(transform_point(Pose::identity(), {1, 2, 3}), {1, 2, 3}, 0.0 + 1e-15);
  expect_vec_near(transform_point(Pose::from_translation({1, 0, 0}), Vec3::Zero()), {1, 0, 0}, 1e-15);
  expect_vec_near(transform_point({rot_z(90), Vec3::Zero()}, {1, 0, 0}), {0, 1, 0}, 1e-9);
}

TEST(ComposePoses, AppliesRightOperandFirst) {
  const Pose a{rot_z(90), {1, 0, 0}};
  const Pose b{Rotation::identity(), {0, 2, 0}};
  // b moves (0,0,0) to (0,2,0); a rotates that to (-2,0,0) and shifts by x.
  expect_vec_near(transform_point(compose_poses(a, b), Vec3::Zero()), {-1, 0, 0}, 1e-12);
}

TEST(ComposePoses, IdentityInverseAndHalfTurns) {
  Rng rng(3);
  const Pose p{rng.rotation(), {0.3, -0.2, 0.7}};
  const Pose c = compose_poses(Pose::identity(), p);
  EXPECT_LT(rotation_angle_between(c.rotation, p.rotation), 1e-12);
  expect_vec_near(c.translation, p.translation, 1e-15);

  const Pose e = compose_poses(p, inverse(p));
  EXPECT_LT(e.rotation.angle(), 1e-9);
  EXPECT_LT(e.translation.norm(), 1e-9);

  const Pose z90{rot_z(90), Vec3::Zero()};
  const Pose z180 = compose_poses(z90, z90);
  EXPECT_NEAR(z180.rotation.angle(), M_PI, 1e-9);
  expect_vec_near(z180.rotation.rotate({1, 0, 0}), {-1, 0, 0}, 1e-9);
}

TEST(ComposePoses, AssociativeOnSeededTriples) {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const Pose a{rng.rotation(), rng.unit_vector()}, b{rng.rotation(), rng.unit_vector()},
        c{rng.rotation(), rng.unit_vector()};
    const Pose l = compose_poses(compose_poses(a, b), c);
    const Pose r = compose_poses(a, compose_poses(b, c));
    EXPECT_LT(rotation_angle_between(l.rotation, r.rotation), 1e-9);
    EXPECT_LT((l.translation - r.translation).norm(), 1e-9);
  }
}

TEST(Rotation, CanonicalSignAndUnitNorm) {
  const Rotation r = Rotation::from_wxyz(-2, 0, 0, 2);
  EXPECT_GE(r.w(), 0.0);
  EXPECT_NEAR(r.quaternion().norm(), 1.0, 1e-15);
  const Rotation half = Rotation::from_wxyz(0, -1, 0, 0);
  EXPECT_EQ(half.x(), 1.0);
  EXPECT_THROW(Rotation::from_wxyz(0, 0, 0, 0), NotUnit);
}

TEST(Rotation, RpyMatchesAxisProduct) {
  const double r = 0.3, p = -0.7, y = 1.9;
  const Mat3 expected = (Eigen::AngleAxisd(y, Vec3::UnitZ()) * Eigen::AngleAxisd(p, Vec3::UnitY()) *
                         Eigen::AngleAxisd(r, Vec3::UnitX()))
                            .toRotationMatrix();
  EXPECT_LT((Rotation::from_rpy(r, p, y).matrix() - expected).norm(), 1e-12);
}

TEST(Rotation, LogExpRoundTrip) {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const Rotation r = rng.rotation();
    EXPECT_LT(rotation_angle_between(Rotation::from_rotation_vector(r.log()), r), 1e-9);
    EXPECT_LE(r.log().norm(), M_PI + 1e-12);
  }
}

TEST(Rotation, BetweenMapsFromOntoTo) {
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    const Vec3 a = rng.unit_vector(), b = rng.unit_vector();
    expect_vec_near(Rotation::between(a, b).rotate(a), b, 1e-9);
  }
  expect_vec_near(Rotation::between({0, 0, 1}, {0, 0, -1}).rotate({0, 0, 1}), {0, 0, -1}, 1e-12);
}

TEST(Slerp, EndpointsAndMidpoint) {
  const Rotation a = Rotation::identity(), b = rot_z(90);
  EXPECT_LT(rotation_angle_between(slerp(a, b, 0.0), a), 1e-12);
  EXPECT_LT(rotation_angle_between(slerp(a, b, 1.0), b), 1e-12);
  EXPECT_LT(rotation_angle_between(slerp(a, b, 0.5), rot_z(45)), 1e-12);
}

TEST(ExpTwist, PureTranslationAndRotation) {
  Twist t;
  t.linear = {0.1, 0.2, 0.3};
  expect_vec_near(exp_twist(t).translation, {0.1, 0.2, 0.3}, 1e-15);
  Twist r;
  r.angular = {0, 0, M_PI / 2};
  EXPECT_LT(rotation_angle_between(exp_twist(r).rotation, rot_z(90)), 1e-12);
  EXPECT_LT(exp_twist(r).translation.norm(), 1e-15);
}

TEST(ExpTwist, MatchesMatrixExponential) {
  // Independent oracle: truncated power series of the 4x4 twist matrix.
  Twist xi;
  xi.linear = {0.3, -0.1, 0.2};
  xi.angular = {0.4, 0.5, -0.6};
  Eigen::Matrix4d X = Eigen::Matrix4d::Zero();
  X.block<3, 3>(0, 0) << 0, -xi.angular.z(), xi.angular.y(), xi.angular.z(), 0, -xi.angular.x(),
      -xi.angular.y(), xi.angular.x(), 0;
  X.block<3, 1>(0, 3) = xi.linear;
  Eigen::Matrix4d term = Eigen::Matrix4d::Identity(), sum = Eigen::Matrix4d::Identity();
  for (int k = 1; k < 40; ++k) {
    term = term * X / k;
    sum += term;
  }
  const Pose p = exp_twist(xi);
  EXPECT_LT((p.rotation.matrix() - sum.block<3, 3>(0, 0)).norm(), 1e-12);
  EXPECT_LT((p.translation - sum.block<3, 1>(0, 3)).norm(), 1e-12);
}

TEST(Umeyama, IdentityAndTranslation) {
  const std::vector<Vec3> src{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  SimilarityTransform s = umeyama_align(src, src);
  EXPECT_NEAR(s.scale, 1.0, 1e-9);
  EXPECT_LT(s.rotation.angle(), 1e-9);
  EXPECT_LT(s.translation.norm(), 1e-9);

  std::vector<Vec3> dst;
  for (const Vec3& p : src) dst.push_back(p + Vec3(1, 2, 3));
  s = umeyama_align(src, dst);
  EXPECT_NEAR(s.scale, 1.0, 1e-9);
  EXPECT_LT(s.rotation.angle(), 1e-9);
  expect_vec_near(s.translation, {1, 2, 3}, 1e-9);
}

TEST(Umeyama, RecoversSeededSimilarity) {
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const double scale = rng.uniform(0.2, 5.0);
    const Rotation R = rng.rotation();
    const Vec3 t(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    std::vector<Vec3> src, dst;
    for (int k = 0; k < 10; ++k) {
      src.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
      dst.push_back(scale * R.rotate(src.back()) + t);
    }
    const SimilarityTransform s = umeyama_align(src, dst);
    EXPECT_NEAR(s.scale, scale, 1e-8);
    EXPECT_LT(rotation_angle_between(s.rotation, R), 1e-8);
    EXPECT_LT((s.translation - t).norm(), 1e-8);
  }
}

TEST(Umeyama, ReflectionIsNotReturned) {
  // Mirrored data: the best proper rotation must still have det +1.
  const std::vector<Vec3> src{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}, {-1, 0.5, 0.2}};
  std::vector<Vec3> dst;
  for (const Vec3& p : src) dst.emplace_back(-p.x(), p.y(), p.z());
  const SimilarityTransform s = umeyama_align(src, dst);
  EXPECT_NEAR(s.rotation.matrix().determinant(), 1.0, 1e-9);
}

TEST(Umeyama, CoplanarIsAccepted) {
  const std::vector<Vec3> src{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  std::vector<Vec3> dst;
  const Rotation R = Rotation::from_axis_angle({1, 1, 0}, 0.7);
  for (const Vec3& p : src) dst.push_back(R.rotate(p));
  const SimilarityTransform s = umeyama_align(src, dst);
  EXPECT_LT(rotation_angle_between(s.rotation, R), 1e-9);
}

TEST(Umeyama, DegenerateInputs) {
  const std::vector<Vec3> line{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  EXPECT_THROW(umeyama_align(line, line), DegenerateInput);
  const std::vector<Vec3> two{{0, 0, 0}, {1, 0, 0}};
  EXPECT_THROW(umeyama_align(two, two), DegenerateInput);
  const std::vector<Vec3> three{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  EXPECT_THROW(umeyama_align(three, two), DegenerateInput);
}

TEST(RotationAngleBetween, Examples) {
  Rng rng(2);
  const Rotation a = rng.rotation();
  EXPECT_NEAR(rotation_angle_between(a, a), 0.0, 1e-12);
  EXPECT_NEAR(rotation_angle_between(Rotation::identity(), rot_z(90)), M_PI / 2, 1e-12);
  for (int i = 0; i < 10; ++i) {
    const Rotation half = Rotation::from_axis_angle(rng.unit_vector(), M_PI);
    EXPECT_NEAR(rotation_angle_between(Rotation::identity(), half), M_PI, 1e-9);
  }
}

TEST(RotationAngleBetween, SymmetricAndBounded) {
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const Rotation a = rng.rotation(), b = rng.rotation();
    const double ab = rotation_angle_between(a, b);
    EXPECT_NEAR(ab, rotation_angle_between(b, a), 1e-12);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, M_PI);
    // Oracle: trace formula on the relative matrix.
    const Mat3 rel = a.matrix().transpose() * b.matrix();
    const double oracle = std::acos(std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0));
    EXPECT_NEAR(ab, oracle, 1e-6);
  }
}

TEST(DirectionAngle, Examples) {
  const Vec3 u(0.6, 0.8, 0.0);
  EXPECT_NEAR(direction_angle(u, u), 0.0, 1e-12);
  EXPECT_NEAR(direction_angle(u, -u), M_PI, 1e-12);
  EXPECT_NEAR(direction_angle(Vec3::UnitX(), Vec3::UnitZ()), M_PI / 2, 1e-12);
  EXPECT_THROW(direction_angle(Vec3(2, 0, 0), Vec3::UnitX()), NotUnit);
}

TEST(DirectionAngle, AccurateForTinyAngles) {
  const double eps = 1e-8;
  const Vec3 v(std::cos(eps), std::sin(eps), 0.0);
  EXPECT_NEAR(direction_angle(Vec3::UnitX(), v), eps, 1e-14);
}

TEST(AnyPerpendicular, UnitAndOrthogonal) {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const Vec3 v = rng.unit_vector();
    const Vec3 p = any_perpendicular(v);
    EXPECT_NEAR(p.norm(), 1.0, 1e-12);
    EXPECT_NEAR(p.dot(v), 0.0, 1e-12);
  }
  EXPECT_NEAR(any_perpendicular(Vec3::UnitX()).dot(Vec3::UnitX()), 0.0, 1e-15);
}

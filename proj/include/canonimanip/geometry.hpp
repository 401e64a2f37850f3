#pragma once

// Rigid and similarity transforms.
//
// Conventions, used everywhere in the library:
//   * quaternions are (w, x, y, z), right-handed, and describe active
//     rotations (a rotation moves vectors, it does not re-express them);
//   * the stored quaternion is canonical: unit norm and w >= 0 (for w == 0 the
//     first non-zero of x, y, z is positive);
//   * compose_poses(a, b) applies b first, then a.

#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace canonimanip {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

class Rotation {
 public:
  Rotation() = default;  // identity

  static Rotation identity() { return {}; }
  // Normalizes and canonicalizes. Throws NotUnit on a zero quaternion.
  static Rotation from_wxyz(double w, double x, double y, double z);
  static Rotation from_quaternion(const Eigen::Quaterniond& q);
  // `axis` need not be unit; a zero axis yields the identity.
  static Rotation from_axis_angle(const Vec3& axis, double angle_rad);
  // Rotation vector: direction is the axis, norm the angle.
  static Rotation from_rotation_vector(const Vec3& rv);
  // Projects onto SO(3) first, so slightly non-orthogonal input is accepted.
  static Rotation from_matrix(const Mat3& m);
  // Roll about x, then pitch about y, then yaw about z (R = Rz * Ry * Rx).
  static Rotation from_rpy(double roll, double pitch, double yaw);
  // Shortest rotation taking unit `from` onto unit `to`.
  static Rotation between(const Vec3& from, const Vec3& to);

  const Eigen::Quaterniond& quaternion() const noexcept { return q_; }
  double w() const noexcept { return q_.w(); }
  double x() const noexcept { return q_.x(); }
  double y() const noexcept { return q_.y(); }
  double z() const noexcept { return q_.z(); }

  Mat3 matrix() const { return q_.toRotationMatrix(); }
  Vec3 rotate(const Vec3& v) const { return q_ * v; }
  Rotation inverse() const { return from_quaternion(q_.conjugate()); }
  // Rotation vector (axis * angle) with angle in [0, pi].
  Vec3 log() const;
  double angle() const;

  friend Rotation operator*(const Rotation& a, const Rotation& b) {
    return from_quaternion(a.q_ * b.q_);
  }

 private:
  explicit Rotation(const Eigen::Quaterniond& q) : q_(q) {}
  Eigen::Quaterniond q_ = Eigen::Quaterniond::Identity();
};

// Spherical interpolation along the geodesic, fraction in [0, 1].
Rotation slerp(const Rotation& a, const Rotation& b, double fraction);

struct Pose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }
  static Pose from_translation(const Vec3& t) { return {Rotation::identity(), t}; }
};

struct SimilarityTransform {
  double scale = 1.0;
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return scale * rotation.rotate(p) + translation; }
};

// se(3) element. `angular` is a rotation vector.
struct Twist {
  Vec3 linear = Vec3::Zero();
  Vec3 angular = Vec3::Zero();
};

Vec3 transform_point(const Pose& pose, const Vec3& point);
Pose compose_poses(const Pose& a, const Pose& b);
Pose inverse(const Pose& pose);
inline Pose operator*(const Pose& a, const Pose& b) { return compose_poses(a, b); }

// SE(3) exponential map.
Pose exp_twist(const Twist& xi);

// Least-squares similarity {s, R, t} minimizing sum |dst_i - (s R src_i + t)|^2
// over corresponded point lists. R is proper (det +1). Throws DegenerateInput
// for fewer than 3 pairs, mismatched sizes, or a source set of rank < 2.
SimilarityTransform umeyama_align(std::span<const Vec3> src, std::span<const Vec3> dst);

// Geodesic distance on SO(3), in [0, pi].
double rotation_angle_between(const Rotation& a, const Rotation& b);

// Angle between two unit vectors, in [0, pi]. Throws NotUnit when either norm
// deviates from 1 by more than 1e-6.
double direction_angle(const Vec3& u, const Vec3& v);

// Unit vector check used across the library.
bool is_unit(const Vec3& v, double tol = 1e-6);

// Any unit vector orthogonal to unit `v`; deterministic.
Vec3 any_perpendicular(const Vec3& v);

}  // namespace canonimanip

#include "canonimanip/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "canonimanip/errors.hpp"

namespace canonimanip {

namespace {

Eigen::Quaterniond canonical(Eigen::Quaterniond q) {
  const double n = q.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw NotUnit("quaternion has zero or non-finite norm");
  // Already-unit input is kept bit for bit, so serialized poses read back unchanged.
  if (std::abs(n - 1.0) > 1e-15) q.coeffs() /= n;
  bool flip = q.w() < 0.0;
  if (q.w() == 0.0) {
    if (q.x() != 0.0) flip = q.x() < 0.0;
    else if (q.y() != 0.0) flip = q.y() < 0.0;
    else flip = q.z() < 0.0;
  }
  if (flip) q.coeffs() = -q.coeffs();
  return q;
}

}  // namespace

Rotation Rotation::from_wxyz(double w, double x, double y, double z) {
  return Rotation(canonical(Eigen::Quaterniond(w, x, y, z)));
}

Rotation Rotation::from_quaternion(const Eigen::Quaterniond& q) { return Rotation(canonical(q)); }

Rotation Rotation::from_axis_angle(const Vec3& axis, double angle_rad) {
  const double n = axis.norm();
  if (n == 0.0) return identity();
  return from_quaternion(Eigen::Quaterniond(Eigen::AngleAxisd(angle_rad, axis / n)));
}

Rotation Rotation::from_rotation_vector(const Vec3& rv) {
  const double theta = rv.norm();
  if (theta < 1e-12) {
    // First-order expansion keeps the map smooth through zero.
    return from_wxyz(1.0, 0.5 * rv.x(), 0.5 * rv.y(), 0.5 * rv.z());
  }
  return from_axis_angle(rv / theta, theta);
}

Rotation Rotation::from_matrix(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  const Mat3 r = svd.matrixU() * d * svd.matrixV().transpose();
  return from_quaternion(Eigen::Quaterniond(r));
}

Rotation Rotation::from_rpy(double roll, double pitch, double yaw) {
  return from_axis_angle(Vec3::UnitZ(), yaw) * from_axis_angle(Vec3::UnitY(), pitch) *
         from_axis_angle(Vec3::UnitX(), roll);
}

Rotation Rotation::between(const Vec3& from, const Vec3& to) {
  const Vec3 a = from.normalized();
  const Vec3 b = to.normalized();
  const double c = a.dot(b);
  if (c < -1.0 + 1e-12) return from_axis_angle(any_perpendicular(a), M_PI);
  const Vec3 axis = a.cross(b);
  return from_axis_angle(axis, std::atan2(axis.norm(), c));
}

Vec3 Rotation::log() const {
  const Vec3 v = q_.vec();
  const double s = v.norm();
  if (s < 1e-12) return 2.0 * v;
  const double angle = 2.0 * std::atan2(s, q_.w());
  return v * (angle / s);
}

double Rotation::angle() const { return 2.0 * std::atan2(q_.vec().norm(), std::abs(q_.w())); }

Rotation slerp(const Rotation& a, const Rotation& b, double fraction) {
  const Rotation rel = a.inverse() * b;
  return a * Rotation::from_rotation_vector(fraction * rel.log());
}

Vec3 transform_point(const Pose& pose, const Vec3& point) {
  return pose.rotation.rotate(point) + pose.translation;
}

Pose compose_poses(const Pose& a, const Pose& b) {
  return {a.rotation * b.rotation, a.rotation.rotate(b.translation) + a.translation};
}

Pose inverse(const Pose& pose) {
  const Rotation r_inv = pose.rotation.inverse();
  return {r_inv, -r_inv.rotate(pose.translation)};
}

Pose exp_twist(const Twist& xi) {
  const Vec3& w = xi.angular;
  const double theta = w.norm();
  Mat3 wx;
  wx << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  double b, c;
  if (theta < 1e-6) {
    const double t2 = theta * theta;
    b = 0.5 - t2 / 24.0;
    c = 1.0 / 6.0 - t2 / 120.0;
  } else {
    b = (1.0 - std::cos(theta)) / (theta * theta);
    c = (theta - std::sin(theta)) / (theta * theta * theta);
  }
  const Mat3 v = Mat3::Identity() + b * wx + c * wx * wx;
  return {Rotation::from_rotation_vector(w), v * xi.linear};
}

SimilarityTransform umeyama_align(std::span<const Vec3> src, std::span<const Vec3> dst) {
  if (src.size() != dst.size()) throw DegenerateInput("umeyama: source and target sizes differ");
  const std::size_t n = src.size();
  if (n < 3) throw DegenerateInput("umeyama: need at least 3 correspondences");

  Vec3 mu_src = Vec3::Zero();
  Vec3 mu_dst = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_src += src[i];
    mu_dst += dst[i];
  }
  mu_src /= static_cast<double>(n);
  mu_dst /= static_cast<double>(n);

  Mat3 cov_src = Mat3::Zero();
  Mat3 cross = Mat3::Zero();
  double var_src = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 a = src[i] - mu_src;
    const Vec3 b = dst[i] - mu_dst;
    cov_src += a * a.transpose();
    cross += b * a.transpose();
    var_src += a.squaredNorm();
  }
  cov_src /= static_cast<double>(n);
  cross /= static_cast<double>(n);
  var_src /= static_cast<double>(n);

  // Rank test on the source spread: reject coincident or collinear clouds.
  Eigen::JacobiSVD<Mat3> spread(cov_src);
  const Vec3 sv_src = spread.singularValues();
  if (!(sv_src(0) > 0.0) || sv_src(1) < 1e-12 * sv_src(0)) {
    throw DegenerateInput("umeyama: source points are coincident or collinear");
  }

  Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Vec3 s = Vec3::Ones();
  if (u.determinant() * v.determinant() < 0.0) s(2) = -1.0;

  const Mat3 r = u * s.asDiagonal() * v.transpose();
  const double scale = svd.singularValues().dot(s) / var_src;
  if (!(scale > 0.0)) throw DegenerateInput("umeyama: non-positive scale");

  SimilarityTransform out;
  out.scale = scale;
  out.rotation = Rotation::from_matrix(r);
  out.translation = mu_dst - scale * (r * mu_src);
  return out;
}

double rotation_angle_between(const Rotation& a, const Rotation& b) {
  return (a.inverse() * b).angle();
}

bool is_unit(const Vec3& v, double tol) { return std::abs(v.norm() - 1.0) <= tol; }

double direction_angle(const Vec3& u, const Vec3& v) {
  if (!is_unit(u) || !is_unit(v)) throw NotUnit("direction_angle: arguments must be unit vectors");
  // atan2 form: same value as acos(clamp(u.v)) with full precision near 0 and pi.
  return std::atan2(u.cross(v).norm(), std::clamp(u.dot(v), -1.0, 1.0));
}

Vec3 any_perpendicular(const Vec3& v) {
  Vec3 p = Vec3::UnitX() - v.x() * v;
  if (p.norm() < 1e-6) p = Vec3::UnitY() - v.y() * v;
  return p.normalized();
}

}  // namespace canonimanip

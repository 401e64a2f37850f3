#include "canonimanip/constraints.hpp"

#include <cmath>

#include "canonimanip/errors.hpp"

namespace canonimanip {

void SpatialConstraint::validate() const {
  if (!(target_distance >= 0.0)) throw InvalidArgument("constraint distance must be >= 0");
  if (!(weight_d > 0.0)) throw InvalidArgument("constraint distance weight must be > 0");
  if (target_angle) {
    if (!(*target_angle >= 0.0 && *target_angle <= M_PI)) {
      throw InvalidArgument("constraint angle must lie in [0, pi]");
    }
    if (!(weight_theta > 0.0)) throw InvalidArgument("constraint angle weight must be > 0");
  }
  if (!is_unit(active.primitive.direction) || !is_unit(passive.primitive.direction)) {
    throw NotUnit("constraint directions must be unit vectors");
  }
}

namespace {

struct RawErrors {
  double distance;  // signed
  double angle;     // signed, 0 without target
};

RawErrors raw_errors(const SpatialConstraint& c, const SceneObject& active, const SceneObject& passive) {
  const WorldPrimitive a = primitive_to_world(c.active.primitive, active);
  const WorldPrimitive p = primitive_to_world(c.passive.primitive, passive);
  RawErrors e{(a.point - p.point).norm() - c.target_distance, 0.0};
  if (c.target_angle) e.angle = direction_angle(a.direction, p.direction) - *c.target_angle;
  return e;
}

}  // namespace

ConstraintErrors constraint_errors(const SpatialConstraint& c, const SceneObject& active,
                                   const SceneObject& passive) {
  const RawErrors e = raw_errors(c, active, passive);
  return {std::abs(e.distance), std::abs(e.angle)};
}

double constraint_residual(const SpatialConstraint& c, const SceneObject& active,
                           const SceneObject& passive) {
  const RawErrors e = raw_errors(c, active, passive);
  double rho = c.weight_d * e.distance * e.distance;
  if (c.target_angle) rho += c.weight_theta * e.angle * e.angle;
  return rho;
}

double constraint_residual(const SpatialConstraint& c, const Scene& scene) {
  return constraint_residual(c, scene.at(c.active.object_id), scene.at(c.passive.object_id));
}

bool constraint_satisfied(const SpatialConstraint& c, const SceneObject& active,
                          const SceneObject& passive, const Tolerances& tol) {
  const ConstraintErrors e = constraint_errors(c, active, passive);
  return e.distance <= tol.distance && e.angle <= tol.angle;
}

bool constraint_satisfied(const SpatialConstraint& c, const Scene& scene, const Tolerances& tol) {
  return constraint_satisfied(c, scene.at(c.active.object_id), scene.at(c.passive.object_id), tol);
}

Pose satisfying_active_pose(const SpatialConstraint& c, const SceneObject& active,
                            const SceneObject& passive) {
  const WorldPrimitive a = primitive_to_world(c.active.primitive, active);
  const WorldPrimitive p = primitive_to_world(c.passive.primitive, passive);

  Rotation correction;
  if (c.target_angle) {
    // Among directions at the target angle from the passive direction, take
    // the one closest to where the active direction already points.
    Vec3 k = p.direction.cross(a.direction);
    if (k.norm() < 1e-9) k = any_perpendicular(p.direction);
    const Vec3 desired = Rotation::from_axis_angle(k, *c.target_angle).rotate(p.direction);
    correction = Rotation::between(a.direction, desired);
  }

  Pose out;
  out.rotation = correction * active.pose.rotation;
  const Vec3 target_point = p.point + c.target_distance * p.direction;
  out.translation = target_point - out.rotation.rotate(active.scale * c.active.primitive.point);
  return out;
}

}  // namespace canonimanip

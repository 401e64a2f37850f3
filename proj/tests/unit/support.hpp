#pragma once

#include <memory>
#include <string>
#include <vector>

#include "canonimanip/constraints.hpp"
#include "canonimanip/object_model.hpp"

namespace testing_support {

using namespace canonimanip;

inline std::shared_ptr<CanonicalObject> make_object(const std::string& id, std::vector<Vec3> points,
                                                    Vec3 extents = Vec3(0.1, 0.1, 0.1)) {
  auto o = std::make_shared<CanonicalObject>();
  o->id = id;
  o->category = id;
  o->points = std::move(points);
  o->extents = extents;
  return o;
}

inline SceneObject place(std::shared_ptr<CanonicalObject> o, const Pose& pose = {}, double scale = 1.0) {
  SceneObject s;
  s.object = std::move(o);
  s.pose = pose;
  s.scale = scale;
  return s;
}

inline SpatialConstraint make_constraint(const std::string& a, const Vec3& pa, const Vec3& va,
                                         const std::string& p, const Vec3& pp, const Vec3& vp, double d,
                                         std::optional<double> theta) {
  SpatialConstraint c;
  c.active = {a, {pa, va, "a"}};
  c.passive = {p, {pp, vp, "p"}};
  c.target_distance = d;
  c.target_angle = theta;
  return c;
}

inline constexpr double deg(double d) { return d * M_PI / 180.0; }

}  // namespace testing_support

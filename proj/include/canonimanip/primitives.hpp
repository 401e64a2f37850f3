#pragma once

#include <optional>
#include <string>
#include <vector>

#include "canonimanip/geometry.hpp"
#include "canonimanip/object_model.hpp"

namespace canonimanip {

// Interaction point and direction, both in the object's canonical frame.
struct InteractionPrimitive {
  Vec3 point = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();
  std::string label;
};

struct DirectionCandidateSet {
  std::vector<Vec3> directions;
  std::optional<std::vector<double>> scores;  // sorted descending when present
};

struct WorldPrimitive {
  Vec3 point;
  Vec3 direction;
};

inline constexpr double kDefaultConeHalfAngle = 15.0 * M_PI / 180.0;
inline constexpr int kDefaultRefineCount = 6;

// The six signed canonical axes in the default order +z, -z, +x, -x, +y, -y.
DirectionCandidateSet canonical_axis_candidates();

// Reorders `set` by the given scores (stable, descending). Throws
// InvalidArgument if the score count does not match.
DirectionCandidateSet order_by_scores(const DirectionCandidateSet& set, const std::vector<double>& scores);

// `count` directions on the cone of half angle `cone_half_angle` around unit
// `v`, at azimuths 2*pi*k/count. Azimuth 0 is the projection of +x onto the
// plane normal to v (+y when v is parallel to x). Throws NotUnit, and
// InvalidArgument for count < 1 or a half angle outside (0, pi/2).
DirectionCandidateSet refine_directions(const Vec3& v, int count = kDefaultRefineCount,
                                        double cone_half_angle = kDefaultConeHalfAngle);

// Only the object's pose and scale enter here: primitives are independent of
// any viewpoint.
WorldPrimitive primitive_to_world(const InteractionPrimitive& primitive, const SceneObject& obj);

}  // namespace canonimanip

#include "canonimanip/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "canonimanip/errors.hpp"

namespace canonimanip {

DirectionCandidateSet canonical_axis_candidates() {
  DirectionCandidateSet out;
  out.directions = {Vec3::UnitZ(), -Vec3::UnitZ(), Vec3::UnitX(),
                    -Vec3::UnitX(), Vec3::UnitY(), -Vec3::UnitY()};
  return out;
}

DirectionCandidateSet order_by_scores(const DirectionCandidateSet& set, const std::vector<double>& scores) {
  if (scores.size() != set.directions.size()) {
    throw InvalidArgument("expected " + std::to_string(set.directions.size()) + " candidate scores, got " +
                          std::to_string(scores.size()));
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  DirectionCandidateSet out;
  out.scores.emplace();
  for (std::size_t i : order) {
    out.directions.push_back(set.directions[i]);
    out.scores->push_back(scores[i]);
  }
  return out;
}

DirectionCandidateSet refine_directions(const Vec3& v, int count, double cone_half_angle) {
  if (!is_unit(v)) throw NotUnit("refine_directions: axis must be a unit vector");
  if (count < 1) throw InvalidArgument("refine_directions: count must be >= 1");
  if (!(cone_half_angle > 0.0 && cone_half_angle < M_PI / 2.0)) {
    throw InvalidArgument("refine_directions: cone half angle must be in (0, pi/2)");
  }
  const Vec3 axis = v.normalized();
  Vec3 e1 = Vec3::UnitX() - axis.x() * axis;
  if (e1.norm() < 1e-9) e1 = Vec3::UnitY() - axis.y() * axis;
  e1.normalize();
  const Vec3 e2 = axis.cross(e1);

  const double c = std::cos(cone_half_angle);
  const double s = std::sin(cone_half_angle);
  DirectionCandidateSet out;
  out.directions.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double phi = 2.0 * M_PI * k / count;
    out.directions.push_back((c * axis + s * (std::cos(phi) * e1 + std::sin(phi) * e2)).normalized());
  }
  return out;
}

WorldPrimitive primitive_to_world(const InteractionPrimitive& primitive, const SceneObject& obj) {
  return {obj.to_world(primitive.point), obj.pose.rotation.rotate(primitive.direction).normalized()};
}

}  // namespace canonimanip

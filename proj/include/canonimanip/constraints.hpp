#pragma once

#include <optional>
#include <string>
#include <vector>

#include "canonimanip/object_model.hpp"
#include "canonimanip/primitives.hpp"

namespace canonimanip {

struct PrimitiveRef {
  std::string object_id;
  InteractionPrimitive primitive;
};

inline constexpr double kDefaultWeightDistance = 100.0;
inline constexpr double kDefaultWeightAngle = 1.0;
inline constexpr double kDefaultTolDistance = 0.005;
inline constexpr double kDefaultTolAngle = 5.0 * M_PI / 180.0;

// Target relation between an active and a passive primitive: their world
// points `target_distance` apart and their world directions `target_angle`
// apart. Without a target angle the angular term is dropped entirely.
struct SpatialConstraint {
  PrimitiveRef active;
  PrimitiveRef passive;
  double target_distance = 0.0;
  std::optional<double> target_angle;
  double weight_d = kDefaultWeightDistance;
  double weight_theta = kDefaultWeightAngle;

  // Throws InvalidArgument when d < 0, theta outside [0, pi], or a used
  // weight is not positive.
  void validate() const;
};

using CandidateList = std::vector<SpatialConstraint>;

struct Tolerances {
  double distance = kDefaultTolDistance;
  double angle = kDefaultTolAngle;
};

struct ConstraintErrors {
  double distance = 0.0;  // | |p_a - p_p| - d |
  double angle = 0.0;     // | angle(v_a, v_p) - theta |, 0 without an angle target
};

ConstraintErrors constraint_errors(const SpatialConstraint& c, const SceneObject& active,
                                   const SceneObject& passive);

// rho = w_d (|p_a - p_p| - d)^2 + w_theta (angle(v_a, v_p) - theta)^2.
double constraint_residual(const SpatialConstraint& c, const SceneObject& active,
                           const SceneObject& passive);
// Resolves both ids in `scene`; throws UnknownObject.
double constraint_residual(const SpatialConstraint& c, const Scene& scene);

bool constraint_satisfied(const SpatialConstraint& c, const SceneObject& active,
                          const SceneObject& passive, const Tolerances& tol = {});
bool constraint_satisfied(const SpatialConstraint& c, const Scene& scene, const Tolerances& tol = {});

// A pose for the active object at which `c` holds exactly, found by the
// smallest rotation that brings the active world direction to the target
// angle from the passive direction, followed by the translation that puts the
// active point `d` along the passive direction from the passive point.
Pose satisfying_active_pose(const SpatialConstraint& c, const SceneObject& active,
                            const SceneObject& passive);

}  // namespace canonimanip

#pragma once

#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "canonimanip/geometry.hpp"

namespace canonimanip {

enum class Visibility { VisibleTangible, InvisibleIntangible };

// An object described in its own canonical frame.
struct CanonicalObject {
  std::string id;
  std::string category;
  std::vector<Vec3> points;
  Vec3 extents = Vec3::Zero();  // half sizes along the canonical axes
  std::map<std::string, Vec3> named_points;
  std::map<std::string, Visibility> point_visibility;
  // Ground-truth functional direction (canonical frame). Only the geometric
  // checker and the benchmarks read it; planning never does.
  std::optional<Vec3> functional_axis;

  // Largest |p| over `points`, used for distance culling.
  double bounding_radius() const;
  // Throws InvalidArgument if `points` is empty or a named point lies outside
  // twice the extents.
  void validate() const;
  // Throws MissingNamedPoint.
  const Vec3& named_point(const std::string& label) const;
};

struct SceneObject {
  std::shared_ptr<const CanonicalObject> object;
  Pose pose;  // canonical -> world
  double scale = 1.0;
  bool is_static = false;

  const std::string& id() const { return object->id; }
  Vec3 to_world(const Vec3& canonical_point) const {
    return transform_point(pose, scale * canonical_point);
  }
  std::vector<Vec3> world_points() const;
};

struct Scene {
  std::vector<SceneObject> objects;
  std::vector<Vec3> gripper_keypoints;  // end-effector frame

  // Throws UnknownObject.
  const SceneObject& at(const std::string& id) const;
  SceneObject& at(const std::string& id);
  const SceneObject* find(const std::string& id) const;
  bool contains(const std::string& id) const { return find(id) != nullptr; }
  // Throws InvalidArgument on duplicate ids or non-positive scale.
  void validate() const;
};

struct GraspCandidate {
  Pose pose;  // end-effector pose in world
  double width = 0.0;
  double score = 0.0;
};

struct Canonicalization {
  std::vector<Vec3> cloud;            // observed points expressed in the canonical frame
  SimilarityTransform transform;      // reference points -> cloud
};

// Brings an observed world cloud into the canonical frame using the estimated
// object pose. When `reference` (corresponded canonical points) is given, the
// residual similarity between `reference` and the canonical cloud is recovered
// with Umeyama; otherwise the transform is the identity.
Canonicalization canonicalize_observation(std::span<const Vec3> observed, const Pose& estimated_pose,
                                          std::optional<std::span<const Vec3>> reference = std::nullopt);

struct ObstacleDistance {
  std::string id;
  // Exact minimum keypoint-to-point distance, or a lower bound when the
  // object was culled against `cutoff`.
  double distance = std::numeric_limits<double>::infinity();
};

// Per-object distances from the world-space gripper keypoints at `ee_pose` to
// every scene object except `held_id`. Objects whose bounding sphere is
// farther than `cutoff` report a lower bound >= cutoff instead of the exact
// value. Throws UnknownObject if `held_id` is not in the scene.
std::vector<ObstacleDistance> obstacle_distances(
    const Pose& ee_pose, const Scene& scene, const std::optional<std::string>& held_id,
    double cutoff = std::numeric_limits<double>::infinity());

// +infinity when there are no obstacles.
double min_obstacle_distance(const Pose& ee_pose, const Scene& scene,
                             const std::optional<std::string>& held_id);

inline constexpr double kDefaultHeatmapSigma = 0.02;

// Superimposed isotropic Gaussians, one per grasp point, evaluated at each
// query point. Unnormalized: each Gaussian peaks at 1.
std::vector<double> grasp_heatmap_weights(std::span<const Vec3> grasp_points,
                                          std::span<const Vec3> query_points, double sigma);

// Index of the candidate maximizing score * heatmap weight at the candidate's
// contact point (its translation mapped into the object's canonical frame).
// Ties go to the higher raw score, then the lower index. Throws EmptyCandidates.
std::size_t select_grasp_index(std::span<const GraspCandidate> candidates,
                               std::span<const Vec3> grasp_points, const Pose& object_pose,
                               double sigma = kDefaultHeatmapSigma);
GraspCandidate select_grasp(std::span<const GraspCandidate> candidates,
                            std::span<const Vec3> grasp_points, const Pose& object_pose,
                            double sigma = kDefaultHeatmapSigma);

}  // namespace canonimanip

#include "canonimanip/object_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "canonimanip/errors.hpp"

namespace canonimanip {

double CanonicalObject::bounding_radius() const {
  double r = 0.0;
  for (const Vec3& p : points) r = std::max(r, p.norm());
  return r;
}

void CanonicalObject::validate() const {
  if (points.empty()) throw InvalidArgument("object '" + id + "' has no points");
  for (const auto& [label, p] : named_points) {
    for (int k = 0; k < 3; ++k) {
      if (std::abs(p(k)) > 2.0 * extents(k) + 1e-12) {
        throw InvalidArgument("object '" + id + "': named point '" + label +
                              "' lies outside twice the extents");
      }
    }
  }
  if (functional_axis && !is_unit(*functional_axis)) {
    throw InvalidArgument("object '" + id + "': functional axis must be a unit vector");
  }
}

const Vec3& CanonicalObject::named_point(const std::string& label) const {
  auto it = named_points.find(label);
  if (it == named_points.end()) throw MissingNamedPoint(id, label);
  return it->second;
}

std::vector<Vec3> SceneObject::world_points() const {
  std::vector<Vec3> out;
  out.reserve(object->points.size());
  for (const Vec3& p : object->points) out.push_back(to_world(p));
  return out;
}

const SceneObject* Scene::find(const std::string& id) const {
  for (const SceneObject& o : objects) {
    if (o.id() == id) return &o;
  }
  return nullptr;
}

const SceneObject& Scene::at(const std::string& id) const {
  const SceneObject* o = find(id);
  if (o == nullptr) throw UnknownObject(id);
  return *o;
}

SceneObject& Scene::at(const std::string& id) {
  for (SceneObject& o : objects) {
    if (o.id() == id) return o;
  }
  throw UnknownObject(id);
}

void Scene::validate() const {
  std::set<std::string> seen;
  for (const SceneObject& o : objects) {
    if (!o.object) throw InvalidArgument("scene object without a canonical description");
    if (!seen.insert(o.id()).second) throw InvalidArgument("duplicate object id '" + o.id() + "'");
    if (!(o.scale > 0.0)) throw InvalidArgument("object '" + o.id() + "' has non-positive scale");
    o.object->validate();
  }
}

Canonicalization canonicalize_observation(std::span<const Vec3> observed, const Pose& estimated_pose,
                                          std::optional<std::span<const Vec3>> reference) {
  if (observed.empty()) throw InvalidArgument("canonicalize_observation: empty observation");
  Canonicalization out;
  const Pose to_canonical = inverse(estimated_pose);
  out.cloud.reserve(observed.size());
  for (const Vec3& p : observed) out.cloud.push_back(transform_point(to_canonical, p));
  if (reference) out.transform = umeyama_align(*reference, out.cloud);
  return out;
}

std::vector<ObstacleDistance> obstacle_distances(const Pose& ee_pose, const Scene& scene,
                                                 const std::optional<std::string>& held_id,
                                                 double cutoff) {
  if (held_id && !scene.contains(*held_id)) throw UnknownObject(*held_id);

  std::vector<Vec3> keypoints;
  keypoints.reserve(scene.gripper_keypoints.size());
  for (const Vec3& k : scene.gripper_keypoints) keypoints.push_back(transform_point(ee_pose, k));

  std::vector<ObstacleDistance> out;
  for (const SceneObject& obj : scene.objects) {
    if (held_id && obj.id() == *held_id) continue;
    ObstacleDistance d{obj.id()};
    const double radius = obj.scale * obj.object->bounding_radius();
    double lower = std::numeric_limits<double>::infinity();
    for (const Vec3& k : keypoints) {
      lower = std::min(lower, (k - obj.pose.translation).norm() - radius);
    }
    if (lower >= cutoff) {
      d.distance = lower;
      out.push_back(d);
      continue;
    }
    // Work in the object's canonical frame: one inverse transform per keypoint
    // instead of one forward transform per point.
    const Pose to_canonical = inverse(obj.pose);
    double best_sq = std::numeric_limits<double>::infinity();
    for (const Vec3& k : keypoints) {
      const Vec3 kc = transform_point(to_canonical, k) / obj.scale;
      for (const Vec3& p : obj.object->points) best_sq = std::min(best_sq, (kc - p).squaredNorm());
    }
    d.distance = obj.scale * std::sqrt(best_sq);
    out.push_back(d);
  }
  return out;
}

double min_obstacle_distance(const Pose& ee_pose, const Scene& scene,
                             const std::optional<std::string>& held_id) {
  if (scene.gripper_keypoints.empty()) throw InvalidArgument("scene has no gripper keypoints");
  double best = std::numeric_limits<double>::infinity();
  for (const ObstacleDistance& d : obstacle_distances(ee_pose, scene, held_id)) {
    best = std::min(best, d.distance);
  }
  return best;
}

std::vector<double> grasp_heatmap_weights(std::span<const Vec3> grasp_points,
                                          std::span<const Vec3> query_points, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("heatmap sigma must be positive");
  if (grasp_points.empty()) throw InvalidArgument("heatmap needs at least one grasp point");
  const double inv = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> out;
  out.reserve(query_points.size());
  for (const Vec3& q : query_points) {
    double w = 0.0;
    for (const Vec3& g : grasp_points) w += std::exp(-(q - g).squaredNorm() * inv);
    out.push_back(w);
  }
  return out;
}

std::size_t select_grasp_index(std::span<const GraspCandidate> candidates,
                               std::span<const Vec3> grasp_points, const Pose& object_pose,
                               double sigma) {
  if (candidates.empty()) throw EmptyCandidates();
  const Pose to_canonical = inverse(object_pose);
  std::vector<Vec3> contacts;
  contacts.reserve(candidates.size());
  for (const GraspCandidate& c : candidates) {
    contacts.push_back(transform_point(to_canonical, c.pose.translation));
  }
  const std::vector<double> weights = grasp_heatmap_weights(grasp_points, contacts, sigma);

  std::size_t best = 0;
  double best_value = candidates[0].score * weights[0];
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double value = candidates[i].score * weights[i];
    if (value > best_value || (value == best_value && candidates[i].score > candidates[best].score)) {
      best = i;
      best_value = value;
    }
  }
  return best;
}

GraspCandidate select_grasp(std::span<const GraspCandidate> candidates,
                            std::span<const Vec3> grasp_points, const Pose& object_pose,
                            double sigma) {
  return candidates[select_grasp_index(candidates, grasp_points, object_pose, sigma)];
}

}  // namespace canonimanip

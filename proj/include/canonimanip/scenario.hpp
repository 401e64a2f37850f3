#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "canonimanip/executor.hpp"
#include "canonimanip/json_io.hpp"
#include "canonimanip/planning.hpp"
#include "canonimanip/render.hpp"

namespace canonimanip {

struct SceneDocument {
  Scene scene;
  Pose ee_start;
  json document;  // as parsed, for hashing
};

// Scene file: objects (explicit points or a generated shape, named points
// with visibility, pose, scale, static flag, functional axis), gripper
// keypoints and the start end-effector pose. Unknown fields are rejected
// with their location.
SceneDocument parse_scene(std::string_view text, const std::string& file = "scene");
SceneDocument load_scene_file(const std::string& path);

struct TaskDocument {
  Task task;
  json document;
};

TaskDocument parse_task(std::string_view text, const Scene& scene, const std::string& file = "task");
TaskDocument load_task_file(const std::string& path, const Scene& scene);

std::string scene_hash(const json& scene_doc);
std::string scenario_hash(const json& scene_doc, const json& task_doc);

// Surface samples of simple solids, in the canonical frame.
std::vector<Vec3> box_surface_points(const Vec3& half_extents, int per_edge);
std::vector<Vec3> cylinder_surface_points(double radius, double height, int rings, int segments);

struct PlanDocument {
  std::string scene_hash;
  std::string scenario_hash;
  std::string instruction;
  std::vector<StagePlan> stages;
  json camera;  // metadata only
};

json plan_to_json(const PlanDocument& plan);
// Rebuilds the stages against `scene` (object ids must resolve).
PlanDocument plan_from_json(const json& j, const Scene& scene, const std::string& file = "plan");

json constraint_to_json(const SpatialConstraint& c);
SpatialConstraint constraint_from_json(const json& j, const std::string& pointer, const std::string& file);

// {"disturbances": [{"at_time_s": t, "object": id, "delta": pose}, ...]}
std::vector<Disturbance> parse_disturbances(std::string_view text, const std::string& file = "disturbances");
std::vector<Disturbance> load_disturbance_file(const std::string& path);

json camera_to_json(const CameraSpec& cam);

// Default plan camera: orbit around the scene's centroid.
CameraSpec scene_camera(const Scene& scene, double azimuth_deg, double elevation_deg = 35.0,
                        double distance = 0.9);

// Renders the candidate with its active object moved where the candidate
// holds (satisfying_active_pose), grid on.
RenderedImage render_candidate(const Scene& scene, const SpatialConstraint& c, const CameraSpec& cam);

}  // namespace canonimanip

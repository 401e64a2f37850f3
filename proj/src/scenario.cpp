#include "canonimanip/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "canonimanip/errors.hpp"
#include "canonimanip/optimizer.hpp"

namespace canonimanip {

namespace {

constexpr double kDeg = M_PI / 180.0;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Vec3> vec3_list(const json& j, const std::string& pointer, const std::string& file) {
  if (!j.is_array()) throw ParseError(file, 0, pointer, "expected an array of points");
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(json_vec3(j[i], pointer + "/" + std::to_string(i), file));
  return out;
}

int positive_int(ObjectReader& r, const std::string& key, int fallback) {
  const json* v = r.optional(key);
  if (!v) return fallback;
  if (!v->is_number_integer() || v->get<long long>() < 1) r.fail(r.child(key), "expected a positive integer");
  return v->get<int>();
}

std::vector<Vec3> shape_points(ObjectReader& r) {
  const std::string type = r.string("type");
  if (type == "box") {
    const Vec3 h = r.vec3("half_extents");
    if ((h.array() <= 0.0).any()) r.fail(r.child("half_extents"), "half extents must be positive");
    const int n = positive_int(r, "per_edge", 6);
    r.finish();
    return box_surface_points(h, n);
  }
  if (type == "cylinder") {
    const double radius = r.number("radius");
    const double height = r.number("height");
    if (!(radius > 0.0) || !(height > 0.0)) r.fail(r.pointer(), "radius and height must be positive");
    const int rings = positive_int(r, "rings", 5);
    const int segments = positive_int(r, "segments", 16);
    r.finish();
    return cylinder_surface_points(radius, height, rings, segments);
  }
  r.fail(r.child("type"), "unknown shape type '" + type + "'");
}

std::shared_ptr<CanonicalObject> parse_object(ObjectReader& r) {
  auto obj = std::make_shared<CanonicalObject>();
  obj->id = r.string("id");
  obj->category = r.has("category") ? r.string("category") : obj->id;

  const bool has_points = r.has("points");
  const bool has_shape = r.has("shape");
  if (has_points == has_shape) r.fail(r.pointer(), "give exactly one of 'points' or 'shape'");
  if (has_points) {
    obj->points = vec3_list(r.required("points"), r.child("points"), r.file());
  } else {
    ObjectReader shape = r.object("shape");
    obj->points = shape_points(shape);
  }
  if (obj->points.empty()) r.fail(r.child("points"), "an object needs at least one point");

  if (r.has("extents")) {
    obj->extents = r.vec3("extents");
  } else {
    for (const Vec3& p : obj->points) obj->extents = obj->extents.cwiseMax(p.cwiseAbs());
  }

  if (const json* named = r.optional("named_points")) {
    if (!named->is_object()) r.fail(r.child("named_points"), "expected an object of labels");
    for (const auto& [label, value] : named->items()) {
      const std::string ptr = r.child("named_points") + "/" + label;
      if (value.is_array()) {
        obj->named_points[label] = json_vec3(value, ptr, r.file());
        obj->point_visibility[label] = Visibility::VisibleTangible;
        continue;
      }
      ObjectReader np(value, ptr, r.file());
      obj->named_points[label] = np.vec3("p");
      obj->point_visibility[label] =
          np.boolean_or("visible", true) ? Visibility::VisibleTangible : Visibility::InvisibleIntangible;
      np.finish();
    }
  }
  if (r.has("functional_axis")) {
    const Vec3 a = r.vec3("functional_axis");
    if (a.norm() < 1e-9) r.fail(r.child("functional_axis"), "axis must be non-zero");
    obj->functional_axis = a.normalized();
  }
  try {
    obj->validate();
  } catch (const InvalidArgument& e) {
    r.fail(r.pointer(), e.what());
  }
  return obj;
}

json primitive_ref_to_json(const PrimitiveRef& p) {
  return {{"object", p.object_id},
          {"label", p.primitive.label},
          {"point", to_json(p.primitive.point)},
          {"direction", to_json(p.primitive.direction)}};
}

PrimitiveRef primitive_ref_from_json(const json& j, const std::string& pointer, const std::string& file) {
  ObjectReader r(j, pointer, file);
  PrimitiveRef p;
  p.object_id = r.string("object");
  p.primitive.label = r.string("label");
  p.primitive.point = r.vec3("point");
  p.primitive.direction = r.vec3("direction");
  if (!is_unit(p.primitive.direction)) r.fail(r.child("direction"), "direction must be a unit vector");
  r.finish();
  return p;
}

}  // namespace

std::vector<Vec3> box_surface_points(const Vec3& h, int per_edge) {
  if (per_edge < 2) per_edge = 2;
  std::vector<Vec3> out;
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    for (int sign = -1; sign <= 1; sign += 2) {
      for (int i = 0; i < per_edge; ++i) {
        for (int j = 0; j < per_edge; ++j) {
          Vec3 p;
          p(axis) = sign * h(axis);
          p(u) = -h(u) + 2.0 * h(u) * i / (per_edge - 1);
          p(v) = -h(v) + 2.0 * h(v) * j / (per_edge - 1);
          out.push_back(p);
        }
      }
    }
  }
  return out;
}

std::vector<Vec3> cylinder_surface_points(double radius, double height, int rings, int segments) {
  if (rings < 2) rings = 2;
  if (segments < 3) segments = 3;
  std::vector<Vec3> out;
  for (int k = 0; k < rings; ++k) {
    const double z = -0.5 * height + height * k / (rings - 1);
    for (int s = 0; s < segments; ++s) {
      const double a = 2.0 * M_PI * s / segments;
      out.emplace_back(radius * std::cos(a), radius * std::sin(a), z);
    }
  }
  // Bottom disc, so the object has a floor.
  for (int s = 0; s < segments; ++s) {
    const double a = 2.0 * M_PI * s / segments;
    out.emplace_back(0.5 * radius * std::cos(a), 0.5 * radius * std::sin(a), -0.5 * height);
  }
  out.emplace_back(0.0, 0.0, -0.5 * height);
  return out;
}

SceneDocument parse_scene(std::string_view text, const std::string& file) {
  SceneDocument doc;
  doc.document = parse_json_document(text, file);
  ObjectReader r(doc.document, "", file);

  const json& objects = r.required("objects");
  if (!objects.is_array() || objects.empty()) r.fail("/objects", "expected a non-empty array of objects");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    ObjectReader o(objects[i], "/objects/" + std::to_string(i), file);
    SceneObject so;
    so.object = parse_object(o);
    if (o.has("pose")) so.pose = o.pose("pose");
    so.scale = o.number_or("scale", 1.0);
    if (!(so.scale > 0.0)) o.fail(o.child("scale"), "scale must be positive");
    so.is_static = o.boolean_or("static", false);
    o.finish();
    if (so.id() == kGripperId) o.fail(o.child("id"), "the id 'gripper' is reserved");
    for (const SceneObject& prev : doc.scene.objects) {
      if (prev.id() == so.id()) o.fail(o.child("id"), "duplicate object id '" + so.id() + "'");
    }
    doc.scene.objects.push_back(std::move(so));
  }
  if (const json* kp = r.optional("gripper_keypoints")) {
    doc.scene.gripper_keypoints = vec3_list(*kp, "/gripper_keypoints", file);
  }
  doc.ee_start = Pose{Rotation::from_axis_angle(Vec3::UnitX(), M_PI), Vec3(0.0, 0.0, 0.5)};
  if (r.has("ee_start")) doc.ee_start = r.pose("ee_start");
  r.finish();
  return doc;
}

SceneDocument load_scene_file(const std::string& path) { return parse_scene(read_text(path), path); }

TaskDocument parse_task(std::string_view text, const Scene& scene, const std::string& file) {
  TaskDocument doc;
  doc.task = load_task(text, scene, file);
  doc.document = parse_json_document(text, file);
  return doc;
}

TaskDocument load_task_file(const std::string& path, const Scene& scene) {
  return parse_task(read_text(path), scene, path);
}

std::string scene_hash(const json& scene_doc) { return fnv1a_hex(scene_doc.dump()); }

std::string scenario_hash(const json& scene_doc, const json& task_doc) {
  return fnv1a_hex(scene_doc.dump() + "\n" + task_doc.dump());
}

json constraint_to_json(const SpatialConstraint& c) {
  return {{"active", primitive_ref_to_json(c.active)},
          {"passive", primitive_ref_to_json(c.passive)},
          {"distance_m", c.target_distance},
          {"angle_deg", c.target_angle ? json(*c.target_angle / kDeg) : json(nullptr)},
          {"weight_d", c.weight_d},
          {"weight_theta", c.weight_theta}};
}

SpatialConstraint constraint_from_json(const json& j, const std::string& pointer, const std::string& file) {
  ObjectReader r(j, pointer, file);
  SpatialConstraint c;
  c.active = primitive_ref_from_json(r.required("active"), r.child("active"), file);
  c.passive = primitive_ref_from_json(r.required("passive"), r.child("passive"), file);
  c.target_distance = r.number("distance_m");
  const json& ang = r.required("angle_deg");
  if (!ang.is_null()) c.target_angle = json_number(ang, r.child("angle_deg"), file) * kDeg;
  c.weight_d = r.number_or("weight_d", kDefaultWeightDistance);
  c.weight_theta = r.number_or("weight_theta", kDefaultWeightAngle);
  r.finish();
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    r.fail(pointer, e.what());
  }
  return c;
}

json plan_to_json(const PlanDocument& plan) {
  json stages = json::array();
  for (const StagePlan& sp : plan.stages) {
    json s = {{"action", std::string(action_name(sp.stage.action))},
              {"active", sp.stage.active_id},
              {"passive", sp.stage.passive_id},
              {"param", sp.stage.action_param},
              {"checks_used", sp.checks_used},
              {"refined", sp.refined}};
    if (const auto* g = std::get_if<GraspChoice>(&sp.choice)) {
      s["grasp"] = {{"ee_in_object", to_json(g->ee_in_object)}, {"width", g->width}, {"score", g->score}};
    } else {
      s["constraint"] = constraint_to_json(std::get<SpatialConstraint>(sp.choice));
    }
    stages.push_back(std::move(s));
  }
  return {{"format", "canonimanip-plan/1"},
          {"scene_hash", plan.scene_hash},
          {"scenario_hash", plan.scenario_hash},
          {"instruction", plan.instruction},
          {"camera", plan.camera.is_null() ? json::object() : plan.camera},
          {"stages", std::move(stages)}};
}

PlanDocument plan_from_json(const json& j, const Scene& scene, const std::string& file) {
  ObjectReader r(j, "", file);
  if (r.string("format") != "canonimanip-plan/1") r.fail("/format", "unsupported plan format");
  PlanDocument plan;
  plan.scene_hash = r.string("scene_hash");
  plan.scenario_hash = r.string("scenario_hash");
  plan.instruction = r.string("instruction");
  if (const json* cam = r.optional("camera")) plan.camera = *cam;
  const json& stages = r.required("stages");
  if (!stages.is_array() || stages.empty()) r.fail("/stages", "expected a non-empty array");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const std::string ptr = "/stages/" + std::to_string(i);
    ObjectReader s(stages[i], ptr, file);
    StagePlan sp;
    const std::string action = s.string("action");
    const auto a = parse_action(action);
    if (!a) s.fail(s.child("action"), "unknown action '" + action + "'");
    sp.stage.action = *a;
    sp.stage.active_id = s.string("active");
    sp.stage.passive_id = s.string("passive");
    sp.stage.action_param = s.number_or("param", 0.0);
    const json* checks = s.optional("checks_used");
    if (checks && !checks->is_number_integer()) s.fail(s.child("checks_used"), "expected an integer");
    sp.checks_used = checks ? checks->get<int>() : 0;
    sp.refined = s.boolean_or("refined", false);
    if (sp.stage.active_id != kGripperId && !scene.contains(sp.stage.active_id)) throw UnknownObject(sp.stage.active_id);
    if (!scene.contains(sp.stage.passive_id)) throw UnknownObject(sp.stage.passive_id);

    if (sp.stage.action == Action::Grasp) {
      ObjectReader g = s.object("grasp");
      GraspChoice gc;
      gc.ee_in_object = g.pose("ee_in_object");
      gc.width = g.number_or("width", 0.04);
      gc.score = g.number_or("score", 1.0);
      g.finish();
      sp.choice = gc;
    } else {
      SpatialConstraint c = constraint_from_json(s.required("constraint"), s.child("constraint"), file);
      if (c.active.object_id != sp.stage.active_id || c.passive.object_id != sp.stage.passive_id) {
        s.fail(s.child("constraint"), "constraint objects do not match the stage");
      }
      sp.stage.active_point = c.active.primitive.label;
      sp.stage.passive_point = c.passive.primitive.label;
      sp.stage.passive_direction = c.passive.primitive.direction;
      sp.stage.target_distance = c.target_distance;
      sp.stage.target_angle = c.target_angle;
      sp.stage.weight_d = c.weight_d;
      sp.stage.weight_theta = c.weight_theta;
      sp.choice = c;
    }
    s.finish();
    plan.stages.push_back(std::move(sp));
  }
  r.finish();
  return plan;
}

std::vector<Disturbance> parse_disturbances(std::string_view text, const std::string& file) {
  const json j = parse_json_document(text, file);
  ObjectReader r(j, "", file);
  const json& list = r.required("disturbances");
  if (!list.is_array()) r.fail("/disturbances", "expected an array");
  std::vector<Disturbance> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    ObjectReader d(list[i], "/disturbances/" + std::to_string(i), file);
    Disturbance dist;
    dist.at_time = d.number("at_time_s");
    if (dist.at_time < 0.0) d.fail(d.child("at_time_s"), "time must be >= 0");
    dist.object_id = d.string("object");
    dist.delta = d.pose("delta");
    d.finish();
    out.push_back(std::move(dist));
  }
  r.finish();
  return out;
}

std::vector<Disturbance> load_disturbance_file(const std::string& path) {
  return parse_disturbances(read_text(path), path);
}

json camera_to_json(const CameraSpec& cam) {
  return {{"eye", to_json(cam.eye)},
          {"look_at", to_json(cam.look_at)},
          {"up", to_json(cam.up)},
          {"vertical_fov_deg", cam.vertical_fov / kDeg},
          {"width", cam.width},
          {"height", cam.height}};
}

CameraSpec scene_camera(const Scene& scene, double azimuth_deg, double elevation_deg, double distance) {
  Vec3 center = Vec3::Zero();
  for (const SceneObject& o : scene.objects) center += o.pose.translation;
  if (!scene.objects.empty()) center /= static_cast<double>(scene.objects.size());
  return orbit_camera(center, azimuth_deg * kDeg, elevation_deg * kDeg, distance);
}

RenderedImage render_candidate(const Scene& scene, const SpatialConstraint& c, const CameraSpec& cam) {
  const Pose at_target = satisfying_active_pose(c, scene.at(c.active.object_id), scene.at(c.passive.object_id));
  return render_interaction(scene, &c, at_target, cam, true);
}

}  // namespace canonimanip

#include "canonimanip/datagen.hpp"

#include <algorithm>
#include <fstream>

#include "canonimanip/checker.hpp"
#include "canonimanip/errors.hpp"

namespace canonimanip {

std::map<std::string, Pose> object_poses(const Scene& scene) {
  std::map<std::string, Pose> out;
  for (const SceneObject& o : scene.objects) out[o.id()] = o.pose;
  return out;
}

EpisodeRecord record_trace(const ExecutionTrace& trace, const EpisodeMeta& meta) {
  EpisodeRecord r;
  r.episode = meta.episode;
  r.seed = meta.seed;
  r.scenario_hash = meta.scenario_hash;
  r.success = meta.success;
  r.initial_objects = meta.initial_objects;
  r.disturbances = trace.disturbances;
  for (const TraceRecord& t : trace.records) {
    EpisodeStep s;
    s.t = t.time;
    s.ee_pose = t.ee_pose;
    s.gripper_open = t.gripper_open;
    s.held = t.held_id;
    for (const auto& [id, pose] : t.object_poses) s.objects[id] = pose;
    s.stage = t.stage_index;
    s.action = std::string(action_name(t.action));
    s.residual = t.residual;
    r.steps.push_back(std::move(s));
  }
  return r;
}

namespace {

json poses_to_json(const std::map<std::string, Pose>& poses) {
  json j = json::object();
  for (const auto& [id, p] : poses) j[id] = to_json(p);
  return j;
}

std::map<std::string, Pose> poses_from_json(const json& j, const std::string& pointer, const std::string& file) {
  if (!j.is_object()) throw ParseError(file, 0, pointer, "expected an object of poses");
  std::map<std::string, Pose> out;
  for (const auto& [id, p] : j.items()) out[id] = json_pose(p, pointer + "/" + id, file);
  return out;
}

double pose_deviation(const Pose& a, const Pose& b) {
  return std::max((a.translation - b.translation).norm(), rotation_angle_between(a.rotation, b.rotation));
}

}  // namespace

json episode_to_json(const EpisodeRecord& r) {
  json steps = json::array();
  for (const EpisodeStep& s : r.steps) {
    steps.push_back({{"t", s.t},
                     {"ee_pose", to_json(s.ee_pose)},
                     {"gripper_open", s.gripper_open},
                     {"held", s.held ? json(*s.held) : json(nullptr)},
                     {"objects", poses_to_json(s.objects)},
                     {"stage", s.stage},
                     {"action", s.action},
                     {"residual", s.residual}});
  }
  json dist = json::array();
  for (const AppliedDisturbance& d : r.disturbances) {
    dist.push_back({{"t", d.time},
                    {"at_time_s", d.disturbance.at_time},
                    {"object", d.disturbance.object_id},
                    {"delta", to_json(d.disturbance.delta)}});
  }
  return {{"episode", r.episode},
          {"seed", r.seed},
          {"scenario_hash", r.scenario_hash},
          {"outcome", r.success ? "success" : "failure"},
          {"initial_objects", poses_to_json(r.initial_objects)},
          {"disturbances", std::move(dist)},
          {"steps", std::move(steps)}};
}

EpisodeRecord episode_from_json(const json& j, const std::string& file) {
  ObjectReader r(j, "", file);
  EpisodeRecord e;
  const json& ep = r.required("episode");
  if (!ep.is_number_integer()) r.fail("/episode", "expected an integer");
  e.episode = ep.get<int>();
  const json& seed = r.required("seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) r.fail("/seed", "expected an integer");
  e.seed = seed.get<std::uint64_t>();
  e.scenario_hash = r.string("scenario_hash");
  const std::string outcome = r.string("outcome");
  if (outcome != "success" && outcome != "failure") r.fail("/outcome", "expected 'success' or 'failure'");
  e.success = outcome == "success";
  e.initial_objects = poses_from_json(r.required("initial_objects"), "/initial_objects", file);

  const json& dist = r.required("disturbances");
  if (!dist.is_array()) r.fail("/disturbances", "expected an array");
  for (std::size_t i = 0; i < dist.size(); ++i) {
    ObjectReader d(dist[i], "/disturbances/" + std::to_string(i), file);
    AppliedDisturbance a;
    a.time = d.number("t");
    a.disturbance.at_time = d.number("at_time_s");
    a.disturbance.object_id = d.string("object");
    a.disturbance.delta = d.pose("delta");
    d.finish();
    e.disturbances.push_back(std::move(a));
  }

  const json& steps = r.required("steps");
  if (!steps.is_array()) r.fail("/steps", "expected an array");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string ptr = "/steps/" + std::to_string(i);
    ObjectReader s(steps[i], ptr, file);
    EpisodeStep st;
    st.t = s.number("t");
    st.ee_pose = s.pose("ee_pose");
    const json& open = s.required("gripper_open");
    if (!open.is_boolean()) s.fail(s.child("gripper_open"), "expected a boolean");
    st.gripper_open = open.get<bool>();
    const json& held = s.required("held");
    if (!held.is_null()) st.held = json_string(held, s.child("held"), file);
    st.objects = poses_from_json(s.required("objects"), s.child("objects"), file);
    const json& stage = s.required("stage");
    if (!stage.is_number_integer()) s.fail(s.child("stage"), "expected an integer");
    st.stage = stage.get<int>();
    st.action = s.string("action");
    st.residual = s.number("residual");
    s.finish();
    if (!e.steps.empty() && !(st.t > e.steps.back().t)) s.fail(s.child("t"), "step times must increase");
    e.steps.push_back(std::move(st));
  }
  r.finish();
  return e;
}

double replay_deviation(const EpisodeRecord& r) {
  if (r.steps.empty()) return 0.0;
  std::map<std::string, Pose> poses = r.initial_objects;
  std::optional<std::string> held;
  Pose phi;
  std::size_t next_dist = 0;
  for (const EpisodeStep& s : r.steps) {
    while (next_dist < r.disturbances.size() && r.disturbances[next_dist].time <= s.t) {
      const Disturbance& d = r.disturbances[next_dist++].disturbance;
      poses.at(d.object_id) = compose_poses(d.delta, poses.at(d.object_id));
    }
    if (s.held != held) {
      held = s.held;
      if (held) phi = compose_poses(inverse(s.ee_pose), poses.at(*held));
    }
    if (held) poses.at(*held) = compose_poses(s.ee_pose, phi);
  }
  double dev = 0.0;
  for (const auto& [id, recorded] : r.steps.back().objects) dev = std::max(dev, pose_deviation(poses.at(id), recorded));
  return dev;
}

Scene jitter_scene(const Scene& scene, const Randomization& rand, Rng& rng) {
  Scene out = scene;
  for (SceneObject& o : out.objects) {
    if (o.is_static) continue;
    const double dx = rng.uniform(-rand.trans_xy, rand.trans_xy);
    const double dy = rng.uniform(-rand.trans_xy, rand.trans_xy);
    const double yaw = rng.uniform(-rand.yaw_deg, rand.yaw_deg) * M_PI / 180.0;
    o.pose.rotation = Rotation::from_axis_angle(Vec3::UnitZ(), yaw) * o.pose.rotation;
    o.pose.translation += Vec3(dx, dy, 0.0);
  }
  return out;
}

DatasetSummary generate_dataset(const SceneDocument& scene, const TaskDocument& task, int episodes,
                                const Randomization& rand, std::uint64_t seed, const std::filesystem::path& sink,
                                const DatasetOptions& opts) {
  if (episodes < 1) throw InvalidArgument("episodes must be >= 1");
  std::ofstream out(sink, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open dataset sink '" + sink.string() + "'");

  const std::string hash = scenario_hash(scene.document, task.document);
  DatasetSummary summary;
  for (int i = 0; i < episodes; ++i) {
    const std::uint64_t ep_seed = seed + static_cast<std::uint64_t>(i);
    Rng rng(ep_seed);
    const Scene jittered = jitter_scene(scene.scene, rand, rng);

    GeometricChecker checker(jittered);
    const CameraSpec cam = scene_camera(jittered, opts.camera_azimuth_deg);
    const CandidateRenderer renderer = [&](const SpatialConstraint& c, bool) {
      return render_candidate(jittered, c, cam);
    };
    const PlanResult plan = plan_task(task.task, jittered, checker, renderer, opts.rrc);

    SimWorld world;
    world.scene = jittered;
    world.ee_pose = scene.ee_start;
    ExecutorConfig exec = opts.exec;
    exec.tracker.seed = ep_seed;
    PlanExecution run;
    if (!plan.failed) run = execute_plan(world, plan.stages, ExecMode::ClosedLoop, exec);

    EpisodeMeta meta{i, ep_seed, hash, !plan.failed && run.success, object_poses(jittered)};
    const EpisodeRecord rec = record_trace(run.trace, meta);
    out << episode_to_json(rec).dump() << '\n';
    if (!out) throw IoError("failed writing dataset sink '" + sink.string() + "'");
    ++summary.attempted;
    if (meta.success) ++summary.succeeded;
  }
  out.flush();
  return summary;
}

}  // namespace canonimanip

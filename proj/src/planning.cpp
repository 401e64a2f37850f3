#include "canonimanip/planning.hpp"

#include <algorithm>
#include <cmath>

#include "canonimanip/errors.hpp"
#include "canonimanip/json_io.hpp"
#include "canonimanip/optimizer.hpp"

namespace canonimanip {

namespace {

constexpr double kDeg = M_PI / 180.0;

const char* kTcpLabel = "tcp";

Vec3 active_point(const Stage& stage, const Scene& scene) {
  if (stage.active_id == kGripperId && !scene.contains(kGripperId)) {
    if (stage.active_point != kTcpLabel) throw MissingNamedPoint(kGripperId, stage.active_point);
    return Vec3::Zero();
  }
  return scene.at(stage.active_id).object->named_point(stage.active_point);
}

void check_object(const Scene& scene, const std::string& id, bool gripper_ok) {
  if (gripper_ok && id == kGripperId) return;
  if (!scene.contains(id)) throw UnknownObject(id);
}

Stage parse_stage(ObjectReader& r, const Scene& scene) {
  Stage s;
  const std::string action = r.string("action");
  const auto a = parse_action(action);
  if (!a) r.fail(r.child("action"), "unknown action '" + action + "'");
  s.action = *a;

  if (s.action == Action::Grasp) {
    s.active_id = r.has("active") ? r.string("active") : std::string(kGripperId);
    s.passive_id = r.string("passive");
    if (s.active_id != kGripperId) r.fail(r.child("active"), "a grasp stage is driven by the gripper");
    check_object(scene, s.passive_id, false);
    if (const json* pts = r.optional("grasp_points")) {
      if (!pts->is_array()) r.fail(r.child("grasp_points"), "expected an array of labels");
      for (std::size_t i = 0; i < pts->size(); ++i) {
        s.grasp_points.push_back(json_string((*pts)[i], r.child("grasp_points") + "/" + std::to_string(i), r.file()));
      }
    }
    if (const json* cands = r.optional("grasp_candidates")) {
      if (!cands->is_array()) r.fail(r.child("grasp_candidates"), "expected an array");
      for (std::size_t i = 0; i < cands->size(); ++i) {
        ObjectReader c((*cands)[i], r.child("grasp_candidates") + "/" + std::to_string(i), r.file());
        GraspCandidate g;
        g.pose = c.pose("pose");
        g.width = c.number_or("width", 0.04);
        g.score = c.number_or("score", 1.0);
        c.finish();
        s.grasp_candidates.push_back(g);
      }
    }
    const CanonicalObject& obj = *scene.at(s.passive_id).object;
    for (const std::string& label : s.grasp_points) obj.named_point(label);
    r.finish();
    return s;
  }

  s.active_id = r.string("active");
  s.passive_id = r.string("passive");
  check_object(scene, s.active_id, true);
  check_object(scene, s.passive_id, false);
  s.active_point = r.string("active_point");
  s.passive_point = r.string("passive_point");
  if (r.has("passive_direction")) {
    const Vec3 d = r.vec3("passive_direction");
    if (d.norm() < 1e-9) r.fail(r.child("passive_direction"), "direction must be non-zero");
    s.passive_direction = d.normalized();
  }
  s.target_distance = r.number("distance_m");
  if (s.target_distance < 0.0) r.fail(r.child("distance_m"), "distance must be >= 0");
  if (const json* ang = r.optional("angle_deg")) {
    if (!ang->is_null()) {
      const double deg = json_number(*ang, r.child("angle_deg"), r.file());
      if (deg < 0.0 || deg > 180.0) r.fail(r.child("angle_deg"), "angle must be within [0, 180] degrees");
      s.target_angle = deg * kDeg;
    }
  }
  s.weight_d = r.number_or("weight_d", kDefaultWeightDistance);
  s.weight_theta = r.number_or("weight_theta", kDefaultWeightAngle);
  if (!(s.weight_d > 0.0)) r.fail(r.child("weight_d"), "weight must be positive");
  if (!(s.weight_theta > 0.0)) r.fail(r.child("weight_theta"), "weight must be positive");
  s.action_param = r.number_or("param", 0.0);
  if (const json* sc = r.optional("candidate_scores")) {
    if (!sc->is_array() || sc->size() != 6) r.fail(r.child("candidate_scores"), "expected 6 scores");
    std::vector<double> scores;
    for (std::size_t i = 0; i < sc->size(); ++i) {
      scores.push_back(json_number((*sc)[i], r.child("candidate_scores") + "/" + std::to_string(i), r.file()));
    }
    s.candidate_scores = std::move(scores);
  }
  r.finish();

  active_point(s, scene);
  scene.at(s.passive_id).object->named_point(s.passive_point);
  s.candidates = enumerate_candidates(s, scene);
  return s;
}

SpatialConstraint with_direction(SpatialConstraint c, const Vec3& d) {
  c.active.primitive.direction = d;
  return c;
}

CheckRequest make_request(const std::string& instruction, const Stage& stage, const SpatialConstraint& c,
                          RenderedImage image, bool refine_phase) {
  CheckRequest req;
  req.task_instruction = instruction;
  req.action = stage.action;
  req.active_id = c.active.object_id;
  req.passive_id = c.passive.object_id;
  req.candidate = c;
  req.image = std::move(image);
  req.refine_phase = refine_phase;
  return req;
}

}  // namespace

Task load_task(std::string_view document, const Scene& scene, const std::string& source_name) {
  const json j = parse_json_document(document, source_name);
  ObjectReader r(j, "", source_name);
  Task t;
  t.instruction = r.string("instruction");
  const json& stages = r.required("stages");
  if (!stages.is_array()) r.fail("/stages", "expected an array");
  if (stages.empty()) r.fail("/stages", "a task needs at least one stage");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    ObjectReader sr(stages[i], "/stages/" + std::to_string(i), source_name);
    t.stages.push_back(parse_stage(sr, scene));
  }
  r.finish();
  return t;
}

CandidateList enumerate_candidates(const Stage& stage, const Scene& scene) {
  if (stage.action == Action::Grasp) throw ActionStageMismatch("grasp stages select a grasp, not a constraint");
  SpatialConstraint base;
  base.active = {stage.active_id, {active_point(stage, scene), Vec3::UnitZ(), stage.active_point}};
  base.passive = {stage.passive_id,
                  {scene.at(stage.passive_id).object->named_point(stage.passive_point), stage.passive_direction,
                   stage.passive_point}};
  base.target_distance = stage.target_distance;
  base.target_angle = stage.target_angle;
  base.weight_d = stage.weight_d;
  base.weight_theta = stage.weight_theta;

  DirectionCandidateSet dirs = canonical_axis_candidates();
  if (stage.candidate_scores) dirs = order_by_scores(dirs, *stage.candidate_scores);

  CandidateList out;
  for (const Vec3& d : dirs.directions) out.push_back(with_direction(base, d));
  return out;
}

GraspChoice plan_grasp(const Stage& stage, const Scene& scene, double sigma) {
  if (stage.action != Action::Grasp) throw ActionStageMismatch("plan_grasp needs a grasp stage");
  const SceneObject& obj = scene.at(stage.passive_id);

  std::vector<Vec3> grasp_points;
  for (const std::string& label : stage.grasp_points) grasp_points.push_back(obj.scale * obj.object->named_point(label));

  std::vector<GraspCandidate> world;
  if (!stage.grasp_candidates.empty()) {
    for (const GraspCandidate& c : stage.grasp_candidates) {
      world.push_back({Pose{obj.pose.rotation * c.pose.rotation, obj.to_world(c.pose.translation)}, c.width, c.score});
    }
  } else {
    // Top-down samples, approach axis pointing at the table.
    const Rotation down = Rotation::from_axis_angle(Vec3::UnitX(), M_PI);
    for (const Vec3& p : obj.object->points) world.push_back({Pose{down, obj.to_world(p)}, 0.04, 1.0});
  }
  const std::size_t idx = select_grasp_index(world, grasp_points, obj.pose, sigma);
  return {inverse(obj.pose) * world[idx].pose, world[idx].width, world[idx].score};
}

RrcOutcome run_rrc(const std::string& task_instruction, const Stage& stage, const CandidateList& k_list,
                   Checker& checker, const CandidateRenderer& renderer, const RrcConfig& cfg) {
  if (k_list.empty()) throw EmptyCandidates();
  if (cfg.initial_max < 1 || cfg.refine_max < 1) throw InvalidArgument("RRC budgets N and M must be >= 1");
  if (static_cast<std::size_t>(cfg.initial_max) > k_list.size()) {
    throw InvalidArgument("RRC initial budget exceeds the candidate count");
  }

  RrcOutcome out;
  for (int i = 0; i < cfg.initial_max; ++i) {
    const SpatialConstraint& c = k_list[static_cast<std::size_t>(i)];
    const CheckVerdict v = checker.check(make_request(task_instruction, stage, c, renderer(c, false), false));
    ++out.checks_used;
    if (v.kind == CheckVerdict::Kind::Success) {
      out.kind = RrcOutcome::Kind::Chosen;
      out.chosen = c;
      out.chosen_index = i;
      return out;
    }
    if (v.kind == CheckVerdict::Kind::Failure) continue;

    out.refined = true;
    const DirectionCandidateSet dirs =
        refine_directions(c.active.primitive.direction, cfg.refine_max, cfg.cone_half_angle);
    for (int j = 0; j < cfg.refine_max; ++j) {
      const SpatialConstraint r = with_direction(c, dirs.directions[static_cast<std::size_t>(j)]);
      const CheckVerdict rv = checker.check(make_request(task_instruction, stage, r, renderer(r, true), true));
      ++out.checks_used;
      if (rv.kind == CheckVerdict::Kind::Success) {
        out.kind = RrcOutcome::Kind::Chosen;
        out.chosen = r;
        out.chosen_index = j;
        return out;
      }
    }
    return out;
  }
  return out;
}

PlanResult plan_task(const Task& task, const Scene& scene, Checker& checker, const CandidateRenderer& renderer,
                     const RrcConfig& cfg) {
  PlanResult result;
  for (std::size_t i = 0; i < task.stages.size(); ++i) {
    const Stage& stage = task.stages[i];
    if (stage.action == Action::Grasp) {
      result.stages.push_back({stage, plan_grasp(stage, scene), 0, false});
      continue;
    }
    const CandidateList k = stage.candidates.empty() ? enumerate_candidates(stage, scene) : stage.candidates;
    RrcConfig local = cfg;
    local.initial_max = std::min<int>(cfg.initial_max, static_cast<int>(k.size()));
    const RrcOutcome o = run_rrc(task.instruction, stage, k, checker, renderer, local);
    if (o.kind == RrcOutcome::Kind::TaskFailed) {
      result.failed = true;
      result.failed_stage = static_cast<int>(i);
      result.failed_checks = o.checks_used;
      return result;
    }
    result.stages.push_back({stage, *o.chosen, o.checks_used, o.refined});
  }
  return result;
}

}  // namespace canonimanip

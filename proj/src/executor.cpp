#include "canonimanip/executor.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "canonimanip/errors.hpp"

namespace canonimanip {

void SimWorld::set_ee(const Pose& ee) {
  ee_pose = ee;
  if (held_id) scene.at(*held_id).pose = compose_poses(ee_pose, grasp->ee_to_object);
}

void SimWorld::attach(const std::string& id, const GraspTransform& g) {
  scene.at(id);
  held_id = id;
  grasp = g;
  gripper_open = false;
  set_ee(ee_pose);
}

void SimWorld::release() {
  held_id.reset();
  grasp.reset();
  gripper_open = true;
}

void ExecutionTrace::append(const ExecutionTrace& other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
  disturbances.insert(disturbances.end(), other.disturbances.begin(), other.disturbances.end());
}

Pose simulate_tracker_observation(const Pose& true_pose, const TrackerConfig& cfg, Rng& rng) {
  Vec3 noise;
  for (int i = 0; i < 3; ++i) noise(i) = rng.normal(0.0, cfg.trans_noise_std);
  const Vec3 axis = rng.unit_vector();
  const double angle = std::abs(rng.normal(0.0, cfg.rot_noise_std));
  return {Rotation::from_axis_angle(axis, angle) * true_pose.rotation, true_pose.translation + noise};
}

void inject_disturbance(SimWorld& world, const Disturbance& d) {
  SceneObject& obj = world.scene.at(d.object_id);
  if (world.held_id && *world.held_id == d.object_id) throw HeldObject(d.object_id);
  obj.pose = compose_poses(d.delta, obj.pose);
}

namespace {

// Active side of a constraint as a scene object; the reserved gripper id maps
// onto the end effector.
SceneObject active_object(const Scene& scene, const Pose& ee, const std::string& id) {
  if (const SceneObject* o = scene.find(id)) return *o;
  if (id == kGripperId) return gripper_scene_object(scene, ee);
  throw UnknownObject(id);
}

bool satisfied_in(const Scene& scene, const Pose& ee, const SpatialConstraint& c, const Tolerances& tol) {
  return constraint_satisfied(c, active_object(scene, ee, c.active.object_id), scene.at(c.passive.object_id), tol);
}

double residual_in(const Scene& scene, const Pose& ee, const SpatialConstraint& c) {
  return constraint_residual(c, active_object(scene, ee, c.active.object_id), scene.at(c.passive.object_id));
}

Pose step_toward(const Pose& from, const Pose& to, const ExecutionLimits& lim) {
  Pose out;
  const Vec3 dt = to.translation - from.translation;
  const double n = dt.norm();
  out.translation = n <= lim.max_step_trans ? to.translation : Vec3(from.translation + dt * (lim.max_step_trans / n));
  const double ang = rotation_angle_between(from.rotation, to.rotation);
  out.rotation = ang <= lim.max_step_rot ? to.rotation : slerp(from.rotation, to.rotation, lim.max_step_rot / ang);
  return out;
}

bool same_pose(const Pose& a, const Pose& b) {
  return a.translation == b.translation && a.rotation.quaternion().coeffs() == b.rotation.quaternion().coeffs();
}

Pose offset(const Pose& p, const Vec3& by) { return {p.rotation, p.translation + by}; }

Pose held_transform(const SimWorld& world, const SpatialConstraint& c) {
  if (c.active.object_id == kGripperId && !world.scene.contains(kGripperId)) return Pose::identity();
  if (!world.held_id || *world.held_id != c.active.object_id || !world.grasp) {
    throw ActionStageMismatch("the active object '" + c.active.object_id + "' must be held");
  }
  return world.grasp->ee_to_object;
}

double active_scale(const SimWorld& world, const SpatialConstraint& c) {
  const SceneObject* o = world.scene.find(c.active.object_id);
  return o ? o->scale : 1.0;
}

constexpr double kPreGraspOffset = 0.08;
constexpr double kRotateSegment = 10.0 * M_PI / 180.0;
constexpr int kPourSegments = 8;

// Per-tick observation of every object, with optional dropout.
class Tracker {
 public:
  Tracker(const TrackerConfig& cfg, Rng& rng) : cfg_(cfg), rng_(rng) {}

  Scene observe(const Scene& truth) {
    Scene obs = truth;
    for (SceneObject& o : obs.objects) {
      const auto last = last_.find(o.id());
      if (last != last_.end() && cfg_.dropout_probability > 0.0 && rng_.uniform() < cfg_.dropout_probability) {
        o.pose = last->second;
        continue;
      }
      o.pose = simulate_tracker_observation(o.pose, cfg_, rng_);
      last_[o.id()] = o.pose;
    }
    return obs;
  }

 private:
  const TrackerConfig& cfg_;
  Rng& rng_;
  std::map<std::string, Pose> last_;
};

}  // namespace

bool evaluate_success(const SimWorld& world, const SpatialConstraint& c, const Tolerances& tol) {
  return satisfied_in(world.scene, world.ee_pose, c, tol);
}

std::string stage_outcome_name(StageOutcome o) {
  switch (o) {
    case StageOutcome::Success: return "success";
    case StageOutcome::Failure: return "failure";
    case StageOutcome::Timeout: return "timeout";
  }
  return "failure";
}

std::vector<Waypoint> apply_action_primitive(const SimWorld& world, Action action, const Stage& stage,
                                             const ActionTarget& target) {
  if (action != stage.action) {
    throw ActionStageMismatch("action '" + std::string(action_name(action)) + "' does not match stage action '" +
                              std::string(action_name(stage.action)) + "'");
  }
  using K = Waypoint::Kind;
  const Pose& P = target.target_ee;

  if (action == Action::Grasp) {
    if (target.constraint) throw ActionStageMismatch("grasp takes a grasp pose, not a constraint");
    const Pose pre = compose_poses(P, Pose::from_translation({0.0, 0.0, -kPreGraspOffset}));
    return {{K::Move, pre, false}, {K::Move, P, false}, {K::Close, {}, true}};
  }
  if (!target.constraint) throw ActionStageMismatch("action needs a chosen constraint");
  const SpatialConstraint& c = *target.constraint;
  const Vec3 n = primitive_to_world(c.passive.primitive, world.scene.at(c.passive.object_id)).direction;
  const double v = stage.action_param;

  switch (action) {
    case Action::Place:
      return {{K::Move, offset(P, v * n), false}, {K::Move, P, true}, {K::Open, {}, false}};
    case Action::Push:
      return {{K::Move, offset(P, v * n), false}, {K::Close, {}, false}, {K::Move, P, true}};
    case Action::Pull:
      return {{K::Move, P, true}, {K::Move, offset(P, v * n), false}};
    case Action::Rotate: {
      const Pose at_target = compose_poses(P, held_transform(world, c));
      const double s = active_scale(world, c);
      const Vec3 p = transform_point(at_target, s * c.active.primitive.point);
      const Vec3 u = at_target.rotation.rotate(c.active.primitive.direction);
      const double total = v * M_PI / 180.0;
      const int segs = std::max(1, static_cast<int>(std::ceil(std::abs(total) / kRotateSegment)));
      std::vector<Waypoint> out{{K::Move, P, true}};
      for (int k = 1; k <= segs; ++k) {
        const Rotation rk = Rotation::from_axis_angle(u, total * k / segs);
        out.push_back({K::Move, Pose{rk * P.rotation, p + rk.rotate(P.translation - p)}, false});
      }
      return out;
    }
    case Action::Pour: {
      const Vec3 q = transform_point(held_transform(world, c), active_scale(world, c) * c.active.primitive.point);
      const Vec3 pivot = transform_point(P, q);
      const Rotation& r0 = target.start_ee.rotation;
      std::vector<Waypoint> out{{K::Move, Pose{r0, pivot - r0.rotate(q)}, false}};
      for (int k = 1; k < kPourSegments; ++k) {
        const Rotation rk = slerp(r0, P.rotation, static_cast<double>(k) / kPourSegments);
        out.push_back({K::Move, Pose{rk, pivot - rk.rotate(q)}, false});
      }
      out.push_back({K::Move, P, true});
      return out;
    }
    case Action::Grasp: break;
  }
  throw ActionStageMismatch("unsupported action");
}

StageResult execute_stage(SimWorld& world, const Stage& stage, const StageChoice& choice, ExecMode mode,
                          const ExecutorConfig& cfg, Rng& tracker_rng, std::vector<Disturbance>& pending,
                          int stage_index) {
  const bool is_grasp = stage.action == Action::Grasp;
  const GraspChoice* grasp = std::get_if<GraspChoice>(&choice);
  const SpatialConstraint* c = std::get_if<SpatialConstraint>(&choice);
  if (is_grasp != (grasp != nullptr)) throw ActionStageMismatch("stage choice does not fit the stage action");

  StageResult result;
  if (c) {
    world.scene.at(c->passive.object_id);
    const bool gripper_active = c->active.object_id == kGripperId && !world.scene.contains(kGripperId);
    if (!gripper_active) {
      world.scene.at(c->active.object_id);
      if (!world.held_id || *world.held_id != c->active.object_id) {
        result.outcome = StageOutcome::Failure;
        return result;
      }
    }
  } else {
    world.scene.at(stage.passive_id);
  }

  Tracker tracker(cfg.tracker, tracker_rng);
  const Pose start_ee = world.ee_pose;

  // Observed world used for planning: tracked poses, grasp offset estimated
  // from the tracked pose of the held object.
  SimWorld observed;
  std::optional<Pose> target;
  std::vector<Waypoint> waypoints;

  auto replan = [&](bool first) {
    observed.scene = tracker.observe(world.scene);
    observed.ee_pose = world.ee_pose;
    observed.gripper_open = world.gripper_open;
    observed.held_id = world.held_id;
    observed.grasp.reset();
    if (world.held_id) {
      observed.grasp = GraspTransform{compose_poses(inverse(world.ee_pose), observed.scene.at(*world.held_id).pose)};
    }
    if (grasp) {
      target = compose_poses(observed.scene.at(stage.passive_id).pose, grasp->ee_in_object);
    } else {
      const GraspTransform phi = observed.grasp.value_or(GraspTransform{});
      // Tick re-solves measure the path term from the previous target, so the
      // target only moves as far as the new observations require.
      const SolveResult s = first ? solve_target_pose(world.ee_pose, *c, observed.scene, phi, cfg.loss, cfg.solver)
                                  : solve_target_pose(*target, *c, observed.scene, phi, cfg.loss,
                                                      cfg.tick_solver, target);
      target = s.target_pose;
    }
    waypoints = apply_action_primitive(observed, stage.action, stage, {*target, start_ee, c});
  };

  auto record = [&] {
    TraceRecord r;
    r.time = world.time;
    r.ee_pose = world.ee_pose;
    for (const SceneObject& o : world.scene.objects) r.object_poses.emplace_back(o.id(), o.pose);
    r.gripper_open = world.gripper_open;
    r.held_id = world.held_id;
    r.stage_index = stage_index;
    r.action = stage.action;
    r.residual = c ? residual_in(world.scene, world.ee_pose, *c) : 0.0;
    result.trace.records.push_back(std::move(r));
  };

  if (cfg.limits.max_ticks <= 0) {
    result.outcome = StageOutcome::Timeout;
    return result;
  }
  replan(true);

  std::size_t wi = 0;
  bool target_ok = false;
  for (int tick = 0; tick < cfg.limits.max_ticks; ++tick) {
    ++world.ticks;
    world.time = static_cast<double>(world.ticks) * cfg.tracker.update_period;
    for (auto it = pending.begin(); it != pending.end();) {
      if (it->at_time <= world.time) {
        inject_disturbance(world, *it);
        result.trace.disturbances.push_back({world.time, *it});
        it = pending.erase(it);
      } else {
        ++it;
      }
    }
    if (mode == ExecMode::ClosedLoop && tick > 0) replan(false);

    const Waypoint& w = waypoints[wi];
    switch (w.kind) {
      case Waypoint::Kind::Move: {
        world.set_ee(step_toward(world.ee_pose, w.ee, cfg.limits));
        if (!same_pose(world.ee_pose, w.ee)) break;
        if (w.is_target && c) {
          if (mode == ExecMode::ClosedLoop) {
            Scene predicted = observed.scene;
            if (observed.grasp) predicted.at(*world.held_id).pose = compose_poses(world.ee_pose, observed.grasp->ee_to_object);
            if (!satisfied_in(predicted, world.ee_pose, *c, cfg.tol)) break;
          }
          target_ok = evaluate_success(world, *c, cfg.tol);
        }
        ++wi;
        break;
      }
      case Waypoint::Kind::Close: {
        if (grasp) {
          const SceneObject& obj = world.scene.at(stage.passive_id);
          const Pose true_grasp = compose_poses(obj.pose, grasp->ee_in_object);
          const bool close_enough =
              (true_grasp.translation - world.ee_pose.translation).norm() <= cfg.attach_trans_tol &&
              rotation_angle_between(true_grasp.rotation, world.ee_pose.rotation) <= cfg.attach_rot_tol;
          if (close_enough) {
            world.attach(stage.passive_id, {compose_poses(inverse(world.ee_pose), obj.pose)});
          } else {
            world.gripper_open = false;
          }
          target_ok = close_enough;
        } else {
          world.gripper_open = false;
        }
        ++wi;
        break;
      }
      case Waypoint::Kind::Open:
        world.release();
        ++wi;
        break;
    }
    record();
    if (wi == waypoints.size()) {
      result.outcome = target_ok ? StageOutcome::Success : StageOutcome::Failure;
      return result;
    }
  }
  result.outcome = StageOutcome::Timeout;
  return result;
}

PlanExecution execute_plan(SimWorld& world, const std::vector<StagePlan>& plan, ExecMode mode,
                           const ExecutorConfig& cfg, std::vector<Disturbance> disturbances) {
  PlanExecution out;
  Rng rng(cfg.tracker.seed);
  std::stable_sort(disturbances.begin(), disturbances.end(),
                   [](const Disturbance& a, const Disturbance& b) { return a.at_time < b.at_time; });
  for (std::size_t i = 0; i < plan.size(); ++i) {
    StageResult r = execute_stage(world, plan[i].stage, plan[i].choice, mode, cfg, rng, disturbances,
                                  static_cast<int>(i));
    out.trace.append(r.trace);
    out.outcomes.push_back(r.outcome);
    if (r.outcome != StageOutcome::Success) return out;
  }
  out.success = true;
  return out;
}

}  // namespace canonimanip

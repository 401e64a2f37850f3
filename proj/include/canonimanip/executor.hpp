#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "canonimanip/constraints.hpp"
#include "canonimanip/object_model.hpp"
#include "canonimanip/optimizer.hpp"
#include "canonimanip/planning.hpp"
#include "canonimanip/random.hpp"

namespace canonimanip {

// Kinematic world. While an object is held its pose is kept equal to
// compose(ee_pose, grasp->ee_to_object).
struct SimWorld {
  Scene scene;
  Pose ee_pose;
  bool gripper_open = true;
  std::optional<std::string> held_id;
  std::optional<GraspTransform> grasp;
  double time = 0.0;  // ticks * update_period
  std::int64_t ticks = 0;

  // Moves the end effector (and the held object with it).
  void set_ee(const Pose& ee);
  void attach(const std::string& id, const GraspTransform& g);
  void release();
};

struct TrackerConfig {
  double trans_noise_std = 0.001;
  double rot_noise_std = 0.2 * M_PI / 180.0;
  double update_period = 0.02;
  std::uint64_t seed = 0;
  // Chance that an object keeps its previous observation on a tick.
  double dropout_probability = 0.0;
};

struct Disturbance {
  double at_time = 0.0;
  std::string object_id;
  Pose delta;  // applied on the left: pose <- delta o pose
};

struct TraceRecord {
  double time = 0.0;
  Pose ee_pose;
  std::vector<std::pair<std::string, Pose>> object_poses;  // scene order
  bool gripper_open = true;
  std::optional<std::string> held_id;
  int stage_index = 0;
  Action action = Action::Place;
  double residual = 0.0;  // chosen constraint on true poses; 0 for grasp stages
};

struct AppliedDisturbance {
  double time = 0.0;
  Disturbance disturbance;
};

struct ExecutionTrace {
  std::vector<TraceRecord> records;
  std::vector<AppliedDisturbance> disturbances;

  void append(const ExecutionTrace& other);
};

// True pose with per-axis Gaussian translation noise and a rotation of angle
// |N(0, rot_noise_std)| about a uniformly random axis.
Pose simulate_tracker_observation(const Pose& true_pose, const TrackerConfig& cfg, Rng& rng);

struct Waypoint {
  enum class Kind { Move, Close, Open };
  Kind kind = Kind::Move;
  Pose ee;  // Move only
  // Reaching this waypoint is where the stage's constraint must hold.
  bool is_target = false;
};

// What the action primitive is built around: the grasp pose for grasp stages,
// the solved end-effector target for the rest.
struct ActionTarget {
  Pose target_ee;
  Pose start_ee;  // end-effector pose when the stage began
  const SpatialConstraint* constraint = nullptr;  // null for grasp
};

// Expands `action` into waypoints (see README for the per-action layout).
// "Back" is along the passive primitive's world direction. Throws
// ActionStageMismatch when `action` differs from the stage's action or the
// target kind does not fit the action.
std::vector<Waypoint> apply_action_primitive(const SimWorld& world, Action action, const Stage& stage,
                                             const ActionTarget& target);

// Throws UnknownObject, HeldObject.
void inject_disturbance(SimWorld& world, const Disturbance& d);

// constraint_satisfied on the world's true poses. The reserved gripper id
// resolves to the end effector.
bool evaluate_success(const SimWorld& world, const SpatialConstraint& c, const Tolerances& tol = {});

enum class ExecMode { OpenLoop, ClosedLoop };
enum class StageOutcome { Success, Failure, Timeout };

std::string stage_outcome_name(StageOutcome o);

struct ExecutionLimits {
  int max_ticks = 1500;
  double max_step_trans = 0.01;  // m per tick
  double max_step_rot = 0.08;    // rad per tick
};

struct ExecutorConfig {
  TrackerConfig tracker;
  ExecutionLimits limits;
  LossConfig loss;
  SolverConfig solver;  // stage-start solve
  SolverConfig tick_solver = [] {
    SolverConfig s;
    s.max_iters = 25;
    s.restarts = 1;
    return s;
  }();
  Tolerances tol;
  double attach_trans_tol = 0.01;
  double attach_rot_tol = 10.0 * M_PI / 180.0;
};

using StageChoice = std::variant<GraspChoice, SpatialConstraint>;

struct StageResult {
  StageOutcome outcome = StageOutcome::Timeout;
  ExecutionTrace trace;
};

// Ticks of update_period. Each tick applies due disturbances from `pending`
// (removing them), then moves the end effector one clamped step toward the
// current waypoint or toggles the gripper. Closed loop re-observes every
// object and re-solves the target each tick (warm started); it only treats
// the target waypoint as reached once the observed constraint holds. Open
// loop observes and solves once at stage start. Success is judged on true
// poses when the target waypoint is reached; Timeout after max_ticks.
StageResult execute_stage(SimWorld& world, const Stage& stage, const StageChoice& choice, ExecMode mode,
                          const ExecutorConfig& cfg, Rng& tracker_rng, std::vector<Disturbance>& pending,
                          int stage_index = 0);

struct PlanExecution {
  std::vector<StageOutcome> outcomes;
  ExecutionTrace trace;
  bool success = false;
};

// Runs the stages in order and stops after the first one that does not
// succeed. The tracker stream is seeded from cfg.tracker.seed.
PlanExecution execute_plan(SimWorld& world, const std::vector<StagePlan>& plan, ExecMode mode,
                           const ExecutorConfig& cfg, std::vector<Disturbance> disturbances = {});

}  // namespace canonimanip

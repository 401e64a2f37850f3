#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "canonimanip/action.hpp"
#include "canonimanip/checker.hpp"
#include "canonimanip/constraints.hpp"
#include "canonimanip/object_model.hpp"
#include "canonimanip/primitives.hpp"

namespace canonimanip {

// One step of a decomposed task. Grasp stages use `grasp_*` (the grasped
// object is the passive side); every other action uses the primitive fields.
struct Stage {
  Action action = Action::Place;
  std::string active_id;
  std::string passive_id;

  std::string active_point;
  std::string passive_point;
  Vec3 passive_direction = Vec3::UnitZ();  // canonical frame of the passive object
  double target_distance = 0.0;
  std::optional<double> target_angle;  // radians
  double weight_d = kDefaultWeightDistance;
  double weight_theta = kDefaultWeightAngle;
  // Meters for place/push/pull offsets, degrees for rotate; unused by grasp/pour.
  double action_param = 0.0;
  // Externally supplied relevance of the six canonical axes (default order).
  std::optional<std::vector<double>> candidate_scores;

  std::vector<std::string> grasp_points;          // labels on the grasped object
  std::vector<GraspCandidate> grasp_candidates;   // end-effector poses in the object's canonical frame

  CandidateList candidates;  // filled by enumerate_candidates
};

struct Task {
  std::string instruction;
  std::vector<Stage> stages;
};

// Parses a pre-decomposed task document (JSON) against `scene`. Angles in the
// document are degrees. Throws ParseError (with location), UnknownObject and
// MissingNamedPoint.
Task load_task(std::string_view document, const Scene& scene, const std::string& source_name = "task");

// Active direction drawn from the six canonical axes (score order when
// scores are given, default order otherwise); point, passive primitive and
// targets fixed by the stage. Throws MissingNamedPoint.
CandidateList enumerate_candidates(const Stage& stage, const Scene& scene);

// Grasp chosen for a grasp stage, in the grasped object's canonical frame.
struct GraspChoice {
  Pose ee_in_object;
  double width = 0.0;
  double score = 0.0;
};

// Filters the stage's grasp candidates (or top-down samples over the object's
// points when none are given) with the heatmap over its grasp points.
GraspChoice plan_grasp(const Stage& stage, const Scene& scene, double sigma = kDefaultHeatmapSigma);

struct RrcConfig {
  int initial_max = 6;  // N
  int refine_max = kDefaultRefineCount;  // M
  double cone_half_angle = kDefaultConeHalfAngle;
};

struct RrcOutcome {
  enum class Kind { Chosen, TaskFailed };
  Kind kind = Kind::TaskFailed;
  std::optional<SpatialConstraint> chosen;
  int chosen_index = -1;  // within the phase that produced it
  int checks_used = 0;
  bool refined = false;
};

// Produces the interaction image for a candidate.
using CandidateRenderer = std::function<RenderedImage(const SpatialConstraint& candidate, bool refine_phase)>;

// Render-and-check self-correction. Candidates 1..N are checked in order.
// Success returns the candidate; Failure moves on; the first Refine replaces
// the list with M directions resampled on a cone around that candidate's
// direction (point and targets kept) and checks those in order, where a
// second Refine counts as Failure. Exhausting either phase yields TaskFailed.
// Exactly one checker call per rendered candidate. Checker faults propagate
// as OracleUnavailable.
RrcOutcome run_rrc(const std::string& task_instruction, const Stage& stage, const CandidateList& k_list,
                   Checker& checker, const CandidateRenderer& renderer, const RrcConfig& cfg = {});

struct StagePlan {
  Stage stage;
  std::variant<GraspChoice, SpatialConstraint> choice;
  int checks_used = 0;
  bool refined = false;
};

struct PlanResult {
  std::vector<StagePlan> stages;
  bool failed = false;
  int failed_stage = -1;
  int failed_checks = 0;
};

// Runs grasp selection or enumerate_candidates + run_rrc for every stage.
// Stops at the first stage that fails.
PlanResult plan_task(const Task& task, const Scene& scene, Checker& checker, const CandidateRenderer& renderer,
                     const RrcConfig& cfg = {});

}  // namespace canonimanip

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "canonimanip/constraints.hpp"
#include "canonimanip/object_model.hpp"

namespace canonimanip {

// Reserved object id for the end effector itself. A constraint whose active
// side names it moves the gripper (keypoints as geometry) instead of a held
// object.
inline constexpr const char* kGripperId = "gripper";

// Rigid offset from the end effector to the held object, fixed at grasp time.
struct GraspTransform {
  Pose ee_to_object;
};

struct LossConfig {
  double lambda_trans = 1.0;  // per meter
  double lambda_rot = 0.3;    // per radian
  double d_min = 0.02;        // m
};

struct LossTerms {
  double constraint = 0.0;
  double collision = 0.0;
  double path = 0.0;
  double total() const { return constraint + collision + path; }
};

// sum_j max(0, d_min - d_j)^2 over scene objects other than `held_id`, with
// d_j the closest gripper keypoint to object j. Throws InvalidArgument for
// d_min <= 0 and UnknownObject for an unknown held id.
double collision_loss(const Pose& ee_pose, const Scene& scene, const std::optional<std::string>& held_id,
                      double d_min);

// lambda_trans * |t_c - t_0| + lambda_rot * angle(R_0, R_c).
double path_loss(const Pose& current, const Pose& candidate, double lambda_trans, double lambda_rot);

// The three terms at `ee_pose`, with the active object placed at
// compose(ee_pose, ee_to_object) and the path measured from `current_ee`.
LossTerms loss_terms(const Pose& ee_pose, const SpatialConstraint& constraint, const Scene& scene,
                     const Pose& current_ee, const GraspTransform& grasp, const LossConfig& cfg);
double total_loss(const Pose& ee_pose, const SpatialConstraint& constraint, const Scene& scene,
                  const Pose& current_ee, const GraspTransform& grasp, const LossConfig& cfg);

struct SolverConfig {
  int max_iters = 100;  // per phase
  double step = 1.0;    // initial line-search step along the quasi-Newton direction
  double tol = 1e-10;   // stop when an iteration decreases the loss by less
  double grad_tol = 1e-8;
  double fd_step = 1e-5;  // m for the linear part, rad for the angular part
  int restarts = 4;
  std::uint64_t seed = 0;
  // Second phase that drops the path term and settles onto the constraint
  // manifold from the first phase's result.
  bool polish = true;
  double restart_trans_std = 0.03;
  double restart_rot_std = 0.2;
};

struct SolveResult {
  Pose target_pose;
  LossTerms final_losses;
  int iterations = 0;
  bool converged = false;
  int best_restart = 0;
  // Objective after each accepted step, per phase, for the returned restart.
  std::vector<double> descent_history;
  std::vector<double> polish_history;
};

// Local minimization over a twist perturbation pose = exp(xi) o start, with
// central finite-difference gradients, BFGS directions and step-halving line
// search. Phase one minimizes the full loss; with `polish`, phase two then
// minimizes constraint + collision only, which removes the bias the linear
// path term puts on the optimum. Restart 0 begins at `warm_start` (or
// `current_ee`), later restarts at seeded perturbations of it; the lowest
// total loss wins, ties to the lower restart index.
//
// The returned pose never has a higher objective than `current_ee` (total loss
// without polish, constraint + collision with polish). Throws NonFiniteLoss.
SolveResult solve_target_pose(const Pose& current_ee, const SpatialConstraint& constraint, const Scene& scene,
                              const GraspTransform& grasp, const LossConfig& cfg, const SolverConfig& solver,
                              const std::optional<Pose>& warm_start = std::nullopt);

using PoseObjective = std::function<double(const Pose&)>;

// Central-difference gradient of f(exp(xi) o pose) at xi = 0; layout
// (linear xyz, angular xyz).
std::array<double, 6> twist_gradient(const PoseObjective& f, const Pose& pose, double h);

// Synthetic scene object for the end effector: keypoints as geometry.
SceneObject gripper_scene_object(const Scene& scene, const Pose& ee_pose);

}  // namespace canonimanip

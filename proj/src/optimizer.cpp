#include "canonimanip/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Dense>

#include "canonimanip/errors.hpp"
#include "canonimanip/random.hpp"

namespace canonimanip {

double collision_loss(const Pose& ee_pose, const Scene& scene, const std::optional<std::string>& held_id,
                      double d_min) {
  if (!(d_min > 0.0)) throw InvalidArgument("d_min must be positive");
  double loss = 0.0;
  for (const ObstacleDistance& d : obstacle_distances(ee_pose, scene, held_id, d_min)) {
    const double pen = std::max(0.0, d_min - d.distance);
    loss += pen * pen;
  }
  return loss;
}

double path_loss(const Pose& current, const Pose& candidate, double lambda_trans, double lambda_rot) {
  if (!(lambda_trans >= 0.0) || !(lambda_rot >= 0.0)) throw InvalidArgument("path weights must be >= 0");
  return lambda_trans * (candidate.translation - current.translation).norm() +
         lambda_rot * rotation_angle_between(current.rotation, candidate.rotation);
}

SceneObject gripper_scene_object(const Scene& scene, const Pose& ee_pose) {
  auto obj = std::make_shared<CanonicalObject>();
  obj->id = kGripperId;
  obj->category = "gripper";
  obj->points = scene.gripper_keypoints;
  if (obj->points.empty()) obj->points.push_back(Vec3::Zero());
  return SceneObject{std::move(obj), ee_pose, 1.0, false};
}

namespace {

// Everything a loss evaluation needs, resolved once.
class LossProblem {
 public:
  LossProblem(const SpatialConstraint& c, const Scene& scene, const Pose& current_ee, const GraspTransform& grasp,
              const LossConfig& cfg)
      : c_(c), scene_(scene), current_(current_ee), grasp_(grasp), cfg_(cfg), passive_(scene.at(c.passive.object_id)) {
    if (!(cfg.d_min > 0.0)) throw InvalidArgument("d_min must be positive");
    if (const SceneObject* a = scene.find(c.active.object_id)) {
      active_ = *a;
      held_ = a->id();
    } else if (c.active.object_id == kGripperId) {
      active_ = gripper_scene_object(scene, current_ee);
    } else {
      throw UnknownObject(c.active.object_id);
    }
  }

  LossTerms terms(const Pose& ee) const {
    SceneObject active = active_;
    active.pose = compose_poses(ee, grasp_.ee_to_object);
    LossTerms t;
    t.constraint = constraint_residual(c_, active, passive_);
    t.collision = collision_loss(ee, scene_, held_, cfg_.d_min);
    t.path = path_loss(current_, ee, cfg_.lambda_trans, cfg_.lambda_rot);
    return t;
  }

 private:
  const SpatialConstraint& c_;
  const Scene& scene_;
  Pose current_;
  GraspTransform grasp_;
  LossConfig cfg_;
  SceneObject active_;
  SceneObject passive_;
  std::optional<std::string> held_;
};

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

Pose perturb(const Vec6& x, const Pose& base) {
  return compose_poses(exp_twist({x.head<3>(), x.tail<3>()}), base);
}

struct PhaseResult {
  Vec6 x = Vec6::Zero();
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

class TwistMinimizer {
 public:
  TwistMinimizer(PoseObjective f, const Pose& base, const SolverConfig& cfg)
      : f_(std::move(f)), base_(base), cfg_(cfg) {}

  double eval(const Vec6& x) const {
    const double v = f_(perturb(x, base_));
    if (!std::isfinite(v)) throw NonFiniteLoss();
    return v;
  }

  Vec6 gradient(const Vec6& x) const {
    Vec6 g;
    for (int i = 0; i < 6; ++i) {
      Vec6 xp = x, xm = x;
      xp(i) += cfg_.fd_step;
      xm(i) -= cfg_.fd_step;
      g(i) = (eval(xp) - eval(xm)) / (2.0 * cfg_.fd_step);
    }
    return g;
  }

  PhaseResult run() const {
    PhaseResult r;
    r.value = eval(r.x);
    Vec6 g = gradient(r.x);
    Mat6 h_inv = Mat6::Identity();
    bool scaled = false;

    for (int it = 0; it < cfg_.max_iters; ++it) {
      if (g.norm() < cfg_.grad_tol) {
        r.converged = true;
        break;
      }
      Vec6 dir = -h_inv * g;
      if (g.dot(dir) >= 0.0) {
        h_inv.setIdentity();
        dir = -g;
      }

      double alpha = cfg_.step;
      bool accepted = false;
      Vec6 x_new;
      double v_new = r.value;
      for (int halvings = 0; halvings < 60; ++halvings, alpha *= 0.5) {
        x_new = r.x + alpha * dir;
        v_new = eval(x_new);
        if (v_new < r.value) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        r.converged = true;  // no descent along the direction at any step: stationary
        break;
      }

      ++r.iterations;
      const double decrease = r.value - v_new;
      const Vec6 g_new = gradient(x_new);
      const Vec6 s = x_new - r.x;
      const Vec6 y = g_new - g;
      r.x = x_new;
      r.value = v_new;
      g = g_new;
      r.history.push_back(v_new);

      const double sy = s.dot(y);
      if (sy > 1e-16) {
        if (!scaled) {
          h_inv = Mat6::Identity() * (sy / y.squaredNorm());
          scaled = true;
        }
        const double rho = 1.0 / sy;
        const Mat6 left = Mat6::Identity() - rho * s * y.transpose();
        h_inv = left * h_inv * left.transpose() + rho * s * s.transpose();
      }
      if (decrease < cfg_.tol) {
        r.converged = true;
        break;
      }
    }
    return r;
  }

  Pose pose(const Vec6& x) const { return perturb(x, base_); }

 private:
  PoseObjective f_;
  Pose base_;
  const SolverConfig& cfg_;
};

struct RestartResult {
  Pose pose;
  LossTerms terms;
  int iterations = 0;
  bool converged = false;
  std::vector<double> descent, polish;
};

constexpr double kSlidePenalty = 1e4;
constexpr double kSlideSlack = 1e-12;

RestartResult solve_from(const LossProblem& problem, const Pose& init, const SolverConfig& cfg) {
  RestartResult out;
  const TwistMinimizer full([&](const Pose& p) { return problem.terms(p).total(); }, init, cfg);
  const PhaseResult a = full.run();
  out.pose = full.pose(a.x);
  out.iterations = a.iterations;
  out.converged = a.converged;
  out.descent = a.history;

  if (cfg.polish) {
    const TwistMinimizer primary(
        [&](const Pose& p) {
          const LossTerms t = problem.terms(p);
          return t.constraint + t.collision;
        },
        out.pose, cfg);
    const PhaseResult b = primary.run();
    out.pose = primary.pose(b.x);
    // Polish lands on the constraint manifold wherever its descent happens to
    // cross it, which can be far from the nearest such pose. Slide along the
    // manifold toward lower path cost with a stiff penalty, then polish again
    // to clear the residual the penalty leaves; keep it only if both the
    // polished objective and the total improve.
    const TwistMinimizer slide(
        [&](const Pose& p) {
          const LossTerms t = problem.terms(p);
          return t.path + kSlidePenalty * (t.constraint + t.collision);
        },
        out.pose, cfg);
    const Pose slid = slide.pose(slide.run().x);
    // What is left to clear is tiny, so the absolute decrease test would stop
    // this phase at once.
    SolverConfig tight = cfg;
    tight.tol = 0.0;
    const TwistMinimizer repolish(
        [&](const Pose& p) {
          const LossTerms t = problem.terms(p);
          return t.constraint + t.collision;
        },
        slid, tight);
    const PhaseResult c = repolish.run();
    const Pose settled = repolish.pose(c.x);
    const LossTerms ts = problem.terms(settled), tp = problem.terms(out.pose);
    if (ts.constraint + ts.collision <= std::max(b.value, kSlideSlack) && ts.total() < tp.total()) {
      out.pose = settled;
    }
    out.iterations += b.iterations;
    out.converged = b.converged;
    out.polish = b.history;
  }
  out.terms = problem.terms(out.pose);
  return out;
}

}  // namespace

LossTerms loss_terms(const Pose& ee_pose, const SpatialConstraint& constraint, const Scene& scene,
                     const Pose& current_ee, const GraspTransform& grasp, const LossConfig& cfg) {
  return LossProblem(constraint, scene, current_ee, grasp, cfg).terms(ee_pose);
}

double total_loss(const Pose& ee_pose, const SpatialConstraint& constraint, const Scene& scene,
                  const Pose& current_ee, const GraspTransform& grasp, const LossConfig& cfg) {
  return loss_terms(ee_pose, constraint, scene, current_ee, grasp, cfg).total();
}

SolveResult solve_target_pose(const Pose& current_ee, const SpatialConstraint& constraint, const Scene& scene,
                              const GraspTransform& grasp, const LossConfig& cfg, const SolverConfig& solver,
                              const std::optional<Pose>& warm_start) {
  if (solver.max_iters < 1) throw InvalidArgument("solver max_iters must be >= 1");
  if (solver.restarts < 1) throw InvalidArgument("solver restarts must be >= 1");
  const LossProblem problem(constraint, scene, current_ee, grasp, cfg);
  const Pose start = warm_start.value_or(current_ee);

  Rng rng(solver.seed);
  std::optional<RestartResult> best;
  int best_index = 0;
  for (int r = 0; r < solver.restarts; ++r) {
    Pose init = start;
    if (r > 0) {
      Twist xi;
      for (int k = 0; k < 3; ++k) xi.linear(k) = rng.normal(0.0, solver.restart_trans_std);
      for (int k = 0; k < 3; ++k) xi.angular(k) = rng.normal(0.0, solver.restart_rot_std);
      init = compose_poses(exp_twist(xi), start);
    }
    RestartResult res = solve_from(problem, init, solver);
    if (!best || res.terms.total() < best->terms.total()) {
      best = std::move(res);
      best_index = r;
    }
  }

  SolveResult out;
  out.target_pose = best->pose;
  out.final_losses = best->terms;
  out.iterations = best->iterations;
  out.converged = best->converged;
  out.best_restart = best_index;
  out.descent_history = std::move(best->descent);
  out.polish_history = std::move(best->polish);

  const LossTerms at_current = problem.terms(current_ee);
  auto objective = [&](const LossTerms& t) { return solver.polish ? t.constraint + t.collision : t.total(); };
  if (objective(out.final_losses) > objective(at_current)) {
    out.target_pose = current_ee;
    out.final_losses = at_current;
    out.converged = true;
  }
  return out;
}

std::array<double, 6> twist_gradient(const PoseObjective& f, const Pose& pose, double h) {
  std::array<double, 6> g{};
  for (int i = 0; i < 6; ++i) {
    Vec6 xp = Vec6::Zero(), xm = Vec6::Zero();
    xp(i) = h;
    xm(i) = -h;
    g[static_cast<std::size_t>(i)] = (f(perturb(xp, pose)) - f(perturb(xm, pose))) / (2.0 * h);
  }
  return g;
}

}  // namespace canonimanip

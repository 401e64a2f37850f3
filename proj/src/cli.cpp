#include "canonimanip/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "canonimanip/checker.hpp"
#include "canonimanip/datagen.hpp"
#include "canonimanip/errors.hpp"
#include "canonimanip/executor.hpp"

namespace canonimanip {

namespace {

constexpr double kDeg = M_PI / 180.0;

int first_constraint_stage(const Task& task) {
  for (std::size_t i = 0; i < task.stages.size(); ++i) {
    if (task.stages[i].action != Action::Grasp) return static_cast<int>(i);
  }
  throw InvalidArgument("task has no constraint stage");
}

Vec3 nearest_axis(const Vec3& v) {
  Eigen::Index i = 0;
  v.cwiseAbs().maxCoeff(&i);
  Vec3 out = Vec3::Zero();
  out(i) = v(i) < 0.0 ? -1.0 : 1.0;
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << text;
  if (!f) throw IoError("failed writing '" + path + "'");
}

std::vector<CheckVerdict::Kind> load_script(const std::string& path) {
  const std::string text = read_text(path);
  std::vector<std::string> words;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    const json j = parse_json_document(text, path);
    for (std::size_t i = 0; i < j.size(); ++i) words.push_back(json_string(j[i], "/" + std::to_string(i), path));
  } else {
    std::istringstream ss(text);
    for (std::string w; ss >> w;) words.push_back(w);
  }
  std::vector<CheckVerdict::Kind> out;
  for (const std::string& w : words) out.push_back(parse_verdict(w));
  return out;
}

struct OracleOptions {
  std::string choice = "geometric";
  int timeout_ms = 5000;
  bool retry = false;
};

std::unique_ptr<Checker> make_checker(const OracleOptions& o, const Scene& scene, std::ostream& out) {
  if (o.choice == "geometric") return std::make_unique<GeometricChecker>(scene);
  if (o.choice.rfind("scripted:", 0) == 0) return std::make_unique<ScriptedChecker>(load_script(o.choice.substr(9)));
  if (o.choice == "interactive") return std::make_unique<InteractiveChecker>(std::cin, out);
  if (o.choice == "remote" || o.choice.rfind("remote:", 0) == 0) {
    std::string url = o.choice.size() > 7 ? o.choice.substr(7) : "";
    if (url.empty()) {
      const char* env = std::getenv("CANONIMANIP_ORACLE_URL");
      if (!env || !*env) throw InvalidArgument("--oracle remote needs a URL or CANONIMANIP_ORACLE_URL");
      url = env;
    }
    return std::make_unique<RemoteChecker>(url, std::chrono::milliseconds(o.timeout_ms), o.retry);
  }
  throw InvalidArgument("unknown oracle '" + o.choice + "'");
}

struct CameraOptions {
  double azimuth = 30.0;
  double elevation = 35.0;
  double distance = 0.9;
};

void add_camera_options(CLI::App* cmd, CameraOptions& c) {
  cmd->add_option("--camera-azimuth", c.azimuth, "camera azimuth in degrees");
  cmd->add_option("--camera-elevation", c.elevation, "camera elevation in degrees");
  cmd->add_option("--camera-distance", c.distance, "camera distance in meters");
}

json camera_metadata(const CameraOptions& o, const CameraSpec& cam) {
  json j = camera_to_json(cam);
  j["azimuth_deg"] = o.azimuth;
  j["elevation_deg"] = o.elevation;
  j["distance_m"] = o.distance;
  return j;
}

struct PlanArgs {
  std::string scene, task, render_dir, out;
  OracleOptions oracle;
  CameraOptions camera;
  std::uint64_t seed = 0;
  int n = 6, m = kDefaultRefineCount;
};

int cmd_plan(const PlanArgs& a, std::ostream& out, std::ostream& err) {
  const SceneDocument sd = load_scene_file(a.scene);
  const TaskDocument td = load_task_file(a.task, sd.scene);
  auto checker = make_checker(a.oracle, sd.scene, out);
  const CameraSpec cam = scene_camera(sd.scene, a.camera.azimuth, a.camera.elevation, a.camera.distance);

  int rendered = 0;
  const CandidateRenderer renderer = [&](const SpatialConstraint& c, bool refine) {
    RenderedImage img = render_candidate(sd.scene, c, cam);
    if (!a.render_dir.empty()) {
      std::filesystem::create_directories(a.render_dir);
      char name[64];
      std::snprintf(name, sizeof name, "candidate_%03d%s.ppm", rendered, refine ? "_refine" : "");
      write_ppm(img, std::filesystem::path(a.render_dir) / name);
    }
    ++rendered;
    return img;
  };

  RrcConfig rrc;
  rrc.initial_max = a.n;
  rrc.refine_max = a.m;
  const PlanResult pr = plan_task(td.task, sd.scene, *checker, renderer, rrc);
  if (pr.failed) {
    err << "stage " << pr.failed_stage << ": task failed after " << pr.failed_checks << " checks\n";
    return 2;
  }

  PlanDocument pd;
  pd.scene_hash = scene_hash(sd.document);
  pd.scenario_hash = scenario_hash(sd.document, td.document);
  pd.instruction = td.task.instruction;
  pd.stages = pr.stages;
  pd.camera = camera_metadata(a.camera, cam);
  const std::string text = plan_to_json(pd).dump(2) + "\n";
  if (a.out.empty()) {
    out << text;
  } else {
    write_text(a.out, text);
    for (std::size_t i = 0; i < pr.stages.size(); ++i) {
      out << "stage " << i << " " << action_name(pr.stages[i].stage.action) << ": checks_used "
          << pr.stages[i].checks_used << (pr.stages[i].refined ? " (refined)" : "") << "\n";
    }
  }
  return 0;
}

struct ExecuteArgs {
  std::string plan, scene, mode = "closed", disturb, trace;
  std::uint64_t seed = 0;
  double noise_trans = 0.001;
  double noise_rot_deg = 0.2;
  int max_ticks = 1500;
};

int cmd_execute(const ExecuteArgs& a, std::ostream& out, std::ostream& err) {
  const SceneDocument sd = load_scene_file(a.scene);
  const PlanDocument pd = plan_from_json(load_json_file(a.plan), sd.scene, a.plan);
  if (pd.scene_hash != scene_hash(sd.document)) {
    err << "error: plan '" << a.plan << "' was made for a different scene (hash " << pd.scene_hash << ")\n";
    return 1;
  }
  std::vector<Disturbance> dist;
  if (!a.disturb.empty()) dist = load_disturbance_file(a.disturb);

  ExecutorConfig cfg;
  cfg.tracker.seed = a.seed;
  cfg.tracker.trans_noise_std = a.noise_trans;
  cfg.tracker.rot_noise_std = a.noise_rot_deg * kDeg;
  cfg.limits.max_ticks = a.max_ticks;
  SimWorld world;
  world.scene = sd.scene;
  world.ee_pose = sd.ee_start;
  const ExecMode mode = a.mode == "open" ? ExecMode::OpenLoop : ExecMode::ClosedLoop;
  const PlanExecution ex = execute_plan(world, pd.stages, mode, cfg, dist);

  for (std::size_t i = 0; i < ex.outcomes.size(); ++i) {
    out << "stage " << i << " " << action_name(pd.stages[i].stage.action) << ": "
        << stage_outcome_name(ex.outcomes[i]) << "\n";
  }
  if (!a.trace.empty()) {
    const EpisodeMeta meta{0, a.seed, pd.scenario_hash, ex.success, object_poses(sd.scene)};
    write_text(a.trace, episode_to_json(record_trace(ex.trace, meta)).dump() + "\n");
  }
  return ex.success ? 0 : 2;
}

struct BenchArgs {
  std::string scene, task, strategy = "axes", out;
  int trials = 100;
  int stage = -1;
  std::uint64_t seed = 0;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const SceneDocument sd = load_scene_file(a.scene);
  const TaskDocument td = load_task_file(a.task, sd.scene);
  const SamplingStrategy s = a.strategy == "uniform" ? SamplingStrategy::Uniform : SamplingStrategy::Axes;
  const SamplingReport r = bench_sampling(sd, td, a.trials, a.seed, s, {}, a.stage);
  const std::string text = sampling_report_to_json(r).dump(2) + "\n";
  if (a.out.empty()) out << text;
  else write_text(a.out, text);
  return 0;
}

struct RenderArgs {
  std::string scene, task, out;
  int stage = 0, candidate = 0;
  CameraOptions camera;
  bool no_grid = false;
};

int cmd_render(const RenderArgs& a) {
  const SceneDocument sd = load_scene_file(a.scene);
  const TaskDocument td = load_task_file(a.task, sd.scene);
  if (a.stage < 0 || static_cast<std::size_t>(a.stage) >= td.task.stages.size()) {
    throw IndexOutOfRange("stage index " + std::to_string(a.stage) + " out of range (task has " +
                          std::to_string(td.task.stages.size()) + " stages)");
  }
  const Stage& st = td.task.stages[static_cast<std::size_t>(a.stage)];
  if (a.candidate < 0 || static_cast<std::size_t>(a.candidate) >= st.candidates.size()) {
    throw IndexOutOfRange("candidate index " + std::to_string(a.candidate) + " out of range (stage has " +
                          std::to_string(st.candidates.size()) + " candidates)");
  }
  const SpatialConstraint& c = st.candidates[static_cast<std::size_t>(a.candidate)];
  const CameraSpec cam = scene_camera(sd.scene, a.camera.azimuth, a.camera.elevation, a.camera.distance);
  const Pose at = satisfying_active_pose(c, sd.scene.at(c.active.object_id), sd.scene.at(c.passive.object_id));
  if (std::filesystem::path(a.out).extension() == ".svg") {
    write_text(a.out, render_interaction_svg(sd.scene, &c, at, cam, !a.no_grid));
  } else {
    write_ppm(render_interaction(sd.scene, &c, at, cam, !a.no_grid), a.out);
  }
  return 0;
}

struct GenerateArgs {
  std::string scene, task, out;
  int episodes = 20;
  std::uint64_t seed = 0;
  double jitter_trans = 0.02;
  double jitter_yaw = 10.0;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const SceneDocument sd = load_scene_file(a.scene);
  const TaskDocument td = load_task_file(a.task, sd.scene);
  const DatasetSummary s =
      generate_dataset(sd, td, a.episodes, {a.jitter_trans, a.jitter_yaw}, a.seed, a.out);
  out << json{{"attempted", s.attempted}, {"succeeded", s.succeeded}}.dump() << "\n";
  return 0;
}

}  // namespace

SamplingReport bench_sampling(const SceneDocument& scene, const TaskDocument& task, int trials, std::uint64_t seed,
                              SamplingStrategy strategy, const RrcConfig& cfg, int stage_index) {
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  const int idx = stage_index < 0 ? first_constraint_stage(task.task) : stage_index;
  if (static_cast<std::size_t>(idx) >= task.task.stages.size()) throw IndexOutOfRange("stage index out of range");
  const Stage& st = task.task.stages[static_cast<std::size_t>(idx)];
  if (st.action == Action::Grasp) throw InvalidArgument("bench_sampling needs a constraint stage");
  const SceneObject& active = scene.scene.at(st.active_id);
  const Vec3 base = nearest_axis(active.object->functional_axis.value_or(Vec3::UnitZ()));
  const Vec3 e1 = any_perpendicular(base);
  const Vec3 e2 = base.cross(e1);
  const CandidateList axes = st.candidates.empty() ? enumerate_candidates(st, scene.scene) : st.candidates;
  const CameraSpec cam = scene_camera(scene.scene, 30.0);

  SamplingReport report;
  report.strategy = strategy;
  report.trials = trials;
  report.seed = seed;
  int total_checks = 0, successes = 0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed + static_cast<std::uint64_t>(t));
    const double angle = (rng.uniform() < 0.5 ? rng.uniform(0.0, 4.0) : rng.uniform(8.0, 20.0)) * kDeg;
    const double az = rng.uniform(0.0, 2.0 * M_PI);
    const Vec3 axis = std::cos(az) * e1 + std::sin(az) * e2;
    const Vec3 functional = Rotation::from_axis_angle(axis, angle).rotate(base).normalized();

    Scene truth = scene.scene;
    auto obj = std::make_shared<CanonicalObject>(*active.object);
    obj->functional_axis = functional;
    truth.at(st.active_id).object = obj;

    CandidateList k = axes;
    if (strategy == SamplingStrategy::Uniform) {
      for (SpatialConstraint& c : k) c.active.primitive.direction = rng.unit_vector().normalized();
    }
    GeometricChecker checker(truth);
    const CandidateRenderer renderer = [&](const SpatialConstraint& c, bool) { return render_candidate(truth, c, cam); };
    RrcConfig local = cfg;
    local.initial_max = std::min<int>(cfg.initial_max, static_cast<int>(k.size()));
    const RrcOutcome o = run_rrc(task.task.instruction, st, k, checker, renderer, local);
    const bool ok = o.kind == RrcOutcome::Kind::Chosen;
    report.checks_per_trial.push_back(o.checks_used);
    report.success_per_trial.push_back(ok);
    total_checks += o.checks_used;
    successes += ok ? 1 : 0;
  }
  report.mean_checks_used = static_cast<double>(total_checks) / trials;
  report.success_rate = static_cast<double>(successes) / trials;
  return report;
}

json sampling_report_to_json(const SamplingReport& r) {
  return {{"strategy", r.strategy == SamplingStrategy::Axes ? "axes" : "uniform"},
          {"trials", r.trials},
          {"seed", r.seed},
          {"mean_checks_used", r.mean_checks_used},
          {"success_rate", r.success_rate}};
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Object-centric manipulation planner: plan, execute, benchmark, render, generate"};
  app.require_subcommand(1);

  PlanArgs plan;
  auto* p = app.add_subcommand("plan", "choose a constraint per stage with render-and-check");
  p->add_option("--scene", plan.scene, "scene file")->required();
  p->add_option("--task", plan.task, "task file")->required();
  p->add_option("--oracle", plan.oracle.choice, "geometric | scripted:FILE | remote[:URL] | interactive");
  p->add_option("--oracle-timeout-ms", plan.oracle.timeout_ms, "remote oracle timeout");
  p->add_flag("--oracle-retry", plan.oracle.retry, "retry a failed remote request once");
  p->add_option("--seed", plan.seed, "seed");
  p->add_option("--render-dir", plan.render_dir, "write every rendered candidate here");
  p->add_option("--out", plan.out, "plan file (stdout when omitted)");
  p->add_option("--initial-max", plan.n, "candidates checked before giving up (N)")->check(CLI::PositiveNumber);
  p->add_option("--refine-max", plan.m, "refined candidates (M)")->check(CLI::PositiveNumber);
  add_camera_options(p, plan.camera);

  ExecuteArgs exe;
  auto* e = app.add_subcommand("execute", "run a plan in the kinematic simulator");
  e->add_option("--plan", exe.plan, "plan file")->required();
  e->add_option("--scene", exe.scene, "scene file")->required();
  e->add_option("--mode", exe.mode, "open | closed")->check(CLI::IsMember({"open", "closed"}));
  e->add_option("--disturb", exe.disturb, "disturbance file");
  e->add_option("--seed", exe.seed, "tracker seed");
  e->add_option("--trace", exe.trace, "write the trace as an episode record");
  e->add_option("--noise-trans", exe.noise_trans, "tracker translation noise std (m)");
  e->add_option("--noise-rot-deg", exe.noise_rot_deg, "tracker rotation noise std (deg)");
  e->add_option("--max-ticks", exe.max_ticks, "tick budget per stage");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench-sampling", "compare direction sampling strategies under RRC");
  b->add_option("--scene", bench.scene, "scene file")->required();
  b->add_option("--task", bench.task, "task file")->required();
  b->add_option("--trials", bench.trials, "trials")->check(CLI::PositiveNumber);
  b->add_option("--seed", bench.seed, "seed");
  b->add_option("--strategy", bench.strategy, "axes | uniform")->check(CLI::IsMember({"axes", "uniform"}));
  b->add_option("--stage", bench.stage, "stage index (default: first constraint stage)");
  b->add_option("--out", bench.out, "report file (stdout when omitted)");

  RenderArgs render;
  auto* r = app.add_subcommand("render", "render one candidate of one stage");
  r->add_option("--scene", render.scene, "scene file")->required();
  r->add_option("--task", render.task, "task file")->required();
  r->add_option("--stage", render.stage, "stage index")->required();
  r->add_option("--candidate", render.candidate, "candidate index")->required();
  r->add_option("--out", render.out, "output .ppm or .svg")->required();
  r->add_flag("--no-grid", render.no_grid, "omit the reference grid");
  add_camera_options(r, render.camera);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "record demonstration episodes as JSONL");
  g->add_option("--scene", gen.scene, "scene file")->required();
  g->add_option("--task", gen.task, "task file")->required();
  g->add_option("--episodes", gen.episodes, "episodes")->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed, "seed");
  g->add_option("--jitter-trans", gen.jitter_trans, "xy jitter (m)");
  g->add_option("--jitter-yaw", gen.jitter_yaw, "yaw jitter (deg)");
  g->add_option("--out", gen.out, "JSONL sink")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }

  try {
    if (*p) return cmd_plan(plan, out, err);
    if (*e) return cmd_execute(exe, out, err);
    if (*b) return cmd_bench(bench, out);
    if (*r) return cmd_render(render);
    if (*g) return cmd_generate(gen, out);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace canonimanip

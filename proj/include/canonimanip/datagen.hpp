#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "canonimanip/executor.hpp"
#include "canonimanip/json_io.hpp"
#include "canonimanip/planning.hpp"
#include "canonimanip/scenario.hpp"

namespace canonimanip {

struct EpisodeStep {
  double t = 0.0;
  Pose ee_pose;
  bool gripper_open = true;
  std::optional<std::string> held;
  std::map<std::string, Pose> objects;
  int stage = 0;
  std::string action;
  double residual = 0.0;
};

struct EpisodeRecord {
  int episode = 0;
  std::uint64_t seed = 0;
  std::string scenario_hash;
  bool success = false;
  std::map<std::string, Pose> initial_objects;
  std::vector<AppliedDisturbance> disturbances;
  std::vector<EpisodeStep> steps;
};

struct EpisodeMeta {
  int episode = 0;
  std::uint64_t seed = 0;
  std::string scenario_hash;
  bool success = false;
  std::map<std::string, Pose> initial_objects;
};

std::map<std::string, Pose> object_poses(const Scene& scene);

EpisodeRecord record_trace(const ExecutionTrace& trace, const EpisodeMeta& meta);

json episode_to_json(const EpisodeRecord& r);
EpisodeRecord episode_from_json(const json& j, const std::string& file = "episode");

// Re-drives the recorded end-effector poses and gripper attachments from the
// recorded initial object poses (applying recorded disturbances) and returns
// the largest deviation from the recorded final object poses: translation in
// meters or rotation in radians, whichever is larger. 0 for an empty record.
double replay_deviation(const EpisodeRecord& r);

struct Randomization {
  double trans_xy = 0.0;  // uniform in [-trans_xy, trans_xy] per axis, movable objects only
  double yaw_deg = 0.0;   // uniform in [-yaw_deg, yaw_deg] about world z through the object origin
};

struct DatasetOptions {
  ExecutorConfig exec;
  RrcConfig rrc;
  double camera_azimuth_deg = 30.0;
};

struct DatasetSummary {
  int attempted = 0;
  int succeeded = 0;
};

// Seeded pose jitter of the scene's movable objects.
Scene jitter_scene(const Scene& scene, const Randomization& rand, Rng& rng);

// Per episode (seed + index): jitter, plan with the geometric checker on the
// jittered scene, execute closed loop, append one JSON line to `sink`. The
// sink is opened before any work; IoError if it cannot be.
DatasetSummary generate_dataset(const SceneDocument& scene, const TaskDocument& task, int episodes,
                                const Randomization& rand, std::uint64_t seed, const std::filesystem::path& sink,
                                const DatasetOptions& opts = {});

}  // namespace canonimanip

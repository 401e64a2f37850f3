#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "canonimanip/planning.hpp"
#include "canonimanip/scenario.hpp"

namespace canonimanip {

enum class SamplingStrategy { Axes, Uniform };

struct SamplingReport {
  SamplingStrategy strategy = SamplingStrategy::Axes;
  int trials = 0;
  std::uint64_t seed = 0;
  double mean_checks_used = 0.0;
  double success_rate = 0.0;
  std::vector<int> checks_per_trial;
  std::vector<bool> success_per_trial;
};

// Per trial (seed + index) the active object's functional axis is tilted
// away from its nearest canonical axis: half the trials by at most 4
// degrees, the rest by 8 to 20 degrees, at a uniform azimuth. RRC then runs
// with the geometric checker on either the six canonical axes (task order)
// or six uniformly random directions, same N + M budget. `stage_index` < 0
// picks the first non-grasp stage.
SamplingReport bench_sampling(const SceneDocument& scene, const TaskDocument& task, int trials, std::uint64_t seed,
                              SamplingStrategy strategy, const RrcConfig& cfg = {}, int stage_index = -1);

json sampling_report_to_json(const SamplingReport& r);

// Entry point of the command-line tool. Exit codes: 0 success, 1 error,
// 2 the task or an execution stage failed.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace canonimanip

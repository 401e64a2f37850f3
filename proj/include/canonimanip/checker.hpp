#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "canonimanip/action.hpp"
#include "canonimanip/constraints.hpp"
#include "canonimanip/object_model.hpp"
#include "canonimanip/render.hpp"

namespace canonimanip {

struct CheckVerdict {
  enum class Kind { Success, Failure, Refine };
  Kind kind = Kind::Failure;
  std::string reason;

  static CheckVerdict success(std::string why = {}) { return {Kind::Success, std::move(why)}; }
  static CheckVerdict failure(std::string why = {}) { return {Kind::Failure, std::move(why)}; }
  static CheckVerdict refine(std::string why = {}) { return {Kind::Refine, std::move(why)}; }
};

// Lowercase wire names: "success", "failure", "refine".
std::string verdict_name(CheckVerdict::Kind k);
// Exact match only; throws InvalidArgument for anything else.
CheckVerdict::Kind parse_verdict(const std::string& s);

struct CheckRequest {
  std::string task_instruction;
  Action action = Action::Place;
  std::string active_id;
  std::string passive_id;
  SpatialConstraint candidate;
  RenderedImage image;
  bool refine_phase = false;
};

// Stand-in for the image-conditioned Check step.
class Checker {
 public:
  virtual ~Checker() = default;
  virtual CheckVerdict check(const CheckRequest& req) = 0;
};

// Replays a fixed verdict list, ignoring the request. Throws ScriptExhausted.
class ScriptedChecker : public Checker {
 public:
  explicit ScriptedChecker(std::vector<CheckVerdict::Kind> script) : script_(std::move(script)) {}
  CheckVerdict check(const CheckRequest& req) override;
  std::size_t calls() const noexcept { return next_; }

 private:
  std::vector<CheckVerdict::Kind> script_;
  std::size_t next_ = 0;
};

struct GeometricCheckConfig {
  Tolerances tol;
  double refine_band = 25.0 * M_PI / 180.0;
  double d_min = 0.02;  // clearance between the placed active object and bystanders
};

// Judges a candidate by placing the active object where the candidate holds
// and re-testing the constraint against the object's annotated functional
// axis. Success when that holds and no bystander object comes within d_min
// of the placed object; Refine when the candidate direction is within the
// refine band of the functional axis; Failure otherwise. Reads geometry only,
// never the image.
class GeometricChecker : public Checker {
 public:
  GeometricChecker(Scene ground_truth, GeometricCheckConfig cfg = {})
      : truth_(std::move(ground_truth)), cfg_(cfg) {}
  CheckVerdict check(const CheckRequest& req) override;

 private:
  Scene truth_;
  GeometricCheckConfig cfg_;
};

// JSON body POSTed to /check.
std::string encode_check_request(const CheckRequest& req);
// Throws OracleUnavailable for malformed JSON or an unknown verdict string.
CheckVerdict decode_check_response(const std::string& body);

std::string base64_encode(const std::string& bytes);

// HTTP client for a remote oracle. One request per call; with `retry_once`
// a failed transport is retried a single time (counted in attempts(), never
// in the planner's checks_used).
class RemoteChecker : public Checker {
 public:
  RemoteChecker(std::string endpoint_url, std::chrono::milliseconds timeout, bool retry_once = false);
  CheckVerdict check(const CheckRequest& req) override;
  std::size_t attempts() const noexcept { return attempts_; }

 private:
  std::string scheme_host_port_;
  std::string path_;
  std::chrono::milliseconds timeout_;
  bool retry_once_;
  std::size_t attempts_ = 0;
};

// Human at a terminal: saves the image, prompts "[s]uccess / [f]ail / [r]efine".
// Throws OracleUnavailable when the input closes.
class InteractiveChecker : public Checker {
 public:
  InteractiveChecker(std::istream& in, std::ostream& out,
                     std::filesystem::path image_dir = std::filesystem::temp_directory_path());
  CheckVerdict check(const CheckRequest& req) override;

 private:
  std::istream& in_;
  std::ostream& out_;
  std::filesystem::path image_dir_;
  std::size_t counter_ = 0;
};

}  // namespace canonimanip

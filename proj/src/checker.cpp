#include "canonimanip/checker.hpp"

#include <cctype>
#include <istream>
#include <limits>
#include <ostream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "canonimanip/errors.hpp"

namespace canonimanip {

using nlohmann::json;

std::string verdict_name(CheckVerdict::Kind k) {
  switch (k) {
    case CheckVerdict::Kind::Success: return "success";
    case CheckVerdict::Kind::Failure: return "failure";
    case CheckVerdict::Kind::Refine: return "refine";
  }
  return "failure";
}

CheckVerdict::Kind parse_verdict(const std::string& s) {
  if (s == "success") return CheckVerdict::Kind::Success;
  if (s == "failure") return CheckVerdict::Kind::Failure;
  if (s == "refine") return CheckVerdict::Kind::Refine;
  throw InvalidArgument("unknown verdict '" + s + "'");
}

CheckVerdict ScriptedChecker::check(const CheckRequest&) {
  if (next_ >= script_.size()) throw ScriptExhausted();
  return {script_[next_++], "scripted"};
}

namespace {

double min_cloud_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec3& p : a) {
    for (const Vec3& q : b) best = std::min(best, (p - q).squaredNorm());
  }
  return std::sqrt(best);
}

}  // namespace

CheckVerdict GeometricChecker::check(const CheckRequest& req) {
  const SpatialConstraint& cand = req.candidate;
  const SceneObject& active = truth_.at(cand.active.object_id);
  const SceneObject& passive = truth_.at(cand.passive.object_id);

  SceneObject placed = active;
  placed.pose = satisfying_active_pose(cand, active, passive);

  const Vec3 functional = active.object->functional_axis.value_or(cand.active.primitive.direction);
  SpatialConstraint truth = cand;
  truth.active.primitive.direction = functional;

  const std::vector<Vec3> placed_points = placed.world_points();
  for (const SceneObject& other : truth_.objects) {
    if (other.id() == active.id() || other.id() == passive.id()) continue;
    if (min_cloud_distance(placed_points, other.world_points()) < cfg_.d_min) {
      return CheckVerdict::failure("placed object collides with '" + other.id() + "'");
    }
  }

  if (constraint_satisfied(truth, placed, passive, cfg_.tol)) return CheckVerdict::success("functional axis aligned");
  const double err = direction_angle(cand.active.primitive.direction, functional);
  if (err <= cfg_.refine_band) return CheckVerdict::refine("direction close to the functional axis");
  return CheckVerdict::failure("direction far from the functional axis");
}

std::string base64_encode(const std::string& bytes) {
  static constexpr char kTable[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                       (static_cast<unsigned char>(bytes[i + 1]) << 8) | static_cast<unsigned char>(bytes[i + 2]);
    out += kTable[(v >> 18) & 63];
    out += kTable[(v >> 12) & 63];
    out += kTable[(v >> 6) & 63];
    out += kTable[v & 63];
  }
  if (i + 1 == bytes.size()) {
    const unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
    out += kTable[(v >> 18) & 63];
    out += kTable[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) | (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out += kTable[(v >> 18) & 63];
    out += kTable[(v >> 12) & 63];
    out += kTable[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::string encode_check_request(const CheckRequest& req) {
  const Vec3& d = req.candidate.active.primitive.direction;
  json body;
  body["task"] = req.task_instruction;
  body["stage"] = {{"action", std::string(action_name(req.action))},
                   {"active", req.active_id},
                   {"passive", req.passive_id},
                   {"refine", req.refine_phase}};
  body["candidate"] = {{"direction", {d.x(), d.y(), d.z()}},
                       {"distance_m", req.candidate.target_distance},
                       {"angle_rad", req.candidate.target_angle ? json(*req.candidate.target_angle) : json(nullptr)}};
  body["image"] = {{"format", "ppm"}, {"base64", base64_encode(encode_ppm(req.image))}};
  return body.dump();
}

CheckVerdict decode_check_response(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw OracleUnavailable(std::string("malformed oracle response: ") + e.what());
  }
  if (!j.is_object() || !j.contains("verdict") || !j["verdict"].is_string()) {
    throw OracleUnavailable("oracle response lacks a string 'verdict'");
  }
  CheckVerdict v;
  try {
    v.kind = parse_verdict(j["verdict"].get<std::string>());
  } catch (const InvalidArgument& e) {
    throw OracleUnavailable(e.what());
  }
  if (j.contains("reason")) {
    if (!j["reason"].is_string()) throw OracleUnavailable("oracle response 'reason' must be a string");
    v.reason = j["reason"].get<std::string>();
  }
  return v;
}

RemoteChecker::RemoteChecker(std::string endpoint_url, std::chrono::milliseconds timeout, bool retry_once)
    : timeout_(timeout), retry_once_(retry_once) {
  // Split "http://host:port/prefix" into the client base and a path prefix.
  const auto scheme_end = endpoint_url.find("://");
  if (scheme_end == std::string::npos) throw InvalidArgument("oracle URL must include a scheme: " + endpoint_url);
  const auto path_start = endpoint_url.find('/', scheme_end + 3);
  scheme_host_port_ = endpoint_url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : endpoint_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/check";
}

CheckVerdict RemoteChecker::check(const CheckRequest& req) {
  const std::string body = encode_check_request(req);
  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  const int tries = retry_once_ ? 2 : 1;
  std::string last_error = "no attempt made";
  for (int t = 0; t < tries; ++t) {
    ++attempts_;
    auto res = client.Post(path_, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) throw OracleUnavailable("oracle returned HTTP " + std::to_string(res->status));
    return decode_check_response(res->body);
  }
  throw OracleUnavailable(last_error);
}

InteractiveChecker::InteractiveChecker(std::istream& in, std::ostream& out, std::filesystem::path image_dir)
    : in_(in), out_(out), image_dir_(std::move(image_dir)) {}

CheckVerdict InteractiveChecker::check(const CheckRequest& req) {
  const auto path = image_dir_ / ("canonimanip_check_" + std::to_string(counter_++) + ".ppm");
  write_ppm(req.image, path);
  const Vec3& d = req.candidate.active.primitive.direction;
  out_ << "stage " << action_name(req.action) << " " << req.active_id << " -> " << req.passive_id
       << (req.refine_phase ? " (refine phase)" : "") << "\n"
       << "candidate direction (" << d.x() << ", " << d.y() << ", " << d.z() << "), image: " << path.string() << "\n";
  std::string line;
  while (true) {
    out_ << "[s]uccess / [f]ail / [r]efine: " << std::flush;
    if (!std::getline(in_, line)) throw OracleUnavailable("interactive input closed");
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    switch (std::tolower(static_cast<unsigned char>(line[first]))) {
      case 's': return CheckVerdict::success("operator");
      case 'f': return CheckVerdict::failure("operator");
      case 'r': return CheckVerdict::refine("operator");
      default: break;
    }
  }
}

}  // namespace canonimanip

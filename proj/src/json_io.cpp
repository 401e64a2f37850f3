#include "canonimanip/json_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "canonimanip/errors.hpp"

namespace canonimanip {

namespace {

std::size_t line_of(std::string_view text, std::size_t byte) {
  const std::size_t end = std::min(byte, text.size());
  std::size_t line = 1;
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

std::string loc(const std::string& pointer) { return pointer.empty() ? "/" : pointer; }

}  // namespace

json parse_json_document(std::string_view text, const std::string& file) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // Byte offsets from the parser point one past the offending character.
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    throw ParseError(file, line_of(text, byte), "", "invalid JSON");
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json_document(ss.str(), path);
}

ObjectReader::ObjectReader(const json& j, std::string pointer, std::string file)
    : j_(j), pointer_(std::move(pointer)), file_(std::move(file)) {
  if (!j_.is_object()) fail(pointer_, "expected an object");
}

void ObjectReader::fail(const std::string& pointer, const std::string& message) const {
  throw ParseError(file_, 0, loc(pointer), message);
}

bool ObjectReader::has(const std::string& key) const { return j_.contains(key); }

const json& ObjectReader::required(const std::string& key) {
  if (!j_.contains(key)) fail(pointer_, "missing required field '" + key + "'");
  used_.insert(key);
  return j_.at(key);
}

const json* ObjectReader::optional(const std::string& key) {
  if (!j_.contains(key)) return nullptr;
  used_.insert(key);
  return &j_.at(key);
}

std::string ObjectReader::string(const std::string& key) { return json_string(required(key), child(key), file_); }

double ObjectReader::number(const std::string& key) { return json_number(required(key), child(key), file_); }

double ObjectReader::number_or(const std::string& key, double fallback) {
  const json* v = optional(key);
  return v ? json_number(*v, child(key), file_) : fallback;
}

bool ObjectReader::boolean_or(const std::string& key, bool fallback) {
  const json* v = optional(key);
  if (!v) return fallback;
  if (!v->is_boolean()) fail(child(key), "expected a boolean");
  return v->get<bool>();
}

Vec3 ObjectReader::vec3(const std::string& key) { return json_vec3(required(key), child(key), file_); }

Pose ObjectReader::pose(const std::string& key) { return json_pose(required(key), child(key), file_); }

ObjectReader ObjectReader::object(const std::string& key) { return ObjectReader(required(key), child(key), file_); }

void ObjectReader::finish() const {
  for (const auto& [key, value] : j_.items()) {
    if (!used_.count(key)) fail(child(key), "unknown field '" + key + "'");
  }
}

double json_number(const json& j, const std::string& pointer, const std::string& file) {
  if (!j.is_number()) throw ParseError(file, 0, loc(pointer), "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(file, 0, loc(pointer), "expected a finite number");
  return v;
}

std::string json_string(const json& j, const std::string& pointer, const std::string& file) {
  if (!j.is_string()) throw ParseError(file, 0, loc(pointer), "expected a string");
  return j.get<std::string>();
}

Vec3 json_vec3(const json& j, const std::string& pointer, const std::string& file) {
  if (!j.is_array() || j.size() != 3) throw ParseError(file, 0, loc(pointer), "expected an array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) v(i) = json_number(j[i], pointer + "/" + std::to_string(i), file);
  return v;
}

Pose json_pose(const json& j, const std::string& pointer, const std::string& file) {
  ObjectReader r(j, pointer, file);
  Pose p;
  if (const json* t = r.optional("t")) p.translation = json_vec3(*t, r.child("t"), file);
  const json* q = r.optional("q");
  const json* rpy = r.optional("rpy_deg");
  if (q && rpy) r.fail(pointer, "give either 'q' or 'rpy_deg', not both");
  if (q) {
    if (!q->is_array() || q->size() != 4) r.fail(r.child("q"), "expected [w, x, y, z]");
    double c[4];
    for (int i = 0; i < 4; ++i) c[i] = json_number((*q)[i], r.child("q") + "/" + std::to_string(i), file);
    try {
      p.rotation = Rotation::from_wxyz(c[0], c[1], c[2], c[3]);
    } catch (const Error&) {
      r.fail(r.child("q"), "zero quaternion");
    }
  } else if (rpy) {
    const Vec3 a = json_vec3(*rpy, r.child("rpy_deg"), file) * (M_PI / 180.0);
    p.rotation = Rotation::from_rpy(a.x(), a.y(), a.z());
  }
  r.finish();
  return p;
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json to_json(const Pose& p) {
  const Rotation& r = p.rotation;
  return {{"q", json::array({r.w(), r.x(), r.y(), r.z()})}, {"t", to_json(p.translation)}};
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace canonimanip

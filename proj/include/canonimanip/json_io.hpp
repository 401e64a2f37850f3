#pragma once

#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "canonimanip/geometry.hpp"

namespace canonimanip {

using nlohmann::json;

// Parses `text`; syntax errors become ParseError carrying the line number.
json parse_json_document(std::string_view text, const std::string& file);

// Reads a file and parses it. Throws IoError when it cannot be read.
json load_json_file(const std::string& path);

// Strict view of one JSON object: every key must be consumed before
// finish(), which rejects leftovers as unknown fields. Errors carry the JSON
// pointer of the offending value.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string pointer, std::string file);

  bool has(const std::string& key) const;
  const json& required(const std::string& key);
  const json* optional(const std::string& key);

  std::string string(const std::string& key);
  double number(const std::string& key);
  double number_or(const std::string& key, double fallback);
  bool boolean_or(const std::string& key, bool fallback);
  Vec3 vec3(const std::string& key);
  Pose pose(const std::string& key);

  // Child readers and helpers for values below this object.
  ObjectReader object(const std::string& key);
  std::string child(const std::string& key) const { return pointer_ + "/" + key; }
  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const;

  void finish() const;

  const std::string& pointer() const { return pointer_; }
  const std::string& file() const { return file_; }

 private:
  const json& j_;
  std::string pointer_;
  std::string file_;
  std::set<std::string> used_;
};

double json_number(const json& j, const std::string& pointer, const std::string& file);
std::string json_string(const json& j, const std::string& pointer, const std::string& file);
Vec3 json_vec3(const json& j, const std::string& pointer, const std::string& file);
// {"q": [w, x, y, z], "t": [x, y, z]} or {"t": [...], "rpy_deg": [r, p, y]}.
Pose json_pose(const json& j, const std::string& pointer, const std::string& file);

json to_json(const Vec3& v);
json to_json(const Pose& p);

// FNV-1a 64-bit, lowercase hex.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace canonimanip

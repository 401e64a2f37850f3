#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace canonimanip {

// Root of every error raised by the library. Callers that only need to
// distinguish "our" failures from std exceptions can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violation on an argument (bad count, non-positive scale, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class NotUnit : public Error {
 public:
  using Error::Error;
};

class UnknownObject : public Error {
 public:
  explicit UnknownObject(std::string id)
      : Error("unknown object '" + id + "'"), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class EmptyCandidates : public Error {
 public:
  EmptyCandidates() : Error("candidate list is empty") {}
};

class MissingNamedPoint : public Error {
 public:
  MissingNamedPoint(std::string object_id, std::string label)
      : Error("object '" + object_id + "' has no named point '" + label + "'"),
        label_(std::move(label)) {}
  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

// Schema or syntax problem in an input document. `location` is a JSON pointer
// into the document; `line` is 0 when the position is not known.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, std::string location, const std::string& message)
      : Error(format(file, line, location, message)),
        file_(std::move(file)),
        line_(line),
        location_(std::move(location)) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& location() const noexcept { return location_; }

 private:
  static std::string format(const std::string& file, std::size_t line, const std::string& location,
                            const std::string& message) {
    std::string out = file.empty() ? std::string("<input>") : file;
    if (line > 0) out += ":" + std::to_string(line);
    if (!location.empty()) out += ": " + location;
    return out + ": " + message;
  }

  std::string file_;
  std::size_t line_;
  std::string location_;
};

// The checker could not produce a verdict (transport fault, timeout, closed
// input, malformed reply). Distinct from a plan being rejected.
class OracleUnavailable : public Error {
 public:
  using Error::Error;
};

class ScriptExhausted : public OracleUnavailable {
 public:
  ScriptExhausted() : OracleUnavailable("scripted checker has no verdicts left") {}
};

class DegenerateCamera : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NonFiniteLoss : public Error {
 public:
  NonFiniteLoss() : Error("loss evaluated to a non-finite value") {}
};

class ActionStageMismatch : public Error {
 public:
  using Error::Error;
};

class HeldObject : public Error {
 public:
  explicit HeldObject(const std::string& id) : Error("object '" + id + "' is held by the gripper") {}
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

}  // namespace canonimanip

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace seismap {

/// Base of every error raised by the library. `kind()` is a stable,
/// machine-readable tag used by the CLI error line.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class SizeError : public Error {
public:
  explicit SizeError(const std::string& message) : Error("size", message) {}
};

class DegenerateError : public Error {
public:
  explicit DegenerateError(const std::string& message) : Error("degenerate", message) {}
};

class NumericError : public Error {
public:
  explicit NumericError(const std::string& message) : Error("numeric", message) {}
};

class UndefinedCorrelationError : public Error {
public:
  explicit UndefinedCorrelationError(const std::string& message)
      : Error("undefined_correlation", message) {}
};

class AlignmentError : public Error {
public:
  AlignmentError(std::string event_id, const std::string& message)
      : Error("alignment", message), event_id_(std::move(event_id)) {}

  const std::string& event_id() const noexcept { return event_id_; }

private:
  std::string event_id_;
};

class TruncationError : public Error {
public:
  enum class Side { Before, After };

  TruncationError(Side side, const std::string& message)
      : Error("truncation", message), side_(side) {}

  Side side() const noexcept { return side_; }

private:
  Side side_;
};

class IngestError : public Error {
public:
  explicit IngestError(const std::string& message) : Error("ingest", message) {}
};

class RunError : public Error {
public:
  explicit RunError(const std::string& message) : Error("run", message) {}
};

}  // namespace seismap

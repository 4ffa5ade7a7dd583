#pragma once

#include <stdexcept>
#include <string>

namespace hanalab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IllegalActionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TerminalStateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Text or JSONL that does not match the expected grammar. Carries the
// 1-based position of the offending input.
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line, int column = 0)
      : std::runtime_error("parse error at line " + std::to_string(line) +
                           (column > 0 ? ", column " + std::to_string(column) : std::string()) +
                           ": " + msg),
        line(line),
        column(column) {}
  int line;
  int column;
};

struct VersionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CompatibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& msg)
      : std::runtime_error("stage '" + stage + "' failed: " + msg), stage(stage) {}
  std::string stage;
};

}  // namespace hanalab

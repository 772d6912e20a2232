#pragma once

#include <stdexcept>
#include <string>

namespace rydagg {

/// Two atoms at (numerically) the same position; the Hamiltonian is undefined.
class SingularGeometry : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised inside a trajectory when atoms approach closer than the abort radius.
class TrajectoryAborted : public std::runtime_error {
 public:
  TrajectoryAborted(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Malformed or inconsistent configuration. Carries the offending line (0 if
/// not from a file) and key so the CLI can point at it.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string key = {}, int line = 0)
      : std::runtime_error(format(what, key, line)), key_(std::move(key)), line_(line) {}
  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& what, const std::string& key, int line) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!key.empty()) out += "'" + key + "': ";
    return out + what;
  }
  std::string key_;
  int line_;
};

}  // namespace rydagg

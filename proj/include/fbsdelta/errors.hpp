#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace fbsdelta {

// Base for all library errors. `code()` is a stable machine-readable tag,
// `what()` a human-readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// A branch spec whose mean is not 0 or variance is not 1 within tolerance.
class MomentViolation : public Error {
 public:
  MomentViolation(const std::string& message, int level = -1)
      : Error("MomentViolation", message), level_(level) {}
  int level() const noexcept { return level_; }

 private:
  int level_;
};

// Non-positive probabilities, or probabilities that do not sum to one.
class BadProbability : public Error {
 public:
  BadProbability(const std::string& message, int level = -1)
      : Error("BadProbability", message), level_(level) {}
  int level() const noexcept { return level_; }

 private:
  int level_;
};

class LevelMismatch : public Error {
 public:
  explicit LevelMismatch(const std::string& message) : Error("LevelMismatch", message) {}
};

class ShapeMismatch : public Error {
 public:
  explicit ShapeMismatch(const std::string& message) : Error("ShapeMismatch", message) {}
};

class ControlOutsideSet : public Error {
 public:
  explicit ControlOutsideSet(const std::string& message) : Error("ControlOutsideSet", message) {}
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& message, double best_residual, int iterations)
      : Error("NonConvergence", message),
        best_residual_(best_residual),
        iterations_(iterations) {}
  double best_residual() const noexcept { return best_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double best_residual_;
  int iterations_;
};

class SingularJacobian : public Error {
 public:
  SingularJacobian(const std::string& message, std::string location)
      : Error("SingularJacobian", message), location_(std::move(location)) {}
  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

class SingularSystem : public Error {
 public:
  SingularSystem(const std::string& message, std::ptrdiff_t rank_defect)
      : Error("SingularSystem", message), rank_defect_(rank_defect) {}
  std::ptrdiff_t rank_defect() const noexcept { return rank_defect_; }

 private:
  std::ptrdiff_t rank_defect_;
};

class UncertifiedSolution : public Error {
 public:
  explicit UncertifiedSolution(const std::string& message)
      : Error("UncertifiedSolution", message) {}
};

class SingularC4 : public Error {
 public:
  explicit SingularC4(const std::string& message) : Error("SingularC4", message) {}
};

class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& message)
      : Error("InvariantViolation", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("ConfigError", message) {}
};

}  // namespace fbsdelta

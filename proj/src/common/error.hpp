#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mfg {

// Numeric values double as CLI exit codes and C API status codes.
enum class ErrorCode : int {
  Internal = 1,
  Config = 2,
  NonConvergence = 3,
  Budget = 4,
  Numerical = 5,   // CFL violation, H* domain violation, capability limits
  InvalidArgument = 6,
  Io = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::Config, what) {}
};

class BudgetExceeded : public Error {
 public:
  explicit BudgetExceeded(const std::string& what) : Error(ErrorCode::Budget, what) {}
};

class CflViolation : public Error {
 public:
  explicit CflViolation(const std::string& what) : Error(ErrorCode::Numerical, what) {}
};

class CapabilityError : public Error {
 public:
  explicit CapabilityError(const std::string& what) : Error(ErrorCode::Numerical, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCode::Numerical, what) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorCode::InvalidArgument, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::Io, what) {}
};

/// Raised when a fixed-point iteration runs out of sweeps. Carries the gap
/// history so callers can log it.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, std::vector<double> gaps)
      : Error(ErrorCode::NonConvergence, what), gaps_(std::move(gaps)) {}
  const std::vector<double>& gap_history() const noexcept { return gaps_; }

 private:
  std::vector<double> gaps_;
};

/// Blow-up guard tripped (sup|u| too large).
class Divergence : public Error {
 public:
  explicit Divergence(const std::string& what) : Error(ErrorCode::NonConvergence, what) {}
};

}  // namespace mfg

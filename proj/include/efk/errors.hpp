#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace efk {

/// Failure categories raised by the library. Each maps to one named error
/// condition of an operation; the CLI maps them onto exit codes.
enum class Errc {
  NonLipschitz,
  NoThreshold,
  BadRange,
  BelowThreshold,
  NonPositive,
  NonMonotoneFeasibility,
  UnstableEquilibrium,
  NoConvergence,
  DomainTooSmall,
  BracketNotStraddling,
  Blowup,
  TooFewNodes,
  BelowCritical,
  UnknownKind,
  GridMismatch,
  NoTransverseAxis,
  ShiftNotOnGrid,
  InvalidArgument,
  Config,
  Io,
};

const char* to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised by iterative solvers; carries the residual trail so callers can
/// decide whether to retry with other settings.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, std::vector<double> history, std::size_t iterations)
      : Error(Errc::NoConvergence, what), history_(std::move(history)), iterations_(iterations) {}

  const std::vector<double>& history() const noexcept { return history_; }
  std::size_t iterations() const noexcept { return iterations_; }
  double last_residual() const noexcept { return history_.empty() ? 0.0 : history_.back(); }

 private:
  std::vector<double> history_;
  std::size_t iterations_;
};

}  // namespace efk

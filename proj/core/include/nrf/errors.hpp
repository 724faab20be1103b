#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nrf {

enum class ErrorCode {
  dimension_mismatch,
  singular_resolvent,
  non_invertible_feedthrough,
  unbounded,
  uncontrollable_mode,
  non_stabilizing,
  bezout_residual,
  normalization,
  not_strictly_proper,
  singular_diagonal,
  inheritance_violation,
  comm_violation,
  non_fir,
  algebraic_loop,
  unavailable_message,
  nonzero_feedthrough,
  invalid_argument,
  config,
  io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by frequency evaluation when z is (numerically) a pole.
class SingularResolventError : public Error {
 public:
  SingularResolventError(double min_singular_value, const std::string& what)
      : Error(ErrorCode::singular_resolvent, what),
        min_singular_value_(min_singular_value) {}

  double min_singular_value() const noexcept { return min_singular_value_; }

 private:
  double min_singular_value_;
};

/// Structural check failure carrying the offending index pairs (1-based).
class ViolationError : public Error {
 public:
  ViolationError(ErrorCode code, std::vector<std::pair<int, int>> pairs,
                 const std::string& what)
      : Error(code, what), pairs_(std::move(pairs)) {}

  const std::vector<std::pair<int, int>>& pairs() const noexcept {
    return pairs_;
  }

 private:
  std::vector<std::pair<int, int>> pairs_;
};

}  // namespace nrf

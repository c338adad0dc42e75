#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ovmkit {

enum class ErrorKind {
  InvalidInput,
  NotPositive,
  DimMismatch,
  ShapeMismatch,
  SpaceMismatch,
  DerivativeDoesNotExist,
  NotSelfAdjoint,
  Unsupported,
  AtomicObstruction,
  TargetNotInHull,
  SizeLimit,
};

const char* to_string(ErrorKind kind) noexcept;

/// Library exception. `indices` carries the offending cell (or atom) indices
/// for the kinds that name them (DerivativeDoesNotExist, AtomicObstruction).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::vector<std::size_t> indices = {})
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        indices_(std::move(indices)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  ErrorKind kind_;
  std::vector<std::size_t> indices_;
};

}  // namespace ovmkit

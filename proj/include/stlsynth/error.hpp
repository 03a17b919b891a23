#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stlsynth {

enum class ErrorKind {
  DimensionMismatch,
  EmptySet,
  UnsupportedDimension,
  ComplexityGuard,
  InvalidArgument,
  NumericalFailure,
  NoConvergence,
  DegenerateCenters,
  NonConvexGap,
  SyntaxError,
  UnknownRegion,
  MalformedInterval,
  OutOfWindow,
  HorizonTooShort,
  UnsupportedFragment,
  NoPath,
  ZeroEvaluation,
  WindowConflict,
  Infeasible,
  StateExplosion,
  Io,
  Parse,
};

std::string_view to_string(ErrorKind kind);

/// Exception carrying a machine-readable kind and, once it passes through
/// the pipeline driver, the name of the stage that raised it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::string stage = {})
      : std::runtime_error(what), kind_(kind), stage_(std::move(stage)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }
  void set_stage(std::string stage) { stage_ = std::move(stage); }

 private:
  ErrorKind kind_;
  std::string stage_;
};

}  // namespace stlsynth

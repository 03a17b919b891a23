#include "stlsynth/error.hpp"
#include "stlsynth/linalg.hpp"

namespace stlsynth {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptySet: return "EmptySet";
    case ErrorKind::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorKind::ComplexityGuard: return "ComplexityGuard";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DegenerateCenters: return "DegenerateCenters";
    case ErrorKind::NonConvexGap: return "NonConvexGap";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnknownRegion: return "UnknownRegion";
    case ErrorKind::MalformedInterval: return "MalformedInterval";
    case ErrorKind::OutOfWindow: return "OutOfWindow";
    case ErrorKind::HorizonTooShort: return "HorizonTooShort";
    case ErrorKind::UnsupportedFragment: return "UnsupportedFragment";
    case ErrorKind::NoPath: return "NoPath";
    case ErrorKind::ZeroEvaluation: return "ZeroEvaluation";
    case ErrorKind::WindowConflict: return "WindowConflict";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::StateExplosion: return "StateExplosion";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

MatrixXd projection_matrix(const Projection& indices, int dim) {
  MatrixXd P = MatrixXd::Zero(static_cast<int>(indices.size()), dim);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] < 0 || indices[r] >= dim) {
      throw Error(ErrorKind::DimensionMismatch,
                  "projection index " + std::to_string(indices[r]) +
                      " outside state dimension " + std::to_string(dim));
    }
    P(static_cast<int>(r), indices[r]) = 1.0;
  }
  return P;
}

}  // namespace stlsynth

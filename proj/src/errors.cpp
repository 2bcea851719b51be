#include "efk/errors.hpp"

namespace efk {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::NonLipschitz: return "NonLipschitz";
    case Errc::NoThreshold: return "NoThreshold";
    case Errc::BadRange: return "BadRange";
    case Errc::BelowThreshold: return "BelowThreshold";
    case Errc::NonPositive: return "NonPositive";
    case Errc::NonMonotoneFeasibility: return "NonMonotoneFeasibility";
    case Errc::UnstableEquilibrium: return "UnstableEquilibrium";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::DomainTooSmall: return "DomainTooSmall";
    case Errc::BracketNotStraddling: return "BracketNotStraddling";
    case Errc::Blowup: return "Blowup";
    case Errc::TooFewNodes: return "TooFewNodes";
    case Errc::BelowCritical: return "BelowCritical";
    case Errc::UnknownKind: return "UnknownKind";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::NoTransverseAxis: return "NoTransverseAxis";
    case Errc::ShiftNotOnGrid: return "ShiftNotOnGrid";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Config: return "ConfigError";
    case Errc::Io: return "IoError";
  }
  return "Unknown";
}

}  // namespace efk

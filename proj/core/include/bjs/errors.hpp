#pragma once

#include <stdexcept>
#include <string>

namespace bjs {

// Failure kinds surfaced by library operations. Recoverable outcomes
// (partial enumerations, failed certificates, seed-not-found) are returned
// as values; exceptions are reserved for violated preconditions and
// unrecoverable arithmetic.
enum class ErrorKind {
  PrecisionExhausted,
  ModelMismatch,
  LinearAlgebraFailure,
  DegeneratePair,
  NoSamples,
  AmsSearchFailed,
  ScaleInfeasible,
  SubcriticalS,
  InsufficientRange,
  ConventionMismatch,
  PhiConeMismatch,
  NotGeodesic,
  ConfigError,
  IoError,
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::PrecisionExhausted: return "precision-exhausted";
    case ErrorKind::ModelMismatch: return "model-mismatch";
    case ErrorKind::LinearAlgebraFailure: return "linear-algebra-failure";
    case ErrorKind::DegeneratePair: return "degenerate-pair";
    case ErrorKind::NoSamples: return "no-samples";
    case ErrorKind::AmsSearchFailed: return "ams-search-failed";
    case ErrorKind::ScaleInfeasible: return "scale-infeasible";
    case ErrorKind::SubcriticalS: return "subcritical-s";
    case ErrorKind::InsufficientRange: return "insufficient-range";
    case ErrorKind::ConventionMismatch: return "convention-mismatch";
    case ErrorKind::PhiConeMismatch: return "phi-cone-mismatch";
    case ErrorKind::NotGeodesic: return "not-geodesic";
    case ErrorKind::ConfigError: return "config-error";
    case ErrorKind::IoError: return "io-error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what),
        kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bjs

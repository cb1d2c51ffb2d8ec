#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rssiloc {

enum class ErrorKind {
  // scene / configuration
  TooFewAnchors,
  DegenerateGeometry,
  Config,
  // radio + filters
  NonPositiveDistance,
  EmptySignal,
  ZeroWindow,
  NonPositiveSigma,
  // solvers
  CollinearAnchors,
  NoIntersection,
  RankDeficient,
  NotPositiveDefinite,
  // learners
  EmptyDataset,
  ShapeMismatch,
  EmptyTrainingSet,
  KTooLarge,
  TooFewSamples,
  // eval
  LengthMismatch,
  EmptyMatrix,
  // ingest
  MissingColumn,
  MalformedNumber,
  UnmappedLocation,
  IoFailure,
};

/// Coarse failure classes. The CLI maps them onto exit codes 2, 3 and 4.
enum class ErrorClass { Config, Data, Numerical };

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::TooFewAnchors: return "TooFewAnchors";
    case ErrorKind::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorKind::Config: return "Config";
    case ErrorKind::NonPositiveDistance: return "NonPositiveDistance";
    case ErrorKind::EmptySignal: return "EmptySignal";
    case ErrorKind::ZeroWindow: return "ZeroWindow";
    case ErrorKind::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorKind::CollinearAnchors: return "CollinearAnchors";
    case ErrorKind::NoIntersection: return "NoIntersection";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::MalformedNumber: return "MalformedNumber";
    case ErrorKind::UnmappedLocation: return "UnmappedLocation";
    case ErrorKind::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

constexpr ErrorClass classify(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::TooFewAnchors:
    case ErrorKind::DegenerateGeometry:
    case ErrorKind::Config:
    case ErrorKind::ZeroWindow:
    case ErrorKind::NonPositiveSigma:
    case ErrorKind::KTooLarge:
      return ErrorClass::Config;
    case ErrorKind::CollinearAnchors:
    case ErrorKind::NoIntersection:
    case ErrorKind::RankDeficient:
    case ErrorKind::NotPositiveDefinite:
      return ErrorClass::Numerical;
    default:
      return ErrorClass::Data;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace rssiloc

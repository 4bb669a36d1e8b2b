// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 kppfront authors

#pragma once

#include <stdexcept>
#include <string>

namespace kppfront {

enum class ErrorCode {
  // model
  ZeroMismatch,
  WrongSlopeSign,
  NotConcave,
  NotNormalized,
  EmptyKernel,
  // continuum
  CriticalOrSubcriticalSpeed,
  NonMonotoneProfile,
  TailFitFailure,
  DecayCertificateFailure,
  NoAdmissibleTheta,
  // weight
  SmoothingFailure,
  // linear theory
  GridMismatch,
  SingularOperator,
  EigSolverNoConvergence,
  NonPositiveMargin,
  // front solver
  NewtonDiverged,
  DerivativeNearZero,
  ResidualGrowth,
  AmplitudeTooLarge,
  NotContracting,
  LeftBall,
  VerificationFailure,
  // lattice simulation
  BlowUp,
  StabilityCapViolated,
  PoorFit,
  // configuration / IO
  ConfigError,
  IoError,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::ZeroMismatch: return "ZeroMismatch";
    case ErrorCode::WrongSlopeSign: return "WrongSlopeSign";
    case ErrorCode::NotConcave: return "NotConcave";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::EmptyKernel: return "EmptyKernel";
    case ErrorCode::CriticalOrSubcriticalSpeed: return "CriticalOrSubcriticalSpeed";
    case ErrorCode::NonMonotoneProfile: return "NonMonotoneProfile";
    case ErrorCode::TailFitFailure: return "TailFitFailure";
    case ErrorCode::DecayCertificateFailure: return "DecayCertificateFailure";
    case ErrorCode::NoAdmissibleTheta: return "NoAdmissibleTheta";
    case ErrorCode::SmoothingFailure: return "SmoothingFailure";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::SingularOperator: return "SingularOperator";
    case ErrorCode::EigSolverNoConvergence: return "EigSolverNoConvergence";
    case ErrorCode::NonPositiveMargin: return "NonPositiveMargin";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::DerivativeNearZero: return "DerivativeNearZero";
    case ErrorCode::ResidualGrowth: return "ResidualGrowth";
    case ErrorCode::AmplitudeTooLarge: return "AmplitudeTooLarge";
    case ErrorCode::NotContracting: return "NotContracting";
    case ErrorCode::LeftBall: return "LeftBall";
    case ErrorCode::VerificationFailure: return "VerificationFailure";
    case ErrorCode::BlowUp: return "BlowUp";
    case ErrorCode::StabilityCapViolated: return "StabilityCapViolated";
    case ErrorCode::PoorFit: return "PoorFit";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

/// Single exception type for all domain errors; the code discriminates.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace kppfront

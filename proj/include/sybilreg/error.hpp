#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sybilreg {

enum class ErrorCode {
  // validation of inputs
  InvalidDataset,
  InvalidProbability,
  IndexOutOfRange,
  OverlappingNetworks,
  SingletonNetwork,
  ProbabilitiesDoNotSumToOne,
  DimensionMismatch,
  InvalidWeights,
  InvalidConfig,
  UnknownRowId,
  ParseError,
  MultipleReferrers,
  ReferralCycle,
  // numerical / estimation failures
  GuaranteedNetwork,
  SingularTopology,
  RankDeficientDesign,
  InsufficientData,
  // resource limits
  SizeRefused,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every library failure is reported through this exception; the code decides
// the CLI exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Exit status the CLI uses for a given failure: 2 validation, 3 resource
// refusal, 4 estimation failure.
int exit_code_for(ErrorCode code);

}  // namespace sybilreg

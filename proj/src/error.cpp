#include "sybilreg/error.hpp"

namespace sybilreg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidDataset: return "InvalidDataset";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::OverlappingNetworks: return "OverlappingNetworks";
    case ErrorCode::SingletonNetwork: return "SingletonNetwork";
    case ErrorCode::ProbabilitiesDoNotSumToOne: return "ProbabilitiesDoNotSumToOne";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidWeights: return "InvalidWeights";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::UnknownRowId: return "UnknownRowId";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MultipleReferrers: return "MultipleReferrers";
    case ErrorCode::ReferralCycle: return "ReferralCycle";
    case ErrorCode::GuaranteedNetwork: return "GuaranteedNetwork";
    case ErrorCode::SingularTopology: return "SingularTopology";
    case ErrorCode::RankDeficientDesign: return "RankDeficientDesign";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::SizeRefused: return "SizeRefused";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SizeRefused:
      return 3;
    case ErrorCode::GuaranteedNetwork:
    case ErrorCode::SingularTopology:
    case ErrorCode::RankDeficientDesign:
    case ErrorCode::InsufficientData:
      return 4;
    default:
      return 2;
  }
}

}  // namespace sybilreg

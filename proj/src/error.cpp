#include "iclforge/error.hpp"

namespace iclforge {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kEmptyRepository: return "EmptyRepository";
    case ErrorCode::kInsufficientClass: return "InsufficientClass";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kProtocolError: return "ProtocolError";
    case ErrorCode::kLabelsUnscorable: return "LabelsUnscorable";
    case ErrorCode::kNoMask: return "NoMask";
    case ErrorCode::kMultipleMasks: return "MultipleMasks";
    case ErrorCode::kScoringUnsupported: return "ScoringUnsupported";
    case ErrorCode::kEncoderMismatch: return "EncoderMismatch";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyQuerySet: return "EmptyQuerySet";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSubstituteCollision: return "SubstituteCollision";
    case ErrorCode::kReservedWord: return "ReservedWord";
    case ErrorCode::kUnsupportedLanguage: return "UnsupportedLanguage";
    case ErrorCode::kNoProposals: return "NoProposals";
    case ErrorCode::kModeMismatch: return "ModeMismatch";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kEligibleZero: return "EligibleZero";
    case ErrorCode::kNoFlips: return "NoFlips";
    case ErrorCode::kEmptyReference: return "EmptyReference";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kZeroBaseline: return "ZeroBaseline";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

namespace {

std::string Compose(ErrorCode code, const std::string& detail,
                    std::optional<std::size_t> position) {
  std::string msg(ErrorCodeName(code));
  if (position) msg += "(" + std::to_string(*position) + ")";
  if (!detail.empty()) msg += ": " + detail;
  return msg;
}

}  // namespace

Error::Error(ErrorCode code, std::string detail,
             std::optional<std::size_t> position)
    : std::runtime_error(Compose(code, detail, position)),
      code_(code),
      detail_(std::move(detail)),
      position_(position) {}

}  // namespace iclforge

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace iclforge {

enum class ErrorCode {
  kInvalidArgument,
  kMalformedRecord,
  kEmptyRepository,
  kInsufficientClass,
  kBackendUnavailable,
  kProtocolError,
  kLabelsUnscorable,
  kNoMask,
  kMultipleMasks,
  kScoringUnsupported,
  kEncoderMismatch,
  kDimensionMismatch,
  kEmptyQuerySet,
  kParseError,
  kSubstituteCollision,
  kReservedWord,
  kUnsupportedLanguage,
  kNoProposals,
  kModeMismatch,
  kIoError,
  kEligibleZero,
  kNoFlips,
  kEmptyReference,
  kEmptyInput,
  kZeroBaseline,
  kConfigError,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every module reports failures through this exception. `position` carries a
// line number or byte offset where the error kind has one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail,
        std::optional<std::size_t> position = std::nullopt);

  ErrorCode code() const { return code_; }
  const std::string& detail() const { return detail_; }
  std::optional<std::size_t> position() const { return position_; }

 private:
  ErrorCode code_;
  std::string detail_;
  std::optional<std::size_t> position_;
};

}  // namespace iclforge

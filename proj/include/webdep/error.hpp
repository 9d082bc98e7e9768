#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace webdep {

enum class ErrorCode {
  kMalformedHostname,
  kSuffixOnly,
  kMalformedDataFile,
  kResolutionFailed,
  kChainTooLong,
  kMalformedHar,
  kFetchFailed,
  kEmptyNameserverSet,
  kEmptyCorpus,
  kNoThirdPartySites,
  kProbeUnavailable,
  kEmptyRegionalList,
  kTooFewCountries,
  kLengthMismatch,
  kZeroVariance,
  kTooFewPoints,
  kMissingIndicator,
  kEmptyGroup,
  kMalformedRow,
  kDuplicateRank,
  kStoreWriteFailed,
  kSnapshotNotFound,
  kMissingPrerequisite,
  kConfigError,
  kUsage,
  kNetworkTotalFailure,
};

// Stable upper-case token used as the machine-readable prefix of CLI errors.
std::string_view error_code_name(ErrorCode code);

// CLI exit status for an error code: 2 usage/config, 3 data, 4 network,
// 5 store.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace webdep

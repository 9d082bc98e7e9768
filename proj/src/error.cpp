#include "webdep/error.hpp"

namespace webdep {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedHostname: return "MALFORMED_HOSTNAME";
    case ErrorCode::kSuffixOnly: return "SUFFIX_ONLY";
    case ErrorCode::kMalformedDataFile: return "MALFORMED_DATA_FILE";
    case ErrorCode::kResolutionFailed: return "RESOLUTION_FAILED";
    case ErrorCode::kChainTooLong: return "CHAIN_TOO_LONG";
    case ErrorCode::kMalformedHar: return "MALFORMED_HAR";
    case ErrorCode::kFetchFailed: return "FETCH_FAILED";
    case ErrorCode::kEmptyNameserverSet: return "EMPTY_NAMESERVER_SET";
    case ErrorCode::kEmptyCorpus: return "EMPTY_CORPUS";
    case ErrorCode::kNoThirdPartySites: return "NO_THIRD_PARTY_SITES";
    case ErrorCode::kProbeUnavailable: return "PROBE_UNAVAILABLE";
    case ErrorCode::kEmptyRegionalList: return "EMPTY_REGIONAL_LIST";
    case ErrorCode::kTooFewCountries: return "TOO_FEW_COUNTRIES";
    case ErrorCode::kLengthMismatch: return "LENGTH_MISMATCH";
    case ErrorCode::kZeroVariance: return "ZERO_VARIANCE";
    case ErrorCode::kTooFewPoints: return "TOO_FEW_POINTS";
    case ErrorCode::kMissingIndicator: return "MISSING_INDICATOR";
    case ErrorCode::kEmptyGroup: return "EMPTY_GROUP";
    case ErrorCode::kMalformedRow: return "MALFORMED_ROW";
    case ErrorCode::kDuplicateRank: return "DUPLICATE_RANK";
    case ErrorCode::kStoreWriteFailed: return "STORE_WRITE_FAILED";
    case ErrorCode::kSnapshotNotFound: return "SNAPSHOT_NOT_FOUND";
    case ErrorCode::kMissingPrerequisite: return "MISSING_PREREQUISITE";
    case ErrorCode::kConfigError: return "CONFIG_ERROR";
    case ErrorCode::kUsage: return "USAGE";
    case ErrorCode::kNetworkTotalFailure: return "NETWORK_TOTAL_FAILURE";
  }
  return "UNKNOWN";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage:
    case ErrorCode::kConfigError:
      return 2;
    case ErrorCode::kResolutionFailed:
    case ErrorCode::kFetchFailed:
    case ErrorCode::kProbeUnavailable:
    case ErrorCode::kNetworkTotalFailure:
      return 4;
    case ErrorCode::kStoreWriteFailed:
    case ErrorCode::kSnapshotNotFound:
    case ErrorCode::kMissingPrerequisite:
      return 5;
    default:
      return 3;
  }
}

}  // namespace webdep

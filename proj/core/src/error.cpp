// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "posefuse/error.hpp"

namespace posefuse {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io";
    case ErrorCode::kBadMagic: return "bad_magic";
    case ErrorCode::kBadVersion: return "bad_version";
    case ErrorCode::kBadDtype: return "bad_dtype";
    case ErrorCode::kDimOverflow: return "dim_overflow";
    case ErrorCode::kTruncatedPayload: return "truncated_payload";
    case ErrorCode::kTrailingBytes: return "trailing_bytes";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDimsMismatch: return "dims_mismatch";
    case ErrorCode::kIndexOutOfRange: return "index_out_of_range";
    case ErrorCode::kOutOfBounds: return "out_of_bounds";
    case ErrorCode::kNonPositiveDepth: return "non_positive_depth";
    case ErrorCode::kDegenerateAlignment: return "degenerate_alignment";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kContractViolation: return "contract_violation";
    case ErrorCode::kPlacementFailed: return "placement_failed";
    case ErrorCode::kEmptyInput: return "empty_input";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace posefuse

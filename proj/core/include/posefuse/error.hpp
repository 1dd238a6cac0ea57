// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace posefuse {

enum class ErrorCode {
  kIo,
  kBadMagic,
  kBadVersion,
  kBadDtype,
  kDimOverflow,
  kTruncatedPayload,
  kTrailingBytes,
  kParse,
  kInvalidArgument,
  kDimsMismatch,
  kIndexOutOfRange,
  kOutOfBounds,
  kNonPositiveDepth,
  kDegenerateAlignment,
  kDomain,
  kContractViolation,
  kPlacementFailed,
  kEmptyInput,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace posefuse

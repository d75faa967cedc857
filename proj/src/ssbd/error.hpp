// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#pragma once

#include <stdexcept>
#include <string>

namespace ssbd {

/// Error categories shared by every module. The C API maps these one-to-one
/// onto ssbd_status values.
enum class ErrorCode {
  kConfig = 1,
  kInvalidToken,
  kMalformedLogits,
  kMalformedDistribution,
  kTransport,
  kProtocol,
  kFile,
  kParse,
  kValidation,
  kPrecondition,
  kLogic,
  kUndefinedMetric,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ssbd

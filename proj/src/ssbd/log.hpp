// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#pragma once

#include <spdlog/logger.h>

namespace ssbd {

/// Library logger on stderr. Level comes from SSBD_LOG (trace, debug, info,
/// warn, error, critical, off); default warn.
spdlog::logger& log();

}  // namespace ssbd

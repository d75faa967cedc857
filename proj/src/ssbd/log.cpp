// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#include "ssbd/log.hpp"

#include <cstdlib>
#include <memory>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace ssbd {

spdlog::logger& log() {
  static const std::shared_ptr<spdlog::logger> logger = [] {
    auto l = std::make_shared<spdlog::logger>(
        "ssbd", std::make_shared<spdlog::sinks::stderr_color_sink_mt>());
    l->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("SSBD_LOG"); env && *env) {
      l->set_level(spdlog::level::from_str(env));
    }
    l->set_pattern("[%H:%M:%S.%e] [ssbd] [%l] %v");
    return l;
  }();
  return *logger;
}

}  // namespace ssbd

#include "asyncdoc/log.hpp"

#include <cstdlib>
#include <mutex>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace asyncdoc {

void init_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("asyncdoc");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("ASYNCDOC_LOG")) {
      spdlog::set_level(spdlog::level::from_str(env));
    }
  });
}

} // namespace asyncdoc

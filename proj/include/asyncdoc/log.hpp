#pragma once

#include <spdlog/spdlog.h>

namespace asyncdoc {

/// Reads ASYNCDOC_LOG (trace, debug, info, warn, error, off) once and
/// applies it to the default spdlog logger. Defaults to warn.
void init_logging();

} // namespace asyncdoc

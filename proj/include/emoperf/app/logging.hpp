#pragma once

namespace emoperf::app {

/// Logs to stderr. EMOPERF_LOG selects the level (trace, debug, info, warn, error, off); default warn.
void init_logging();

}  // namespace emoperf::app

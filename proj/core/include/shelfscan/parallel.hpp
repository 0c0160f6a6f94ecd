#pragma once

#include <cstddef>
#include <functional>

namespace shelfscan {

/// Worker count from SHELFSCAN_JOBS, else the hardware concurrency (>= 1).
int default_jobs();

/// Runs `body(i)` for every i in [0, count) on up to `jobs` threads. Work is
/// handed out dynamically; callers write results into per-index slots so the
/// outcome does not depend on `jobs`. The first exception thrown by a body is
/// rethrown after all workers stop.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

} // namespace shelfscan

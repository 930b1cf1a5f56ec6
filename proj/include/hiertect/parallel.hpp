#pragma once

#include <cstddef>
#include <functional>

namespace hiertect {

/// Thread count from an explicit request, else HIERTECT_THREADS, else 1.
std::size_t resolve_threads(std::size_t requested = 0);

/// Runs body(i) for i in [0, count) on up to `threads` workers. Work items are
/// handed out dynamically; results must be written to per-index slots so the
/// outcome does not depend on the schedule. The first exception thrown by any
/// body is rethrown on the calling thread.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

} // namespace hiertect

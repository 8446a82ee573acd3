#pragma once

#include <cstddef>
#include <functional>

namespace chansel {

/// 0 means one worker per hardware thread.
unsigned resolve_threads(unsigned requested);

/// Runs fn(item, worker) for every item in [0, n). Items are handed out
/// dynamically; the worker id is stable within a call and lies in
/// [0, resolve_threads(threads)). The first exception thrown by any item is
/// rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t item, unsigned worker)>& fn);

}  // namespace chansel

#pragma once

#include <cstddef>
#include <functional>

namespace gbnn {

/// GBNN_THREADS when set to a positive integer, else the hardware concurrency.
std::size_t default_worker_count();

/// 0 means default_worker_count().
std::size_t resolve_workers(std::size_t requested);

/// Runs body(worker, task) for every task in [0, tasks). Worker w handles the
/// contiguous task range [w*tasks/W, (w+1)*tasks/W), so the assignment is a
/// pure function of (tasks, W). The first exception thrown by any task is
/// rethrown after all workers have joined.
void parallel_for(std::size_t tasks, std::size_t workers,
                  const std::function<void(std::size_t worker, std::size_t task)>& body);

}  // namespace gbnn

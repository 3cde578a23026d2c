#include "gbnn/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string_view>
#include <thread>
#include <vector>

namespace gbnn {

std::size_t default_worker_count() {
  if (const char* env = std::getenv("GBNN_THREADS")) {
    std::string_view text(env);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc{} && ptr == text.data() + text.size() && value > 0) return value;
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::size_t resolve_workers(std::size_t requested) { return requested ? requested : default_worker_count(); }

void parallel_for(std::size_t tasks, std::size_t workers,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  workers = std::clamp<std::size_t>(resolve_workers(workers), 1, std::max<std::size_t>(tasks, 1));
  if (workers == 1) {
    for (std::size_t t = 0; t < tasks; ++t) body(0, t);
    return;
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const auto begin = w * tasks / workers;
      const auto end = (w + 1) * tasks / workers;
      try {
        for (auto t = begin; t < end; ++t) body(w, t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace gbnn

#pragma once
// Minimal worker pool. Work is split into chunks whose boundaries depend only
// on the problem size, never on the worker count, and chunk outputs are
// disjoint (or reduced in chunk order by the caller), so results are
// identical for any number of workers.

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace ballavg {

inline void run_chunks(std::size_t n_chunks, int workers,
                       const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n_chunks <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error = nullptr;
  std::atomic<bool> failed{false};
  auto body = [&] {
    for (std::size_t c; (c = next.fetch_add(1)) < n_chunks;) {
      if (failed.load(std::memory_order_relaxed)) return;
      try {
        fn(c);
      } catch (...) {
        if (!failed.exchange(true)) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int extra = std::min<int>(workers, static_cast<int>(n_chunks)) - 1;
  pool.reserve(extra);
  for (int t = 0; t < extra; ++t) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace ballavg

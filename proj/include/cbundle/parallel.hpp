#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace cbundle {

namespace detail {
inline std::atomic<int>& jobs_override() {
  static std::atomic<int> v{0};
  return v;
}
}  // namespace detail

/// Worker count for sweeps: explicit override, else $CBUNDLE_JOBS, else the
/// hardware concurrency.
inline int default_jobs() {
  if (const int o = detail::jobs_override().load(); o > 0) return o;
  if (const char* env = std::getenv("CBUNDLE_JOBS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

inline void set_default_jobs(int jobs) { detail::jobs_override().store(jobs); }

/// Runs body(chunk, begin, end) over contiguous chunks of [0, n).  Chunks are
/// numbered in index order so callers can reduce deterministically.
inline std::size_t parallel_chunks(std::size_t n, int jobs,
                                   const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  if (jobs <= 0) jobs = default_jobs();
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(jobs), n));
  const std::size_t per = (n + chunks - 1) / std::max<std::size_t>(chunks, 1);
  if (chunks == 1) {
    body(0, 0, n);
    return 1;
  }
  std::vector<std::thread> threads;
  std::exception_ptr err;
  std::mutex err_mutex;
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t b = std::min(n, c * per), e = std::min(n, b + per);
    threads.emplace_back([&, c, b, e] {
      try {
        body(c, b, e);
      } catch (...) {
        std::lock_guard lock(err_mutex);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (err) std::rethrow_exception(err);
  return chunks;
}

}  // namespace cbundle

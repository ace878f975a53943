#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace speclab {

/** Thrown when a numerical procedure fails to meet its contract
 *  (non-convergence, unstable extrapolation, singular systems).
 *  Distinct from std::invalid_argument, which covers precondition
 *  violations on inputs; the CLI maps the two to different exit codes. */
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline void require_numeric(bool cond, const char* msg) {
  if (!cond) throw numerical_error(msg);
}

/** Worker cap: SPECLAB_THREADS if set (>=1), else hardware concurrency. */
inline unsigned worker_count() {
  if (const char* env = std::getenv("SPECLAB_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1u : hc;
}

/** Index-parallel loop over [0, n). Degrades to a serial loop when the
 *  worker cap or problem size makes threads pointless. Exceptions from the
 *  body are rethrown on the calling thread. */
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  unsigned workers = worker_count();
  if (workers <= 1 || n < 2048) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::vector<std::thread> pool;
  const std::size_t chunk = std::max<std::size_t>(256, n / (8 * workers));
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (;;) {
          std::size_t begin = next.fetch_add(chunk);
          if (begin >= n) return;
          std::size_t end = std::min(n, begin + chunk);
          for (std::size_t i = begin; i < end; ++i) body(i);
        }
      } catch (...) {
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace speclab

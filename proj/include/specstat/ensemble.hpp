#pragma once
#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "specstat/errors.hpp"

namespace specstat {

// Deterministic parallel trial dispatch.  Every trial derives all of its
// randomness from its own index, results land in an index-addressed slot,
// and merging happens in index order afterwards — so the outcome is a pure
// function of (inputs, trial count) no matter how many workers run.

// requested > 0: use as given.  requested == 0: take SPECSTAT_WORKERS from
// the environment, defaulting to 1.  Negative or unparsable: error.
int resolve_workers(int requested);

// Runs fn(0), ..., fn(trials-1), striding trials across `workers` threads.
// The first exception raised by any trial stops the dispatch, and is
// rethrown here once all workers have stopped.
template <class T>
std::vector<T> run_trials(long long trials, int workers,
                          const std::function<T(long long)>& fn) {
  if (trials < 0) throw ConfigError("run_trials: negative trial count");
  if (!fn) throw ConfigError("run_trials: empty trial function");
  std::vector<T> out(static_cast<std::size_t>(trials));
  if (trials == 0) return out;
  const int w = static_cast<int>(
      std::max<long long>(1, std::min<long long>(workers, trials)));
  if (w == 1) {
    for (long long i = 0; i < trials; ++i) out[static_cast<std::size_t>(i)] = fn(i);
    return out;
  }

  std::atomic<bool> stop{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  for (int k = 0; k < w; ++k) {
    pool.emplace_back([&, k] {
      for (long long i = k; i < trials; i += w) {
        if (stop.load(std::memory_order_relaxed)) return;
        try {
          out[static_cast<std::size_t>(i)] = fn(i);
        } catch (...) {
          {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
          stop.store(true, std::memory_order_relaxed);
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

}  // namespace specstat

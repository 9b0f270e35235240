#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace vsa {

/// Worker count used when a caller passes 0: VSA_THREADS if set, else hardware concurrency.
unsigned default_threads();

/// Splits [0, n) into at most `threads` contiguous chunks and runs fn(begin, end) on each.
/// Chunks are fixed by (n, threads), so any per-index work is reproducible.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = default_threads();
  std::size_t chunks = std::min<std::size_t>(threads, n);
  if (chunks <= 1) {
    if (n > 0) fn(std::size_t{0}, n);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto guarded = [&](std::size_t b, std::size_t e) {
    try {
      fn(b, e);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  std::size_t step = (n + chunks - 1) / chunks;
  {
    std::vector<std::jthread> pool;
    pool.reserve(chunks - 1);
    for (std::size_t c = 1; c < chunks; ++c) {
      std::size_t b = c * step, e = std::min(n, b + step);
      if (b < e) pool.emplace_back([&guarded, b, e] { guarded(b, e); });
    }
    guarded(std::size_t{0}, std::min(n, step));
  }
  if (failure) std::rethrow_exception(failure);
}

/// Sum that does not depend on the order of its inputs: values are sorted first.
double order_independent_sum(std::span<const double> values);

}  // namespace vsa

#pragma once

// Shared internals: seed mixing and an index-parallel loop.

#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace macstate::detail {

inline std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Calls fn(i) for i in [0, count) on up to `threads` workers. The first
/// exception stops the loop and is rethrown.
template <typename Fn> void parallel_for(std::size_t count, std::size_t threads, Fn fn) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr err;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count || failed.load())
          return;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true))
            err = std::current_exception();
          return;
        }
      }
    });
  for (auto &th : pool)
    th.join();
  if (err)
    std::rethrow_exception(err);
}

} // namespace macstate::detail

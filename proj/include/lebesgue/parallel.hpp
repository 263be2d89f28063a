#ifndef LEBESGUE_PARALLEL_HPP
#define LEBESGUE_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace lebesgue {

/// Worker count from an explicit request, else LEBESGUE_THREADS, else 1.
unsigned resolve_threads(unsigned requested);

/// Calls body(i) for i in [0, n) over contiguous chunks. Bodies write to
/// disjoint slots, so results never depend on the worker count.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      const std::size_t lo = n * t / threads;
      const std::size_t hi = n * (t + 1) / threads;
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace lebesgue

#endif  // LEBESGUE_PARALLEL_HPP

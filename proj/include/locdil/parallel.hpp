// locdil - dilation theory on locally Hilbert spaces
//
// Index-parallel loop over independent increment blocks.  Each iteration
// writes only its own slot, so results do not depend on the thread count.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace locdil {

  namespace detail {
    inline std::atomic<std::size_t>& max_threads_slot() {
      static std::atomic<std::size_t> slot{1};
      return slot;
    }
  }  // namespace detail

  // 0 means "use hardware concurrency".
  inline void set_max_threads(std::size_t n) {
    if (n == 0) {
      n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    }
    detail::max_threads_slot().store(n);
  }

  inline std::size_t max_threads() {
    return detail::max_threads_slot().load();
  }

  // Reads LOCDILATE_THREADS; unset or unparsable leaves the current value.
  inline void set_max_threads_from_env() {
    char const* v = std::getenv("LOCDILATE_THREADS");
    if (v == nullptr) {
      return;
    }
    try {
      set_max_threads(static_cast<std::size_t>(std::stoul(v)));
    } catch (std::exception const&) {
    }
  }

  template <typename Fn>
  void parallel_for(std::size_t count, Fn&& fn) {
    std::size_t const workers = std::min(max_threads(), count);
    if (workers <= 1) {
      for (std::size_t i = 0; i < count; ++i) {
        fn(i);
      }
      return;
    }
    // the lowest failing index wins, as in the sequential loop
    std::atomic<std::size_t>        next{0};
    std::vector<std::exception_ptr> failures(count);
    std::vector<std::thread>        pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            failures[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) {
      t.join();
    }
    for (auto const& f : failures) {
      if (f) {
        std::rethrow_exception(f);
      }
    }
  }

}  // namespace locdil

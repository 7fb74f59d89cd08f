#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dtc/error.hpp"

namespace dtc {

// Cooperative wall-clock limit, polled between units of work.
class Deadline {
public:
  using clock = std::chrono::steady_clock;

  Deadline() = default;
  explicit Deadline(clock::duration budget) : at_(clock::now() + budget) {}

  static Deadline after_seconds(double seconds) {
    return Deadline(std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(seconds)));
  }

  bool expired() const { return at_ && clock::now() >= *at_; }
  void check() const {
    if (expired()) throw Timeout("time budget exhausted");
  }

private:
  std::optional<clock::time_point> at_;
};

// splitmix64 finalizer; child seeds are derived from (parent, tag).
inline std::uint64_t mix_seed(std::uint64_t parent, std::uint64_t tag) {
  std::uint64_t z = parent + 0x9e3779b97f4a7c15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Worker count from DTC_WORKERS, defaulting to 1.
inline std::size_t workers_from_env() {
  if (const char* v = std::getenv("DTC_WORKERS")) {
    char* end = nullptr;
    long n = std::strtol(v, &end, 10);
    if (end != v && *end == '\0' && n >= 1) return static_cast<std::size_t>(n);
  }
  return 1;
}

// Evaluates fn(0..count-1) on up to `workers` threads. Results are returned
// in index order, so reductions over them do not depend on scheduling.
template <class Fn>
auto parallel_map(std::size_t count, std::size_t workers, Fn&& fn) {
  using R = decltype(fn(std::size_t{}));
  std::vector<std::optional<R>> slots(count);
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) slots[i].emplace(fn(i));
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < count; i += workers) slots[i].emplace(fn(i));
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace dtc

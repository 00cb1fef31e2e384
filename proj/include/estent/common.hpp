#pragma once
// Shared plumbing: error types, seed derivation, small numeric helpers.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace estent {

// Raised for bad user-facing inputs (config values, parameter shapes).
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a runtime invariant of a scheme or simulation is violated.
struct invariant_error : std::runtime_error {
  explicit invariant_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when trajectory coordinates leave the representable range.
struct overflow_error : invariant_error {
  explicit overflow_error(const std::string& msg) : invariant_error(msg) {}
};

// Raised when a coding scheme cannot fit the required index sets into the
// available channel-use budget (the entropy barrier made concrete).
struct budget_error : config_error {
  explicit budget_error(const std::string& msg) : config_error(msg) {}
};

using Rng = std::mt19937_64;

// Splittable seeding: child streams are derived from (master, stream) with a
// SplitMix64 mix so trials/paths are order-independent and reproducible.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t master, std::uint64_t stream) {
  return Rng(derive_seed(master, stream));
}

inline double log2_safe(double x) {
  if (!(x > 0.0)) throw invariant_error("log2 of nonpositive value");
  return std::log2(x);
}

// Runs fn(i) for i in [0, n). Results must be written to index-addressed
// slots so the outcome is independent of execution order.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t nw = std::min<std::size_t>(threads, n);
  std::atomic<std::size_t> cursor{0};
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (std::size_t w = 0; w < nw; ++w) {
    pool.emplace_back([&fn, &cursor, n] {
      for (;;) {
        std::size_t i = cursor.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

inline int default_threads() {
  unsigned hc = std::thread::hardware_concurrency();
  if (hc == 0) hc = 1;
  return static_cast<int>(hc > 8 ? 8 : hc);
}

}  // namespace estent

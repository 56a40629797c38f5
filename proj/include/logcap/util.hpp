#pragma once

#include <cstdint>
#include <cstdlib>
#include <cmath>
#include <functional>
#include <thread>
#include <vector>

namespace logcap {

// splitmix64: cheap, well-mixed 64-bit stream used to derive per-task seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0x632be59bd9b4e019ULL + stream * 0x9e3779b97f4a7c15ULL);
  splitmix64(s);
  return splitmix64(s);
}

// xoshiro-free minimal generator: splitmix-driven counter stream.
// Self-contained so that sampled values are identical across platforms and
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // warm up
    splitmix64(state_);
    splitmix64(state_);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // uniform in (0, 1]
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller; caches the second deviate
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925287 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Thread count for parallel loops: LOGCAP_THREADS env var, else hardware.
inline unsigned thread_count() {
  if (const char* env = std::getenv("LOGCAP_THREADS")) {
    long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  unsigned n = std::thread::hardware_concurrency();
  return n ? n : 1;
}

// Static block partition; results written by index keep reductions
// order-independent regardless of the number of workers.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  unsigned workers = thread_count();
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  if (workers > n) workers = static_cast<unsigned>(n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = w; i < n; i += workers) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace logcap

#pragma once

#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace bikecast {

// Error categories the CLI maps to distinct exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 1-based grid coordinate. (0,0) is the sentinel used in neighbor lists for
// padded slots; it contributes a zero value and receives no gradient.
struct Cell {
  int i = 0;
  int j = 0;
  bool sentinel() const { return i == 0 || j == 0; }
  friend bool operator==(const Cell&, const Cell&) = default;
  auto operator<=>(const Cell&) const = default;  // row-major: i, then j
};

// splitmix64, used to derive independent sub-seeds from one experiment seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed + 0x632be59bd9b4e019ull * (stream + 1);
  return splitmix64(s);
}

// Deterministic RNG. mt19937_64 is exactly specified by the standard; the
// value mappings below avoid std distributions, whose output sequences are
// implementation-defined and would break byte-identical reruns.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform in [0, 1)
  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform in {0, ..., n-1}; rejection sampling, no modulo bias
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % n;
  }

  // Approximate standard normal via a 12-term uniform sum. Chosen over
  // Box-Muller so no libm call enters the stream: output stays bit-portable.
  double normal() {
    double s = 0.0;
    for (int k = 0; k < 12; ++k) s += uniform();
    return s - 6.0;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {  // Fisher-Yates
    for (std::size_t k = v.size(); k > 1; --k) {
      std::size_t r = std::size_t(index(k));
      std::swap(v[k - 1], v[r]);
    }
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

// Chunked parallel loop. Chunk boundaries depend only on (n, threads), and
// callers write to disjoint output slots, so results never depend on timing.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t, std::size_t)>& body) {
  if (threads < 1) threads = 1;
  std::size_t want = std::size_t(threads);
  if (want > n) want = n ? n : 1;
  if (want <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(want);
  std::size_t chunk = (n + want - 1) / want;
  for (std::size_t t = 0; t < want; ++t) {
    std::size_t lo = t * chunk;
    std::size_t hi = lo + chunk < n ? lo + chunk : n;
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

// Shortest decimal form that round-trips a double exactly.
inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace bikecast

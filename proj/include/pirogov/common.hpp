#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace pirogov {

// Exact scalar for the rational series backend.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Error taxonomy; the CLI maps these onto process exit codes.
struct ValidationError : std::runtime_error {  // bad input / config (exit 2)
  using std::runtime_error::runtime_error;
};
struct RegimeError : std::runtime_error {  // parameters outside the assumed regime (exit 3)
  using std::runtime_error::runtime_error;
};
struct CapError : std::runtime_error {  // exhaustive-enumeration cap exceeded (exit 4)
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}
inline void require_regime(bool cond, const std::string& msg) {
  if (!cond) throw RegimeError(msg);
}
inline void require_cap(bool cond, const std::string& msg) {
  if (!cond) throw CapError(msg);
}
// Internal invariant; a failure is a bug, not a user error.
inline void internal_check(bool cond, const char* msg) {
  if (!cond) throw std::logic_error(std::string("internal invariant violated: ") + msg);
}

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t h, uint64_t v) {
  return splitmix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

inline uint64_t hash_ints(const std::vector<int>& xs, uint64_t seed = 0x243f6a8885a308d3ULL) {
  uint64_t h = seed;
  for (int x : xs) h = hash_combine(h, static_cast<uint64_t>(static_cast<int64_t>(x)));
  return hash_combine(h, xs.size());
}

// Seedable, splittable random stream. Substreams depend only on (root seed,
// tag path), never on how many draws the parent consumed. Raw draws go
// through mt19937_64; uniform doubles are built from the top 53 bits so the
// sequence does not depend on the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(uint64_t seed) : root_(seed), eng_(splitmix64(seed ^ 0x5bf0363546290fbbULL)) {}

  Rng substream(uint64_t tag) const { return Rng(hash_combine(root_, tag)); }

  uint64_t next_bits() { return eng_(); }

  double next_unit() {  // [0, 1)
    return static_cast<double>(next_bits() >> 11) * 0x1.0p-53;
  }

  // Index drawn proportionally to nonnegative weights (at least one positive).
  size_t next_index(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) {
      internal_check(w >= 0.0, "negative sampling weight");
      total += w;
    }
    internal_check(total > 0.0, "all sampling weights vanish");
    double u = next_unit() * total;
    double acc = 0.0;
    for (size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.size() - 1;
  }

 private:
  uint64_t root_;
  std::mt19937_64 eng_;
};

// Deterministic block-parallel driver: the work [0, total) is split into a
// fixed number of blocks independent of the thread count, so block-indexed
// reductions merge in a reproducible order. fn(block, begin, end).
void parallel_blocks(size_t total, int threads, size_t blocks,
                     const std::function<void(size_t, size_t, size_t)>& fn);

int default_threads();
void set_default_threads(int t);

}  // namespace pirogov

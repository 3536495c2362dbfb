#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pirogov/common.hpp"
#include "pirogov/graph.hpp"
#include "pirogov/series.hpp"

namespace pirogov::oracle {

// Exhaustive enumeration refuses above this many configurations by default.
inline constexpr uint64_t kDefaultStateCap = uint64_t(1) << 24;

// Independence polynomial of g by exhaustive subset enumeration: coefficient
// of z^k counts the independent sets of size k. Order = number of vertices.
series::TruncatedSeries<Rational> brute_Z_hardcore(const Graph& g,
                                                   uint64_t state_cap = kDefaultStateCap);

// Exact tabulation of z^{|G|} e^{-beta |E|} Z_G(beta, z) over all 2^n spin
// assignments. Writing each configuration's term as z^{2k} e^{-2 beta d}
// (k = number of +1 spins, d = disagreeing edges) keeps the table integral;
// floats enter only when a concrete beta is substituted.
struct IsingBruteTable {
  int n = 0;
  int edges = 0;
  std::map<std::pair<int, int>, uint64_t> counts;  // (k, d) -> #configurations

  // Polynomial in z of order 2n at a concrete beta.
  series::TruncatedSeries<double> to_series(double beta) const;
  double value(double beta, double z) const;
};

IsingBruteTable brute_Z_ising(const Graph& g, uint64_t state_cap = kDefaultStateCap);

// A finite distribution with exact probabilities, keyed by printable
// configuration ids.
struct ExactDistribution {
  std::vector<std::pair<std::string, Rational>> outcomes;

  // keys unique, probabilities nonnegative and summing to exactly 1
  void validate() const;
};

struct TvResult {
  double tv = 0.0;
  // half the summed per-outcome binomial standard errors at sample size N;
  // an empirical draw from p should have tv within a few radii
  double radius = 0.0;
};

TvResult tv_distance(const ExactDistribution& p, const std::map<std::string, uint64_t>& counts);

// Content-addressed disk cache under $PIROGOV_CACHE_DIR (disabled when the
// variable is unset). Values are opaque strings; the full key is stored in
// the file and checked on read, so hash collisions degrade to misses.
std::optional<std::string> disk_cache_get(const std::string& key);
void disk_cache_put(const std::string& key, const std::string& value);

// ---- Region-level spin sums (the contour-side oracles) ----

// Nearest-neighbour edges of the region, as index pairs (i < j) into
// points(), sorted.
std::vector<std::pair<int, int>> region_nn_edges(const lattice::Region& r);

// Number of region cells whose coordinate-sum parity equals `parity`.
int parity_count(const lattice::Region& r, int parity);

// Cells free under padded boundary conditions: d_inf(i, complement) >= 3.
std::vector<lattice::Point> padded_free_cells(const lattice::Region& r);

// Potts spin sum with no boundary conditions: coefficient of z^k counts the
// q-colourings of the region with exactly k bichromatic nearest-neighbour
// edges. Order = |E(region)|.
series::TruncatedSeries<Rational> brute_Z_potts_free(const lattice::Region& r, int q,
                                                     uint64_t state_cap = kDefaultStateCap);

// The same count under padded boundary conditions (every cell within
// distance 2 of the complement fixed to colour phi, the rest free). The spin
// partition function sum_w e^{beta * #agreeing edges} equals
// z^{-|E(r)|} times this polynomial at z = e^{-beta}. Disk-cached when
// PIROGOV_CACHE_DIR is set.
series::TruncatedSeries<Rational> brute_Z_potts_region(const lattice::Region& r, int q, int phi,
                                                       uint64_t state_cap = kDefaultStateCap);

// Hard-core analogue under padded ground boundary of parity phi (0 = even
// cells occupied, 1 = odd): enumerates the independent occupied sets that
// agree with the padding and counts them by s = |r^phi| - |I|, the
// coefficient of z^s (order = number of free phi-parity cells, the maximum
// attainable s). The spin partition function sum_I lambda^{|I|} equals
// z^{-|r^phi|} times this polynomial at z = 1/lambda. Disk-cached when
// PIROGOV_CACHE_DIR is set.
series::TruncatedSeries<Rational> brute_Z_hardcore_region(const lattice::Region& r, int phi,
                                                          uint64_t state_cap = kDefaultStateCap);

}  // namespace pirogov::oracle

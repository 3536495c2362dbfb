#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "pirogov/common.hpp"
#include "pirogov/contour.hpp"
#include "pirogov/lattice.hpp"
#include "pirogov/sampling.hpp"
#include "pirogov/series.hpp"

// Contour machinery on the discrete torus T_n = (Z/nZ)^d.
//
// With no boundary to anchor a ground state, every spin configuration on T_n
// contributes to the partition function, and the defect components of a
// configuration split by scale. A component of wrapped-d_inf diameter < n/2
// behaves exactly like a Z^d contour: it fits in a ball that embeds in Z^d,
// so it has a unique exterior (the one complement component of diameter
// >= n/2), a type, and interiors. The components of diameter >= n/2 jointly
// form a single "large" contour with no exterior; all of its complement
// components are interiors. Summing over sets of mutually external small
// contours of one type phi, with interiors absorbed into the weights, gives
// Z^phi(T_n, z), and the full partition function decomposes as
//
//   Z(T_n, z) = Z_big(T_n, z) + sum_phi Z^phi(T_n, z),
//
// where Z_big collects the configurations containing a large contour. Small
// contours run on the standard cluster pipeline through their Z^d
// unwrapping; the large-contour term shrinks exponentially in n and is only
// ever computed exactly, by brute force, at desk scale.

namespace pirogov::torus {

using contour::Config;
using contour::ContourModel;
using lattice::Point;
using lattice::Region;
using series::TruncatedSeries;

enum class Kind { small, large };

struct TorusContour {
  std::vector<Point> support;  // sorted cells of T_n, coordinates in [0, n)
  std::vector<int> spins;      // parallel to support
  Kind kind = Kind::small;
  int type = -1;  // exterior ground label; -1 for large contours
  std::vector<std::vector<Point>> interiors;  // non-exterior complement comps
  std::vector<int> interior_labels;
  long long surface_energy = 0;
  std::vector<Point> cov;  // support plus interiors, sorted

  bool operator==(const TorusContour& o) const {
    return support == o.support && spins == o.spins;
  }
};

bool torus_contour_less(const TorusContour& a, const TorusContour& b);

// small: connected support of diameter < n/2. large: every component of the
// support has diameter >= n/2. A support mixing the two scales cannot arise
// from a configuration and is rejected with ValidationError.
Kind classify_support(int dim, int n, const std::vector<Point>& support);

// Spins in range and, for hard-core, occupied cells independent under the
// wrapped adjacency. There is no boundary condition to check. Hard-core
// needs even n: the occupancy sublattices do not close up on an odd torus.
void validate_torus_config(const ContourModel& model, int n, const Config& config);

// Contours of a configuration, indexed against Region::full_torus(dim, n):
// one small contour per defect component of diameter < n/2, the remaining
// components merged into one large contour. Sorted by torus_contour_less.
std::vector<TorusContour> extract_torus_contours(const ContourModel& model, int n,
                                                 const Config& config);

// Inverse of extraction: ground phi outside every cov, contours painted
// outermost first. phi is irrelevant when the set contains a large contour
// (its cov is the whole torus).
Config realize_torus_config(const ContourModel& model, int n, int phi,
                            const std::vector<TorusContour>& contours);

// A small contour placed on the torus together with its Z^d unwrapping: the
// placement translated so its support starts at the origin, hard-core
// sublattice labels flipped along odd translations. Surface energy, interior
// structure and weight all transfer between the two frames verbatim.
struct SmallContour {
  TorusContour placed;
  contour::Contour canonical;
  Point translate;  // placed cell = (canonical cell + translate) mod n
};

// Every small contour of type phi on T_n. Canonical shapes are harvested
// from an exhaustive listing on a padded Z^d box (the diameter bound < n/2
// keeps the box independent of n beyond its window) and placed at all n^d
// translates; distinct placements of small shapes never collide.
std::vector<SmallContour> list_small_contours(const ContourModel& model, int n, int phi,
                                              uint64_t state_cap = uint64_t(1) << 24);

// Mutual externality on the torus: covs at wrapped distance > 1.
bool torus_mutually_external(int n, const TorusContour& a, const TorusContour& b);

// Log-coefficients 1..m of Z^phi(T_n, z), by the cluster expansion over the
// small type-phi contours with interior partition functions computed on the
// Z^d unwrapping. Requires n >= 4 (the taxonomy needs n/2 >= 2; below that
// enumerate configurations directly) and even n for hard-core.
TruncatedSeries<Rational> torus_Z_small(const ContourModel& model, int n, int phi, int m,
                                        uint64_t state_cap = uint64_t(1) << 24);

// Exact total partition polynomial: sum over every configuration of
// z^{defect energy}. Row-transfer counting, dim 1 and 2 only; errors when
// the state space is above the exhaustive cap.
TruncatedSeries<Rational> torus_Z_total_exact(const ContourModel& model, int n,
                                              uint64_t state_cap = uint64_t(1) << 24);

// Exact polynomial collecting the configurations that contain a large
// contour. Configurations are enumerated and classified one by one when the
// space fits; above that the small-contour side is subtracted from the exact
// total, which the decomposition identity makes exact.
TruncatedSeries<Rational> torus_Z_big_exact(const ContourModel& model, int n,
                                            uint64_t state_cap = uint64_t(1) << 24);

struct TorusApprox {
  double value = 0.0;  // sum_phi exp(T_m log Z^phi)(z)
  double log_value = 0.0;
  int m_used = 0;
  bool dropped_big_term = true;  // the large-contour term is never approximated
  std::optional<double> big_term;   // exact Z_big(z) when it could be exhibited
  std::optional<double> big_ratio;  // exact Z_big(z) / Z(T_n, z)
  double floor = 0.0;               // e^{-c n}
  std::vector<double> per_ground;   // the |Xi| summands of value
};

// eps-relative approximation of sum_phi Z^phi(T_n, z) for 0 <= z < delta,
// dropping the large-contour term. Below the admissible floor e^{-c n} the
// dropped term has to be exhibited exactly: if brute force cannot afford it
// the request is refused, otherwise the result carries the exact value and
// ratio. Above the floor the exact term is attached when it is affordable
// and left empty otherwise.
TorusApprox torus_approx_Z(const ContourModel& model, int n, double z, double epsilon,
                           double c = 0.1, uint64_t state_cap = uint64_t(1) << 24);

struct TorusSample {
  int phi = 0;                         // ground state drawn for the exterior
  std::vector<TorusContour> matching;  // every contour drawn, outer and nested
  Config assignment;                   // spins on Region::full_torus(dim, n)
};

// Approximate sampler for the matching-contour measure on T_n. A ground
// state is drawn proportionally to the approximated Z^phi, the outer small
// contours by sequential cell-by-cell conditionals with exact subfamily sums
// over the size-truncated pool, and each interior recursively through the
// Z^d sampler on its unwrapping. Build once, draw many.
class TorusSampler {
 public:
  TorusSampler(const ContourModel& model, int n, double z, double epsilon,
               double c = 0.1, uint64_t state_cap = uint64_t(1) << 24);
  ~TorusSampler();

  const TorusApprox& ground_law() const { return approx_; }
  int size_cutoff() const { return size_cutoff_; }
  double call_epsilon() const { return call_epsilon_; }

  TorusSample sample(Rng rng);

 private:
  struct Outer;  // per-ground sequential machine over the torus cells

  Outer& outer_for(int phi);
  sampling::ContourSampler& interior_sampler(const std::vector<Point>& cells, int label);

  ContourModel model_;
  int n_;
  double z_;
  uint64_t state_cap_;
  double call_epsilon_ = 0.0;
  int size_cutoff_ = 0;
  TorusApprox approx_;
  Region region_;
  std::map<int, std::unique_ptr<Outer>> outers_;
  std::map<std::pair<std::vector<Point>, int>, std::unique_ptr<sampling::ContourSampler>>
      interiors_;
};

// One draw on a freshly built machine; loops should reuse a TorusSampler.
TorusSample torus_sample(const ContourModel& model, int n, double z, double epsilon,
                         Rng rng, double c = 0.1, uint64_t state_cap = uint64_t(1) << 24);

}  // namespace pirogov::torus

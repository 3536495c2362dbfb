#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "pirogov/cluster.hpp"
#include "pirogov/lattice.hpp"
#include "pirogov/series.hpp"

// Low-temperature spin systems rewritten as gases of contours: connected
// defect surfaces separating ground-state patches. A spin configuration on a
// finite region with deep boundary conditions decomposes uniquely into a
// compatible family of contours, and the partition function becomes a sum
// over such families weighted by z^(surface energy). Exterior-contour
// weights absorb the interior partition functions, turning the whole thing
// into an abstract polymer gas that the cluster machinery can expand.
namespace pirogov::contour {

using lattice::Point;
using lattice::Region;

// Spin values indexed like region.points().
using Config = std::vector<int>;

enum class Family { potts, hardcore };

// The two concrete contour systems.
//
// potts: spins are colours 0..q-1 with ferromagnetic nearest-neighbour
// interaction; ground states are the q constant configurations and the
// expansion variable is z = exp(-beta), one factor per bichromatic edge.
//
// hardcore: spins are occupancies {0,1} under the independent-set constraint;
// ground states are the two checkerboards, label 0 = even sublattice
// occupied, label 1 = odd. The expansion variable is z = 1/lambda and the
// surface energy counts, per unoccupied defect vertex, how far its
// neighbourhood falls short of a perfect matching (always an integer).
struct ContourModel {
  Family family = Family::potts;
  int dim = 2;
  int q = 2;           // colour count; occupancy models always use 2 values
  double delta = 0.05; // assumed zero-free radius for z (configuration value)

  static ContourModel potts(int colours, int dimension = 2, double zero_free = 0.05);
  static ContourModel hardcore(int dimension = 2, double zero_free = 0.05);

  int ground_count() const;  // number of boundary labels (q, or 2)
  int spin_count() const;    // values a single spin can take (q, or 2)

  // Spin the ground state `label` puts at p. Potts grounds are constant;
  // occupancy grounds depend on the coordinate-sum parity.
  int ground_spin(int label, const Point& p) const;

  // Every contour satisfies surface_energy >= rho_peierls * |support|.
  double rho_peierls() const;  // 1 / (2 * 3^dim)
  // ... and the per-region polynomial degree is at most peierls_degree * |region|.
  int peierls_degree() const;  // 2*dim for colours, 1 for occupancies
};

// A contour: its support (the defect cells), the spins it carries there, and
// the bookkeeping derived from them. `interiors` are the finite components of
// the support's complement in Z^d, each filled by the ground state named in
// `interior_labels`; `type` is the label facing the unbounded component.
// `cov` = support plus all interior cells. Identity is (support, spins):
// everything else is determined.
struct Contour {
  std::vector<Point> support;  // sorted, d_inf-connected
  std::vector<int> spins;      // parallel to support
  int type = 0;
  std::vector<std::vector<Point>> interiors;
  std::vector<int> interior_labels;
  long long surface_energy = 0;
  std::vector<Point> cov;  // sorted

  bool operator==(const Contour& o) const {
    return support == o.support && spins == o.spins;
  }
};

// Total order on (support, spins); listing output is sorted by it.
bool contour_less(const Contour& a, const Contour& b);

// Throws ValidationError unless config is a boundary-condition-`phi`
// configuration: spins in range, every cell within distance 2 of the
// complement carries ground_spin(phi, .), and (occupancy models) no two
// adjacent cells are both occupied. Free geometry only.
void validate_boundary_config(const ContourModel& model, const Region& region, int phi,
                              const Config& config);

// Cells whose 1-ball (within the region) matches no ground state.
std::vector<Point> incorrect_cells(const ContourModel& model, const Region& region,
                                   const Config& config);

// The contour family of a configuration: one contour per d_inf-connected
// component of the incorrect set. Inner contours keep their own types, which
// need not equal phi. Canonical (component) order. Inverse of realize_config.
std::vector<Contour> extract_contours(const ContourModel& model, const Region& region,
                                      int phi, const Config& config);

// The configuration with boundary label phi whose contour family is
// `contours`: ground phi everywhere, then each contour (largest cov first)
// paints its spins and fills its interiors with their labels.
Config realize_config(const ContourModel& model, const Region& region, int phi,
                      const std::vector<Contour>& contours);

// Checks whether (support, spins) is a contour of type phi realizable in the
// region, and if so returns it with interiors, labels and surface energy
// attached. Support must be a d_inf-connected cell set at distance > 1 from
// the region's complement (ValidationError otherwise, as for malformed
// input); failures of validity itself give nullopt.
std::optional<Contour> make_valid_contour(const ContourModel& model, const Region& region,
                                          int phi, const std::vector<Point>& support,
                                          const std::vector<int>& spins);

// All valid type-phi contours with |support| <= max_support, sorted by
// contour_less. Enumerates candidate supports (connected subsets of the
// admissible cells) and prunes spin assignments through the labels forced by
// each support's complement structure. `budget` caps the candidate-support
// enumeration (CapError beyond it).
std::vector<Contour> list_contours(const ContourModel& model, const Region& region, int phi,
                                   int max_support, uint64_t budget = uint64_t(1) << 22);

// All valid type-phi contours in the region, with no support bound, found by
// exhausting boundary-condition-phi configurations and extracting. Complete
// because every valid contour realizes itself. CapError when the
// configuration count would exceed state_cap.
std::vector<Contour> list_contours_exhaustive(const ContourModel& model, const Region& region,
                                              int phi, uint64_t state_cap);

// Complete list of type-phi contours with |support| <= max_support, routed
// through configuration exhaustion when the free-cell state count fits
// state_cap and through candidate enumeration otherwise.
std::vector<Contour> list_contours_auto(const ContourModel& model, const Region& region,
                                        int phi, int max_support, uint64_t state_cap);

// Contours interact through their covs: a and b are mutually external when
// d_inf(cov(a), cov(b)) > 1. Families of pairwise mutually external contours
// of type phi are exactly the exterior layers the weight recursion sums over.
bool mutually_external(const Contour& a, const Contour& b);

// Indices of pool contours NOT mutually external with g (g interacts with
// them in the cluster expansion).
std::vector<int> not_mutually_external_with(const std::vector<Contour>& pool,
                                            const Contour& g);

// Computes exterior-contour weights w(gamma) = z^(surface energy) * product
// over labels of Z^label(interior), truncated at a fixed order. Interior
// partition functions recurse through strictly smaller regions and are
// memoized up to translation (occupancy labels flip under odd translations).
class WeightEngine {
 public:
  WeightEngine(const ContourModel& model, int order, uint64_t state_cap);

  series::TruncatedSeries<Rational> outer_weight(const Contour& g);

  // Truncated polynomial Z^label on the region formed by `cells`.
  series::TruncatedSeries<Rational> interior_Z(const std::vector<Point>& cells, int label);

  int order() const { return order_; }
  uint64_t state_cap() const { return state_cap_; }

 private:
  using Key = std::pair<std::vector<int>, int>;  // normalized flattened cells, label

  ContourModel model_;
  int order_;
  uint64_t state_cap_;
  std::map<Key, series::TruncatedSeries<Rational>> memo_;
  std::set<Key> in_progress_;
};

// A region's type-phi contours with surface energy <= order, as a cluster
// pool: min_order is the surface energy and two contours are incompatible
// when not mutually external.
struct ContourPool {
  std::vector<Contour> contours;  // sorted by contour_less
  cluster::IncompatibilityPool pool;
  std::vector<series::TruncatedSeries<Rational>> weights;  // outer weights at `order`
};

ContourPool build_contour_pool(const ContourModel& model, const Region& region, int phi,
                               int order, WeightEngine& engine);

// Taylor coefficients 1..m of log Z^phi(region) in the expansion variable z.
// Exact rationals; exponentiate with poly_from_log to recover the partition
// polynomial's initial segment.
series::TruncatedSeries<Rational> contour_log_Z(const ContourModel& model,
                                                const Region& region, int phi, int m,
                                                uint64_t state_cap = uint64_t(1) << 24);

// exp(T_m(log Z^phi))(z) with m chosen so the result is an
// exp(+-epsilon)-factor approximation of Z^phi(region, z), valid for
// |z| < delta. Outside the radius: RegimeError unless forced (forced runs
// use the ratio-0 order and carry no guarantee).
cluster::ApproxResult approx_contour_Z(const ContourModel& model, const Region& region,
                                       int phi, double z, double epsilon, bool force = false,
                                       uint64_t state_cap = uint64_t(1) << 24);

// Spin-side partition function with boundary label phi, through the contour
// representation. Potts at inverse temperature beta = param: log Z_spin =
// log Z^phi(e^-beta) + beta |E(region)|. Occupancy model at fugacity
// lambda = param: log Z_spin = log Z^phi(1/lambda) + log(lambda) * (cells of
// the label's parity). Reported in log form; `value` overflows to inf for
// large regions at low temperature.
struct SpinZResult {
  double log_value = 0.0;
  double value = 1.0;
  double prefactor_log = 0.0;  // the beta |E| or log(lambda) |parity cells| term
  double z = 0.0;              // expansion variable the contour side was evaluated at
  int m_used = 0;
  bool outside_radius = false;
};

SpinZResult spin_Z_from_contours(const ContourModel& model, const Region& region, int phi,
                                 double param, double epsilon, bool force = false,
                                 uint64_t state_cap = uint64_t(1) << 24);

}  // namespace pirogov::contour

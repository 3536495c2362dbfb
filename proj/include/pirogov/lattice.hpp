#pragma once

#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pirogov/common.hpp"

namespace pirogov::lattice {

using Point = std::vector<int>;

struct PointHash {
  size_t operator()(const Point& p) const { return static_cast<size_t>(hash_ints(p)); }
};
using PointSet = std::unordered_set<Point, PointHash>;

// Finite volumes live either in Z^d (free) or on the torus (Z/n)^d.
struct Geometry {
  enum class Kind { free_space, torus };
  Kind kind = Kind::free_space;
  int torus_n = 0;

  static Geometry free_space() { return Geometry{}; }
  static Geometry torus(int n) {
    require(n >= 3, "torus side must be at least 3");
    return Geometry{Kind::torus, n};
  }
  bool is_torus() const { return kind == Kind::torus; }
  bool operator==(const Geometry& o) const { return kind == o.kind && torus_n == o.torus_n; }
};

// Chebyshev distance; coordinates wrap on the torus. Points must have the
// same dimension and lie inside torus bounds when the geometry wraps.
int dinf(const Geometry& g, const Point& a, const Point& b);

// All points at Chebyshev distance exactly 1 (3^d - 1 of them), and the 2d
// nearest neighbours. On the torus the results are wrapped and deduplicated,
// so on tiny tori a neighbour list can be shorter.
std::vector<Point> dinf_neighbors(const Geometry& g, const Point& p);
std::vector<Point> nn_neighbors(const Geometry& g, const Point& p);

class Region {
 public:
  Region(int dim, Geometry geom, std::vector<Point> pts);

  static Region box(const Point& lo, const Point& hi);
  static Region full_torus(int dim, int n);

  int dim() const { return dim_; }
  const Geometry& geometry() const { return geom_; }
  const std::vector<Point>& points() const { return pts_; }  // sorted, unique
  size_t size() const { return pts_.size(); }
  bool empty() const { return pts_.empty(); }
  bool contains(const Point& p) const { return set_.count(p) > 0; }
  // Index of p in the sorted point list.
  int index_of(const Point& p) const;

  const Point& bbox_lo() const;  // defined only for nonempty regions
  const Point& bbox_hi() const;

  // min(dinf(p, complement), cap); the complement of a full torus is empty,
  // giving cap. p must belong to the region.
  int dist_to_complement(const Point& p, int cap) const;

  // Complement connected (within the bounding box inflated by 2)? Free
  // geometry only; vacuously true for empty regions.
  bool c_connected() const;

  uint64_t content_hash() const;

 private:
  int dim_;
  Geometry geom_;
  std::vector<Point> pts_;
  PointSet set_;
  Point lo_, hi_;
};

// Maximal d_inf-connected components of `cells` (canonical order: by
// smallest point, each component sorted).
std::vector<std::vector<Point>> connected_components_of(const Geometry& g, int dim,
                                                        const std::vector<Point>& cells);

// Components of the ambient space minus `excluded`. Free geometry: ambient
// Z^d, worked inside bbox(excluded) inflated by 2; the unbounded component is
// listed first (represented by its intersection with that window) and
// `first_unbounded` is set. Torus: all components of T_n minus excluded, in
// canonical order, first_unbounded false. `excluded` must be nonempty.
struct ComplementSplit {
  std::vector<std::vector<Point>> comps;
  bool first_unbounded = false;
};
ComplementSplit complement_components(const Geometry& g, int dim,
                                      const std::vector<Point>& excluded);

// Cells of the region at Chebyshev distance exactly 1 from its complement.
std::vector<Point> interior_boundary(const Region& r);

// Connected (d_inf) subsets of the region containing `root`, of size at most
// max_size, each exactly once, ordered by (size, lexicographic cell list).
std::vector<std::vector<Point>> connected_subsets(const Region& r, const Point& root,
                                                  int max_size);

// Chebyshev diameter of a nonempty cell set.
int diameter(const Geometry& g, const std::vector<Point>& cells);

}  // namespace pirogov::lattice

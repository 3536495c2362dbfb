#include "pirogov/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>

#include "pirogov/graph.hpp"

namespace pirogov::lattice {

namespace {

int wrap_coord(int x, int n) {
  int r = x % n;
  return r < 0 ? r + n : r;
}

void check_point_dim(const Geometry& g, const Point& p) {
  if (g.is_torus()) {
    for (int c : p)
      require(c >= 0 && c < g.torus_n, "torus point coordinate out of bounds");
  }
}

// Dense index window for flood fills in free geometry.
struct Window {
  Point lo, hi;
  int dim;
  std::vector<size_t> stride;
  size_t count = 1;

  Window(Point l, Point h) : lo(std::move(l)), hi(std::move(h)), dim(static_cast<int>(lo.size())) {
    stride.assign(dim, 1);
    for (int i = dim - 1; i >= 0; --i) {
      stride[i] = count;
      count *= static_cast<size_t>(hi[i] - lo[i] + 1);
    }
  }
  bool contains(const Point& p) const {
    for (int i = 0; i < dim; ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }
  size_t index(const Point& p) const {
    size_t idx = 0;
    for (int i = 0; i < dim; ++i) idx += stride[i] * static_cast<size_t>(p[i] - lo[i]);
    return idx;
  }
  Point at(size_t idx) const {
    Point p(dim);
    for (int i = 0; i < dim; ++i) {
      p[i] = lo[i] + static_cast<int>(idx / stride[i]);
      idx %= stride[i];
    }
    return p;
  }
  bool on_shell(const Point& p) const {
    for (int i = 0; i < dim; ++i)
      if (p[i] == lo[i] || p[i] == hi[i]) return true;
    return false;
  }
};

void for_each_offset(int dim, int radius, const std::function<void(const Point&)>& fn) {
  Point off(dim, -radius);
  while (true) {
    fn(off);
    int i = dim - 1;
    while (i >= 0 && off[i] == radius) off[i--] = -radius;
    if (i < 0) return;
    ++off[i];
  }
}

}  // namespace

int dinf(const Geometry& g, const Point& a, const Point& b) {
  require(a.size() == b.size() && !a.empty(), "dimension mismatch");
  check_point_dim(g, a);
  check_point_dim(g, b);
  int d = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    int delta = std::abs(a[i] - b[i]);
    if (g.is_torus()) delta = std::min(delta, g.torus_n - delta);
    d = std::max(d, delta);
  }
  return d;
}

std::vector<Point> dinf_neighbors(const Geometry& g, const Point& p) {
  check_point_dim(g, p);
  int dim = static_cast<int>(p.size());
  std::vector<Point> out;
  out.reserve(static_cast<size_t>(std::pow(3.0, dim)) - 1);
  for_each_offset(dim, 1, [&](const Point& off) {
    bool zero = std::all_of(off.begin(), off.end(), [](int c) { return c == 0; });
    if (zero) return;
    Point q(dim);
    for (int i = 0; i < dim; ++i) {
      q[i] = p[i] + off[i];
      if (g.is_torus()) q[i] = wrap_coord(q[i], g.torus_n);
    }
    out.push_back(std::move(q));
  });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Point> nn_neighbors(const Geometry& g, const Point& p) {
  check_point_dim(g, p);
  int dim = static_cast<int>(p.size());
  std::vector<Point> out;
  out.reserve(2 * dim);
  for (int i = 0; i < dim; ++i) {
    for (int s : {-1, 1}) {
      Point q = p;
      q[i] += s;
      if (g.is_torus()) q[i] = wrap_coord(q[i], g.torus_n);
      out.push_back(std::move(q));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Region::Region(int dim, Geometry geom, std::vector<Point> pts)
    : dim_(dim), geom_(geom), pts_(std::move(pts)) {
  require(dim_ >= 1, "dimension must be positive");
  for (const auto& p : pts_) {
    require(static_cast<int>(p.size()) == dim_, "point dimension mismatch");
    check_point_dim(geom_, p);
  }
  std::sort(pts_.begin(), pts_.end());
  pts_.erase(std::unique(pts_.begin(), pts_.end()), pts_.end());
  set_.reserve(pts_.size() * 2);
  for (const auto& p : pts_) set_.insert(p);
  if (!pts_.empty()) {
    lo_ = hi_ = pts_[0];
    for (const auto& p : pts_)
      for (int i = 0; i < dim_; ++i) {
        lo_[i] = std::min(lo_[i], p[i]);
        hi_[i] = std::max(hi_[i], p[i]);
      }
  }
}

Region Region::box(const Point& lo, const Point& hi) {
  require(lo.size() == hi.size() && !lo.empty(), "box corners must share a dimension");
  int dim = static_cast<int>(lo.size());
  for (int i = 0; i < dim; ++i) require(lo[i] <= hi[i], "box corner order");
  std::vector<Point> pts;
  Point p = lo;
  while (true) {
    pts.push_back(p);
    int i = dim - 1;
    while (i >= 0 && p[i] == hi[i]) p[i] = lo[i], --i;
    if (i < 0) break;
    ++p[i];
  }
  return Region(dim, Geometry::free_space(), std::move(pts));
}

Region Region::full_torus(int dim, int n) {
  Geometry g = Geometry::torus(n);
  std::vector<Point> pts;
  Point p(dim, 0);
  while (true) {
    pts.push_back(p);
    int i = dim - 1;
    while (i >= 0 && p[i] == n - 1) p[i] = 0, --i;
    if (i < 0) break;
    ++p[i];
  }
  return Region(dim, g, std::move(pts));
}

int Region::index_of(const Point& p) const {
  auto it = std::lower_bound(pts_.begin(), pts_.end(), p);
  require(it != pts_.end() && *it == p, "point not in region");
  return static_cast<int>(it - pts_.begin());
}

const Point& Region::bbox_lo() const {
  require(!pts_.empty(), "empty region has no bounding box");
  return lo_;
}
const Point& Region::bbox_hi() const {
  require(!pts_.empty(), "empty region has no bounding box");
  return hi_;
}

int Region::dist_to_complement(const Point& p, int cap) const {
  require(contains(p), "point not in region");
  if (geom_.is_torus() && size() == static_cast<size_t>(std::pow(geom_.torus_n, dim_)))
    return cap;  // full torus: empty complement
  for (int r = 1; r <= cap; ++r) {
    bool found = false;
    for_each_offset(dim_, r, [&](const Point& off) {
      if (found) return;
      int norm = 0;
      for (int c : off) norm = std::max(norm, std::abs(c));
      if (norm != r) return;
      Point q(dim_);
      for (int i = 0; i < dim_; ++i) {
        q[i] = p[i] + off[i];
        if (geom_.is_torus()) q[i] = wrap_coord(q[i], geom_.torus_n);
      }
      if (!contains(q)) found = true;
    });
    if (found) return r;
  }
  return cap;
}

bool Region::c_connected() const {
  if (pts_.empty()) return true;
  if (geom_.is_torus()) {
    // Complement of the region inside the torus; empty complement counts.
    std::vector<Point> comp;
    Region full = full_torus(dim_, geom_.torus_n);
    for (const auto& p : full.points())
      if (!contains(p)) comp.push_back(p);
    if (comp.empty()) return true;
    return connected_components_of(geom_, dim_, comp).size() == 1;
  }
  Point lo = lo_, hi = hi_;
  for (int i = 0; i < dim_; ++i) lo[i] -= 2, hi[i] += 2;
  Window w(lo, hi);
  std::vector<Point> comp;
  for (size_t i = 0; i < w.count; ++i) {
    Point p = w.at(i);
    if (!contains(p)) comp.push_back(p);
  }
  return connected_components_of(geom_, dim_, comp).size() == 1;
}

uint64_t Region::content_hash() const {
  uint64_t h = hash_combine(0x9a1fb7d0c2ULL, static_cast<uint64_t>(dim_));
  h = hash_combine(h, geom_.is_torus() ? 1 : 0);
  h = hash_combine(h, static_cast<uint64_t>(geom_.torus_n));
  for (const auto& p : pts_) h = hash_combine(h, hash_ints(p));
  return h;
}

std::vector<std::vector<Point>> connected_components_of(const Geometry& g, int dim,
                                                        const std::vector<Point>& cells) {
  PointSet pending;
  for (const auto& c : cells) {
    require(static_cast<int>(c.size()) == dim, "cell dimension mismatch");
    pending.insert(c);
  }
  std::vector<Point> sorted(pending.begin(), pending.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::vector<Point>> comps;
  for (const auto& seed : sorted) {
    if (!pending.count(seed)) continue;
    std::vector<Point> comp;
    std::deque<Point> queue{seed};
    pending.erase(seed);
    while (!queue.empty()) {
      Point p = queue.front();
      queue.pop_front();
      comp.push_back(p);
      for (auto& q : dinf_neighbors(g, p)) {
        auto it = pending.find(q);
        if (it != pending.end()) {
          queue.push_back(q);
          pending.erase(it);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  // Seeds are scanned in sorted order, so components come out canonical.
  return comps;
}

ComplementSplit complement_components(const Geometry& g, int dim,
                                      const std::vector<Point>& excluded) {
  require(!excluded.empty(), "complement split needs a nonempty excluded set");
  ComplementSplit out;
  if (g.is_torus()) {
    PointSet ex(excluded.begin(), excluded.end());
    std::vector<Point> rest;
    Region full = Region::full_torus(dim, g.torus_n);
    for (const auto& p : full.points())
      if (!ex.count(p)) rest.push_back(p);
    out.comps = connected_components_of(g, dim, rest);
    out.first_unbounded = false;
    return out;
  }
  Point lo = excluded[0], hi = excluded[0];
  PointSet ex;
  for (const auto& p : excluded) {
    require(static_cast<int>(p.size()) == dim, "cell dimension mismatch");
    ex.insert(p);
    for (int i = 0; i < dim; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  }
  for (int i = 0; i < dim; ++i) lo[i] -= 2, hi[i] += 2;
  Window w(lo, hi);
  std::vector<Point> rest;
  rest.reserve(w.count);
  for (size_t i = 0; i < w.count; ++i) {
    Point p = w.at(i);
    if (!ex.count(p)) rest.push_back(p);
  }
  auto comps = connected_components_of(g, dim, rest);
  // The unbounded component is the unique one touching the window shell: the
  // shell is connected (d >= 2 diagonal moves) and disjoint from `excluded`.
  int unbounded = -1;
  for (size_t i = 0; i < comps.size(); ++i) {
    bool touches = std::any_of(comps[i].begin(), comps[i].end(),
                               [&](const Point& p) { return w.on_shell(p); });
    if (touches) {
      internal_check(unbounded < 0, "two components touch the inflated shell");
      unbounded = static_cast<int>(i);
    }
  }
  internal_check(unbounded >= 0, "no unbounded component found");
  out.comps.push_back(std::move(comps[static_cast<size_t>(unbounded)]));
  for (size_t i = 0; i < comps.size(); ++i)
    if (static_cast<int>(i) != unbounded) out.comps.push_back(std::move(comps[i]));
  out.first_unbounded = true;
  return out;
}

std::vector<Point> interior_boundary(const Region& r) {
  std::vector<Point> out;
  for (const auto& p : r.points()) {
    bool edge = false;
    for (const auto& q : dinf_neighbors(r.geometry(), p)) {
      if (!r.contains(q)) {
        edge = true;
        break;
      }
    }
    // On the torus a cell of a full slab may have all neighbours inside; in
    // free geometry every finite region has a boundary.
    if (edge) out.push_back(p);
  }
  return out;
}

std::vector<std::vector<Point>> connected_subsets(const Region& r, const Point& root,
                                                  int max_size) {
  require(r.contains(root), "root must lie in the region");
  require(max_size >= 1, "max_size must be positive");
  Graph g(static_cast<int>(r.size()));
  for (const auto& p : r.points()) {
    int u = r.index_of(p);
    for (const auto& q : dinf_neighbors(r.geometry(), p)) {
      if (r.contains(q)) {
        int v = r.index_of(q);
        if (u < v) g.add_edge(u, v);
      }
    }
  }
  auto id_sets = pirogov::connected_subsets(g, r.index_of(root), max_size);
  std::vector<std::vector<Point>> out;
  out.reserve(id_sets.size());
  for (const auto& ids : id_sets) {
    std::vector<Point> s;
    s.reserve(ids.size());
    for (int id : ids) s.push_back(r.points()[static_cast<size_t>(id)]);
    out.push_back(std::move(s));
  }
  return out;
}

int diameter(const Geometry& g, const std::vector<Point>& cells) {
  require(!cells.empty(), "diameter of empty set");
  int d = 0;
  for (size_t i = 0; i < cells.size(); ++i)
    for (size_t j = i + 1; j < cells.size(); ++j) d = std::max(d, dinf(g, cells[i], cells[j]));
  return d;
}

}  // namespace pirogov::lattice

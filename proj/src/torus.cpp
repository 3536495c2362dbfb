#include "pirogov/torus.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "pirogov/cluster.hpp"

namespace pirogov::torus {

using contour::Contour;
using contour::Family;
using contour::WeightEngine;
using lattice::Geometry;

namespace {

using PointIndex = std::unordered_map<Point, int, lattice::PointHash>;

int point_parity(const Point& p) {
  long long s = 0;
  for (int x : p) s += x;
  return static_cast<int>(((s % 2) + 2) % 2);
}

Point wrap_point(const Point& p, int n) {
  Point w(p.size());
  for (size_t k = 0; k < p.size(); ++k) w[k] = ((p[k] % n) + n) % n;
  return w;
}

// Wrapped d_inf diameter; cells at desk scale, so pairwise is fine.
int wrapped_diam(const Geometry& g, const std::vector<Point>& cells) {
  int d = 0;
  for (size_t i = 0; i < cells.size(); ++i)
    for (size_t j = i + 1; j < cells.size(); ++j)
      d = std::max(d, lattice::dinf(g, cells[i], cells[j]));
  return d;
}

// Free-space d_inf diameter of a finite set = largest coordinate span.
int free_diam(const std::vector<Point>& cells) {
  if (cells.empty()) return 0;
  int d = 0;
  for (size_t k = 0; k < cells.front().size(); ++k) {
    int lo = cells.front()[k], hi = lo;
    for (const Point& p : cells) {
      lo = std::min(lo, p[k]);
      hi = std::max(hi, p[k]);
    }
    d = std::max(d, hi - lo);
  }
  return d;
}

int flipped_label(const ContourModel& model, int label, int parity) {
  if (model.family == Family::hardcore && parity == 1) return 1 - label;
  return label;
}

void check_torus_args(const ContourModel& model, int n) {
  require(n >= 3, "torus side must be at least 3");
  if (model.family == Family::hardcore)
    require(n % 2 == 0, "hard-core needs an even torus side: the occupancy "
                        "sublattices do not close up on an odd cycle");
}

// The ground state matching `values` on `cells`, or -1. Distinct grounds
// disagree at every cell, so a nonempty set pins at most one.
int matching_ground_at(const ContourModel& model, const std::vector<Point>& cells,
                       const std::vector<int>& values) {
  for (int g = 0; g < model.ground_count(); ++g) {
    bool ok = true;
    for (size_t i = 0; i < cells.size() && ok; ++i)
      ok = values[i] == model.ground_spin(g, cells[i]);
    if (ok) return g;
  }
  return -1;
}

long long torus_surface_energy(const ContourModel& model, const Region& region,
                               const Config& config, const std::vector<Point>& support) {
  const Geometry& geom = region.geometry();
  lattice::PointSet in_support(support.begin(), support.end());
  long long total = 0;
  if (model.family == Family::potts) {
    for (const Point& p : support) {
      int vp = config[static_cast<size_t>(region.index_of(p))];
      for (const Point& nb : lattice::nn_neighbors(geom, p)) {
        if (!(p < nb) || !in_support.count(nb)) continue;
        if (config[static_cast<size_t>(region.index_of(nb))] != vp) ++total;
      }
    }
    return total;
  }
  // Occupancy defect: each empty support cell contributes 2d minus its
  // occupied neighbours; the wrapped grand total divides evenly by 4d.
  for (const Point& p : support) {
    if (config[static_cast<size_t>(region.index_of(p))] != 0) continue;
    long long c = 2 * model.dim;
    for (const Point& nb : lattice::nn_neighbors(geom, p))
      c -= config[static_cast<size_t>(region.index_of(nb))];
    total += c;
  }
  internal_check(total % (4 * model.dim) == 0, "occupancy defect count must divide evenly");
  return total / (4 * model.dim);
}

// Assembles one torus contour from a configuration: spins from the support,
// complement components via the wrapped metric, labels from the cells
// hugging the support on each component's side.
TorusContour torus_contour_from_config(const ContourModel& model, int n,
                                       const Region& region, const Config& config,
                                       std::vector<Point> support, Kind kind) {
  const Geometry& geom = region.geometry();
  TorusContour g;
  g.kind = kind;
  g.support = std::move(support);
  g.spins.reserve(g.support.size());
  for (const Point& p : g.support)
    g.spins.push_back(config[static_cast<size_t>(region.index_of(p))]);

  lattice::ComplementSplit split =
      lattice::complement_components(geom, model.dim, g.support);
  PointIndex comp_of;
  for (size_t k = 0; k < split.comps.size(); ++k)
    for (const Point& c : split.comps[k]) comp_of[c] = static_cast<int>(k);
  lattice::PointSet in_support(g.support.begin(), g.support.end());
  std::vector<std::vector<Point>> collar(split.comps.size());
  for (const Point& p : g.support) {
    for (const Point& nb : lattice::dinf_neighbors(geom, p)) {
      if (in_support.count(nb)) continue;
      auto it = comp_of.find(nb);
      internal_check(it != comp_of.end(), "support neighbour escaped the complement");
      collar[static_cast<size_t>(it->second)].push_back(nb);
    }
  }
  std::vector<int> labels(split.comps.size(), -1);
  for (size_t k = 0; k < split.comps.size(); ++k) {
    auto& c = collar[k];
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    internal_check(!c.empty(), "every complement component touches the support");
    std::vector<int> values;
    values.reserve(c.size());
    for (const Point& cell : c)
      values.push_back(config[static_cast<size_t>(region.index_of(cell))]);
    labels[k] = matching_ground_at(model, c, values);
    internal_check(labels[k] >= 0, "component collar must sit in a ground state");
  }

  if (kind == Kind::small) {
    // The exterior is the unique complement component too wide to hide
    // inside the ball that carries a small contour.
    int exterior = -1;
    for (size_t k = 0; k < split.comps.size(); ++k) {
      if (2 * wrapped_diam(geom, split.comps[k]) >= n) {
        internal_check(exterior < 0, "a small contour has one exterior");
        exterior = static_cast<int>(k);
      }
    }
    internal_check(exterior >= 0, "a small contour's complement reaches scale n/2");
    g.type = labels[static_cast<size_t>(exterior)];
    for (size_t k = 0; k < split.comps.size(); ++k) {
      if (static_cast<int>(k) == exterior) continue;
      g.interiors.push_back(split.comps[k]);
      g.interior_labels.push_back(labels[k]);
    }
  } else {
    g.type = -1;
    g.interiors = split.comps;
    g.interior_labels = labels;
  }

  g.surface_energy = torus_surface_energy(model, region, config, g.support);
  internal_check(g.surface_energy >= 1, "a contour carries positive surface energy");
  g.cov = g.support;
  for (const auto& comp : g.interiors) g.cov.insert(g.cov.end(), comp.begin(), comp.end());
  std::sort(g.cov.begin(), g.cov.end());
  return g;
}

}  // namespace

bool torus_contour_less(const TorusContour& a, const TorusContour& b) {
  if (a.support != b.support) return a.support < b.support;
  return a.spins < b.spins;
}

Kind classify_support(int dim, int n, const std::vector<Point>& support) {
  require(n >= 3, "torus side must be at least 3");
  require(!support.empty(), "contour support must be nonempty");
  Geometry geom = Geometry::torus(n);
  for (const Point& p : support) {
    require(static_cast<int>(p.size()) == dim, "support cell dimension mismatch");
    for (int x : p) require(x >= 0 && x < n, "support cell outside the torus");
  }
  auto comps = lattice::connected_components_of(geom, dim, support);
  bool any_small = false, any_large = false;
  for (const auto& comp : comps)
    (2 * wrapped_diam(geom, comp) < n ? any_small : any_large) = true;
  if (!any_large) {
    require(comps.size() == 1, "a small contour's support must be connected");
    return Kind::small;
  }
  require(!any_small,
          "support mixes components below and at the n/2 scale; no such contour "
          "arises from a configuration");
  return Kind::large;
}

void validate_torus_config(const ContourModel& model, int n, const Config& config) {
  check_torus_args(model, n);
  Region region = Region::full_torus(model.dim, n);
  require(config.size() == region.size(), "one spin per torus cell");
  const auto& pts = region.points();
  const int nspin = model.spin_count();
  for (int v : config) require(v >= 0 && v < nspin, "spin value out of range");
  if (model.family == Family::hardcore) {
    for (size_t i = 0; i < pts.size(); ++i) {
      if (config[i] != 1) continue;
      for (const Point& nb : lattice::nn_neighbors(region.geometry(), pts[i])) {
        if (!(pts[i] < nb)) continue;
        require(config[static_cast<size_t>(region.index_of(nb))] != 1,
                "occupied cells must form an independent set");
      }
    }
  }
}

std::vector<TorusContour> extract_torus_contours(const ContourModel& model, int n,
                                                 const Config& config) {
  validate_torus_config(model, n, config);
  Region region = Region::full_torus(model.dim, n);
  std::vector<Point> bad = contour::incorrect_cells(model, region, config);
  std::vector<TorusContour> out;
  std::vector<Point> merged;
  for (auto& comp : lattice::connected_components_of(region.geometry(), model.dim, bad)) {
    if (2 * wrapped_diam(region.geometry(), comp) < n)
      out.push_back(
          torus_contour_from_config(model, n, region, config, std::move(comp), Kind::small));
    else
      merged.insert(merged.end(), comp.begin(), comp.end());
  }
  if (!merged.empty()) {
    std::sort(merged.begin(), merged.end());
    out.push_back(
        torus_contour_from_config(model, n, region, config, std::move(merged), Kind::large));
  }
  std::sort(out.begin(), out.end(), torus_contour_less);
  return out;
}

Config realize_torus_config(const ContourModel& model, int n, int phi,
                            const std::vector<TorusContour>& contours) {
  check_torus_args(model, n);
  require(phi >= 0 && phi < model.ground_count(), "ground label out of range");
  Region region = Region::full_torus(model.dim, n);
  const auto& pts = region.points();
  Config config(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) config[i] = model.ground_spin(phi, pts[i]);
  // Outermost first, so nested contours repaint the patch they sit in. A
  // large contour covers the whole torus and naturally sorts to the front.
  std::vector<const TorusContour*> order;
  for (const auto& g : contours) order.push_back(&g);
  std::stable_sort(order.begin(), order.end(), [](const TorusContour* a,
                                                  const TorusContour* b) {
    if (a->cov.size() != b->cov.size()) return a->cov.size() > b->cov.size();
    return torus_contour_less(*a, *b);
  });
  for (const TorusContour* g : order) {
    require(g->spins.size() == g->support.size(), "contour spins must match its support");
    require(g->interiors.size() == g->interior_labels.size(),
            "one label per interior component");
    for (size_t k = 0; k < g->interiors.size(); ++k)
      for (const Point& c : g->interiors[k]) {
        require(region.contains(c), "contour interior must lie on the torus");
        config[static_cast<size_t>(region.index_of(c))] =
            model.ground_spin(g->interior_labels[k], c);
      }
    for (size_t i = 0; i < g->support.size(); ++i) {
      require(region.contains(g->support[i]), "contour support must lie on the torus");
      config[static_cast<size_t>(region.index_of(g->support[i]))] = g->spins[i];
    }
  }
  return config;
}

namespace {

// Shapes a placed torus contour out of a canonical Z^d contour. Odd
// translations swap the hard-core sublattices, flipping type and labels;
// spin values, interiors and surface energy carry over verbatim.
TorusContour place_canonical(const ContourModel& model, int n, const Contour& canon,
                             const Point& t) {
  int flip = model.family == Family::hardcore ? point_parity(t) : 0;
  TorusContour out;
  out.kind = Kind::small;
  out.type = flipped_label(model, canon.type, flip);
  std::vector<std::pair<Point, int>> cells(canon.support.size());
  for (size_t i = 0; i < canon.support.size(); ++i) {
    Point p(canon.support[i]);
    for (size_t k = 0; k < p.size(); ++k) p[k] += t[k];
    cells[i] = {wrap_point(p, n), canon.spins[i]};
  }
  std::sort(cells.begin(), cells.end());
  for (auto& [p, s] : cells) {
    out.support.push_back(std::move(p));
    out.spins.push_back(s);
  }
  for (size_t k = 0; k < canon.interiors.size(); ++k) {
    std::vector<Point> comp;
    comp.reserve(canon.interiors[k].size());
    for (const Point& c : canon.interiors[k]) {
      Point p(c);
      for (size_t j = 0; j < p.size(); ++j) p[j] += t[j];
      comp.push_back(wrap_point(p, n));
    }
    std::sort(comp.begin(), comp.end());
    out.interiors.push_back(std::move(comp));
    out.interior_labels.push_back(flipped_label(model, canon.interior_labels[k], flip));
  }
  out.surface_energy = canon.surface_energy;
  out.cov.reserve(canon.cov.size());
  for (const Point& c : canon.cov) {
    Point p(c);
    for (size_t j = 0; j < p.size(); ++j) p[j] += t[j];
    out.cov.push_back(wrap_point(p, n));
  }
  std::sort(out.cov.begin(), out.cov.end());
  return out;
}

void check_small_scale(const ContourModel& model, int n) {
  check_torus_args(model, n);
  require(n >= 4,
          "torus side below 4 leaves no room for the contour taxonomy; enumerate "
          "configurations by brute force instead");
}

// Max support diameter a small contour can have: diam < n/2.
int small_diam_cap(int n) { return (n - 1) / 2; }

}  // namespace

std::vector<SmallContour> list_small_contours(const ContourModel& model, int n, int phi,
                                              uint64_t state_cap) {
  check_small_scale(model, n);
  require(phi >= 0 && phi < model.ground_count(), "ground label out of range");

  // Canonical shapes: exhaustive Z^d contours in a box whose free window
  // (cells at distance >= 3 from the complement) has side cap+1, matching
  // the diameter cap; normalized to put the support at the origin.
  const int cap = small_diam_cap(n);
  const int side = cap + 5;
  Point lo(model.dim, 0), hi(model.dim, side - 1);
  Region box = Region::box(lo, hi);
  std::vector<int> grounds;
  if (model.family == Family::potts)
    grounds = {phi};
  else
    grounds = {0, 1};

  std::map<std::pair<std::vector<Point>, std::vector<int>>, Contour> canon;
  for (int g : grounds) {
    for (Contour& c : contour::list_contours_exhaustive(model, box, g, state_cap)) {
      if (free_diam(c.support) > cap) continue;
      Point corner = c.support.front();
      for (const Point& p : c.support)
        for (int k = 0; k < model.dim; ++k) corner[k] = std::min(corner[k], p[k]);
      int flip = model.family == Family::hardcore ? point_parity(corner) : 0;
      auto shift = [&](std::vector<Point>& cells) {
        for (Point& p : cells)
          for (int k = 0; k < model.dim; ++k) p[k] -= corner[k];
      };
      shift(c.support);
      for (auto& comp : c.interiors) shift(comp);
      shift(c.cov);
      c.type = flipped_label(model, c.type, flip);
      for (int& l : c.interior_labels) l = flipped_label(model, l, flip);
      canon.emplace(std::make_pair(c.support, c.spins), std::move(c));
    }
  }

  std::vector<SmallContour> out;
  std::vector<int> digits(model.dim, 0);
  std::set<std::pair<std::vector<Point>, std::vector<int>>> seen;
  for (const auto& [key, shape] : canon) {
    bool done = false;
    std::fill(digits.begin(), digits.end(), 0);
    while (!done) {
      Point t(digits.begin(), digits.end());
      int type = flipped_label(model, shape.type,
                               model.family == Family::hardcore ? point_parity(t) : 0);
      if (type == phi) {
        SmallContour sc;
        sc.placed = place_canonical(model, n, shape, t);
        sc.canonical = shape;
        sc.translate = t;
        internal_check(seen.emplace(sc.placed.support, sc.placed.spins).second,
                       "small-contour placements must not collide");
        out.push_back(std::move(sc));
      }
      done = true;
      for (int k = 0; k < model.dim; ++k) {
        if (++digits[k] < n) {
          done = false;
          break;
        }
        digits[k] = 0;
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const SmallContour& a, const SmallContour& b) {
    return torus_contour_less(a.placed, b.placed);
  });
  return out;
}

bool torus_mutually_external(int n, const TorusContour& a, const TorusContour& b) {
  Geometry geom = Geometry::torus(n);
  for (const Point& p : a.cov)
    for (const Point& q : b.cov)
      if (lattice::dinf(geom, p, q) <= 1) return false;
  return true;
}

namespace {

// Degree bound on a small contour's absorbed weight: surface energy plus the
// largest energy its interiors can hold.
long long weight_degree_bound(const ContourModel& model, const TorusContour& g) {
  return g.surface_energy +
         static_cast<long long>(model.peierls_degree()) *
             static_cast<long long>(g.cov.size() - g.support.size());
}

struct TorusPool {
  std::vector<SmallContour> pool;
  std::vector<std::vector<char>> me;  // mutual externality, pairwise
};

TorusPool build_torus_pool(const ContourModel& model, int n, int phi, uint64_t state_cap) {
  TorusPool tp;
  tp.pool = list_small_contours(model, n, phi, state_cap);
  const size_t m = tp.pool.size();
  tp.me.assign(m, std::vector<char>(m, 0));
  for (size_t i = 0; i < m; ++i)
    for (size_t j = i + 1; j < m; ++j) {
      char ok = torus_mutually_external(n, tp.pool[i].placed, tp.pool[j].placed) ? 1 : 0;
      tp.me[i][j] = ok;
      tp.me[j][i] = ok;
    }
  return tp;
}

// Largest total weight degree over sets of mutually external pool members;
// bounds the polynomial degree of Z^phi for the truncation shortcut.
long long max_family_degree(const ContourModel& model, const TorusPool& tp,
                            uint64_t state_cap) {
  const size_t m = tp.pool.size();
  std::vector<long long> deg(m);
  for (size_t j = 0; j < m; ++j) deg[j] = weight_degree_bound(model, tp.pool[j].placed);
  long long best = 0;
  uint64_t visited = 0;
  std::vector<size_t> chosen;
  std::function<void(size_t, long long)> walk = [&](size_t start, long long acc) {
    require_cap(++visited <= state_cap, "mutually external family space exceeds the cap");
    best = std::max(best, acc);
    for (size_t j = start; j < m; ++j) {
      bool ok = true;
      for (size_t i : chosen)
        if (!tp.me[i][j]) {
          ok = false;
          break;
        }
      if (!ok) continue;
      chosen.push_back(j);
      walk(j + 1, acc + deg[j]);
      chosen.pop_back();
    }
  };
  walk(0, 0);
  return best;
}

// Exact Z^phi as a polynomial: direct sum over mutually external families of
// the absorbed contour weights. Family counts stay tiny at desk scale.
TruncatedSeries<Rational> small_family_polynomial(const ContourModel& model,
                                                  const TorusPool& tp, int order,
                                                  uint64_t state_cap) {
  WeightEngine engine(model, order, state_cap);
  const size_t m = tp.pool.size();
  std::vector<TruncatedSeries<Rational>> weights;
  weights.reserve(m);
  for (const SmallContour& sc : tp.pool) weights.push_back(engine.outer_weight(sc.canonical));
  TruncatedSeries<Rational> total(order);
  total.c[0] = 1;  // empty family
  uint64_t visited = 0;
  std::vector<size_t> chosen;
  std::function<void(size_t, const TruncatedSeries<Rational>&)> walk =
      [&](size_t start, const TruncatedSeries<Rational>& acc) {
        for (size_t j = start; j < m; ++j) {
          bool ok = true;
          for (size_t i : chosen)
            if (!tp.me[i][j]) {
              ok = false;
              break;
            }
          if (!ok) continue;
          require_cap(++visited <= state_cap, "mutually external family space exceeds the cap");
          TruncatedSeries<Rational> next = series::mul(acc, weights[j]);
          total = series::add(total, next);
          chosen.push_back(j);
          walk(j + 1, next);
          chosen.pop_back();
        }
      };
  walk(0, TruncatedSeries<Rational>::one(order));
  return total;
}

TruncatedSeries<Rational> cluster_log_small(const ContourModel& model, const TorusPool& tp,
                                            int m, uint64_t state_cap) {
  std::vector<size_t> keep;
  for (size_t j = 0; j < tp.pool.size(); ++j)
    if (tp.pool[j].placed.surface_energy <= m) keep.push_back(j);
  if (keep.empty()) return TruncatedSeries<Rational>(m);
  WeightEngine engine(model, m, state_cap);
  cluster::IncompatibilityPool inc;
  std::vector<TruncatedSeries<Rational>> weights;
  inc.min_order.reserve(keep.size());
  inc.neighbors.assign(keep.size(), {});
  for (size_t j : keep) {
    internal_check(tp.pool[j].placed.surface_energy <= std::numeric_limits<int>::max(),
                   "surface energy overflows the pool order");
    inc.min_order.push_back(static_cast<int>(tp.pool[j].placed.surface_energy));
    weights.push_back(engine.outer_weight(tp.pool[j].canonical));
  }
  for (size_t a = 0; a < keep.size(); ++a)
    for (size_t b = a + 1; b < keep.size(); ++b)
      if (!tp.me[keep[a]][keep[b]]) {
        inc.neighbors[a].push_back(static_cast<int>(b));
        inc.neighbors[b].push_back(static_cast<int>(a));
      }
  return cluster::logZ_pool<Rational>(inc, weights, m);
}

}  // namespace

TruncatedSeries<Rational> torus_Z_small(const ContourModel& model, int n, int phi, int m,
                                        uint64_t state_cap) {
  check_small_scale(model, n);
  require(phi >= 0 && phi < model.ground_count(), "ground label out of range");
  require(m >= 1, "truncation order must be positive");
  TorusPool tp = build_torus_pool(model, n, phi, state_cap);
  return cluster_log_small(model, tp, m, state_cap);
}

namespace {

long long cells_of(const ContourModel& model, int n) {
  long long c = 1;
  for (int k = 0; k < model.dim; ++k) c *= n;
  return c;
}

// Exact energy census by row transfer: count configurations by defect
// energy, one row at a time, closing the vertical wrap against the starting
// row. Potts rows carry bichromatic-edge counts directly; hard-core rows
// carry occupation counts, converted through energy = n^d/2 - |occupied|.
TruncatedSeries<Rational> transfer_total(const ContourModel& model, int n,
                                         uint64_t state_cap) {
  check_torus_args(model, n);
  require_cap(model.dim <= 2, "total enumeration is desk-scale only (dim 1 and 2)");
  const int W = model.dim == 2 ? n : 1;
  const int rows = n;
  const long long ncells = cells_of(model, n);

  // Row states.
  std::vector<std::vector<int>> states;
  {
    std::vector<int> digits(W, 0);
    bool done = false;
    while (!done) {
      bool ok = true;
      if (model.family == Family::hardcore && W > 1) {
        for (int j = 0; j < W && ok; ++j)
          if (digits[j] == 1 && digits[(j + 1) % W] == 1) ok = false;
      }
      if (ok) states.push_back(digits);
      done = true;
      for (int j = 0; j < W; ++j) {
        if (++digits[j] < model.spin_count()) {
          done = false;
          break;
        }
        digits[j] = 0;
      }
      require_cap(states.size() <= 1024, "row state space exceeds the enumeration cap");
    }
  }
  const size_t S = states.size();

  const bool potts = model.family == Family::potts;
  long long hmax = potts ? static_cast<long long>(model.dim) * ncells : ncells / 2;
  require_cap(static_cast<double>(S) * S * S * (hmax + 1) * rows <= 6e8,
              "transfer census exceeds the operation budget");

  // Per-row score: bichromatic intra-row edges (Potts) or occupied cells.
  std::vector<int> row_score(S, 0);
  for (size_t s = 0; s < S; ++s) {
    if (potts) {
      if (W > 1)
        for (int j = 0; j < W; ++j)
          if (states[s][j] != states[s][(j + 1) % W]) ++row_score[s];
    } else {
      for (int j = 0; j < W; ++j) row_score[s] += states[s][j];
    }
  }
  // Row-pair score: bichromatic vertical edges, or -1 for a forbidden
  // hard-core adjacency.
  std::vector<std::vector<int>> pair_score(S, std::vector<int>(S, 0));
  for (size_t s = 0; s < S; ++s)
    for (size_t t = 0; t < S; ++t) {
      int v = 0;
      for (int j = 0; j < W; ++j) {
        if (potts) {
          if (states[s][j] != states[t][j]) ++v;
        } else if (states[s][j] == 1 && states[t][j] == 1) {
          v = -1;
          break;
        }
      }
      pair_score[s][t] = v;
    }

  const int H = static_cast<int>(hmax);
  std::vector<long long> counts(static_cast<size_t>(H) + 1, 0);
  std::vector<std::vector<long long>> dp, ndp;
  for (size_t s0 = 0; s0 < S; ++s0) {
    dp.assign(S, std::vector<long long>(static_cast<size_t>(H) + 1, 0));
    dp[s0][static_cast<size_t>(row_score[s0])] = 1;
    for (int r = 1; r < rows; ++r) {
      ndp.assign(S, std::vector<long long>(static_cast<size_t>(H) + 1, 0));
      for (size_t prev = 0; prev < S; ++prev)
        for (int h = 0; h <= H; ++h) {
          long long ways = dp[prev][static_cast<size_t>(h)];
          if (ways == 0) continue;
          for (size_t t = 0; t < S; ++t) {
            int v = pair_score[prev][t];
            if (v < 0) continue;
            int nh = h + v + row_score[t];
            if (nh <= H) ndp[t][static_cast<size_t>(nh)] += ways;
          }
        }
      dp.swap(ndp);
    }
    for (size_t prev = 0; prev < S; ++prev)
      for (int h = 0; h <= H; ++h) {
        long long ways = dp[prev][static_cast<size_t>(h)];
        if (ways == 0) continue;
        int v = pair_score[prev][s0];
        if (v < 0) continue;
        int nh = h + v;
        internal_check(nh <= H, "energy census exceeded its degree bound");
        counts[static_cast<size_t>(nh)] += ways;
      }
  }

  TruncatedSeries<Rational> out(H);
  if (potts) {
    for (int h = 0; h <= H; ++h) out.c[static_cast<size_t>(h)] = Rational(counts[h]);
  } else {
    // counts is indexed by occupation; energy = ncells/2 - occupation.
    for (int k = 0; k <= H; ++k) {
      internal_check(counts[static_cast<size_t>(k)] == 0 || k <= H,
                     "independent sets cannot exceed half the torus");
      out.c[static_cast<size_t>(H - k)] = Rational(counts[static_cast<size_t>(k)]);
    }
  }
  (void)state_cap;
  return out;
}

}  // namespace

TruncatedSeries<Rational> torus_Z_total_exact(const ContourModel& model, int n,
                                              uint64_t state_cap) {
  return transfer_total(model, n, state_cap);
}

TruncatedSeries<Rational> torus_Z_big_exact(const ContourModel& model, int n,
                                            uint64_t state_cap) {
  check_torus_args(model, n);
  const long long ncells = cells_of(model, n);
  long long hmax = model.family == Family::potts
                       ? static_cast<long long>(model.dim) * ncells
                       : ncells / 2;

  // Direct route: walk every configuration and classify its contours.
  double space = 1.0;
  for (long long i = 0; i < ncells; ++i) space *= model.spin_count();
  if (ncells <= 16 && space <= static_cast<double>(std::min<uint64_t>(state_cap, 1u << 22))) {
    Region region = Region::full_torus(model.dim, n);
    TruncatedSeries<Rational> big(static_cast<int>(hmax));
    auto tally = [&](const Config& config) {
      std::vector<TorusContour> gs = extract_torus_contours(model, n, config);
      bool large = false;
      long long energy = 0;
      for (const TorusContour& g : gs) {
        energy += g.surface_energy;
        if (g.kind == Kind::large) large = true;
      }
      if (!large) return;
      internal_check(energy <= hmax, "config energy exceeded its degree bound");
      big.c[static_cast<size_t>(energy)] += 1;
    };
    Config config(region.size(), 0);
    if (model.family == Family::potts) {
      bool done = false;
      while (!done) {
        tally(config);
        done = true;
        for (size_t i = 0; i < config.size(); ++i) {
          if (++config[i] < model.q) {
            done = false;
            break;
          }
          config[i] = 0;
        }
      }
    } else {
      const auto& pts = region.points();
      std::function<void(size_t)> walk = [&](size_t at) {
        if (at == pts.size()) {
          tally(config);
          return;
        }
        config[at] = 0;
        walk(at + 1);
        bool ok = true;
        for (const Point& nb : lattice::nn_neighbors(region.geometry(), pts[at])) {
          int idx = region.index_of(nb);
          if (static_cast<size_t>(idx) < at && config[static_cast<size_t>(idx)] == 1) {
            ok = false;
            break;
          }
        }
        if (ok) {
          config[at] = 1;
          walk(at + 1);
          config[at] = 0;
        }
      };
      walk(0);
    }
    return big;
  }

  // Identity route: subtract the small-contour side from the exact total.
  require(n >= 4, "torus side below 4 leaves no room for the contour taxonomy");
  TruncatedSeries<Rational> big = transfer_total(model, n, state_cap);
  for (int phi = 0; phi < model.ground_count(); ++phi) {
    TorusPool tp = build_torus_pool(model, n, phi, state_cap);
    TruncatedSeries<Rational> small =
        small_family_polynomial(model, tp, big.order, state_cap);
    for (size_t k = 0; k < big.c.size(); ++k) big.c[k] -= small.c[k];
  }
  internal_check(big.c[0] == 0, "every large contour carries positive energy");
  for (const Rational& v : big.c)
    internal_check(v >= 0, "large-contour census must stay nonnegative");
  return big;
}

TorusApprox torus_approx_Z(const ContourModel& model, int n, double z, double epsilon,
                           double c, uint64_t state_cap) {
  check_small_scale(model, n);
  require(epsilon > 0.0, "epsilon must be positive");
  require(c > 0.0, "floor constant must be positive");
  require(z >= 0.0, "activity must be nonnegative");
  require_regime(z < model.delta,
                 "|z| >= zero-free radius: no approximation guarantee on the torus");

  TorusApprox res;
  res.floor = std::exp(-c * static_cast<double>(n));
  res.dropped_big_term = true;

  // The dropped large-contour term: mandatory below the floor, attached
  // above it whenever brute force can afford the exact census.
  try {
    TruncatedSeries<Rational> total = torus_Z_total_exact(model, n, state_cap);
    TruncatedSeries<Rational> big = torus_Z_big_exact(model, n, state_cap);
    double totalv = series::evaluate(series::to_double_series(total), z);
    double bigv = series::evaluate(series::to_double_series(big), z);
    res.big_term = bigv;
    res.big_ratio = bigv / totalv;
  } catch (const CapError&) {
    if (epsilon < res.floor)
      throw RegimeError(
          "epsilon is below the admissible floor e^{-c n} and the dropped "
          "large-contour term cannot be exhibited at this size");
  }

  const long long ncells = cells_of(model, n);
  double N = static_cast<double>(model.peierls_degree()) * static_cast<double>(ncells);
  res.m_used = cluster::truncation_order(N, epsilon, z / model.delta);

  if (z == 0.0) {
    res.per_ground.assign(static_cast<size_t>(model.ground_count()), 1.0);
    res.value = static_cast<double>(model.ground_count());
    res.log_value = std::log(res.value);
    return res;
  }

  for (int phi = 0; phi < model.ground_count(); ++phi) {
    TorusPool tp = build_torus_pool(model, n, phi, state_cap);
    long long degree = max_family_degree(model, tp, state_cap);
    int m_en = static_cast<int>(std::min<long long>(res.m_used, std::max<long long>(degree, 0)));
    TruncatedSeries<Rational> logz(res.m_used);
    if (m_en >= 1) {
      TruncatedSeries<Rational> expanded = cluster_log_small(model, tp, m_en, state_cap);
      if (m_en < res.m_used) {
        TruncatedSeries<Rational> poly = series::poly_from_log(expanded);
        logz = series::log_from_poly(series::resized(poly, res.m_used));
      } else {
        logz = expanded;
      }
    }
    res.per_ground.push_back(
        std::exp(series::evaluate(series::to_double_series(logz), z)));
  }
  res.value = 0.0;
  for (double v : res.per_ground) res.value += v;
  res.log_value = std::log(res.value);
  return res;
}

// ---------------------------------------------------------------------------
// Sampling.

// Sequential cell-by-cell machine over one ground state's small-contour
// pool: at cell t a contour is proposable exactly once, when t is the first
// cell of its cov, and acceptance scores are exact sums over the mutually
// external families of the remaining pool.
struct TorusSampler::Outer {
  struct StepLaw {
    std::vector<size_t> candidates;
    std::vector<double> scores;
  };

  std::vector<SmallContour> pool;
  std::vector<double> weight;
  std::vector<int> first_cov;
  std::vector<std::vector<char>> me;
  std::map<std::pair<int, std::vector<size_t>>, StepLaw> memo;
  uint64_t state_cap = 0;

  double family_sum(const std::vector<char>& allowed) const {
    double total = 0.0;
    uint64_t visited = 0;
    std::vector<size_t> live;
    for (size_t j = 0; j < pool.size(); ++j)
      if (allowed[j]) live.push_back(j);
    std::vector<size_t> chosen;
    std::function<void(size_t, double)> walk = [&](size_t start, double acc) {
      require_cap(++visited <= state_cap, "family enumeration exceeds the state cap");
      total += acc;
      for (size_t idx = start; idx < live.size(); ++idx) {
        size_t j = live[idx];
        bool ok = true;
        for (size_t i : chosen)
          if (!me[i][j]) {
            ok = false;
            break;
          }
        if (!ok) continue;
        chosen.push_back(j);
        walk(idx + 1, acc * weight[j]);
        chosen.pop_back();
      }
    };
    walk(0, 1.0);
    return total;
  }

  const StepLaw& step_law(const std::vector<size_t>& family, int t) {
    auto key = std::make_pair(t, family);
    auto hit = memo.find(key);
    if (hit != memo.end()) return hit->second;

    StepLaw law;
    std::vector<char> base(pool.size(), 0);
    for (size_t j = 0; j < pool.size(); ++j) {
      if (first_cov[j] <= t) continue;
      bool ok = true;
      for (size_t i : family)
        if (!me[i][j]) {
          ok = false;
          break;
        }
      if (ok) base[j] = 1;
    }
    law.scores.push_back(family_sum(base));
    for (size_t j = 0; j < pool.size(); ++j) {
      if (first_cov[j] != t) continue;
      bool ok = true;
      for (size_t i : family)
        if (!me[i][j]) {
          ok = false;
          break;
        }
      if (!ok) continue;
      std::vector<char> masked(base);
      for (size_t k = 0; k < pool.size(); ++k)
        if (masked[k] && !me[j][k]) masked[k] = 0;
      law.candidates.push_back(j);
      law.scores.push_back(weight[j] * family_sum(masked));
    }
    return memo.emplace(std::move(key), std::move(law)).first->second;
  }

  std::vector<size_t> draw(Rng rng, int ncells) {
    std::vector<size_t> family;
    if (pool.empty()) return family;
    for (int t = 0; t < ncells; ++t) {
      const StepLaw& law = step_law(family, t);
      if (law.candidates.empty()) continue;
      Rng stream = rng.substream(static_cast<uint64_t>(t));
      size_t pick = stream.next_index(law.scores);
      if (pick > 0) family.push_back(law.candidates[pick - 1]);
    }
    return family;
  }
};

TorusSampler::TorusSampler(const ContourModel& model, int n, double z, double epsilon,
                           double c, uint64_t state_cap)
    : model_(model),
      n_(n),
      z_(z),
      state_cap_(state_cap),
      approx_(torus_approx_Z(model, n, z, epsilon / 2.0, c, state_cap)),
      region_(Region::full_torus(model.dim, n)) {
  require(z > 0.0, "sampling needs a strictly positive activity");
  const double ncells = static_cast<double>(region_.size());
  call_epsilon_ = (epsilon / 2.0) / (1.0 + ncells);
  double denom = model_.rho_peierls() * (1.0 - z_ / model_.delta);
  double raw = std::ceil(
      std::log(2.0 * model_.peierls_degree() * ncells / call_epsilon_) / denom);
  size_cutoff_ = static_cast<int>(
      std::min<double>(std::max(raw, 1.0), ncells));
}

TorusSampler::~TorusSampler() = default;

TorusSampler::Outer& TorusSampler::outer_for(int phi) {
  auto hit = outers_.find(phi);
  if (hit != outers_.end()) return *hit->second;
  auto outer = std::make_unique<Outer>();
  outer->state_cap = state_cap_;
  TorusPool tp = build_torus_pool(model_, n_, phi, state_cap_);
  std::vector<size_t> keep;
  for (size_t j = 0; j < tp.pool.size(); ++j)
    if (static_cast<int>(tp.pool[j].placed.support.size()) <= size_cutoff_) keep.push_back(j);
  long long order = 1;
  for (size_t j : keep)
    order = std::max(order, weight_degree_bound(model_, tp.pool[j].placed));
  WeightEngine engine(model_, static_cast<int>(order), state_cap_);
  for (size_t j : keep) {
    SmallContour& sc = tp.pool[j];
    double w = series::evaluate(series::to_double_series(engine.outer_weight(sc.canonical)),
                                z_);
    internal_check(w > 0.0, "absorbed contour weights are positive inside the disc");
    outer->weight.push_back(w);
    outer->first_cov.push_back(region_.index_of(sc.placed.cov.front()));
    outer->pool.push_back(std::move(sc));
  }
  const size_t m = outer->pool.size();
  outer->me.assign(m, std::vector<char>(m, 0));
  for (size_t a = 0; a < m; ++a)
    for (size_t b = a + 1; b < m; ++b) {
      char ok = tp.me[keep[a]][keep[b]];
      outer->me[a][b] = ok;
      outer->me[b][a] = ok;
    }
  return *outers_.emplace(phi, std::move(outer)).first->second;
}

sampling::ContourSampler& TorusSampler::interior_sampler(const std::vector<Point>& cells,
                                                         int label) {
  auto key = std::make_pair(cells, label);
  auto hit = interiors_.find(key);
  if (hit != interiors_.end()) return *hit->second;
  Region region(model_.dim, Geometry::free_space(), cells);
  auto sampler = std::make_unique<sampling::ContourSampler>(model_, region, label, z_,
                                                            call_epsilon_, state_cap_);
  return *interiors_.emplace(std::move(key), std::move(sampler)).first->second;
}

namespace {

// Carries a contour drawn on an unwrapped interior back onto the torus.
TorusContour torus_from_planar(const ContourModel& model, int n, const Contour& g,
                               const Point& translate) {
  return place_canonical(model, n, g, translate);
}

}  // namespace

TorusSample TorusSampler::sample(Rng rng) {
  TorusSample out;
  Rng ground_stream = rng.substream(0);
  out.phi = static_cast<int>(ground_stream.next_index(approx_.per_ground));

  const auto& pts = region_.points();
  out.assignment.resize(pts.size());
  for (size_t i = 0; i < pts.size(); ++i)
    out.assignment[i] = model_.ground_spin(out.phi, pts[i]);

  uint64_t calls = 0;
  // Paints an unwrapped interior: ground fill, then a recursive draw whose
  // contours are mapped through the placement translate.
  std::function<void(const std::vector<Point>&, int, const Point&)> fill_interior =
      [&](const std::vector<Point>& cells, int label, const Point& translate) {
        for (const Point& u : cells) {
          Point p(u);
          for (size_t k = 0; k < p.size(); ++k) p[k] += translate[k];
          out.assignment[static_cast<size_t>(region_.index_of(wrap_point(p, n_)))] =
              model_.ground_spin(label, u);
        }
        sampling::ContourSampler& cs = interior_sampler(cells, label);
        std::vector<Contour> fam = cs.sample(rng.substream(2 + calls++));
        for (const Contour& g : fam) {
          for (size_t i = 0; i < g.support.size(); ++i) {
            Point p(g.support[i]);
            for (size_t k = 0; k < p.size(); ++k) p[k] += translate[k];
            out.assignment[static_cast<size_t>(region_.index_of(wrap_point(p, n_)))] =
                g.spins[i];
          }
          out.matching.push_back(torus_from_planar(model_, n_, g, translate));
          for (size_t k = 0; k < g.interiors.size(); ++k)
            fill_interior(g.interiors[k], g.interior_labels[k], translate);
        }
      };

  Outer& outer = outer_for(out.phi);
  std::vector<size_t> fam = outer.draw(rng.substream(1), static_cast<int>(pts.size()));
  for (size_t j : fam) {
    const SmallContour& sc = outer.pool[j];
    out.matching.push_back(sc.placed);
    for (size_t i = 0; i < sc.placed.support.size(); ++i)
      out.assignment[static_cast<size_t>(region_.index_of(sc.placed.support[i]))] =
          sc.placed.spins[i];
    for (size_t k = 0; k < sc.canonical.interiors.size(); ++k)
      fill_interior(sc.canonical.interiors[k], sc.canonical.interior_labels[k],
                    sc.translate);
  }
  std::sort(out.matching.begin(), out.matching.end(), torus_contour_less);
  return out;
}

TorusSample torus_sample(const ContourModel& model, int n, double z, double epsilon,
                         Rng rng, double c, uint64_t state_cap) {
  TorusSampler sampler(model, n, z, epsilon, c, state_cap);
  return sampler.sample(rng);
}

}  // namespace pirogov::torus

#include "pirogov/contour.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "pirogov/graph.hpp"

namespace pirogov::contour {

using lattice::Geometry;
using series::TruncatedSeries;

namespace {

int point_parity(const Point& p) {
  long long s = 0;
  for (int x : p) s += x;
  return static_cast<int>(((s % 2) + 2) % 2);
}

int pow_int(int base, int exp) {
  int r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

ContourModel ContourModel::potts(int colours, int dimension, double zero_free) {
  require(colours >= 2, "colour count must be at least 2");
  require(dimension >= 1, "dimension must be positive");
  require(zero_free > 0.0 && zero_free < 1.0, "zero-free radius must lie in (0, 1)");
  ContourModel m;
  m.family = Family::potts;
  m.dim = dimension;
  m.q = colours;
  m.delta = zero_free;
  return m;
}

ContourModel ContourModel::hardcore(int dimension, double zero_free) {
  require(dimension >= 1, "dimension must be positive");
  require(zero_free > 0.0 && zero_free < 1.0, "zero-free radius must lie in (0, 1)");
  ContourModel m;
  m.family = Family::hardcore;
  m.dim = dimension;
  m.q = 2;
  m.delta = zero_free;
  return m;
}

int ContourModel::ground_count() const { return family == Family::potts ? q : 2; }

int ContourModel::spin_count() const { return family == Family::potts ? q : 2; }

int ContourModel::ground_spin(int label, const Point& p) const {
  if (family == Family::potts) return label;
  return point_parity(p) == label ? 1 : 0;
}

double ContourModel::rho_peierls() const { return 1.0 / (2.0 * pow_int(3, dim)); }

int ContourModel::peierls_degree() const { return family == Family::potts ? 2 * dim : 1; }

bool contour_less(const Contour& a, const Contour& b) {
  if (a.support != b.support) return a.support < b.support;
  return a.spins < b.spins;
}

void validate_boundary_config(const ContourModel& model, const Region& region, int phi,
                              const Config& config) {
  require(region.dim() == model.dim, "region dimension does not match the model");
  require(phi >= 0 && phi < model.ground_count(), "boundary label out of range");
  require(config.size() == region.size(), "one spin per region cell");
  const auto& pts = region.points();
  const int nspin = model.spin_count();
  for (size_t i = 0; i < pts.size(); ++i) {
    int v = config[i];
    require(v >= 0 && v < nspin, "spin value out of range");
    if (region.dist_to_complement(pts[i], 3) <= 2)
      require(v == model.ground_spin(phi, pts[i]),
              "cells near the boundary must carry the boundary ground state");
  }
  if (model.family == Family::hardcore) {
    for (size_t i = 0; i < pts.size(); ++i) {
      if (config[i] != 1) continue;
      for (const Point& nb : lattice::nn_neighbors(region.geometry(), pts[i])) {
        if (!region.contains(nb) || !(pts[i] < nb)) continue;
        require(config[static_cast<size_t>(region.index_of(nb))] != 1,
                "occupied cells must form an independent set");
      }
    }
  }
}

std::vector<Point> incorrect_cells(const ContourModel& model, const Region& region,
                                   const Config& config) {
  internal_check(config.size() == region.size(), "config / region size mismatch");
  const auto& pts = region.points();
  const Geometry& geom = region.geometry();
  std::vector<Point> out;
  for (size_t i = 0; i < pts.size(); ++i) {
    std::vector<Point> ball = lattice::dinf_neighbors(geom, pts[i]);
    ball.push_back(pts[i]);
    bool correct = false;
    for (int g = 0; g < model.ground_count() && !correct; ++g) {
      bool match = true;
      for (const Point& c : ball) {
        if (!region.contains(c)) continue;
        if (config[static_cast<size_t>(region.index_of(c))] != model.ground_spin(g, c)) {
          match = false;
          break;
        }
      }
      correct = match;
    }
    if (!correct) out.push_back(pts[i]);
  }
  return out;
}

namespace {

using PointIndex = std::unordered_map<Point, int, lattice::PointHash>;

// The complement structure of one support: its components, the comp-side
// cells hugging the support (collar) and the support cells hugging each
// component (facing), both deduplicated and sorted.
struct SupportAnalysis {
  lattice::ComplementSplit split;
  std::vector<std::vector<Point>> collar;
  std::vector<std::vector<int>> facing;
};

SupportAnalysis analyze_support(int dim, const std::vector<Point>& support) {
  SupportAnalysis a;
  a.split = lattice::complement_components(Geometry::free_space(), dim, support);
  internal_check(a.split.first_unbounded, "free-space complement must expose the unbounded part");
  PointIndex comp_of;
  for (size_t k = 0; k < a.split.comps.size(); ++k)
    for (const Point& c : a.split.comps[k]) comp_of[c] = static_cast<int>(k);
  lattice::PointSet in_support(support.begin(), support.end());
  a.collar.resize(a.split.comps.size());
  a.facing.resize(a.split.comps.size());
  for (size_t i = 0; i < support.size(); ++i) {
    for (const Point& nb : lattice::dinf_neighbors(Geometry::free_space(), support[i])) {
      if (in_support.count(nb)) continue;
      auto it = comp_of.find(nb);
      internal_check(it != comp_of.end(), "support neighbour escaped the complement window");
      a.collar[static_cast<size_t>(it->second)].push_back(nb);
      a.facing[static_cast<size_t>(it->second)].push_back(static_cast<int>(i));
    }
  }
  for (auto& c : a.collar) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    internal_check(!c.empty(), "every complement component touches the support");
  }
  for (auto& f : a.facing) {
    std::sort(f.begin(), f.end());
    f.erase(std::unique(f.begin(), f.end()), f.end());
  }
  return a;
}

// Ground state matching `values` at `cells`, or -1. At most one ground can
// match a nonempty cell set, since distinct grounds disagree everywhere.
int matching_ground(const ContourModel& model, const std::vector<Point>& cells,
                    const std::function<int(size_t)>& value_at) {
  for (int g = 0; g < model.ground_count(); ++g) {
    bool ok = true;
    for (size_t i = 0; i < cells.size() && ok; ++i)
      ok = value_at(i) == model.ground_spin(g, cells[i]);
    if (ok) return g;
  }
  return -1;
}

long long surface_energy_of(const ContourModel& model, const Region& region,
                            const Config& config, const std::vector<Point>& support,
                            const PointIndex& support_index) {
  const Geometry free = Geometry::free_space();
  long long total = 0;
  if (model.family == Family::potts) {
    for (const Point& p : support) {
      int vp = config[static_cast<size_t>(region.index_of(p))];
      for (const Point& nb : lattice::nn_neighbors(free, p)) {
        if (!(p < nb) || !support_index.count(nb)) continue;
        if (config[static_cast<size_t>(region.index_of(nb))] != vp) ++total;
      }
    }
    return total;
  }
  // Occupancy defect: each empty support cell contributes 2d minus its
  // occupied neighbours; the grand total is always a multiple of 4d.
  for (const Point& p : support) {
    if (config[static_cast<size_t>(region.index_of(p))] != 0) continue;
    long long c = 2 * model.dim;
    for (const Point& nb : lattice::nn_neighbors(free, p)) {
      internal_check(region.contains(nb), "support neighbour left the region");
      c -= config[static_cast<size_t>(region.index_of(nb))];
    }
    total += c;
  }
  internal_check(total % (4 * model.dim) == 0, "occupancy defect count must divide evenly");
  return total / (4 * model.dim);
}

// Assembles the contour carried by one connected incorrect component of a
// configuration: spins restricted to the support, component labels read from
// the comp-side collar, surface energy from the full configuration.
Contour contour_from_config(const ContourModel& model, const Region& region,
                            const Config& config, const std::vector<Point>& support) {
  Contour g;
  g.support = support;
  g.spins.reserve(support.size());
  PointIndex support_index;
  for (size_t i = 0; i < support.size(); ++i) {
    support_index[support[i]] = static_cast<int>(i);
    g.spins.push_back(config[static_cast<size_t>(region.index_of(support[i]))]);
  }
  SupportAnalysis a = analyze_support(model.dim, support);
  std::vector<int> labels(a.split.comps.size(), -1);
  for (size_t k = 0; k < a.split.comps.size(); ++k) {
    const auto& collar = a.collar[k];
    for (const Point& c : collar)
      internal_check(region.contains(c), "collar cell left the region");
    labels[k] = matching_ground(model, collar, [&](size_t i) {
      return config[static_cast<size_t>(region.index_of(collar[i]))];
    });
    internal_check(labels[k] >= 0, "component collar must sit in a ground state");
  }
  g.type = labels[0];
  for (size_t k = 1; k < a.split.comps.size(); ++k) {
    g.interiors.push_back(a.split.comps[k]);
    g.interior_labels.push_back(labels[k]);
  }
  g.surface_energy = surface_energy_of(model, region, config, support, support_index);
  internal_check(g.surface_energy >= 1, "a contour carries positive surface energy");
  g.cov = support;
  for (const auto& comp : g.interiors) g.cov.insert(g.cov.end(), comp.begin(), comp.end());
  std::sort(g.cov.begin(), g.cov.end());
  return g;
}

}  // namespace

std::vector<Contour> extract_contours(const ContourModel& model, const Region& region,
                                      int phi, const Config& config) {
  require(!region.geometry().is_torus(), "contour extraction works on free regions");
  validate_boundary_config(model, region, phi, config);
  std::vector<Point> bad = incorrect_cells(model, region, config);
  std::vector<Contour> out;
  for (const auto& comp :
       lattice::connected_components_of(region.geometry(), region.dim(), bad))
    out.push_back(contour_from_config(model, region, config, comp));
  return out;
}

Config realize_config(const ContourModel& model, const Region& region, int phi,
                      const std::vector<Contour>& contours) {
  require(region.dim() == model.dim, "region dimension does not match the model");
  require(phi >= 0 && phi < model.ground_count(), "boundary label out of range");
  const auto& pts = region.points();
  Config config(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) config[i] = model.ground_spin(phi, pts[i]);
  // Outer contours first, so a nested contour repaints the patch of the
  // interior fill it sits in.
  std::vector<const Contour*> order;
  for (const auto& g : contours) order.push_back(&g);
  std::stable_sort(order.begin(), order.end(), [](const Contour* a, const Contour* b) {
    if (a->cov.size() != b->cov.size()) return a->cov.size() > b->cov.size();
    return contour_less(*a, *b);
  });
  for (const Contour* g : order) {
    require(g->spins.size() == g->support.size(), "contour spins must match its support");
    require(g->interiors.size() == g->interior_labels.size(),
            "one label per interior component");
    for (size_t k = 0; k < g->interiors.size(); ++k)
      for (const Point& c : g->interiors[k])
        if (region.contains(c))
          config[static_cast<size_t>(region.index_of(c))] =
              model.ground_spin(g->interior_labels[k], c);
    for (size_t i = 0; i < g->support.size(); ++i) {
      require(region.contains(g->support[i]), "contour support must lie in the region");
      config[static_cast<size_t>(region.index_of(g->support[i]))] = g->spins[i];
    }
  }
  return config;
}

std::optional<Contour> make_valid_contour(const ContourModel& model, const Region& region,
                                          int phi, const std::vector<Point>& support,
                                          const std::vector<int>& spins) {
  require(!region.geometry().is_torus(), "contour validity works on free regions");
  require(region.dim() == model.dim, "region dimension does not match the model");
  require(phi >= 0 && phi < model.ground_count(), "boundary label out of range");
  require(!support.empty(), "contour support must be nonempty");
  require(support.size() == spins.size(), "one spin per support cell");
  std::vector<std::pair<Point, int>> cells(support.size());
  for (size_t i = 0; i < support.size(); ++i) {
    require(static_cast<int>(support[i].size()) == model.dim, "support cell dimension mismatch");
    require(spins[i] >= 0 && spins[i] < model.spin_count(), "spin value out of range");
    cells[i] = {support[i], spins[i]};
  }
  std::sort(cells.begin(), cells.end());
  Contour cand;
  for (size_t i = 0; i < cells.size(); ++i) {
    require(i == 0 || cells[i - 1].first != cells[i].first, "support cells must be distinct");
    require(region.contains(cells[i].first), "contour support must lie in the region");
    require(region.dist_to_complement(cells[i].first, 2) >= 2,
            "contour support must keep distance 2 from the boundary");
    cand.support.push_back(cells[i].first);
    cand.spins.push_back(cells[i].second);
  }
  require(lattice::connected_components_of(Geometry::free_space(), model.dim, cand.support)
                  .size() == 1,
          "contour support must be connected");

  // Labels forced by the candidate's own spins: the support cells facing a
  // component must sit in that component's ground state.
  SupportAnalysis a = analyze_support(model.dim, cand.support);
  std::vector<int> labels(a.split.comps.size(), -1);
  for (size_t k = 0; k < a.split.comps.size(); ++k) {
    labels[k] = matching_ground(model, [&] {
      std::vector<Point> facing_cells;
      for (int i : a.facing[k]) facing_cells.push_back(cand.support[static_cast<size_t>(i)]);
      return facing_cells;
    }(), [&](size_t i) { return cand.spins[static_cast<size_t>(a.facing[k][i])]; });
    if (labels[k] < 0) return std::nullopt;
  }
  if (labels[0] != phi) return std::nullopt;
  cand.type = phi;
  for (size_t k = 1; k < a.split.comps.size(); ++k) {
    for (const Point& c : a.split.comps[k])
      if (!region.contains(c)) return std::nullopt;
    cand.interiors.push_back(a.split.comps[k]);
    cand.interior_labels.push_back(labels[k]);
  }
  cand.cov = cand.support;
  for (const auto& comp : cand.interiors) cand.cov.insert(cand.cov.end(), comp.begin(), comp.end());
  std::sort(cand.cov.begin(), cand.cov.end());

  // A contour is valid exactly when it reproduces itself: realize the
  // one-contour family and extract. Boundary-condition violations in the
  // realized configuration disqualify the candidate rather than the caller.
  Config realized = realize_config(model, region, phi, {cand});
  std::vector<Contour> extracted;
  try {
    extracted = extract_contours(model, region, phi, realized);
  } catch (const ValidationError&) {
    return std::nullopt;
  }
  if (extracted.size() != 1 || !(extracted[0] == cand)) return std::nullopt;
  return extracted[0];
}

std::vector<Contour> list_contours(const ContourModel& model, const Region& region, int phi,
                                   int max_support, uint64_t budget) {
  require(!region.geometry().is_torus(), "contour listing works on free regions");
  require(region.dim() == model.dim, "region dimension does not match the model");
  require(phi >= 0 && phi < model.ground_count(), "boundary label out of range");
  require(max_support >= 0, "support bound must be nonnegative");
  std::vector<Point> allowed;
  for (const Point& p : region.points())
    if (region.dist_to_complement(p, 2) >= 2) allowed.push_back(p);
  if (allowed.empty() || max_support == 0) return {};

  PointIndex id_of;
  for (size_t i = 0; i < allowed.size(); ++i) id_of[allowed[i]] = static_cast<int>(i);
  Graph g(static_cast<int>(allowed.size()));
  for (size_t i = 0; i < allowed.size(); ++i)
    for (const Point& nb : lattice::dinf_neighbors(Geometry::free_space(), allowed[i])) {
      auto it = id_of.find(nb);
      if (it != id_of.end() && it->second > static_cast<int>(i))
        g.add_edge(static_cast<int>(i), it->second);
    }

  int cap = std::min<int>(max_support, static_cast<int>(allowed.size()));
  // Values other than the boundary ground can only sit on cells two full
  // steps clear of the complement, so every support cell must have one of
  // those within distance one (possibly itself) to come out incorrect when
  // the candidate is realized. Supports hugging the rim with no deep cell in
  // reach can never extract back; drop them before the expensive analysis.
  std::vector<char> deep(allowed.size(), 0);
  for (size_t i = 0; i < allowed.size(); ++i)
    deep[i] = region.dist_to_complement(allowed[i], 3) >= 3 ? 1 : 0;
  std::vector<char> member(allowed.size(), 0);
  std::vector<Contour> out;
  uint64_t assignments = 0;
  for (const auto& ids : all_connected_subsets(g, cap, budget)) {
    for (int v : ids) member[static_cast<size_t>(v)] = 1;
    bool feasible = true;
    for (int v : ids) {
      bool near_deep = deep[static_cast<size_t>(v)] != 0;
      for (size_t j = 0; !near_deep && j < g.adj[static_cast<size_t>(v)].size(); ++j) {
        int u = g.adj[static_cast<size_t>(v)][j];
        near_deep = member[static_cast<size_t>(u)] && deep[static_cast<size_t>(u)];
      }
      if (!near_deep) {
        feasible = false;
        break;
      }
    }
    for (int v : ids) member[static_cast<size_t>(v)] = 0;
    if (!feasible) continue;

    std::vector<Point> support;
    support.reserve(ids.size());
    for (int v : ids) support.push_back(allowed[static_cast<size_t>(v)]);
    SupportAnalysis a = analyze_support(model.dim, support);
    const size_t ncomp = a.split.comps.size();
    PointIndex in_support;
    for (size_t i = 0; i < support.size(); ++i) in_support[support[i]] = static_cast<int>(i);
    PointIndex finite_comp_at;
    for (size_t k = 1; k < ncomp; ++k)
      for (const Point& c : a.split.comps[k]) finite_comp_at[c] = static_cast<int>(k);

    // Spins forced by the unbounded component; cells facing a finite
    // component take that component's (enumerated) label; the rest are free.
    std::vector<int> base(support.size(), -1);
    for (int i : a.facing[0])
      base[static_cast<size_t>(i)] = model.ground_spin(phi, support[static_cast<size_t>(i)]);
    std::vector<char> constrained(support.size(), 0);
    for (size_t k = 0; k < ncomp; ++k)
      for (int i : a.facing[k]) constrained[static_cast<size_t>(i)] = 1;
    std::vector<int> free_cells;
    for (size_t i = 0; i < support.size(); ++i)
      if (!constrained[i]) free_cells.push_back(static_cast<int>(i));

    const int nlabel = model.ground_count();
    const int nspin = model.spin_count();
    std::vector<int> digits(ncomp - 1 + free_cells.size(), 0);
    bool done = false;
    while (!done) {
      if (++assignments > budget) throw CapError("contour assignment budget exceeded");
      std::vector<int> spins = base;
      bool conflict = false;
      for (size_t k = 1; k < ncomp && !conflict; ++k) {
        int lab = digits[k - 1];
        for (int i : a.facing[k]) {
          int v = model.ground_spin(lab, support[static_cast<size_t>(i)]);
          int& slot = spins[static_cast<size_t>(i)];
          if (slot >= 0 && slot != v) {
            conflict = true;
            break;
          }
          slot = v;
        }
      }
      if (!conflict) {
        for (size_t j = 0; j < free_cells.size(); ++j)
          spins[static_cast<size_t>(free_cells[j])] = digits[ncomp - 1 + j];
        // Realizing this assignment fills finite components with their
        // label's ground pattern; any support cell whose whole neighbourhood
        // then matches one ground would be dropped again by extraction, so
        // the candidate cannot round-trip. Weed those out before paying for
        // the full realization.
        auto value_at = [&](const Point& q) {
          auto it = in_support.find(q);
          if (it != in_support.end()) return spins[static_cast<size_t>(it->second)];
          auto fc = finite_comp_at.find(q);
          if (fc != finite_comp_at.end())
            return model.ground_spin(digits[static_cast<size_t>(fc->second) - 1], q);
          return model.ground_spin(phi, q);
        };
        bool all_incorrect = true;
        for (size_t si = 0; si < support.size() && all_incorrect; ++si) {
          for (int gm = 0; gm < model.ground_count(); ++gm) {
            bool match = value_at(support[si]) == model.ground_spin(gm, support[si]);
            if (match)
              for (const Point& nb :
                   lattice::dinf_neighbors(Geometry::free_space(), support[si]))
                if (value_at(nb) != model.ground_spin(gm, nb)) {
                  match = false;
                  break;
                }
            if (match) {
              all_incorrect = false;
              break;
            }
          }
        }
        if (all_incorrect)
          if (auto got = make_valid_contour(model, region, phi, support, spins))
            out.push_back(std::move(*got));
      }
      done = true;
      for (size_t d = 0; d < digits.size(); ++d) {
        int radix = d < ncomp - 1 ? nlabel : nspin;
        if (++digits[d] < radix) {
          done = false;
          break;
        }
        digits[d] = 0;
      }
    }
  }
  std::sort(out.begin(), out.end(), contour_less);
  for (size_t i = 1; i < out.size(); ++i)
    internal_check(contour_less(out[i - 1], out[i]), "listing produced a duplicate contour");
  return out;
}

std::vector<Contour> list_contours_exhaustive(const ContourModel& model, const Region& region,
                                              int phi, uint64_t state_cap) {
  require(!region.geometry().is_torus(), "contour listing works on free regions");
  require(region.dim() == model.dim, "region dimension does not match the model");
  require(phi >= 0 && phi < model.ground_count(), "boundary label out of range");
  const auto& pts = region.points();
  std::vector<int> free_idx;
  for (size_t i = 0; i < pts.size(); ++i)
    if (region.dist_to_complement(pts[i], 3) >= 3) free_idx.push_back(static_cast<int>(i));

  double cost = 1.0;
  for (size_t i = 0; i < free_idx.size(); ++i) {
    cost *= model.spin_count();
    require_cap(cost <= static_cast<double>(state_cap),
                "configuration space exceeds the enumeration cap");
  }

  Config config(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) config[i] = model.ground_spin(phi, pts[i]);

  std::map<std::pair<std::vector<Point>, std::vector<int>>, Contour> found;
  auto harvest = [&]() {
    for (Contour& g : extract_contours(model, region, phi, config))
      if (g.type == phi) found.emplace(std::make_pair(g.support, g.spins), std::move(g));
  };

  if (model.family == Family::potts) {
    std::vector<int> digits(free_idx.size(), 0);
    bool done = false;
    while (!done) {
      for (size_t j = 0; j < free_idx.size(); ++j)
        config[static_cast<size_t>(free_idx[j])] = digits[j];
      harvest();
      done = true;
      for (size_t d = 0; d < digits.size(); ++d) {
        if (++digits[d] < model.q) {
          done = false;
          break;
        }
        digits[d] = 0;
      }
    }
  } else {
    // Depth-first over independent occupancies of the free cells; occupied
    // neighbours (fixed ground cells included) prune a branch immediately.
    for (size_t j = 0; j < free_idx.size(); ++j) config[static_cast<size_t>(free_idx[j])] = 0;
    const Geometry& geom = region.geometry();
    std::function<void(size_t)> walk = [&](size_t at) {
      if (at == free_idx.size()) {
        harvest();
        return;
      }
      size_t cell = static_cast<size_t>(free_idx[at]);
      config[cell] = 0;
      walk(at + 1);
      bool blocked = false;
      for (const Point& nb : lattice::nn_neighbors(geom, pts[cell])) {
        if (region.contains(nb) && config[static_cast<size_t>(region.index_of(nb))] == 1) {
          blocked = true;
          break;
        }
      }
      if (!blocked) {
        config[cell] = 1;
        walk(at + 1);
        config[cell] = 0;
      }
    };
    walk(0);
  }

  std::vector<Contour> out;
  out.reserve(found.size());
  for (auto& kv : found) out.push_back(std::move(kv.second));
  return out;
}

bool mutually_external(const Contour& a, const Contour& b) {
  const Contour& small = a.cov.size() <= b.cov.size() ? a : b;
  const Contour& large = a.cov.size() <= b.cov.size() ? b : a;
  lattice::PointSet big(large.cov.begin(), large.cov.end());
  for (const Point& p : small.cov) {
    if (big.count(p)) return false;
    for (const Point& nb : lattice::dinf_neighbors(Geometry::free_space(), p))
      if (big.count(nb)) return false;
  }
  return true;
}

std::vector<int> not_mutually_external_with(const std::vector<Contour>& pool,
                                            const Contour& g) {
  std::vector<int> out;
  for (size_t i = 0; i < pool.size(); ++i)
    if (!mutually_external(pool[i], g)) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<Contour> list_contours_auto(const ContourModel& model, const Region& region,
                                        int phi, int max_support, uint64_t state_cap) {
  if (region.empty() || max_support <= 0) return {};
  size_t nfree = 0;
  for (const Point& p : region.points())
    if (region.dist_to_complement(p, 3) >= 3) ++nfree;
  double cost = 1.0;
  bool fits = true;
  for (size_t i = 0; i < nfree && fits; ++i) {
    cost *= model.spin_count();
    fits = cost <= static_cast<double>(state_cap);
  }
  int cap = static_cast<int>(
      std::min<long long>(max_support, static_cast<long long>(region.size())));
  if (!fits) return list_contours(model, region, phi, cap, state_cap);
  std::vector<Contour> all = list_contours_exhaustive(model, region, phi, state_cap);
  std::vector<Contour> out;
  for (Contour& g : all)
    if (static_cast<int>(g.support.size()) <= cap) out.push_back(std::move(g));
  return out;
}

namespace {

// Type-phi contours of the region with surface energy at most `order`.  The
// Peierls bound rho*|support| <= energy caps the support size a relevant
// contour can have, so the candidate route stays finite.
std::vector<Contour> pool_contours(const ContourModel& model, const Region& region, int phi,
                                   int order, uint64_t state_cap) {
  if (region.empty()) return {};
  long long cap = static_cast<long long>(order) * 2 * pow_int(3, model.dim);
  cap = std::min<long long>(cap, static_cast<long long>(region.size()));
  std::vector<Contour> all =
      list_contours_auto(model, region, phi, static_cast<int>(cap), state_cap);
  std::vector<Contour> out;
  for (Contour& g : all)
    if (g.surface_energy <= order) out.push_back(std::move(g));
  return out;
}

std::vector<int> normalized_key(const std::vector<Point>& cells, int dim, int* shift_parity) {
  Point lo = cells.front();
  for (const Point& p : cells)
    for (int k = 0; k < dim; ++k) lo[k] = std::min(lo[k], p[k]);
  *shift_parity = point_parity(lo);
  std::vector<int> flat;
  flat.reserve(cells.size() * static_cast<size_t>(dim));
  for (const Point& p : cells)
    for (int k = 0; k < dim; ++k) flat.push_back(p[k] - lo[k]);
  return flat;
}

}  // namespace

WeightEngine::WeightEngine(const ContourModel& model, int order, uint64_t state_cap)
    : model_(model), order_(order), state_cap_(state_cap) {
  require(order >= 1, "truncation order must be positive");
}

TruncatedSeries<Rational> WeightEngine::outer_weight(const Contour& g) {
  if (g.surface_energy > order_) return TruncatedSeries<Rational>(order_);
  TruncatedSeries<Rational> w =
      TruncatedSeries<Rational>::monomial(static_cast<int>(g.surface_energy), 1, order_);
  for (size_t k = 0; k < g.interiors.size(); ++k)
    w = series::mul(w, interior_Z(g.interiors[k], g.interior_labels[k]));
  return w;
}

TruncatedSeries<Rational> WeightEngine::interior_Z(const std::vector<Point>& cells,
                                                   int label) {
  if (cells.empty()) return TruncatedSeries<Rational>::one(order_);
  // Memoize up to translation. Shifting by an odd vector swaps the occupancy
  // sublattices, so the label is normalized along with the cells.
  int shift_parity = 0;
  std::vector<int> flat = normalized_key(cells, model_.dim, &shift_parity);
  int norm_label = label;
  if (model_.family == Family::hardcore) norm_label = label ^ shift_parity;
  Key key{std::move(flat), norm_label};
  auto hit = memo_.find(key);
  if (hit != memo_.end()) return hit->second;
  internal_check(!in_progress_.count(key), "interior recursion must shrink the region");
  in_progress_.insert(key);

  std::vector<Point> shifted;
  shifted.reserve(cells.size());
  Point lo = cells.front();
  for (const Point& p : cells)
    for (int k = 0; k < model_.dim; ++k) lo[k] = std::min(lo[k], p[k]);
  for (const Point& p : cells) {
    Point s(p);
    for (int k = 0; k < model_.dim; ++k) s[k] -= lo[k];
    shifted.push_back(std::move(s));
  }
  Region region(model_.dim, Geometry::free_space(), std::move(shifted));

  std::vector<Contour> pool = pool_contours(model_, region, norm_label, order_, state_cap_);
  TruncatedSeries<Rational> result = TruncatedSeries<Rational>::one(order_);
  if (!pool.empty()) {
    cluster::IncompatibilityPool inc;
    std::vector<TruncatedSeries<Rational>> weights;
    inc.min_order.reserve(pool.size());
    inc.neighbors.assign(pool.size(), {});
    for (const Contour& g : pool) {
      internal_check(g.surface_energy <= std::numeric_limits<int>::max(),
                     "surface energy overflows the pool order");
      inc.min_order.push_back(static_cast<int>(g.surface_energy));
      weights.push_back(outer_weight(g));
    }
    for (size_t i = 0; i < pool.size(); ++i)
      for (size_t j = i + 1; j < pool.size(); ++j)
        if (!mutually_external(pool[i], pool[j])) {
          inc.neighbors[i].push_back(static_cast<int>(j));
          inc.neighbors[j].push_back(static_cast<int>(i));
        }
    result = series::poly_from_log(cluster::logZ_pool<Rational>(inc, weights, order_));
  }

  in_progress_.erase(key);
  memo_.emplace(std::move(key), result);
  return result;
}

ContourPool build_contour_pool(const ContourModel& model, const Region& region, int phi,
                               int order, WeightEngine& engine) {
  require(order == engine.order(), "pool and engine must agree on the order");
  ContourPool cp;
  cp.contours = pool_contours(model, region, phi, order, engine.state_cap());
  const size_t n = cp.contours.size();
  cp.pool.min_order.reserve(n);
  cp.pool.neighbors.assign(n, {});
  cp.weights.reserve(n);
  for (const Contour& g : cp.contours) {
    internal_check(g.surface_energy <= std::numeric_limits<int>::max(),
                   "surface energy overflows the pool order");
    cp.pool.min_order.push_back(static_cast<int>(g.surface_energy));
    cp.weights.push_back(engine.outer_weight(g));
  }
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      if (!mutually_external(cp.contours[i], cp.contours[j])) {
        cp.pool.neighbors[i].push_back(static_cast<int>(j));
        cp.pool.neighbors[j].push_back(static_cast<int>(i));
      }
  return cp;
}

series::TruncatedSeries<Rational> contour_log_Z(const ContourModel& model,
                                                const Region& region, int phi, int m,
                                                uint64_t state_cap) {
  require(!region.geometry().is_torus(), "contour expansion works on free regions");
  require(region.dim() == model.dim, "region dimension does not match the model");
  require(phi >= 0 && phi < model.ground_count(), "boundary label out of range");
  require(m >= 1, "truncation order must be positive");
  WeightEngine engine(model, m, state_cap);
  ContourPool cp = build_contour_pool(model, region, phi, m, engine);
  return cluster::logZ_pool<Rational>(cp.pool, cp.weights, m);
}

cluster::ApproxResult approx_contour_Z(const ContourModel& model, const Region& region,
                                       int phi, double z, double epsilon, bool force,
                                       uint64_t state_cap) {
  require(!region.geometry().is_torus(), "contour expansion works on free regions");
  require(region.dim() == model.dim, "region dimension does not match the model");
  require(phi >= 0 && phi < model.ground_count(), "boundary label out of range");
  require(epsilon > 0.0, "epsilon must be positive");
  double az = std::abs(z);
  cluster::ApproxResult res;
  res.outside_radius = az >= model.delta;
  if (res.outside_radius)
    require_regime(force,
                   "|z| >= zero-free radius: no approximation guarantee (use force to "
                   "compute anyway)");

  double N = static_cast<double>(model.peierls_degree()) * static_cast<double>(region.size());
  double ratio = res.outside_radius ? 0.0 : az / model.delta;
  res.m_used = cluster::truncation_order(N, epsilon, ratio);

  if (z == 0.0) {
    res.value = 1.0;
    return res;
  }

  long long degree_cap =
      static_cast<long long>(model.peierls_degree()) * static_cast<long long>(region.size());
  res.m_enumerated = static_cast<int>(
      std::min<long long>(res.m_used, std::max<long long>(degree_cap, 0)));

  TruncatedSeries<Rational> logz(res.m_used);
  if (res.m_enumerated >= 1) {
    TruncatedSeries<Rational> expanded =
        contour_log_Z(model, region, phi, res.m_enumerated, state_cap);
    if (res.m_enumerated < res.m_used) {
      TruncatedSeries<Rational> poly = series::poly_from_log(expanded);
      logz = series::log_from_poly(series::resized(poly, res.m_used));
    } else {
      logz = expanded;
    }
  }
  res.log_value = series::evaluate(series::to_double_series(logz), z);
  res.value = std::exp(res.log_value);
  return res;
}

SpinZResult spin_Z_from_contours(const ContourModel& model, const Region& region, int phi,
                                 double param, double epsilon, bool force,
                                 uint64_t state_cap) {
  require(param > 0.0, "model parameter must be positive");
  SpinZResult res;
  if (model.family == Family::potts) {
    res.z = std::exp(-param);
    long long edges = 0;
    for (const Point& p : region.points())
      for (const Point& nb : lattice::nn_neighbors(region.geometry(), p))
        if (region.contains(nb) && p < nb) ++edges;
    res.prefactor_log = param * static_cast<double>(edges);
  } else {
    res.z = 1.0 / param;
    long long cells = 0;
    for (const Point& p : region.points())
      if (point_parity(p) == phi) ++cells;
    res.prefactor_log = std::log(param) * static_cast<double>(cells);
  }
  cluster::ApproxResult ar =
      approx_contour_Z(model, region, phi, res.z, epsilon, force, state_cap);
  res.log_value = ar.log_value + res.prefactor_log;
  res.value = std::exp(res.log_value);
  res.m_used = ar.m_used;
  res.outside_radius = ar.outside_radius;
  return res;
}

}  // namespace pirogov::contour

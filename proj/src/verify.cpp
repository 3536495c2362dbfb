#include "pirogov/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pirogov/cluster.hpp"
#include "pirogov/common.hpp"
#include "pirogov/contour.hpp"
#include "pirogov/graph.hpp"
#include "pirogov/oracle.hpp"
#include "pirogov/polymer.hpp"
#include "pirogov/sampling.hpp"
#include "pirogov/series.hpp"
#include "pirogov/torus.hpp"

namespace pirogov::verify {
namespace {

using lattice::Point;
using lattice::Region;
using polymer::HardcorePolymerModel;
using polymer::IsingPolymerModel;
using polymer::Polymer;
using series::TruncatedSeries;

// Failure accumulator: counts every assertion and keeps the first failing
// message so a battery reports something actionable without flooding.
struct Tally {
  int checks = 0;
  int failures = 0;
  std::string first;

  void check(bool ok, const std::string& what) {
    ++checks;
    if (!ok && failures++ == 0) first = what;
  }
};

// ---- little hosts -------------------------------------------------------

Graph path_graph(int n) {
  Graph g(n);
  for (int v = 0; v + 1 < n; ++v) g.add_edge(v, v + 1);
  return g;
}

Graph cycle_graph(int n) {
  Graph g = path_graph(n);
  if (n > 2) g.add_edge(0, n - 1);
  return g;
}

Graph star_graph(int leaves) {
  Graph g(leaves + 1);
  for (int v = 1; v <= leaves; ++v) g.add_edge(0, v);
  return g;
}

Graph grid_graph(int w, int h) {
  return Graph::from_region_nn(Region::box({0, 0}, {w - 1, h - 1}));
}

Graph random_bounded_graph(Rng& rng, int n, int max_deg) {
  Graph g(n);
  int attempts = 4 * n * std::max(max_deg, 1);
  for (int t = 0; t < attempts; ++t) {
    int u = static_cast<int>(rng.next_bits() % static_cast<uint64_t>(n));
    int v = static_cast<int>(rng.next_bits() % static_cast<uint64_t>(n));
    if (u == v || g.adjacent(u, v)) continue;
    if (static_cast<int>(g.adj[static_cast<size_t>(u)].size()) >= max_deg) continue;
    if (static_cast<int>(g.adj[static_cast<size_t>(v)].size()) >= max_deg) continue;
    g.add_edge(u, v);
  }
  return g;
}

Rational rational_pow(const Rational& base, long long e) {
  Rational r(1);
  for (long long i = 0; i < e; ++i) r *= base;
  return r;
}

int last_nonzero_degree(const TruncatedSeries<Rational>& s) {
  int d = 0;
  for (int k = 0; k <= s.order; ++k)
    if (s.c[static_cast<size_t>(k)] != 0) d = k;
  return d;
}

// ---- 1: Ursell values, golden graphs and dual routes --------------------

void run_ursell(Tally& t, std::string& extra) {
  using cluster::SmallGraph;
  auto golden = [&](const SmallGraph& h, long long want, const std::string& name) {
    t.check(cluster::ursell_direct(h) == BigInt(want), name + ": edge-subset value off");
    t.check(cluster::ursell(h) == BigInt(want), name + ": deletion-contraction value off");
  };
  SmallGraph k1(1);
  golden(k1, 1, "K1");
  SmallGraph k2(2);
  k2.add_edge(0, 1);
  golden(k2, -1, "K2");
  SmallGraph p3(3);
  p3.add_edge(0, 1);
  p3.add_edge(1, 2);
  golden(p3, 1, "P3");
  SmallGraph k3(3);
  k3.add_edge(0, 1);
  k3.add_edge(1, 2);
  k3.add_edge(0, 2);
  golden(k3, 2, "K3");

  Rng rng(411);
  int made = 0;
  uint64_t attempt = 0;
  while (made < 200) {
    Rng r = rng.substream(attempt++);
    int n = 1 + static_cast<int>(r.next_bits() % 7);
    double p = 0.25 + 0.2 * static_cast<double>(attempt % 3);
    cluster::SmallGraph h(n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (r.next_unit() < p) h.add_edge(i, j);
    if (!h.connected()) continue;
    ++made;
    t.check(cluster::ursell(h) == cluster::ursell_direct(h),
            "random connected graph " + std::to_string(made) + ": routes disagree");
  }
  extra = "4 golden graphs; 200 random connected graphs up to 7 vertices";
}

// ---- 2: exp/log round trip on rational polynomials ----------------------

void run_newton(Tally& t, std::string& extra) {
  Rng rng(577);
  for (int trial = 0; trial < 500; ++trial) {
    Rng r = rng.substream(static_cast<uint64_t>(trial));
    int deg = static_cast<int>(r.next_bits() % 11);
    TruncatedSeries<Rational> p(deg);
    p.c[0] = Rational(1);
    for (int k = 1; k <= deg; ++k) {
      long long num = static_cast<long long>(r.next_bits() % 19) - 9;
      long long den = 1 + static_cast<long long>(r.next_bits() % 9);
      p.c[static_cast<size_t>(k)] = Rational(num) / Rational(den);
    }
    auto round = series::poly_from_log(series::log_from_poly(p));
    t.check(round.c == p.c, "trial " + std::to_string(trial) + ": round trip is not the identity");
  }
  extra = "500 random polynomials, degrees 0..10, constant term 1";
}

// ---- 3: cluster expansion vs brute-force partition polynomials ----------

void run_polymer(Tally& t, std::string& extra) {
  std::vector<Graph> hosts;
  Graph grid = grid_graph(3, 4);
  for (const auto& verts : all_connected_subsets(grid, grid.n))
    hosts.push_back(grid.induced(verts));
  size_t grid_count = hosts.size();
  Rng rng(733);
  for (int trial = 0; trial < 50; ++trial) {
    Rng r = rng.substream(static_cast<uint64_t>(trial));
    int n = 2 + static_cast<int>(r.next_bits() % 9);
    hosts.push_back(random_bounded_graph(r, n, 4));
  }
  for (size_t i = 0; i < hosts.size(); ++i) {
    HardcorePolymerModel model(hosts[i]);
    int m = std::max(model.exact_degree(), 1);
    auto poly = series::poly_from_log(cluster::logZ_coefficients(model, m));
    auto brute = series::resized(oracle::brute_Z_hardcore(hosts[i]), m);
    t.check(poly.c == brute.c,
            "occupation host " + std::to_string(i) + ": expansion misses the brute polynomial");
  }

  std::vector<Graph> spin_hosts = {path_graph(3), path_graph(4), cycle_graph(4), star_graph(3)};
  for (size_t gi = 0; gi < spin_hosts.size(); ++gi) {
    for (double beta : {0.5, 1.0, 2.0}) {
      IsingPolymerModel model(spin_hosts[gi], beta);
      int m = model.exact_degree();
      auto logz = cluster::logZ_coefficients(model, m);
      auto brute = oracle::brute_Z_ising(spin_hosts[gi]).to_series(beta);
      auto logb = series::log_from_poly(series::resized(brute, m));
      auto poly = series::poly_from_log(logz);
      bool ok = true;
      for (int k = 0; k <= m; ++k) {
        double a = logz.c[static_cast<size_t>(k)];
        double b = logb.c[static_cast<size_t>(k)];
        ok = ok && std::abs(a - b) <= 1e-9 * (1.0 + std::abs(b));
        double pa = poly.c[static_cast<size_t>(k)];
        double pb = brute.c[static_cast<size_t>(k)];
        ok = ok && std::abs(pa - pb) <= 1e-9 * (1.0 + std::abs(pb));
      }
      std::ostringstream os;
      os << "spin-deviation host " << gi << " beta " << beta << ": coefficient drift above 1e-9";
      t.check(ok, os.str());
    }
  }
  std::ostringstream os;
  os << grid_count << " connected grid subgraphs + 50 random hosts (exact); "
     << spin_hosts.size() << " spin hosts x 3 temperatures (1e-9 relative)";
  extra = os.str();
}

// ---- 4: truncated approximation against its error bound -----------------

void run_fptas(Tally& t, std::string& extra) {
  Graph g = grid_graph(4, 4);
  HardcorePolymerModel model(g);
  auto brute = oracle::brute_Z_hardcore(g);
  double z = 0.5 / (std::exp(1.0) * 5.0);
  double exact = series::evaluate(series::to_double_series(brute), z);
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    auto ar = cluster::approx_Z(model, z, eps);
    double ratio = ar.value / exact;
    std::ostringstream os;
    os << "eps " << eps;
    t.check(ratio >= std::exp(-eps) && ratio <= std::exp(eps),
            os.str() + ": approximation leaves the e^{+-eps} bracket");
    int expect =
        std::max(static_cast<int>(std::ceil(std::log(16.0 / eps) / (1.0 - 0.5))), 1);
    t.check(ar.m_used == expect, os.str() + ": truncation order is not the bound's");
  }
  extra = "4x4 grid occupation model at half the convergence radius, three accuracies";
}

// ---- 5: contour counting vs brute-force spin sums -----------------------

void run_contour(Tally& t, std::string& extra) {
  const uint64_t cap = uint64_t(1) << 24;
  for (int q : {2, 3}) {
    for (int side : {6, 7}) {
      Region r = Region::box({0, 0}, {side - 1, side - 1});
      auto model = contour::ContourModel::potts(q);
      auto brute = oracle::brute_Z_potts_region(r, q, 0);
      int d = last_nonzero_degree(brute);
      auto poly = series::poly_from_log(contour::contour_log_Z(model, r, 0, d, cap));
      std::ostringstream os;
      os << "colours q=" << q << " on " << side << "x" << side;
      t.check(poly.c == series::resized(brute, d).c, os.str() + ": polynomial mismatch");
    }
  }

  Region r = Region::box({0, 0}, {7, 7});
  auto model = contour::ContourModel::hardcore();
  auto brute = oracle::brute_Z_hardcore_region(r, 0);
  int d = last_nonzero_degree(brute);
  auto poly = series::poly_from_log(contour::contour_log_Z(model, r, 0, d, cap));
  t.check(poly.c == series::resized(brute, d).c, "occupancies on 8x8: polynomial mismatch");

  // Per-configuration identity: the extracted surface energies sum to the
  // occupation shortfall |r^even| - |I| of every padded configuration.
  auto free_cells = oracle::padded_free_cells(r);
  long long even_cells = oracle::parity_count(r, 0);
  contour::Config base = contour::realize_config(model, r, 0, {});
  std::vector<size_t> free_idx;
  for (const Point& p : free_cells) free_idx.push_back(static_cast<size_t>(r.index_of(p)));
  long long tested = 0, bad = 0;
  for (uint64_t mask = 0; mask < (uint64_t(1) << free_cells.size()); ++mask) {
    contour::Config config = base;
    for (size_t i = 0; i < free_idx.size(); ++i)
      config[free_idx[i]] = (mask >> i) & 1 ? 1 : 0;
    try {
      contour::validate_boundary_config(model, r, 0, config);
    } catch (const ValidationError&) {
      continue;
    }
    long long occ = 0;
    for (int v : config) occ += v;
    long long energy = 0;
    for (const auto& gam : contour::extract_contours(model, r, 0, config))
      energy += gam.surface_energy;
    ++tested;
    if (energy != even_cells - occ) ++bad;
  }
  t.check(tested > 0 && bad == 0,
          "occupancy defect-size identity failed on " + std::to_string(bad) + " of " +
              std::to_string(tested) + " configurations");
  std::ostringstream os;
  os << "4 colour boxes + 8x8 occupancies exact; shortfall identity on " << tested
     << " configurations";
  extra = os.str();
}

// ---- 6: sampler law, symbolic and empirical ------------------------------

std::string family_key(const std::vector<Polymer>& fam) {
  std::ostringstream os;
  for (const auto& g : fam) {
    os << '[';
    for (size_t i = 0; i < g.support.size(); ++i) os << g.support[i] << ':' << g.spins[i] << ',';
    os << ']';
  }
  return os.str();
}

template <typename Model>
std::vector<std::vector<size_t>> all_families(const Model& model,
                                              const std::vector<Polymer>& polys) {
  std::vector<std::vector<size_t>> out;
  std::vector<size_t> cur;
  auto rec = [&](auto&& self, size_t start) -> void {
    out.push_back(cur);
    for (size_t j = start; j < polys.size(); ++j) {
      bool ok = true;
      for (size_t i : cur)
        if (!polymer::compatible(model.host(), polys[i], polys[j])) {
          ok = false;
          break;
        }
      if (!ok) continue;
      cur.push_back(j);
      self(self, j + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

void run_samplerlaw(Tally& t, std::string& extra) {
  std::vector<Graph> hosts = {path_graph(2), path_graph(3), star_graph(3), cycle_graph(5),
                              grid_graph(2, 3)};
  Rational zr = Rational(1) / Rational(25);
  double z = 0.04;
  double epsilon = 0.05;
  int draws = 100000;
  double worst_tv = 0.0;
  for (size_t hi = 0; hi < hosts.size(); ++hi) {
    HardcorePolymerModel model(hosts[hi]);
    auto polys = model.list_polymers(hosts[hi].n);
    std::vector<char> all(polys.size(), 1);
    Rational bigZ = sampling::exact_family_Z(model, polys, all, zr);

    oracle::ExactDistribution dist;
    Rational total(0);
    for (const auto& fam : all_families(model, polys)) {
      std::vector<Polymer> members;
      for (size_t j : fam) members.push_back(polys[j]);
      Rational target = rational_pow(zr, static_cast<long long>(fam.size())) / bigZ;
      Rational got = sampling::exact_outcome_probability(model, zr, members);
      t.check(got == target, "host " + std::to_string(hi) +
                                 ": symbolic step product differs from the measure");
      total += got;
      dist.outcomes.emplace_back(family_key(members), target);
    }
    t.check(total == Rational(1), "host " + std::to_string(hi) + ": law does not sum to one");
    dist.validate();

    sampling::PolymerSampler<HardcorePolymerModel> sampler(model, z, epsilon);
    Rng root(606 + static_cast<uint64_t>(hi));
    std::map<std::string, uint64_t> counts;
    for (int k = 0; k < draws; ++k)
      ++counts[family_key(sampler.sample(root.substream(static_cast<uint64_t>(k))))];
    auto tv = oracle::tv_distance(dist, counts);
    worst_tv = std::max(worst_tv, tv.tv);
    t.check(tv.tv <= epsilon + 4.0 * tv.radius,
            "host " + std::to_string(hi) + ": empirical distance above budget");
  }
  std::ostringstream os;
  os << hosts.size() << " hosts: exact law over every outcome; worst empirical tv " << worst_tv
     << " at " << draws << " draws";
  extra = os.str();
}

// ---- 7: spin sampler end-to-end ------------------------------------------

std::string spin_key(const contour::Config& c, const std::vector<size_t>& idxs) {
  std::string s;
  for (size_t i : idxs) s.push_back(static_cast<char>('0' + c[i]));
  return s;
}

void run_spinsampler(Tally& t, std::string& extra) {
  auto model = contour::ContourModel::potts(2);
  Region r = Region::box({0, 0}, {5, 5});
  double z = 0.02;
  double beta = -std::log(z);
  double epsilon = 0.05;
  Rational zr = Rational(1) / Rational(50);

  std::vector<size_t> fidx;
  for (const Point& p : oracle::padded_free_cells(r))
    fidx.push_back(static_cast<size_t>(r.index_of(p)));
  auto edges = oracle::region_nn_edges(r);

  // Exact Gibbs law over the free window.
  oracle::ExactDistribution dist;
  {
    contour::Config config = contour::realize_config(model, r, 0, {});
    std::vector<std::pair<std::string, Rational>> raw;
    Rational total(0);
    for (uint64_t mask = 0; mask < (uint64_t(1) << fidx.size()); ++mask) {
      for (size_t i = 0; i < fidx.size(); ++i)
        config[fidx[i]] = (mask >> i) & 1 ? 1 : 0;
      long long h = 0;
      for (const auto& [a, b] : edges)
        if (config[static_cast<size_t>(a)] != config[static_cast<size_t>(b)]) ++h;
      Rational w = rational_pow(zr, h);
      total += w;
      raw.emplace_back(spin_key(config, fidx), w);
    }
    for (auto& [key, w] : raw) dist.outcomes.emplace_back(key, w / total);
    dist.validate();
  }

  sampling::SpinSampler sampler(model, r, 0, beta, epsilon);
  Rng root(88);
  std::map<std::string, uint64_t> counts;
  int draws = 100000;
  long long provenance_bad = 0;
  for (int k = 0; k < draws; ++k) {
    sampling::SpinSample s = sampler.sample(root.substream(static_cast<uint64_t>(k)));
    ++counts[spin_key(s.assignment, fidx)];
    auto extracted = contour::extract_contours(model, r, 0, s.assignment);
    std::sort(extracted.begin(), extracted.end(), contour::contour_less);
    std::vector<contour::Contour> reported;
    for (const auto& call : s.provenance)
      reported.insert(reported.end(), call.contours.begin(), call.contours.end());
    std::sort(reported.begin(), reported.end(), contour::contour_less);
    if (!(extracted == reported)) ++provenance_bad;
  }
  t.check(provenance_bad == 0, "re-extraction contradicted the provenance on " +
                                   std::to_string(provenance_bad) + " draws");
  auto tv = oracle::tv_distance(dist, counts);
  t.check(tv.tv <= epsilon + 4.0 * tv.radius, "empirical distance above budget");
  std::ostringstream os;
  os << draws << " draws on the 6x6 box: tv " << tv.tv << " vs budget "
     << epsilon + 4.0 * tv.radius << "; provenance re-extracted on every draw";
  extra = os.str();
}

// ---- 8: torus decomposition and approximation ----------------------------

void run_torus(Tally& t, std::string& extra) {
  const int n = 4;
  std::ostringstream summary;
  for (auto family : {contour::Family::hardcore, contour::Family::potts}) {
    auto model = family == contour::Family::potts ? contour::ContourModel::potts(2)
                                                  : contour::ContourModel::hardcore();
    const char* name = family == contour::Family::potts ? "colours" : "occupancies";
    Region reg = Region::full_torus(2, n);
    const auto& pts = reg.points();
    const size_t ncells = pts.size();

    // Wrapped nearest-neighbour edges once, as index pairs.
    std::vector<std::pair<size_t, size_t>> edges;
    for (size_t i = 0; i < ncells; ++i)
      for (const Point& nb : lattice::nn_neighbors(reg.geometry(), pts[i])) {
        size_t j = static_cast<size_t>(reg.index_of(nb));
        if (i < j) edges.emplace_back(i, j);
      }

    long long hmax = family == contour::Family::potts ? 2 * static_cast<long long>(ncells)
                                                      : static_cast<long long>(ncells) / 2;
    std::vector<long long> census(static_cast<size_t>(hmax) + 1, 0);
    long long bad_energy = 0, bad_round = 0, bad_multi_large = 0, configs = 0;

    auto visit = [&](const contour::Config& config) {
      long long h;
      if (family == contour::Family::potts) {
        h = 0;
        for (const auto& [a, b] : edges)
          if (config[a] != config[b]) ++h;
      } else {
        long long occ = 0;
        for (int v : config) occ += v;
        h = static_cast<long long>(ncells) / 2 - occ;
      }
      ++configs;
      census[static_cast<size_t>(h)] += 1;

      auto contours = torus::extract_torus_contours(model, n, config);
      long long energy = 0;
      int large = 0;
      for (const auto& g : contours) {
        energy += g.surface_energy;
        if (g.kind == torus::Kind::large) ++large;
      }
      if (energy != h) ++bad_energy;
      if (large > 1) ++bad_multi_large;
      int phi = 0;
      if (contours.empty()) {
        for (int g = 0; g < model.ground_count(); ++g) {
          bool match = true;
          for (size_t i = 0; i < ncells && match; ++i)
            match = config[i] == model.ground_spin(g, pts[i]);
          if (match) phi = g;
        }
      }
      for (const auto& g : contours)
        if (g.kind == torus::Kind::small) phi = g.type;
      if (!(torus::realize_torus_config(model, n, phi, contours) == config)) ++bad_round;
    };

    contour::Config config(ncells, 0);
    if (family == contour::Family::potts) {
      for (uint64_t mask = 0; mask < (uint64_t(1) << ncells); ++mask) {
        for (size_t i = 0; i < ncells; ++i) config[i] = (mask >> i) & 1 ? 1 : 0;
        visit(config);
      }
    } else {
      for (uint64_t mask = 0; mask < (uint64_t(1) << ncells); ++mask) {
        bool ok = true;
        for (size_t i = 0; i < ncells; ++i) config[i] = (mask >> i) & 1 ? 1 : 0;
        for (const auto& [a, b] : edges)
          if (config[a] && config[b]) {
            ok = false;
            break;
          }
        if (ok) visit(config);
      }
    }

    std::string tag(name);
    t.check(bad_energy == 0, tag + ": surface energies missed the defect count on " +
                                 std::to_string(bad_energy) + " configurations");
    t.check(bad_multi_large == 0, tag + ": more than one large contour extracted");
    t.check(bad_round == 0, tag + ": realization failed to invert extraction on " +
                                std::to_string(bad_round) + " configurations");

    TruncatedSeries<Rational> sweep(static_cast<int>(hmax));
    for (long long h = 0; h <= hmax; ++h)
      sweep.c[static_cast<size_t>(h)] = Rational(census[static_cast<size_t>(h)]);

    auto total = series::resized(torus::torus_Z_total_exact(model, n), static_cast<int>(hmax));
    t.check(total.c == sweep.c, tag + ": transfer total differs from the sweep census");

    auto decomposition =
        series::resized(torus::torus_Z_big_exact(model, n), static_cast<int>(hmax));
    for (int phi = 0; phi < model.ground_count(); ++phi) {
      auto zphi = series::poly_from_log(
          torus::torus_Z_small(model, n, phi, static_cast<int>(hmax)));
      series::add_scaled_inplace(decomposition, Rational(1), zphi);
    }
    t.check(decomposition.c == sweep.c,
            tag + ": large-term-plus-ground-terms decomposition differs from the census");

    double zval = 0.01, eps = 0.05;
    auto ap = torus::torus_approx_Z(model, n, zval, eps);
    double brute = series::evaluate(series::to_double_series(sweep), zval);
    t.check(ap.big_term.has_value(), tag + ": exact large-contour term was not exhibited");
    double big = ap.big_term.value_or(0.0);
    double factor = brute / (brute - big);
    double ratio = brute / (ap.value * factor);
    t.check(ratio >= std::exp(-eps) && ratio <= std::exp(eps),
            tag + ": approximation leaves the e^{+-eps}(1 + large ratio) bracket");
    t.check(std::abs(ap.big_ratio.value_or(-1.0) - big / brute) <= 1e-9,
            tag + ": reported large-term ratio disagrees with the census");
    summary << name << " " << configs << " configs; ";
  }
  extra = summary.str() + "identities exact, approximation bracketed";
}

// ---- 9: convergence certificate boundary ---------------------------------

void run_kp(Tally& t, std::string& extra) {
  Graph host = Graph::from_region_nn(Region::full_torus(2, 4));
  HardcorePolymerModel model(host);
  double z = 1.0 / (std::exp(1.0) * 5.0);

  auto inside = polymer::kp_certificate(model, z, host.n);
  t.check(inside.holds_truncated, "certificate fails at the convergence radius");
  auto polys = model.list_polymers(host.n);
  double worst_singleton = 0.0;
  for (size_t i = 0; i < polys.size(); ++i)
    if (polys[i].support.size() == 1)
      worst_singleton = std::max(worst_singleton, std::abs(inside.margins[i]));
  t.check(worst_singleton <= 1e-12,
          "singleton margins are not tight at the radius");

  auto outside = polymer::kp_certificate(model, 1.5 * z, host.n);
  t.check(!outside.holds_truncated, "certificate wrongly holds past the radius");
  std::ostringstream os;
  os << "4-regular torus host: holds at the radius (singleton margin " << worst_singleton
     << "), fails at 1.5x";
  extra = os.str();
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const std::string& filter) {
  struct Battery {
    const char* id;
    const char* name;
    double budget;
    void (*run)(Tally&, std::string&);
  };
  const Battery batteries[] = {
      {"ursell", "Ursell golden values and dual-route agreement", 10, run_ursell},
      {"newton", "exp/log series round-trip on rational polynomials", 5, run_newton},
      {"polymer", "cluster expansion vs brute-force partition polynomials", 120, run_polymer},
      {"fptas", "truncated approximation honors its error bound", 60, run_fptas},
      {"contour", "contour counting matches brute-force spin sums", 300, run_contour},
      {"samplerlaw", "polymer sampler law, symbolic and empirical", 180, run_samplerlaw},
      {"spinsampler", "spin sampler end-to-end against the Gibbs law", 300, run_spinsampler},
      {"torus", "torus decomposition and approximation vs enumeration", 600, run_torus},
      {"kp", "convergence certificate boundary on the 4-regular torus", 10, run_kp},
  };
  std::vector<CriterionResult> out;
  for (const auto& b : batteries) {
    if (!filter.empty() && filter != b.id) continue;
    CriterionResult res;
    res.id = b.id;
    res.name = b.name;
    res.budget = b.budget;
    Tally tally;
    std::string extra;
    auto start = std::chrono::steady_clock::now();
    try {
      b.run(tally, extra);
    } catch (const std::exception& e) {
      tally.check(false, std::string("unexpected exception: ") + e.what());
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.checks = tally.checks;
    bool in_budget = res.seconds < b.budget;
    if (tally.failures > 0) {
      res.pass = false;
      res.detail = std::to_string(tally.failures) + "/" + std::to_string(tally.checks) +
                   " checks failed; first: " + tally.first;
    } else if (!in_budget) {
      res.pass = false;
      res.detail = "all checks passed but the run exceeded its time budget";
    } else {
      res.pass = true;
      res.detail = extra;
    }
    out.push_back(res);
  }
  return out;
}

}  // namespace pirogov::verify

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "pirogov/torus.hpp"

using namespace pirogov;
using namespace pirogov::torus;
using contour::ContourModel;
using lattice::Point;
using lattice::Region;

namespace {

// Test-side wrapped distance, computed the slow way.
int slow_wrapped_dinf(int n, const Point& a, const Point& b) {
  int d = 0;
  for (size_t k = 0; k < a.size(); ++k) {
    int diff = std::abs(a[k] - b[k]) % n;
    d = std::max(d, std::min(diff, n - diff));
  }
  return d;
}

bool slow_me(int n, const TorusContour& a, const TorusContour& b) {
  for (const Point& p : a.cov)
    for (const Point& q : b.cov)
      if (slow_wrapped_dinf(n, p, q) <= 1) return false;
  return true;
}

// Defect energy straight from the configuration: bichromatic wrapped edges
// for colourings, half-torus shortfall for occupancies.
long long direct_energy(const ContourModel& model, int n, const contour::Config& config) {
  Region region = Region::full_torus(model.dim, n);
  if (model.family == contour::Family::potts) {
    long long h = 0;
    const auto& pts = region.points();
    for (size_t i = 0; i < pts.size(); ++i)
      for (const Point& nb : lattice::nn_neighbors(region.geometry(), pts[i]))
        if (pts[i] < nb &&
            config[i] != config[static_cast<size_t>(region.index_of(nb))])
          ++h;
    return h;
  }
  long long occ = 0;
  for (int v : config) occ += v;
  return static_cast<long long>(region.size()) / 2 - occ;
}

struct Census {
  std::vector<long long> by_energy;            // config counts per defect energy
  std::vector<long long> big_by_energy;        // ... restricted to large-contour configs
  long long configs = 0;
  std::set<std::vector<std::pair<std::vector<Point>, std::vector<int>>>> families;
};

// Sweeps every torus configuration, cross-checking the extraction invariants
// along the way.
Census sweep_all_configs(const ContourModel& model, int n) {
  Region region = Region::full_torus(model.dim, n);
  const size_t ncells = region.size();
  long long hmax = model.family == contour::Family::potts
                       ? static_cast<long long>(model.dim) * static_cast<long long>(ncells)
                       : static_cast<long long>(ncells) / 2;
  Census census;
  census.by_energy.assign(static_cast<size_t>(hmax) + 1, 0);
  census.big_by_energy.assign(static_cast<size_t>(hmax) + 1, 0);

  auto visit = [&](const contour::Config& config) {
    ++census.configs;
    auto contours = extract_torus_contours(model, n, config);

    long long energy = 0;
    int large = 0;
    std::vector<std::pair<std::vector<Point>, std::vector<int>>> key;
    for (const auto& g : contours) {
      energy += g.surface_energy;
      if (g.kind == Kind::large) ++large;
      // Re-derive the kind from the support alone.
      REQUIRE(classify_support(model.dim, n, g.support) == g.kind);
      key.emplace_back(g.support, g.spins);
    }
    REQUIRE(large <= 1);
    REQUIRE(energy == direct_energy(model, n, config));
    census.by_energy[static_cast<size_t>(energy)] += 1;
    if (large) census.big_by_energy[static_cast<size_t>(energy)] += 1;
    census.families.insert(std::move(key));

    // Extraction inverts realization. A large contour fills the whole
    // torus, so the base label is immaterial for it; for pure-small
    // families the exterior label is the type the contours share; for the
    // empty family it is the ground state the config sits in.
    int phi = 0;
    if (contours.empty()) {
      Region region = Region::full_torus(model.dim, n);
      for (int g = 0; g < model.ground_count(); ++g) {
        bool match = true;
        const auto& pts = region.points();
        for (size_t i = 0; i < pts.size() && match; ++i)
          match = config[i] == model.ground_spin(g, pts[i]);
        if (match) phi = g;
      }
    }
    for (const auto& g : contours)
      if (g.kind == Kind::small) phi = g.type;
    REQUIRE(realize_torus_config(model, n, phi, contours) == config);
  };

  contour::Config config(ncells, 0);
  if (model.family == contour::Family::potts) {
    bool done = false;
    while (!done) {
      visit(config);
      done = true;
      for (size_t i = 0; i < ncells; ++i) {
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
      if (at == ncells) {
        visit(config);
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
  return census;
}

}  // namespace

TEST_SUITE_BEGIN("torus");

TEST_CASE("support classification splits at the wrap scale") {
  // A lone cell is small; a full row wraps around and is large.
  CHECK(classify_support(2, 6, {{2, 3}}) == Kind::small);
  std::vector<Point> row;
  for (int x = 0; x < 6; ++x) row.push_back({x, 0});
  CHECK(classify_support(2, 6, row) == Kind::large);

  // 3x3 block on T_6: wrapped diameter 2 < 3.
  std::vector<Point> block;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) block.push_back({x, y});
  CHECK(classify_support(2, 6, block) == Kind::small);

  // A block that straddles the wrap is still the same small block.
  std::vector<Point> shifted;
  for (const Point& p : block) shifted.push_back({(p[0] + 5) % 6, (p[1] + 5) % 6});
  std::sort(shifted.begin(), shifted.end());
  CHECK(classify_support(2, 6, shifted) == Kind::small);

  // Two disconnected small components are not one contour.
  CHECK_THROWS_AS(classify_support(2, 6, {{0, 0}, {3, 3}}), ValidationError);
  // A wrap-scale component plus a separate small one cannot come from a
  // configuration either.
  std::vector<Point> mixed = row;
  mixed.push_back({0, 3});
  std::sort(mixed.begin(), mixed.end());
  CHECK_THROWS_AS(classify_support(2, 6, mixed), ValidationError);
  CHECK_THROWS_AS(classify_support(2, 6, {}), ValidationError);
  CHECK_THROWS_AS(classify_support(2, 6, {{0, 6}}), ValidationError);
}

TEST_CASE("T_4 colour census: extraction invariants and the exact total") {
  ContourModel model = ContourModel::potts(2, 2);
  Census census = sweep_all_configs(model, 4);
  CHECK(census.configs == 65536);
  // Ground configs carry no contours; everything else does.
  CHECK(census.by_energy[0] == 2);

  // No room for small contours on T_4: every defect is wrap-scale, so the
  // energy census restricted to large-contour configs misses only the two
  // ground states.
  for (size_t k = 1; k < census.by_energy.size(); ++k)
    CHECK(census.by_energy[k] == census.big_by_energy[k]);

  auto total = torus_Z_total_exact(model, 4);
  REQUIRE(total.order == 32);
  for (int k = 0; k <= total.order; ++k)
    CHECK(total.c[static_cast<size_t>(k)] == Rational(census.by_energy[static_cast<size_t>(k)]));

  auto big = torus_Z_big_exact(model, 4);
  for (int k = 0; k <= big.order; ++k)
    CHECK(big.c[static_cast<size_t>(k)] ==
          Rational(census.big_by_energy[static_cast<size_t>(k)]));

  // Distinct configurations induce distinct contour families, except that
  // all ground configurations share the empty one.
  CHECK(static_cast<long long>(census.families.size()) == census.configs - 1);
}

TEST_CASE("T_4 occupancy census: extraction invariants and the exact total") {
  ContourModel model = ContourModel::hardcore(2);
  Census census = sweep_all_configs(model, 4);
  CHECK(census.by_energy[0] == 2);  // two checkerboards

  for (size_t k = 1; k < census.by_energy.size(); ++k)
    CHECK(census.by_energy[k] == census.big_by_energy[k]);

  auto total = torus_Z_total_exact(model, 4);
  REQUIRE(total.order == 8);
  for (int k = 0; k <= total.order; ++k)
    CHECK(total.c[static_cast<size_t>(k)] == Rational(census.by_energy[static_cast<size_t>(k)]));

  auto big = torus_Z_big_exact(model, 4);
  for (int k = 0; k <= big.order; ++k)
    CHECK(big.c[static_cast<size_t>(k)] ==
          Rational(census.big_by_energy[static_cast<size_t>(k)]));

  CHECK(static_cast<long long>(census.families.size()) == census.configs - 1);
}

TEST_CASE("T_4 decomposition: total = large census + one unit per ground") {
  for (ContourModel model : {ContourModel::potts(2, 2), ContourModel::hardcore(2)}) {
    auto total = torus_Z_total_exact(model, 4);
    auto big = torus_Z_big_exact(model, 4);
    // No small contour fits below the wrap scale on T_4...
    for (int phi = 0; phi < model.ground_count(); ++phi)
      CHECK(list_small_contours(model, 4, phi).empty());
    // ... so each small-side partition function is the constant 1.
    REQUIRE(big.order == total.order);
    for (int k = 0; k <= total.order; ++k) {
      Rational expect = big.c[static_cast<size_t>(k)];
      if (k == 0) expect += model.ground_count();
      CHECK(total.c[static_cast<size_t>(k)] == expect);
    }
  }
}

TEST_CASE("large-contour census agrees between brute force and subtraction") {
  // Default caps let T_4 be swept directly; a tight cap reroutes through
  // exact-total-minus-small-families. The two must agree coefficient by
  // coefficient.
  for (ContourModel model : {ContourModel::potts(2, 2), ContourModel::hardcore(2)}) {
    auto direct = torus_Z_big_exact(model, 4);
    auto subtracted = torus_Z_big_exact(model, 4, 1000);
    REQUIRE(direct.order == subtracted.order);
    for (int k = 0; k <= direct.order; ++k)
      CHECK(direct.c[static_cast<size_t>(k)] == subtracted.c[static_cast<size_t>(k)]);
  }
}

TEST_CASE("small-contour pools on T_6: counts, shapes, placements") {
  ContourModel q2 = ContourModel::potts(2, 2);
  auto pool = list_small_contours(q2, 6, 0);
  // One canonical shape (the single flipped colour: 3x3 support, four
  // bichromatic edges) at each of the 36 translates.
  REQUIRE(pool.size() == 36);
  std::set<Point> translates;
  for (const auto& sc : pool) {
    CHECK(sc.placed.kind == Kind::small);
    CHECK(sc.placed.type == 0);
    CHECK(sc.placed.support.size() == 9);
    CHECK(sc.placed.cov.size() == 9);
    CHECK(sc.placed.interiors.empty());
    CHECK(sc.placed.surface_energy == 4);
    CHECK(sc.canonical.surface_energy == 4);
    // Canonical shapes sit at the origin corner.
    Point corner = sc.canonical.support.front();
    for (const Point& p : sc.canonical.support)
      for (size_t k = 0; k < p.size(); ++k) corner[k] = std::min(corner[k], p[k]);
    CHECK(corner == Point{0, 0});
    translates.insert(sc.translate);
  }
  CHECK(translates.size() == 36);

  // 3x3 blocks always overlap or touch on T_6: no mutually external pair.
  for (size_t i = 0; i < pool.size(); ++i)
    for (size_t j = i + 1; j < pool.size(); ++j) {
      CHECK_FALSE(torus_mutually_external(6, pool[i].placed, pool[j].placed));
      CHECK_FALSE(slow_me(6, pool[i].placed, pool[j].placed));
    }

  ContourModel q3 = ContourModel::potts(3, 2);
  for (int phi = 0; phi < 3; ++phi) {
    // Two off-colours per translate.
    CHECK(list_small_contours(q3, 6, phi).size() == 72);
  }

  ContourModel hc = ContourModel::hardcore(2);
  for (int phi = 0; phi < 2; ++phi) {
    auto hpool = list_small_contours(hc, 6, phi);
    // One canonical vacancy (3x3 support, centre emptied) placed on the 18
    // cells of the matching sublattice.
    REQUIRE(hpool.size() == 18);
    for (const auto& sc : hpool) {
      CHECK(sc.placed.type == phi);
      CHECK(sc.placed.support.size() == 9);
      CHECK(sc.placed.interiors.empty());
      CHECK(sc.placed.surface_energy == 1);
    }
    for (size_t i = 0; i < hpool.size(); ++i)
      for (size_t j = i + 1; j < hpool.size(); ++j)
        CHECK_FALSE(torus_mutually_external(6, hpool[i].placed, hpool[j].placed));
  }
}

TEST_CASE("every listed placement realizes and extracts back to itself") {
  std::vector<std::pair<ContourModel, int>> cases = {
      {ContourModel::potts(2, 2), 0}, {ContourModel::potts(3, 2), 1},
      {ContourModel::hardcore(2), 0}, {ContourModel::hardcore(2), 1}};
  for (const auto& [model, phi] : cases) {
    auto pool = list_small_contours(model, 6, phi);
    REQUIRE(!pool.empty());
    for (const auto& sc : pool) {
      auto config = realize_torus_config(model, 6, phi, {sc.placed});
      auto back = extract_torus_contours(model, 6, config);
      REQUIRE(back.size() == 1);
      CHECK(back[0] == sc.placed);
      CHECK(back[0].kind == Kind::small);
      CHECK(back[0].type == sc.placed.type);
      CHECK(back[0].surface_energy == sc.placed.surface_energy);
      CHECK(back[0].interiors == sc.placed.interiors);
      CHECK(back[0].interior_labels == sc.placed.interior_labels);
      CHECK(back[0].cov == sc.placed.cov);
    }
  }
}

TEST_CASE("small-side partition functions on T_6 match family enumeration") {
  // Independent oracle: sum z^(total energy) over mutually external subsets
  // of the listed pool, using the test's own wrap metric.
  auto census_poly = [](const ContourModel& model, int n, int phi, int order) {
    auto pool = list_small_contours(model, n, phi);
    series::TruncatedSeries<Rational> out(order);
    out.c[0] = 1;
    std::vector<size_t> chosen;
    std::function<void(size_t, long long)> walk = [&](size_t start, long long energy) {
      for (size_t j = start; j < pool.size(); ++j) {
        bool ok = true;
        for (size_t i : chosen) ok = ok && slow_me(n, pool[i].placed, pool[j].placed);
        if (!ok) continue;
        long long e = energy + pool[j].placed.surface_energy;
        if (e <= order) out.c[static_cast<size_t>(e)] += 1;
        chosen.push_back(j);
        walk(j + 1, e);
        chosen.pop_back();
      }
    };
    walk(0, 0);
    return out;
  };

  ContourModel q2 = ContourModel::potts(2, 2);
  auto zq2 = series::poly_from_log(torus_Z_small(q2, 6, 0, 8));
  auto oq2 = census_poly(q2, 6, 0, 8);
  // 1 + 36 z^4 exactly: no mutually external pair survives to z^8.
  for (int k = 0; k <= 8; ++k) {
    CHECK(zq2.c[static_cast<size_t>(k)] == oq2.c[static_cast<size_t>(k)]);
    Rational expect = k == 0 ? 1 : (k == 4 ? 36 : 0);
    CHECK(zq2.c[static_cast<size_t>(k)] == expect);
  }

  ContourModel q3 = ContourModel::potts(3, 2);
  auto zq3 = series::poly_from_log(torus_Z_small(q3, 6, 2, 7));
  auto oq3 = census_poly(q3, 6, 2, 7);
  for (int k = 0; k <= 7; ++k) {
    CHECK(zq3.c[static_cast<size_t>(k)] == oq3.c[static_cast<size_t>(k)]);
    Rational expect = k == 0 ? 1 : (k == 4 ? 72 : 0);
    CHECK(zq3.c[static_cast<size_t>(k)] == expect);
  }

  ContourModel hc = ContourModel::hardcore(2);
  for (int phi = 0; phi < 2; ++phi) {
    auto zhc = series::poly_from_log(torus_Z_small(hc, 6, phi, 4));
    auto ohc = census_poly(hc, 6, phi, 4);
    for (int k = 0; k <= 4; ++k) {
      CHECK(zhc.c[static_cast<size_t>(k)] == ohc.c[static_cast<size_t>(k)]);
      Rational expect = k == 0 ? 1 : (k == 1 ? 18 : 0);
      CHECK(zhc.c[static_cast<size_t>(k)] == expect);
    }
  }
}

TEST_CASE("torus approximation brackets the exact small-contour sum") {
  // T_6 colourings at z = 1/100, epsilon below the e^{-cn} floor: the
  // dropped large-contour term must be exhibited exactly, and the returned
  // value must approximate total - large within the epsilon guarantee.
  ContourModel q2 = ContourModel::potts(2, 2);
  const double z = 0.01;
  const double eps = 0.05;
  auto res = torus_approx_Z(q2, 6, z, eps);
  CHECK(res.dropped_big_term);
  REQUIRE(res.big_term.has_value());
  REQUIRE(res.big_ratio.has_value());
  CHECK(res.floor == doctest::Approx(std::exp(-0.6)));
  CHECK(eps < res.floor);

  Rational zq(1);
  zq /= 100;
  auto total = torus_Z_total_exact(q2, 6);
  auto big = torus_Z_big_exact(q2, 6);
  double totalv = static_cast<double>(series::evaluate(total, zq));
  double bigv = static_cast<double>(series::evaluate(big, zq));
  double small_true = totalv - bigv;
  CHECK(res.big_term.value() == doctest::Approx(bigv).epsilon(1e-12));
  CHECK(res.big_ratio.value() == doctest::Approx(bigv / totalv).epsilon(1e-12));
  CHECK(res.value >= std::exp(-eps) * small_true);
  CHECK(res.value <= std::exp(eps) * small_true);
  // Colour symmetry.
  REQUIRE(res.per_ground.size() == 2);
  CHECK(res.per_ground[0] == doctest::Approx(res.per_ground[1]).epsilon(1e-12));
  // Two grounds, tiny correction: the value sits just above 2.
  CHECK(res.value > 2.0);
  CHECK(res.value < 2.01);
  CHECK(res.log_value == doctest::Approx(std::log(res.value)));
}

TEST_CASE("torus approximation above the floor proceeds without the census") {
  // Three colours on T_6: the exact censuses are beyond the desk-scale caps,
  // but epsilon sits above the floor, so the approximation may drop the
  // large-contour term silently.
  ContourModel q3 = ContourModel::potts(3, 2);
  const double eps = 0.6;
  auto res = torus_approx_Z(q3, 6, 0.01, eps);
  CHECK(res.dropped_big_term);
  CHECK_FALSE(res.big_term.has_value());
  CHECK_FALSE(res.big_ratio.has_value());
  CHECK(eps >= res.floor);
  REQUIRE(res.per_ground.size() == 3);
  CHECK(res.per_ground[0] == doctest::Approx(res.per_ground[1]).epsilon(1e-12));
  CHECK(res.per_ground[0] == doctest::Approx(res.per_ground[2]).epsilon(1e-12));
  CHECK(res.value == doctest::Approx(3.0 * res.per_ground[0]).epsilon(1e-12));
  // 72 single-flip contours of energy 4 per ground.
  CHECK(res.per_ground[0] == doctest::Approx(std::exp(72.0 * 1e-8)).epsilon(1e-6));
}

TEST_CASE("torus approximation refuses below the floor when the census is out of reach") {
  // T_5 with three colours: epsilon below the floor demands the exact
  // large-contour term, and no brute-force route fits the caps.
  ContourModel q3 = ContourModel::potts(3, 2);
  CHECK_THROWS_AS(torus_approx_Z(q3, 5, 0.01, 0.05), RegimeError);
}

TEST_CASE("torus approximation for occupancies below the floor") {
  ContourModel hc = ContourModel::hardcore(2);
  const double z = 0.02;
  const double eps = 0.05;
  auto res = torus_approx_Z(hc, 6, z, eps);
  REQUIRE(res.big_term.has_value());

  Rational zq(1);
  zq /= 50;
  auto total = torus_Z_total_exact(hc, 6);
  auto big = torus_Z_big_exact(hc, 6);
  double small_true = static_cast<double>(series::evaluate(total, zq)) -
                      static_cast<double>(series::evaluate(big, zq));
  CHECK(res.value >= std::exp(-eps) * small_true);
  CHECK(res.value <= std::exp(eps) * small_true);
  // Z^phi = 1 + 18z exactly per checkerboard; the truncation reproduces it.
  CHECK(res.per_ground[0] == doctest::Approx(1.0 + 18.0 * z).epsilon(1e-5));
  CHECK(res.per_ground[1] == doctest::Approx(1.0 + 18.0 * z).epsilon(1e-5));
}

TEST_CASE("torus approximation at zero activity") {
  ContourModel q2 = ContourModel::potts(2, 2);
  auto res = torus_approx_Z(q2, 4, 0.0, 0.05);
  CHECK(res.value == 2.0);
  REQUIRE(res.big_term.has_value());
  CHECK(res.big_term.value() == 0.0);
  CHECK(res.big_ratio.value() == 0.0);
  CHECK(res.per_ground == std::vector<double>{1.0, 1.0});
}

TEST_CASE("torus approximation argument and regime errors") {
  ContourModel q2 = ContourModel::potts(2, 2);
  ContourModel hc = ContourModel::hardcore(2);
  CHECK_THROWS_AS(torus_approx_Z(q2, 6, 0.05, 0.05), RegimeError);   // z == delta
  CHECK_THROWS_AS(torus_approx_Z(q2, 6, 0.2, 0.05), RegimeError);    // z > delta
  CHECK_THROWS_AS(torus_approx_Z(q2, 6, -0.01, 0.05), ValidationError);
  CHECK_THROWS_AS(torus_approx_Z(q2, 6, 0.01, 0.0), ValidationError);
  CHECK_THROWS_AS(torus_approx_Z(q2, 3, 0.01, 0.05), ValidationError);
  CHECK_THROWS_AS(torus_approx_Z(q2, 6, 0.01, 0.05, -1.0), ValidationError);
  CHECK_THROWS_AS(torus_approx_Z(hc, 5, 0.01, 0.05), ValidationError);
}

TEST_CASE("wrap-crossing extraction with an interior round-trips") {
  // A 3x3 colour-1 patch straddling both wrap seams of T_12: its centre is
  // correct, so the extracted contour is a width-2 annulus with a one-cell
  // interior labelled 1, sitting across the seam.
  ContourModel q2 = ContourModel::potts(2, 2);
  Region region = Region::full_torus(2, 12);
  contour::Config config(region.size(), 0);
  for (int x : {10, 11, 0})
    for (int y : {10, 11, 0})
      config[static_cast<size_t>(region.index_of({x, y}))] = 1;

  auto contours = extract_torus_contours(q2, 12, config);
  REQUIRE(contours.size() == 1);
  const TorusContour& g = contours[0];
  CHECK(g.kind == Kind::small);
  CHECK(g.type == 0);
  CHECK(g.support.size() == 24);  // 5x5 block minus its centre
  CHECK(g.cov.size() == 25);
  CHECK(g.surface_energy == 12);  // perimeter of the 3x3 patch
  REQUIRE(g.interiors.size() == 1);
  CHECK(g.interiors[0] == std::vector<Point>{{11, 11}});
  CHECK(g.interior_labels == std::vector<int>{1});
  CHECK(classify_support(2, 12, g.support) == Kind::small);

  CHECK(realize_torus_config(q2, 12, 0, contours) == config);
}

TEST_CASE("checkerboard grounds commute with translation up to a parity flip") {
  // Painting an interior in its unwrapped frame and shifting must agree
  // with the flipped label at the shifted position; wrapping keeps parity
  // because torus sides are even for occupancy models.
  ContourModel hc = ContourModel::hardcore(2);
  const int n = 6;
  for (Point t : {Point{1, 0}, Point{2, 1}, Point{3, 3}, Point{5, 4}}) {
    int par = ((t[0] + t[1]) % 2 + 2) % 2;
    for (int label = 0; label < 2; ++label) {
      int shifted = par == 1 ? 1 - label : label;
      for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y) {
          Point u{x, y};
          Point moved{(x + t[0]) % n, (y + t[1]) % n};
          CHECK(hc.ground_spin(label, u) == hc.ground_spin(shifted, moved));
        }
    }
  }
}

TEST_CASE("torus sampler is deterministic and matches the one-shot wrapper") {
  ContourModel hc = ContourModel::hardcore(2);
  TorusSampler sampler(hc, 6, 0.04, 0.05);
  TorusSampler again(hc, 6, 0.04, 0.05);
  for (uint64_t k = 0; k < 5; ++k) {
    auto a = sampler.sample(Rng(900).substream(k));
    auto b = again.sample(Rng(900).substream(k));
    CHECK(a.phi == b.phi);
    CHECK(a.assignment == b.assignment);
    CHECK(a.matching == b.matching);
  }
  for (uint64_t seed : {7ULL, 8ULL}) {
    auto a = sampler.sample(Rng(seed));
    auto b = torus_sample(hc, 6, 0.04, 0.05, Rng(seed));
    CHECK(a.phi == b.phi);
    CHECK(a.assignment == b.assignment);
    CHECK(a.matching == b.matching);
  }
}

TEST_CASE("torus sampler at tiny activity: uniform ground, no contours") {
  ContourModel q3 = ContourModel::potts(3, 2);
  // Epsilon large enough that the unavailable large-contour census is not
  // required (epsilon/2 must clear the floor).
  TorusSampler sampler(q3, 6, 1e-5, 1.2);
  const int draws = 9000;
  std::vector<int> colour_count(3, 0);
  for (int k = 0; k < draws; ++k) {
    auto s = sampler.sample(Rng(2026).substream(static_cast<uint64_t>(k)));
    CHECK(s.matching.empty());
    // Constant colouring in the drawn ground.
    bool constant = true;
    for (int v : s.assignment) constant = constant && v == s.phi;
    CHECK(constant);
    ++colour_count[static_cast<size_t>(s.phi)];
  }
  // 4 sigma around draws/3.
  double sigma = std::sqrt(draws * (1.0 / 3.0) * (2.0 / 3.0));
  for (int c = 0; c < 3; ++c)
    CHECK(std::abs(colour_count[static_cast<size_t>(c)] - draws / 3.0) <= 4.0 * sigma);
}

TEST_CASE("torus sampler at T_4 occupancies matches the Gibbs law up to the large mass") {
  // At fugacity 1000 (z = 0.001) on T_4 there are no small contours at all:
  // the sampler emits the two checkerboards 50/50. The exact Gibbs law
  // differs from that by exactly the large-contour mass.
  ContourModel hc = ContourModel::hardcore(2);
  const double z = 0.001;
  TorusSampler sampler(hc, 4, z, 0.05);
  REQUIRE(sampler.ground_law().big_ratio.has_value());
  double bigmass = sampler.ground_law().big_ratio.value();

  const int draws = 100000;
  std::vector<long long> atom(3, 0);  // checkerboard 0, checkerboard 1, other
  Region region = Region::full_torus(2, 4);
  for (int k = 0; k < draws; ++k) {
    auto s = sampler.sample(Rng(411).substream(static_cast<uint64_t>(k)));
    CHECK(s.matching.empty());
    bool cb0 = true, cb1 = true;
    const auto& pts = region.points();
    for (size_t i = 0; i < pts.size(); ++i) {
      cb0 = cb0 && s.assignment[i] == hc.ground_spin(0, pts[i]);
      cb1 = cb1 && s.assignment[i] == hc.ground_spin(1, pts[i]);
    }
    if (cb0)
      ++atom[0];
    else if (cb1)
      ++atom[1];
    else
      ++atom[2];
  }
  CHECK(atom[2] == 0);

  Rational zq(1);
  zq /= 1000;
  auto total = torus_Z_total_exact(hc, 4);
  double T = static_cast<double>(series::evaluate(total, zq));
  // Gibbs atoms: each checkerboard carries 1/T, everything else is large.
  double tv = 0.5 * (std::abs(atom[0] / double(draws) - 1.0 / T) +
                     std::abs(atom[1] / double(draws) - 1.0 / T) +
                     std::abs(atom[2] / double(draws) - (1.0 - 2.0 / T)));
  CHECK(tv <= bigmass + 0.02);
  CHECK(bigmass < 0.01);  // the comparison is sharp, not vacuous
}

namespace {

// Lumped-outcome empirical law: (ground, sorted supports) for pure-small
// matchings. Used to compare the sampler against closed-form and Gibbs laws.
using Outcome = std::pair<int, std::vector<std::vector<Point>>>;

Outcome outcome_of(const TorusSample& s) {
  std::vector<std::vector<Point>> sups;
  for (const auto& g : s.matching) sups.push_back(g.support);
  std::sort(sups.begin(), sups.end());
  return {s.phi, sups};
}

}  // namespace

TEST_CASE("torus sampler on T_6 occupancies: exact per-atom law and Gibbs distance") {
  ContourModel hc = ContourModel::hardcore(2);
  const double z = 0.04;
  const double eps = 0.05;
  TorusSampler sampler(hc, 6, z, eps);
  // The cutoff keeps every 9-cell vacancy support.
  CHECK(sampler.size_cutoff() >= 9);

  // Atoms: (phi, empty) and (phi, one vacancy v). No two vacancies of the
  // same type are mutually external on T_6, so matchings have size <= 1.
  std::map<Outcome, double> law;
  std::vector<std::pair<int, std::vector<Point>>> singles;
  for (int phi = 0; phi < 2; ++phi) {
    auto pool = list_small_contours(hc, 6, phi);
    REQUIRE(pool.size() == 18);
    double denom = 1.0 + 18.0 * z;
    law[{phi, {}}] = 0.5 / denom;
    for (const auto& sc : pool) {
      law[{phi, {sc.placed.support}}] = 0.5 * z / denom;
      singles.emplace_back(phi, sc.placed.support);
    }
  }

  const int draws = 20000;
  std::map<Outcome, long long> freq;
  for (int k = 0; k < draws; ++k) {
    auto s = sampler.sample(Rng(505).substream(static_cast<uint64_t>(k)));
    CHECK(s.matching.size() <= 1);
    if (k < 300)
      CHECK(extract_torus_contours(hc, 6, s.assignment) == s.matching);
    ++freq[outcome_of(s)];
  }

  // Every observed outcome must be a law atom.
  double tv_self = 0.0;
  for (const auto& [atom, p] : law) {
    auto it = freq.find(atom);
    double f = it == freq.end() ? 0.0 : it->second / double(draws);
    tv_self += std::abs(f - p);
  }
  for (const auto& [atom, count] : freq) REQUIRE(law.count(atom) == 1);
  tv_self *= 0.5;
  CHECK(tv_self <= 0.05);

  // Against the exact Gibbs law the sampler may further miss the
  // large-contour mass.
  Rational zq(1);
  zq /= 25;
  auto total = torus_Z_total_exact(hc, 6);
  auto big = torus_Z_big_exact(hc, 6);
  double T = static_cast<double>(series::evaluate(total, zq));
  double bigmass = static_cast<double>(series::evaluate(big, zq)) / T;
  double tv_gibbs = 0.0;
  for (const auto& [atom, p] : law) {
    double gibbs = (atom.second.empty() ? 1.0 : z) / T;
    auto it = freq.find(atom);
    double f = it == freq.end() ? 0.0 : it->second / double(draws);
    tv_gibbs += std::abs(f - gibbs);
  }
  tv_gibbs += bigmass;  // the sampler never emits large-contour configs
  tv_gibbs *= 0.5;
  // The conditional-on-small law is exact here, so the Gibbs distance is the
  // large-contour mass itself, up to sampling noise (and trivially within
  // the epsilon + mass guarantee).
  CHECK(std::abs(tv_gibbs - bigmass) <= 0.05);
  CHECK(tv_gibbs <= eps + bigmass + 0.05);
}

TEST_CASE("torus sampler on T_6 colourings: contours appear at the exact rate") {
  // Wider assumed disc so a z with visible contour rates stays inside it.
  ContourModel q2 = ContourModel::potts(2, 2, 0.5);
  const double z = 0.3;
  TorusSampler sampler(q2, 6, z, 0.05);

  std::map<Outcome, double> law;
  for (int phi = 0; phi < 2; ++phi) {
    auto pool = list_small_contours(q2, 6, phi);
    REQUIRE(pool.size() == 36);
    double w = std::pow(z, 4);
    double denom = 1.0 + 36.0 * w;
    law[{phi, {}}] = 0.5 / denom;
    for (const auto& sc : pool) law[{phi, {sc.placed.support}}] = 0.5 * w / denom;
  }

  const int draws = 20000;
  std::map<Outcome, long long> freq;
  long long with_contour = 0;
  for (int k = 0; k < draws; ++k) {
    auto s = sampler.sample(Rng(616).substream(static_cast<uint64_t>(k)));
    CHECK(s.matching.size() <= 1);
    if (!s.matching.empty()) {
      ++with_contour;
      if (with_contour <= 200)
        CHECK(extract_torus_contours(q2, 6, s.assignment) == s.matching);
    }
    ++freq[outcome_of(s)];
  }
  // ~22.5% of draws carry the single-flip contour.
  double p_contour = 36.0 * std::pow(z, 4) / (1.0 + 36.0 * std::pow(z, 4));
  double sigma = std::sqrt(draws * p_contour * (1.0 - p_contour));
  CHECK(std::abs(with_contour - draws * p_contour) <= 4.0 * sigma);

  double tv = 0.0;
  for (const auto& [atom, p] : law) {
    auto it = freq.find(atom);
    double f = it == freq.end() ? 0.0 : it->second / double(draws);
    tv += std::abs(f - p);
  }
  for (const auto& [atom, count] : freq) REQUIRE(law.count(atom) == 1);
  tv *= 0.5;
  CHECK(tv <= 0.06);
}

TEST_CASE("torus sampler argument errors") {
  ContourModel q2 = ContourModel::potts(2, 2);
  CHECK_THROWS_AS(TorusSampler(q2, 6, 0.0, 0.5), ValidationError);
  CHECK_THROWS_AS(TorusSampler(q2, 6, -0.01, 0.5), ValidationError);
  CHECK_THROWS_AS(TorusSampler(q2, 6, 0.05, 0.5), RegimeError);
  CHECK_THROWS_AS(TorusSampler(q2, 6, 0.01, 0.0), ValidationError);
  CHECK_THROWS_AS(torus_sample(q2, 3, 0.01, 0.5, Rng(1)), ValidationError);
}

TEST_CASE("torus argument validation") {
  ContourModel q2 = ContourModel::potts(2, 2);
  ContourModel hc = ContourModel::hardcore(2);
  CHECK_THROWS_AS(torus_Z_small(q2, 3, 0, 4), ValidationError);
  CHECK_THROWS_AS(torus_Z_small(q2, 6, 2, 4), ValidationError);
  CHECK_THROWS_AS(torus_Z_small(q2, 6, 0, 0), ValidationError);
  CHECK_THROWS_AS(torus_Z_small(hc, 5, 0, 4), ValidationError);
  CHECK_THROWS_AS(list_small_contours(hc, 7, 0), ValidationError);
  CHECK_THROWS_AS(validate_torus_config(hc, 5, contour::Config(25, 0)), ValidationError);
  // Occupancy constraint: two adjacent occupied cells.
  contour::Config bad(16, 0);
  bad[0] = 1;
  bad[1] = 1;
  CHECK_THROWS_AS(validate_torus_config(hc, 4, bad), ValidationError);
  CHECK_THROWS_AS(extract_torus_contours(q2, 4, contour::Config(15, 0)), ValidationError);
}

TEST_SUITE_END();

#include <doctest.h>

#include <cmath>
#include <functional>
#include <set>

#include "pirogov/cluster.hpp"
#include "pirogov/oracle.hpp"
#include "pirogov/polymer.hpp"
#include "test_util.hpp"

using namespace pirogov;
using namespace pirogov::cluster;
using pirogov::polymer::HardcorePolymerModel;
using pirogov::polymer::IsingPolymerModel;
using pirogov::polymer::Polymer;
using testutil::cycle_graph;
using testutil::grid_graph;
using testutil::path_graph;
using testutil::star_graph;

namespace {

SmallGraph complete_small(int n) {
  SmallGraph h(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) h.add_edge(i, j);
  return h;
}

SmallGraph path_small(int n) {
  SmallGraph h(n);
  for (int i = 0; i + 1 < n; ++i) h.add_edge(i, i + 1);
  return h;
}

SmallGraph cycle_small(int n) {
  SmallGraph h = path_small(n);
  h.add_edge(0, n - 1);
  return h;
}

// canonical multiset view of a cluster stream, for set comparisons
using Multiset = std::vector<std::pair<int, int>>;

std::set<Multiset> production_multisets(const IncompatibilityPool& pool, int m) {
  std::set<Multiset> out;
  for (const auto& c : enumerate_clusters(pool, m)) {
    Multiset key;
    for (size_t i = 0; i < c.items.size(); ++i) key.emplace_back(c.items[i], c.mult[i]);
    bool fresh = out.insert(key).second;
    CHECK(fresh);  // enumeration must not repeat a multiset
  }
  return out;
}

// Reference enumeration straight off the tree-labeling description: list all
// rooted unlabeled trees on k vertices, label vertices with pool items so
// that tree-adjacent vertices carry incompatible items (same item counts:
// items conflict with themselves), keep total order within budget, and
// collect the label multisets.
std::set<Multiset> reference_multisets(const IncompatibilityPool& pool, int m) {
  std::set<Multiset> out;
  int P = static_cast<int>(pool.size());
  for (int k = 1; k <= m; ++k) {
    for (const auto& level : rooted_trees(k)) {
      std::vector<std::vector<int>> tadj(static_cast<size_t>(k));
      for (int i = 1; i < k; ++i) {
        for (int j = i - 1; j >= 0; --j) {
          if (level[static_cast<size_t>(j)] == level[static_cast<size_t>(i)] - 1) {
            tadj[static_cast<size_t>(i)].push_back(j);
            tadj[static_cast<size_t>(j)].push_back(i);
            break;
          }
        }
      }
      std::vector<int> label(static_cast<size_t>(k), -1);
      std::function<void(int, int)> assign = [&](int pos, int used) {
        if (pos == k) {
          std::map<int, int> hist;
          for (int item : label) ++hist[item];
          out.insert(Multiset(hist.begin(), hist.end()));
          return;
        }
        for (int item = 0; item < P; ++item) {
          int total = used + pool.min_order[static_cast<size_t>(item)];
          if (total > m) continue;
          bool ok = true;
          for (int nb : tadj[static_cast<size_t>(pos)]) {
            if (nb > pos) continue;
            int other = label[static_cast<size_t>(nb)];
            if (other != item && !pool.adjacent(other, item)) {
              ok = false;
              break;
            }
          }
          if (!ok) continue;
          label[static_cast<size_t>(pos)] = item;
          assign(pos + 1, total);
          label[static_cast<size_t>(pos)] = -1;
        }
      };
      assign(0, 0);
    }
  }
  return out;
}

SmallGraph random_connected_small(Rng& rng, int n) {
  SmallGraph h(n);
  for (int i = 1; i < n; ++i)  // random spanning tree first
    h.add_edge(i, static_cast<int>(rng.next_bits() % static_cast<uint64_t>(i)));
  int extras = static_cast<int>(rng.next_bits() % static_cast<uint64_t>(n + 1));
  for (int t = 0; t < extras; ++t) {
    int a = static_cast<int>(rng.next_bits() % static_cast<uint64_t>(n));
    int b = static_cast<int>(rng.next_bits() % static_cast<uint64_t>(n));
    if (a != b) h.add_edge(a, b);
  }
  return h;
}

}  // namespace

TEST_SUITE("cluster") {

TEST_CASE("ursell values on named graphs") {
  CHECK(ursell(SmallGraph(1)) == 1);
  CHECK(ursell(complete_small(2)) == -1);
  CHECK(ursell(complete_small(3)) == 2);
  CHECK(ursell(path_small(3)) == 1);
  CHECK(ursell(cycle_small(4)) == -3);
  CHECK(ursell(complete_small(4)) == -6);
  CHECK(ursell(complete_small(5)) == 24);
  // any tree alternates sign with parity
  CHECK(ursell(path_small(5)) == 1);
  CHECK(ursell(path_small(6)) == -1);
  SmallGraph star(6);
  for (int leaf = 1; leaf < 6; ++leaf) star.add_edge(0, leaf);
  CHECK(ursell(star) == -1);  // six-vertex tree: sign flips with parity
}

TEST_CASE("ursell guards") {
  SmallGraph two(2);  // no edges
  CHECK_THROWS_AS(ursell(two), std::logic_error);
  CHECK_THROWS_AS(ursell_direct(two), std::logic_error);
  CHECK_THROWS_AS(ursell(complete_small(8), 7), CapError);
}

TEST_CASE("deletion-contraction agrees with edge-subset enumeration") {
  Rng rng(3301);
  int done = 0;
  for (int trial = 0; done < 60; ++trial) {
    REQUIRE(trial < 400);
    Rng r = rng.substream(static_cast<uint64_t>(trial));
    int n = 2 + static_cast<int>(r.next_bits() % 6);  // 2..7
    SmallGraph h = random_connected_small(r, n);
    CHECK(ursell(h) == ursell_direct(h));
    ++done;
  }
}

TEST_CASE("rooted tree listing matches the known counts") {
  const std::vector<size_t> counts = {1, 1, 2, 4, 9, 20, 48, 115, 286, 719};
  for (int n = 1; n <= 10; ++n) {
    auto trees = rooted_trees(n);
    CHECK(trees.size() == counts[static_cast<size_t>(n - 1)]);
    std::set<std::vector<int>> unique(trees.begin(), trees.end());
    CHECK(unique.size() == trees.size());
    for (const auto& level : trees) {
      REQUIRE(level.size() == static_cast<size_t>(n));
      CHECK(level[0] == 1);
      for (size_t i = 1; i < level.size(); ++i) {
        CHECK(level[i] >= 2);                  // only the root sits at level 1
        CHECK(level[i] <= level[i - 1] + 1);   // each vertex hangs off something seen
      }
    }
  }
  auto three = rooted_trees(3);
  CHECK(three == std::vector<std::vector<int>>{{1, 2, 3}, {1, 2, 2}});
}

TEST_CASE("clusters on a single vertex") {
  HardcorePolymerModel model(Graph(1));
  auto ctx = build_polymer_pool(model, 2);
  auto clusters = enumerate_clusters(ctx.pool, 2);
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0].items == std::vector<int>{0});
  CHECK(clusters[0].mult == std::vector<int>{1});
  CHECK(clusters[0].phi == 1);
  CHECK(clusters[0].mult_factor == 1);
  CHECK(clusters[1].mult == std::vector<int>{2});  // the repeated pair
  CHECK(clusters[1].phi == -1);
  CHECK(clusters[1].mult_factor == Rational(1, 2));
  CHECK(clusters[1].total_order == 2);
}

TEST_CASE("compatible polymers never form a cluster") {
  HardcorePolymerModel model(Graph(2));  // two isolated vertices
  auto ctx = build_polymer_pool(model, 2);
  auto sets = production_multisets(ctx.pool, 2);
  std::set<Multiset> want = {{{0, 1}}, {{1, 1}}, {{0, 2}}, {{1, 2}}};
  CHECK(sets == want);
}

TEST_CASE("order cap one leaves only singletons") {
  HardcorePolymerModel model(grid_graph(3, 3));
  auto ctx = build_polymer_pool(model, 1);
  auto clusters = enumerate_clusters(ctx.pool, 1);
  REQUIRE(clusters.size() == 9);
  for (const auto& c : clusters) {
    CHECK(c.mult == std::vector<int>{1});
    CHECK(c.phi == 1);
    CHECK(c.total_order == 1);
  }
}

TEST_CASE("enumeration agrees with the tree-labeling description") {
  struct Case {
    IncompatibilityPool pool;
    int m;
  };
  std::vector<Case> cases;
  {
    HardcorePolymerModel model(path_graph(4));
    cases.push_back({build_polymer_pool(model, 4).pool, 4});
  }
  {
    HardcorePolymerModel model(cycle_graph(5));
    cases.push_back({build_polymer_pool(model, 4).pool, 4});
  }
  {
    IsingPolymerModel model(path_graph(3), 1.0);
    cases.push_back({build_polymer_pool(model, 6).pool, 6});
  }
  {
    IsingPolymerModel model(cycle_graph(4), 0.5);
    cases.push_back({build_polymer_pool(model, 6).pool, 6});
  }
  for (const auto& c : cases) {
    auto got = production_multisets(c.pool, c.m);
    auto want = reference_multisets(c.pool, c.m);
    CHECK(got == want);
  }
}

TEST_CASE("log coefficients on one vertex match log(1+z)") {
  HardcorePolymerModel model(Graph(1));
  auto logz = logZ_coefficients(model, 3);
  CHECK(logz.c == std::vector<Rational>{0, 1, Rational(-1, 2), Rational(1, 3)});
}

TEST_CASE("log coefficients on an edge match log(1+2z)") {
  HardcorePolymerModel model(path_graph(2));
  auto logz = logZ_coefficients(model, 3);
  CHECK(logz.c == std::vector<Rational>{0, 2, -2, Rational(8, 3)});
}

TEST_CASE("first order sums the linear weight terms") {
  IsingPolymerModel model(grid_graph(2, 2), 0.7);
  auto logz = logZ_coefficients(model, 1);
  CHECK(logz.c[1] == 0.0);  // no weight reaches order 1 in this model
  HardcorePolymerModel hc(grid_graph(2, 2));
  auto hz = logZ_coefficients(hc, 1);
  CHECK(hz.c[1] == 4);
}

TEST_CASE("log of the brute-force polynomial, exactly") {
  struct Case {
    Graph g;
    int m;
  };
  std::vector<Case> cases = {{path_graph(4), 6}, {cycle_graph(5), 6}, {grid_graph(2, 3), 7},
                             {star_graph(4), 5}};
  for (const auto& c : cases) {
    HardcorePolymerModel model(c.g);
    auto logz = logZ_coefficients(model, c.m);
    auto brute = oracle::brute_Z_hardcore(c.g);
    auto expect = series::log_from_poly(series::resized(brute, c.m));
    CHECK(logz.c == expect.c);
  }
}

TEST_CASE("log of the spin-sum series within float tolerance") {
  struct Case {
    Graph g;
    int m;
    double beta;
  };
  std::vector<Case> cases = {{path_graph(3), 6, 1.0}, {cycle_graph(4), 8, 0.5},
                             {path_graph(4), 8, 2.0}};
  for (const auto& c : cases) {
    IsingPolymerModel model(c.g, c.beta);
    auto logz = logZ_coefficients(model, c.m);
    auto brute = oracle::brute_Z_ising(c.g).to_series(c.beta);
    auto expect = series::log_from_poly(series::resized(brute, c.m));
    for (int k = 0; k <= c.m; ++k) {
      double a = logz.c[static_cast<size_t>(k)];
      double b = expect.c[static_cast<size_t>(k)];
      CHECK(std::abs(a - b) <= 1e-9 * (1.0 + std::abs(b)));
    }
  }
}

TEST_CASE("round trip through exp recovers the partition polynomial") {
  for (const Graph& g : {path_graph(4), cycle_graph(6), grid_graph(2, 4)}) {
    HardcorePolymerModel model(g);
    int degree = model.exact_degree();
    auto z_from_clusters = series::poly_from_log(logZ_coefficients(model, degree));
    auto brute = oracle::brute_Z_hardcore(g);
    CHECK(z_from_clusters.c == series::resized(brute, degree).c);
  }
}

TEST_CASE("truncation order is monotone consistent") {
  HardcorePolymerModel hc(cycle_graph(4));
  auto low = logZ_coefficients(hc, 4);
  auto high = logZ_coefficients(hc, 6);
  for (int k = 0; k <= 4; ++k) CHECK(low.c[static_cast<size_t>(k)] == high.c[static_cast<size_t>(k)]);

  IsingPolymerModel ising(path_graph(3), 1.0);
  auto ilow = logZ_coefficients(ising, 6);
  auto ihigh = logZ_coefficients(ising, 8);
  for (int k = 0; k <= 6; ++k)
    CHECK(ilow.c[static_cast<size_t>(k)] ==
          doctest::Approx(ihigh.c[static_cast<size_t>(k)]).epsilon(1e-13));
}

TEST_CASE("sub-family filters restrict the expansion") {
  HardcorePolymerModel model(path_graph(2));
  auto whole = logZ_subfamily(model, [](const Polymer&) { return true; }, 3);
  CHECK(whole.c == logZ_coefficients(model, 3).c);

  auto nothing = logZ_subfamily(model, [](const Polymer&) { return false; }, 3);
  CHECK(nothing.is_zero());

  auto just_u = logZ_subfamily(model, [](const Polymer& g) { return g.support[0] == 0; }, 3);
  CHECK(just_u.c == std::vector<Rational>{0, 1, Rational(-1, 2), Rational(1, 3)});
}

TEST_CASE("approximation on a single vertex") {
  HardcorePolymerModel model(Graph(1));
  auto res = approx_Z(model, 0.05, 1e-3);
  CHECK(std::abs(res.value - 1.05) <= 1e-3 * 1.05);
  CHECK(res.m_used >= 1);
  CHECK(res.m_enumerated == 1);  // the polynomial has degree one
  CHECK(!res.outside_radius);

  auto at_zero = approx_Z(model, 0.0, 1e-3);
  CHECK(at_zero.value == 1.0);
}

TEST_CASE("approximation refuses outside the assumed radius") {
  HardcorePolymerModel model(cycle_graph(4));
  double delta = model.delta();
  CHECK_THROWS_AS(approx_Z(model, delta * 1.01, 1e-2), RegimeError);
  CHECK_THROWS_AS(approx_Z(model, delta, 1e-2), RegimeError);
  CHECK_NOTHROW(approx_Z(model, delta * 0.99, 1e-2));
  auto forced = approx_Z(model, delta * 1.01, 1e-2, true);
  CHECK(forced.outside_radius);
  CHECK(std::isfinite(forced.value));
}

TEST_CASE("approximation matches brute force on the 4x4 grid") {
  Graph g = grid_graph(4, 4);
  HardcorePolymerModel model(g);
  double z = 0.05, eps = 1e-2;
  REQUIRE(z < model.delta());
  auto res = approx_Z(model, z, eps);
  auto brute = oracle::brute_Z_hardcore(g, uint64_t(1) << 16);
  double truth = static_cast<double>(series::evaluate(
      brute, Rational(1, 20)));  // z = 0.05 exactly
  double ratio = res.value / truth;
  CHECK(ratio <= std::exp(eps));
  CHECK(ratio >= std::exp(-eps));
  CHECK(res.m_enumerated <= 8);  // the independence number caps the expansion
}

TEST_CASE("degree-capped expansion equals the direct one") {
  // the log series pushed through exp and back must agree with expanding
  // clusters all the way to the larger order
  HardcorePolymerModel model(path_graph(4));
  int m = 9;
  auto direct = logZ_coefficients(model, m);
  auto capped = logZ_coefficients(model, model.exact_degree());
  auto extended = series::log_from_poly(series::resized(series::poly_from_log(capped), m));
  CHECK(direct.c == extended.c);
}

}  // TEST_SUITE

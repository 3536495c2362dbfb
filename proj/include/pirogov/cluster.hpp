#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "pirogov/common.hpp"
#include "pirogov/polymer.hpp"
#include "pirogov/series.hpp"

namespace pirogov::cluster {

using series::TruncatedSeries;

// Dense little graph used for Ursell evaluation; vertices are bits.
struct SmallGraph {
  int n = 0;
  std::vector<uint32_t> adj;

  explicit SmallGraph(int vertices);
  void add_edge(int i, int j);
  bool has_edge(int i, int j) const { return (adj[static_cast<size_t>(i)] >> j) & 1u; }
  bool connected() const;
  int edge_count() const;
};

inline constexpr int kUrsellCap = 24;

// Signed sum over spanning connected edge subsets, by direct enumeration.
// Exponential in the edge count; serves as the ground truth for ursell().
BigInt ursell_direct(const SmallGraph& h);

// Same value as (-1)^{n-1} T_H(1,0) by deletion-contraction with memoization
// and tree/complete shortcuts. Requires h connected (a disconnected argument
// is a caller bug: such multisets contribute zero and are pruned upstream).
BigInt ursell(const SmallGraph& h, int cap = kUrsellCap);

// Level sequences (root at level 1) of every rooted unlabeled tree on
// exactly n vertices, in the standard successor order starting at the path.
std::vector<std::vector<int>> rooted_trees(int n);

// The structural side of a polymer family: per-item minimum weight order and
// the incompatibility adjacency among distinct items. Every item is
// additionally incompatible with itself; that edge is implicit.
struct IncompatibilityPool {
  std::vector<int> min_order;              // each >= 1
  std::vector<std::vector<int>> neighbors;  // sorted, no self entries

  size_t size() const { return min_order.size(); }
  bool adjacent(int i, int j) const;
};

// A multiset of pool items whose occurrence-incompatibility graph H is
// connected. phi is the Ursell value of H; mult_factor = 1/prod(mult!).
struct Cluster {
  std::vector<int> items;  // distinct pool indices, ascending
  std::vector<int> mult;   // parallel to items, each >= 1
  int total_order = 0;     // sum mult[i] * min_order[items[i]]
  BigInt phi;
  Rational mult_factor;
};

// Visits every cluster with total_order <= order_cap exactly once, in a
// fixed deterministic order. The multiset's H is connected precisely when
// the distinct items form a connected set in the pool graph (repeats of an
// item attach to its occurrence clique), so enumeration runs over connected
// item sets rooted at their minimum index, then over multiplicity vectors
// within the order budget. `allowed`, when given, restricts the items.
void for_each_cluster(const IncompatibilityPool& pool, int order_cap,
                      const std::function<void(const Cluster&)>& fn,
                      const std::vector<bool>* allowed = nullptr);

std::vector<Cluster> enumerate_clusters(const IncompatibilityPool& pool, int order_cap,
                                        const std::vector<bool>* allowed = nullptr);

template <typename T>
T cluster_scalar(const BigInt& phi, const Rational& mult_factor) {
  Rational exact = Rational(phi) * mult_factor;
  if constexpr (std::is_same_v<T, Rational>) {
    return exact;
  } else {
    return static_cast<T>(exact);
  }
}

// Taylor coefficients 1..m of log Z for a weighted pool: each cluster adds
// phi/prod(mult!) times the product of its members' weight series. weights
// must all be at order m. Accumulation follows enumeration order, keeping
// float runs bit-reproducible.
template <typename T>
TruncatedSeries<T> logZ_pool(const IncompatibilityPool& pool,
                             const std::vector<TruncatedSeries<T>>& weights, int m,
                             const std::vector<bool>* allowed = nullptr) {
  require(weights.size() == pool.size(), "one weight series per pool item");
  for (const auto& w : weights) require(w.order == m, "weights must be at the target order");
  TruncatedSeries<T> acc(m);
  for_each_cluster(
      pool, m,
      [&](const Cluster& c) {
        TruncatedSeries<T> prod = weights[static_cast<size_t>(c.items[0])];
        for (int rep = 1; rep < c.mult[0]; ++rep)
          prod = series::mul(prod, weights[static_cast<size_t>(c.items[0])]);
        for (size_t i = 1; i < c.items.size(); ++i)
          for (int rep = 0; rep < c.mult[i]; ++rep)
            prod = series::mul(prod, weights[static_cast<size_t>(c.items[i])]);
        series::add_scaled_inplace(acc, cluster_scalar<T>(c.phi, c.mult_factor), prod);
      },
      allowed);
  return acc;
}

// A polymer model's pool at a given truncation order.
template <typename Model>
struct PolymerPool {
  using Backend = typename Model::Backend;
  int order = 0;
  std::vector<polymer::Polymer> polymers;
  IncompatibilityPool pool;
  std::vector<TruncatedSeries<Backend>> weights;
};

template <typename Model>
PolymerPool<Model> build_polymer_pool(
    const Model& model, int m,
    const std::function<bool(const polymer::Polymer&)>& filter = nullptr) {
  require(m >= 1, "order cap must be positive");
  PolymerPool<Model> ctx;
  ctx.order = m;
  int max_size = static_cast<int>(std::floor(static_cast<double>(m) / model.rho() + 1e-9));
  if (max_size >= 1) {
    for (auto& g : model.list_polymers(max_size)) {
      if (model.min_order(g) > m) continue;
      if (filter && !filter(g)) continue;
      ctx.polymers.push_back(std::move(g));
    }
  }
  size_t P = ctx.polymers.size();
  ctx.pool.min_order.resize(P);
  ctx.pool.neighbors.assign(P, {});
  ctx.weights.reserve(P);
  for (size_t i = 0; i < P; ++i) {
    ctx.pool.min_order[i] = model.min_order(ctx.polymers[i]);
    ctx.weights.push_back(model.weight_series(ctx.polymers[i], m));
  }
  for (size_t i = 0; i < P; ++i) {
    for (size_t j = i + 1; j < P; ++j) {
      if (!polymer::compatible(model.host(), ctx.polymers[i], ctx.polymers[j])) {
        ctx.pool.neighbors[i].push_back(static_cast<int>(j));
        ctx.pool.neighbors[j].push_back(static_cast<int>(i));
      }
    }
  }
  return ctx;
}

// Orders 1..m of log Z by cluster expansion (coefficient 0 is zero).
template <typename Model>
TruncatedSeries<typename Model::Backend> logZ_coefficients(
    const Model& model, int m,
    const std::function<bool(const polymer::Polymer&)>& filter = nullptr) {
  auto ctx = build_polymer_pool(model, m, filter);
  return logZ_pool(ctx.pool, ctx.weights, m);
}

// The same pipeline restricted to the sub-family of polymers passing the
// filter; the expansion for the restricted partition function is the
// subseries of the full one supported on clusters inside the sub-family.
template <typename Model>
TruncatedSeries<typename Model::Backend> logZ_subfamily(
    const Model& model, const std::function<bool(const polymer::Polymer&)>& filter, int m) {
  return logZ_coefficients(model, m, filter);
}

struct ApproxResult {
  double value = 1.0;
  double log_value = 0.0;
  int m_used = 0;        // truncation order required by the error bound
  int m_enumerated = 0;  // order actually expanded (see below)
  bool outside_radius = false;
};

// Truncation order for an eps-relative approximation of a degree-N
// polynomial that is zero-free on the disc of radius delta.
inline int truncation_order(double N, double epsilon, double ratio) {
  double denom = 1.0 - ratio;
  int m = static_cast<int>(std::ceil(std::log(std::max(N, 1.0) / epsilon) / denom));
  return std::max(m, 1);
}

// exp(T_m(log Z))(z) with m from truncation_order at N = degree_bound * |G|.
// Since Z is a polynomial of degree <= model.exact_degree(), clusters are
// only expanded to m' = min(m, exact_degree); log coefficients above m' come
// from exponentiating the truncated log (which already determines the whole
// polynomial) and taking log again. Refuses |z| >= delta unless forced: no
// error bound is available there (forced runs use the ratio-0 order).
template <typename Model>
ApproxResult approx_Z(const Model& model, double z, double epsilon, bool force = false) {
  require(epsilon > 0.0, "epsilon must be positive");
  double delta = model.delta();
  double az = std::abs(z);
  ApproxResult res;
  res.outside_radius = az >= delta;
  if (res.outside_radius)
    require_regime(force, "|z| >= zero-free radius: no approximation guarantee (use force to compute anyway)");

  double N = model.degree_bound() * model.host().n;
  double ratio = res.outside_radius ? 0.0 : az / delta;
  res.m_used = truncation_order(N, epsilon, ratio);

  if (z == 0.0) {
    res.value = 1.0;
    return res;
  }

  int degree_cap = std::max(model.exact_degree(), 0);
  res.m_enumerated = std::min(res.m_used, degree_cap);

  using T = typename Model::Backend;
  TruncatedSeries<T> logz(res.m_used);
  if (res.m_enumerated >= 1) {
    TruncatedSeries<T> expanded = logZ_coefficients(model, res.m_enumerated);
    if (res.m_enumerated < res.m_used) {
      TruncatedSeries<T> poly = series::poly_from_log(expanded);
      logz = series::log_from_poly(series::resized(poly, res.m_used));
    } else {
      logz = expanded;
    }
  }
  res.log_value = series::evaluate(series::to_double_series(logz), z);
  res.value = std::exp(res.log_value);
  return res;
}

}  // namespace pirogov::cluster

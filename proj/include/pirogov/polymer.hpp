#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "pirogov/common.hpp"
#include "pirogov/graph.hpp"
#include "pirogov/series.hpp"

namespace pirogov::polymer {

using series::TruncatedSeries;

// A polymer: connected vertex set in the host graph plus a spin per vertex.
// support is sorted; spins[i] labels support[i].
struct Polymer {
  std::vector<int> support;
  std::vector<int> spins;

  bool operator==(const Polymer& o) const { return support == o.support && spins == o.spins; }
};

// Canonical order: by size, then support, then spins.
bool polymer_less(const Polymer& a, const Polymer& b);

// Compatible iff host graph distance between supports exceeds 1, i.e. the
// supports are disjoint and no edge joins them. Every polymer is incompatible
// with itself (distance 0).
bool compatible(const Graph& host, const Polymer& a, const Polymer& b);

// Single-vertex occupation model: one polymer per vertex, weight z. The
// default zero-free radius 1/(e(max_degree+1)) is where the truncated
// Kotecky-Preiss certificate below reaches equality.
class HardcorePolymerModel {
 public:
  using Backend = Rational;

  explicit HardcorePolymerModel(Graph host, std::optional<double> delta_override = std::nullopt);

  const Graph& host() const { return host_; }
  double rho() const { return 1.0; }
  double degree_bound() const { return 1.0; }
  double delta() const { return delta_; }
  // Exact degree of the partition function in z (the independence number).
  int exact_degree() const;

  bool is_polymer(const Polymer& g) const;
  std::vector<Polymer> list_polymers(int max_size) const;
  int min_order(const Polymer& g) const;
  TruncatedSeries<Rational> weight_series(const Polymer& g, int order) const;
  double weight_at(const Polymer& g, double z) const;

 private:
  Graph host_;
  double delta_;
};

// Deviations from the all-minus ground state of the Ising model with field z:
// polymers are connected induced subgraphs carrying +1, with weight
// z^{2|support|} e^{-2 beta (edges leaving the support)}. The partition
// function equals z^{|G|} e^{-beta |E|} Z_G(beta, z), a polynomial of degree
// exactly 2|G|; the default radius 1 is the Lee-Yang disc.
class IsingPolymerModel {
 public:
  using Backend = double;

  IsingPolymerModel(Graph host, double beta, std::optional<double> delta_override = std::nullopt);

  const Graph& host() const { return host_; }
  double beta() const { return beta_; }
  double rho() const { return 2.0; }
  double degree_bound() const { return 2.0; }
  double delta() const { return delta_; }
  int exact_degree() const { return 2 * host_.n; }

  bool is_polymer(const Polymer& g) const;
  std::vector<Polymer> list_polymers(int max_size) const;
  int min_order(const Polymer& g) const;
  TruncatedSeries<double> weight_series(const Polymer& g, int order) const;
  double weight_at(const Polymer& g, double z) const;

  // Edges of the host with exactly one endpoint in the support.
  int edge_boundary(const Polymer& g) const;

 private:
  Graph host_;
  double beta_;
  double delta_;
};

// All polymers of size <= max_size incompatible with g, in canonical order
// (always includes g itself when |g| <= max_size).
template <typename Model>
std::vector<Polymer> incompatible_with(const Model& model, const Polymer& g, int max_size) {
  std::vector<Polymer> out;
  if (max_size < 1) return out;
  for (const auto& other : model.list_polymers(max_size))
    if (!compatible(model.host(), g, other)) out.push_back(other);
  return out;
}

struct KpReport {
  bool holds_truncated = false;
  double worst_margin = 0.0;
  std::vector<double> margins;  // aligned with list_polymers(max_size)
};

// Truncated Kotecky-Preiss certificate: for each polymer g of size <= m,
// margin(g) = |support(g)| - sum over incompatible g' of |w(g',z)| e^{|g'|},
// with the sum restricted to size <= m. A heuristic check, not a proof: the
// true condition quantifies over all polymers.
template <typename Model>
KpReport kp_certificate(const Model& model, double z, int max_size) {
  require(z >= 0.0, "kp_certificate needs z >= 0");
  KpReport rep;
  auto polys = model.list_polymers(max_size);
  rep.margins.reserve(polys.size());
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& g : polys) {
    double sum = 0.0;
    for (const auto& other : polys) {
      if (compatible(model.host(), g, other)) continue;
      sum += std::abs(model.weight_at(other, z)) *
             std::exp(static_cast<double>(other.support.size()));
    }
    double margin = static_cast<double>(g.support.size()) - sum;
    rep.margins.push_back(margin);
    worst = std::min(worst, margin);
  }
  if (polys.empty()) worst = 0.0;
  rep.worst_margin = worst;
  // float slack so that exact-equality instances certify
  rep.holds_truncated = worst >= -1e-12;
  return rep;
}

// Partition function as a truncated series, by direct enumeration of
// pairwise-compatible polymer families (the defining sum; exponential in the
// polymer count, for desk-scale hosts and tests). Optional filter restricts
// to a sub-family: only polymers passing it may appear.
template <typename Model>
TruncatedSeries<typename Model::Backend> polymer_Z_series(
    const Model& model, int order, int max_size,
    const std::function<bool(const Polymer&)>& filter = nullptr) {
  using T = typename Model::Backend;
  std::vector<Polymer> polys;
  for (auto& g : model.list_polymers(max_size))
    if (!filter || filter(g)) polys.push_back(std::move(g));

  TruncatedSeries<T> acc(order);
  std::vector<int> chosen;
  // families(start, prod): counts the family built so far, then extends it
  std::function<void(size_t, const TruncatedSeries<T>&, int)> families =
      [&](size_t start, const TruncatedSeries<T>& prod, int prod_min) {
        series::add_scaled_inplace(acc, T(1), prod);
        for (size_t j = start; j < polys.size(); ++j) {
          int greater = prod_min + model.min_order(polys[j]);
          if (greater > order) break;  // later polymers are no smaller
          bool ok = true;
          for (int i : chosen) {
            if (!compatible(model.host(), polys[static_cast<size_t>(i)], polys[j])) {
              ok = false;
              break;
            }
          }
          if (!ok) continue;
          chosen.push_back(static_cast<int>(j));
          families(j + 1, series::mul(prod, model.weight_series(polys[j], order)), greater);
          chosen.pop_back();
        }
      };
  families(0, TruncatedSeries<T>::one(order), 0);
  return acc;
}

}  // namespace pirogov::polymer

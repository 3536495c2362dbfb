#include "pirogov/polymer.hpp"

#include <algorithm>
#include <cmath>

namespace pirogov::polymer {

bool polymer_less(const Polymer& a, const Polymer& b) {
  if (a.support.size() != b.support.size()) return a.support.size() < b.support.size();
  if (a.support != b.support) return a.support < b.support;
  return a.spins < b.spins;
}

bool compatible(const Graph& host, const Polymer& a, const Polymer& b) {
  std::vector<bool> in_a(static_cast<size_t>(host.n), false);
  for (int v : a.support) in_a[static_cast<size_t>(v)] = true;
  for (int v : b.support) {
    if (in_a[static_cast<size_t>(v)]) return false;
    for (int u : host.adj[static_cast<size_t>(v)])
      if (in_a[static_cast<size_t>(u)]) return false;
  }
  return true;
}

HardcorePolymerModel::HardcorePolymerModel(Graph host, std::optional<double> delta_override)
    : host_(std::move(host)) {
  require(host_.n > 0, "empty host graph");
  delta_ = delta_override ? *delta_override
                          : 1.0 / (std::exp(1.0) * (host_.max_degree() + 1));
  require(delta_ > 0.0, "delta must be positive");
}

int HardcorePolymerModel::exact_degree() const { return independence_number(host_); }

bool HardcorePolymerModel::is_polymer(const Polymer& g) const {
  return g.support.size() == 1 && g.support[0] >= 0 && g.support[0] < host_.n &&
         g.spins == std::vector<int>{1};
}

std::vector<Polymer> HardcorePolymerModel::list_polymers(int max_size) const {
  std::vector<Polymer> out;
  if (max_size < 1) return out;
  out.reserve(static_cast<size_t>(host_.n));
  for (int v = 0; v < host_.n; ++v) out.push_back(Polymer{{v}, {1}});
  return out;
}

int HardcorePolymerModel::min_order(const Polymer& g) const {
  return static_cast<int>(g.support.size());
}

TruncatedSeries<Rational> HardcorePolymerModel::weight_series(const Polymer& g, int order) const {
  require(is_polymer(g), "not a polymer of this model");
  return TruncatedSeries<Rational>::monomial(1, Rational(1), order);
}

double HardcorePolymerModel::weight_at(const Polymer& g, double z) const {
  require(is_polymer(g), "not a polymer of this model");
  return z;
}

IsingPolymerModel::IsingPolymerModel(Graph host, double beta, std::optional<double> delta_override)
    : host_(std::move(host)), beta_(beta) {
  require(host_.n > 0, "empty host graph");
  require(beta_ > 0.0, "beta must be positive");
  delta_ = delta_override ? *delta_override : 1.0;
  require(delta_ > 0.0, "delta must be positive");
}

bool IsingPolymerModel::is_polymer(const Polymer& g) const {
  if (g.support.empty() || g.spins.size() != g.support.size()) return false;
  for (int v : g.support)
    if (v < 0 || v >= host_.n) return false;
  if (!std::is_sorted(g.support.begin(), g.support.end())) return false;
  if (std::adjacent_find(g.support.begin(), g.support.end()) != g.support.end()) return false;
  for (int s : g.spins)
    if (s != 1) return false;
  return host_.induced(g.support).connected();
}

std::vector<Polymer> IsingPolymerModel::list_polymers(int max_size) const {
  std::vector<Polymer> out;
  if (max_size < 1) return out;
  for (auto& support : all_connected_subsets(host_, max_size)) {
    Polymer g;
    g.spins.assign(support.size(), 1);
    g.support = std::move(support);
    out.push_back(std::move(g));
  }
  return out;
}

int IsingPolymerModel::min_order(const Polymer& g) const {
  return 2 * static_cast<int>(g.support.size());
}

int IsingPolymerModel::edge_boundary(const Polymer& g) const {
  std::vector<bool> in(static_cast<size_t>(host_.n), false);
  for (int v : g.support) in[static_cast<size_t>(v)] = true;
  int count = 0;
  for (int v : g.support)
    for (int u : host_.adj[static_cast<size_t>(v)])
      if (!in[static_cast<size_t>(u)]) ++count;
  return count;
}

TruncatedSeries<double> IsingPolymerModel::weight_series(const Polymer& g, int order) const {
  require(is_polymer(g), "not a polymer of this model");
  double coeff = std::exp(-2.0 * beta_ * edge_boundary(g));
  return TruncatedSeries<double>::monomial(min_order(g), coeff, order);
}

double IsingPolymerModel::weight_at(const Polymer& g, double z) const {
  require(is_polymer(g), "not a polymer of this model");
  return std::pow(z, 2 * static_cast<int>(g.support.size())) *
         std::exp(-2.0 * beta_ * edge_boundary(g));
}

}  // namespace pirogov::polymer

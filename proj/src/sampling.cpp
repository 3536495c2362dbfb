#include "pirogov/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace pirogov::sampling {

using contour::Contour;
using contour::ContourModel;
using lattice::Region;

ContourSampler::ContourSampler(const ContourModel& model, const Region& region, int phi,
                               double z, double epsilon, uint64_t state_cap)
    : model_(model), region_(region), phi_(phi), z_(z), state_cap_(state_cap) {
  require(!region_.geometry().is_torus(), "contour sampling needs free geometry");
  require(region_.dim() == model_.dim, "region dimension must match the model");
  require(phi >= 0 && phi < model_.ground_count(), "unknown boundary label");
  require(epsilon > 0.0, "epsilon must be positive");
  require(!region_.empty(), "region must be nonempty");
  require_regime(z > 0.0 && z < model_.delta, "sampling needs 0 < z < zero-free radius");

  int n = static_cast<int>(region_.size());
  double c = model_.peierls_degree();
  double denom = model_.rho_peierls() * (1.0 - z / model_.delta);
  double target = std::log(2.0 * c * n / epsilon);
  info_.size_cutoff = std::min(n, std::max(1, static_cast<int>(std::ceil(target / denom))));
  info_.step_epsilon = epsilon * epsilon / (9.0 * static_cast<double>(n) * n);
  info_.score_order = cluster::truncation_order(c * n, info_.step_epsilon, z / model_.delta);

  pool_ = contour::list_contours_auto(model_, region_, phi_, info_.size_cutoff, state_cap_);

  // Outer weights are polynomials; an engine order past every pool member's
  // degree makes the truncation lossless, so the evaluated values are exact.
  long long order = 1;
  for (const Contour& g : pool_) {
    long long deg = g.surface_energy;
    for (const auto& cells : g.interiors)
      deg += static_cast<long long>(model_.peierls_degree()) *
             static_cast<long long>(cells.size());
    order = std::max(order, deg);
  }
  contour::WeightEngine engine(model_, static_cast<int>(order), state_cap_);
  weight_.reserve(pool_.size());
  first_cov_.reserve(pool_.size());
  for (const Contour& g : pool_) {
    double w = series::evaluate(series::to_double_series(engine.outer_weight(g)), z_);
    internal_check(w > 0.0, "outer contour weight must be positive");
    weight_.push_back(w);
    first_cov_.push_back(region_.index_of(g.cov.front()));
  }
  me_.assign(pool_.size(), std::vector<char>(pool_.size(), 0));
  for (size_t i = 0; i < pool_.size(); ++i)
    for (size_t j = i + 1; j < pool_.size(); ++j)
      me_[i][j] = me_[j][i] = contour::mutually_external(pool_[i], pool_[j]) ? 1 : 0;
}

double ContourSampler::family_sum(const std::vector<char>& allowed) const {
  uint64_t visited = 0;
  std::vector<size_t> chosen;
  double total = 0.0;
  auto rec = [&](auto&& self, size_t start, double prod) -> void {
    require_cap(++visited <= state_cap_, "family enumeration budget exceeded");
    total += prod;
    for (size_t j = start; j < pool_.size(); ++j) {
      if (!allowed[j]) continue;
      bool ok = true;
      for (size_t i : chosen)
        if (!me_[i][j]) {
          ok = false;
          break;
        }
      if (!ok) continue;
      chosen.push_back(j);
      self(self, j + 1, prod * weight_[j]);
      chosen.pop_back();
    }
  };
  rec(rec, 0, 1.0);
  return total;
}

const ContourSampler::StepLaw& ContourSampler::step_law(const std::vector<size_t>& family,
                                                        int t) {
  auto key = std::make_pair(t, family);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;

  // cells are processed in index order, so "cov avoids the processed prefix"
  // is just a lower bound on the cover's first index
  std::vector<char> base(pool_.size(), 0);
  for (size_t j = 0; j < pool_.size(); ++j) {
    if (first_cov_[j] <= t) continue;
    bool ok = true;
    for (size_t i : family)
      if (!me_[i][j]) {
        ok = false;
        break;
      }
    base[j] = ok ? 1 : 0;
  }
  StepLaw law;
  law.scores.push_back(family_sum(base));
  for (size_t j = 0; j < pool_.size(); ++j) {
    if (first_cov_[j] != t) continue;  // proposable exactly once: at its first cover cell
    bool ok = true;
    for (size_t i : family)
      if (!me_[i][j]) {
        ok = false;
        break;
      }
    if (!ok) continue;
    std::vector<char> after(base);
    for (size_t k = 0; k < pool_.size(); ++k)
      if (after[k] && !me_[j][k]) after[k] = 0;
    law.candidates.push_back(j);
    law.scores.push_back(weight_[j] * family_sum(after));
  }
  return memo_.emplace(std::move(key), std::move(law)).first->second;
}

std::vector<Contour> ContourSampler::sample(Rng rng) {
  std::vector<size_t> family;
  int n = static_cast<int>(region_.size());
  for (int t = 0; t < n; ++t) {
    const StepLaw& law = step_law(family, t);
    Rng stream = rng.substream(static_cast<uint64_t>(t));
    size_t pick = stream.next_index(law.scores);
    if (pick > 0) family.push_back(law.candidates[pick - 1]);
  }
  std::vector<Contour> out;
  out.reserve(family.size());
  for (size_t j : family) out.push_back(pool_[j]);
  std::sort(out.begin(), out.end(), contour::contour_less);
  return out;
}

SpinSampler::SpinSampler(const ContourModel& model, const Region& region, int phi,
                         double param, double epsilon, uint64_t state_cap)
    : model_(model), region_(region), phi_(phi), state_cap_(state_cap) {
  require(param > 0.0, "model parameter must be positive");
  require(epsilon > 0.0, "epsilon must be positive");
  require(!region_.empty(), "region must be nonempty");
  z_ = model_.family == contour::Family::potts ? std::exp(-param) : 1.0 / param;
  // one contour draw for the region plus at most one per interior cell
  call_epsilon_ = epsilon / (1.0 + static_cast<double>(region_.size()));
  sampler_for(region_.points(), phi_);  // surfaces regime errors at construction
}

ContourSampler& SpinSampler::sampler_for(const std::vector<Point>& cells, int phi) {
  auto key = std::make_pair(cells, phi);
  auto it = samplers_.find(key);
  if (it == samplers_.end()) {
    Region sub(model_.dim, region_.geometry(), cells);
    it = samplers_
             .emplace(std::move(key), std::make_unique<ContourSampler>(
                                          model_, sub, phi, z_, call_epsilon_, state_cap_))
             .first;
  }
  return *it->second;
}

SpinSample SpinSampler::sample(Rng rng) {
  SpinSample out;
  out.assignment.assign(region_.size(), 0);
  uint64_t calls = 0;
  // Ground fill, contour spins on the supports, then each interior is redrawn
  // recursively under its own label. Substreams go by call order (pre-order),
  // so a fixed seed pins the whole tree of draws.
  auto recurse = [&](auto&& self, const std::vector<Point>& cells, int phi) -> void {
    Rng stream = rng.substream(calls++);
    std::vector<Contour> fam = sampler_for(cells, phi).sample(stream);
    for (const Point& p : cells)
      out.assignment[static_cast<size_t>(region_.index_of(p))] = model_.ground_spin(phi, p);
    for (const Contour& g : fam)
      for (size_t i = 0; i < g.support.size(); ++i)
        out.assignment[static_cast<size_t>(region_.index_of(g.support[i]))] = g.spins[i];
    out.provenance.push_back({phi, cells, fam});
    for (const Contour& g : fam)
      for (size_t k = 0; k < g.interiors.size(); ++k)
        self(self, g.interiors[k], g.interior_labels[k]);
  };
  recurse(recurse, region_.points(), phi_);
  return out;
}

}  // namespace pirogov::sampling

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "pirogov/cluster.hpp"
#include "pirogov/common.hpp"
#include "pirogov/contour.hpp"
#include "pirogov/polymer.hpp"
#include "pirogov/series.hpp"

namespace pirogov::sampling {

using lattice::Point;

// All samplers take an Rng by value and pull one substream per sequential
// step, so drawing never perturbs later substreams and every output is a
// pure function of (seed, inputs).

// Weight of a polymer at the point z. Both built-in models have monomial
// weights, so evaluating the series truncated at the polymer's own minimum
// order loses nothing.
template <typename Model, typename T>
T polymer_weight_at(const Model& model, const polymer::Polymer& g, const T& z) {
  int d = model.min_order(g);
  auto w = model.weight_series(g, d);
  if constexpr (std::is_same_v<typename Model::Backend, T>) {
    return series::evaluate(w, z);
  } else {
    return series::evaluate(series::to_double_series(w), z);
  }
}

// Partition function of the sub-family {polys[j] : allowed[j]} at the point z,
// by direct sum over pairwise-compatible subsets. Exponential in the polymer
// count; `budget` caps the number of families visited (CapError beyond).
template <typename Model, typename T>
T exact_family_Z(const Model& model, const std::vector<polymer::Polymer>& polys,
                 const std::vector<char>& allowed, const T& z, uint64_t budget = uint64_t(1) << 22) {
  require(polys.size() == allowed.size(), "one allowed flag per polymer");
  std::vector<T> w;
  w.reserve(polys.size());
  for (const auto& g : polys) w.push_back(polymer_weight_at(model, g, z));
  std::vector<size_t> chosen;
  uint64_t visited = 0;
  T total(0);
  auto rec = [&](auto&& self, size_t start, const T& prod) -> void {
    require_cap(++visited <= budget, "family enumeration budget exceeded");
    total += prod;
    for (size_t j = start; j < polys.size(); ++j) {
      if (!allowed[j]) continue;
      bool ok = true;
      for (size_t i : chosen)
        if (!polymer::compatible(model.host(), polys[i], polys[j])) {
          ok = false;
          break;
        }
      if (!ok) continue;
      chosen.push_back(j);
      self(self, j + 1, prod * w[j]);
      chosen.pop_back();
    }
  };
  rec(rec, 0, T(1));
  return total;
}

namespace detail {

template <typename T>
double to_double_value(const T& v) {
  return static_cast<double>(v);
}

// Per-step conditional state shared by the exact sampler and the symbolic
// probability: candidates at vertex x plus the exact scores
// w(γ)·Z(C_{Γ∪γ, S∪x}) for each, with the empty polymer in slot 0.
template <typename Model, typename T>
struct ExactStep {
  std::vector<size_t> candidates;  // indices into the polymer list
  std::vector<T> scores;           // scores[0] = empty, scores[k>0] = candidates[k-1]
};

template <typename Model, typename T>
ExactStep<Model, T> exact_step(const Model& model, const std::vector<polymer::Polymer>& polys,
                               const std::vector<size_t>& family, int t, const T& z) {
  size_t n = polys.size();
  // allowed set once x_t joins S: support beyond t, compatible with the family
  std::vector<char> base(n, 0);
  for (size_t j = 0; j < n; ++j) {
    if (polys[j].support.front() <= t) continue;
    bool ok = true;
    for (size_t i : family)
      if (!polymer::compatible(model.host(), polys[i], polys[j])) {
        ok = false;
        break;
      }
    base[j] = ok ? 1 : 0;
  }
  ExactStep<Model, T> step;
  step.scores.push_back(exact_family_Z(model, polys, base, z));
  for (size_t j = 0; j < n; ++j) {
    if (polys[j].support.front() != t) continue;  // one-shot: first support vertex only
    bool ok = true;
    for (size_t i : family)
      if (!polymer::compatible(model.host(), polys[i], polys[j])) {
        ok = false;
        break;
      }
    if (!ok) continue;
    std::vector<char> after(base);
    for (size_t k = 0; k < n; ++k)
      if (after[k] && !polymer::compatible(model.host(), polys[j], polys[k])) after[k] = 0;
    step.candidates.push_back(j);
    step.scores.push_back(polymer_weight_at(model, polys[j], z) *
                          exact_family_Z(model, polys, after, z));
  }
  return step;
}

}  // namespace detail

// One exact draw from the polymer measure w-products / Z, by sequential
// conditional sampling over vertices in index order. Every conditional is the
// exact ratio of sub-family partition functions, evaluated in the model's
// backend arithmetic. Brute-force grade: cost grows exponentially with the
// host, so keep hosts at desk scale.
template <typename Model>
std::vector<polymer::Polymer> sample_polymers_exact(const Model& model,
                                                    typename Model::Backend z, Rng rng) {
  using T = typename Model::Backend;
  require(z > T(0), "activity must be positive");
  auto polys = model.list_polymers(model.host().n);
  for (const auto& g : polys)
    require(polymer_weight_at(model, g, z) >= T(0), "weights must be nonnegative");
  std::vector<size_t> family;
  for (int t = 0; t < model.host().n; ++t) {
    auto step = detail::exact_step<Model, T>(model, polys, family, t, z);
    std::vector<double> scores;
    scores.reserve(step.scores.size());
    for (const T& s : step.scores) scores.push_back(detail::to_double_value(s));
    Rng stream = rng.substream(static_cast<uint64_t>(t));
    size_t pick = stream.next_index(scores);
    if (pick > 0) family.push_back(step.candidates[pick - 1]);
  }
  std::vector<polymer::Polymer> out;
  out.reserve(family.size());
  for (size_t j : family) out.push_back(polys[j]);
  return out;
}

// Probability that the sequential sampler returns exactly `target`, as the
// symbolic product of its per-step conditionals. Families outside the
// compatible-set space come back as zero. This is the noise-free law check:
// with the rational backend the result must equal weight-product / Z exactly.
template <typename Model>
typename Model::Backend exact_outcome_probability(const Model& model,
                                                  typename Model::Backend z,
                                                  const std::vector<polymer::Polymer>& target) {
  using T = typename Model::Backend;
  require(z > T(0), "activity must be positive");
  auto polys = model.list_polymers(model.host().n);
  std::vector<size_t> want;
  for (const auto& g : target) {
    bool found = false;
    for (size_t j = 0; j < polys.size(); ++j)
      if (polys[j] == g) {
        want.push_back(j);
        found = true;
        break;
      }
    if (!found) return T(0);
  }
  for (size_t a = 0; a < want.size(); ++a)
    for (size_t b = a + 1; b < want.size(); ++b)
      if (want[a] == want[b] ||
          !polymer::compatible(model.host(), polys[want[a]], polys[want[b]]))
        return T(0);

  std::vector<size_t> family;
  T prob(1);
  for (int t = 0; t < model.host().n; ++t) {
    auto step = detail::exact_step<Model, T>(model, polys, family, t, z);
    // the outcome this step must produce: the target polymer first reachable
    // here, or the empty polymer
    size_t chosen = 0;
    for (size_t j : want)
      if (polys[j].support.front() == t) {
        for (size_t k = 0; k < step.candidates.size(); ++k)
          if (step.candidates[k] == j) chosen = k + 1;
        if (chosen == 0) return T(0);  // blocked by an earlier pick: unreachable
        family.push_back(j);
        break;
      }
    T denom(0);
    for (const T& s : step.scores) denom += s;
    internal_check(denom > T(0), "conditional normalizer must be positive");
    prob *= step.scores[chosen] / denom;
  }
  return prob;
}

struct SampleInfo {
  int size_cutoff = 0;     // largest polymer/contour support admitted
  int score_order = 0;     // truncation order behind each per-step score
  double step_epsilon = 0;  // per-step relative budget for those scores
};

// Total-variation-ε sampler for a polymer measure: sequential conditional
// draws over vertices, candidates restricted to supports of size at most
// size_cutoff, per-step scores from the truncated sub-family log expansion
// (extended past the host's polynomial degree by the exp/log round trip).
// Per-state conditionals are cached, so repeated draws share the score work.
template <typename Model>
class PolymerSampler {
 public:
  PolymerSampler(const Model& model, double z, double epsilon) : model_(model), z_(z) {
    require(epsilon > 0.0, "epsilon must be positive");
    double delta = model_.delta();
    require_regime(z > 0.0 && z < delta, "sampling needs 0 < z < zero-free radius");
    int n = model_.host().n;
    require(n >= 1, "host must be nonempty");
    double denom = model_.rho() * (1.0 - z / delta);
    double target = std::log(2.0 * model_.degree_bound() * n / epsilon);
    info_.size_cutoff = std::max(1, static_cast<int>(std::ceil(target / denom)));
    info_.step_epsilon = epsilon * epsilon / (9.0 * n * n);
    info_.score_order =
        cluster::truncation_order(model_.degree_bound() * n, info_.step_epsilon, z / delta);
    polys_ = model_.list_polymers(std::min(info_.size_cutoff, n));
    for (const auto& g : polys_)
      require(polymer_weight_at(model_, g, z_) >= 0.0, "weights must be nonnegative");
  }

  const SampleInfo& info() const { return info_; }
  const std::vector<polymer::Polymer>& pool() const { return polys_; }

  std::vector<polymer::Polymer> sample(Rng rng) {
    std::vector<size_t> family;
    for (int t = 0; t < model_.host().n; ++t) {
      const StepLaw& law = step_law(family, t);
      Rng stream = rng.substream(static_cast<uint64_t>(t));
      size_t pick = stream.next_index(law.scores);
      if (pick > 0) family.push_back(law.candidates[pick - 1]);
    }
    std::vector<polymer::Polymer> out;
    out.reserve(family.size());
    for (size_t j : family) out.push_back(polys_[j]);
    return out;
  }

 private:
  struct StepLaw {
    std::vector<size_t> candidates;
    std::vector<double> scores;  // slot 0 = empty polymer
  };

  // ε'-relative score for w(γ)·Z(sub-family) — or the bare Z when j is npos —
  // with the sub-family of polymers compatible with `family`, supports past
  // `t`, and (for the γ-score) compatible with γ as well.
  double score(const std::vector<size_t>& family, int t, size_t j) {
    auto filt = [&](const polymer::Polymer& g) {
      if (g.support.front() <= t) return false;
      for (size_t i : family)
        if (!polymer::compatible(model_.host(), polys_[i], g)) return false;
      if (j != npos && !polymer::compatible(model_.host(), polys_[j], g)) return false;
      return true;
    };
    int m_en = std::min(info_.score_order, std::max(model_.exact_degree(), 1));
    auto logz = cluster::logZ_subfamily<Model>(model_, filt, m_en);
    if (m_en < info_.score_order) {
      auto poly = series::poly_from_log(logz);
      logz = series::log_from_poly(series::resized(poly, info_.score_order));
    }
    double value = std::exp(series::evaluate(series::to_double_series(logz), z_));
    if (j != npos) value *= detail::to_double_value(polymer_weight_at(model_, polys_[j], z_));
    return value;
  }

  const StepLaw& step_law(const std::vector<size_t>& family, int t) {
    auto key = std::make_pair(t, family);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    StepLaw law;
    law.scores.push_back(score(family, t, npos));
    for (size_t j = 0; j < polys_.size(); ++j) {
      if (polys_[j].support.front() != t) continue;  // one-shot property
      bool ok = true;
      for (size_t i : family)
        if (!polymer::compatible(model_.host(), polys_[i], polys_[j])) {
          ok = false;
          break;
        }
      if (!ok) continue;
      law.candidates.push_back(j);
      law.scores.push_back(score(family, t, j));
    }
    return memo_.emplace(std::move(key), std::move(law)).first->second;
  }

  static constexpr size_t npos = static_cast<size_t>(-1);

  Model model_;
  double z_;
  SampleInfo info_;
  std::vector<polymer::Polymer> polys_;
  std::map<std::pair<int, std::vector<size_t>>, StepLaw> memo_;
};

// Total-variation-ε sampler for the external-contour measure of a boundary
// label: sequential conditional draws over the region's cells, where a
// contour is proposed at the first cell its cover reaches. Scores are exact
// sums over mutually-external sub-families of the listed pool (an exact value
// is an ε'-relative approximation); conditionals are cached per state.
class ContourSampler {
 public:
  ContourSampler(const contour::ContourModel& model, const lattice::Region& region, int phi,
                 double z, double epsilon, uint64_t state_cap = uint64_t(1) << 24);

  const SampleInfo& info() const { return info_; }
  const std::vector<contour::Contour>& pool() const { return pool_; }
  double outer_weight_value(size_t j) const { return weight_[j]; }

  std::vector<contour::Contour> sample(Rng rng);

 private:
  struct StepLaw {
    std::vector<size_t> candidates;
    std::vector<double> scores;
  };

  double family_sum(const std::vector<char>& allowed) const;
  const StepLaw& step_law(const std::vector<size_t>& family, int t);

  contour::ContourModel model_;
  lattice::Region region_;
  int phi_;
  double z_;
  uint64_t state_cap_;
  SampleInfo info_;
  std::vector<contour::Contour> pool_;
  std::vector<double> weight_;       // outer weight values at z
  std::vector<int> first_cov_;       // region index of each cover's first cell
  std::vector<std::vector<char>> me_;  // pairwise mutual externality
  std::map<std::pair<int, std::vector<size_t>>, StepLaw> memo_;
};

// A full configuration drawn from the finite-volume measure with a ground
// boundary, together with the contour families drawn at each recursive level.
struct SpinSample {
  contour::Config assignment;  // indexed like region.points()
  struct Call {
    int phi = 0;
    std::vector<Point> cells;
    std::vector<contour::Contour> contours;
  };
  std::vector<Call> provenance;
};

// Spin sampler: draws external contours for the region, fills their exterior
// with the boundary ground, copies contour spins, and recurses into each
// labeled interior. The total-variation budget ε is split uniformly across
// the at most 1+|Λ| recursive calls; contour samplers are cached per
// (interior, label), so repeated draws stay cheap.
class SpinSampler {
 public:
  SpinSampler(const contour::ContourModel& model, const lattice::Region& region, int phi,
              double param, double epsilon, uint64_t state_cap = uint64_t(1) << 24);

  double z() const { return z_; }
  double call_epsilon() const { return call_epsilon_; }

  SpinSample sample(Rng rng);

 private:
  ContourSampler& sampler_for(const std::vector<Point>& cells, int phi);

  contour::ContourModel model_;
  lattice::Region region_;
  int phi_;
  double z_;
  double call_epsilon_;
  uint64_t state_cap_;
  std::map<std::pair<std::vector<Point>, int>, std::unique_ptr<ContourSampler>> samplers_;
};

}  // namespace pirogov::sampling

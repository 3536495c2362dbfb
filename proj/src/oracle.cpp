#include "pirogov/oracle.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace pirogov::oracle {

namespace {

void check_cap(int n, uint64_t state_cap) {
  require(n >= 0, "negative vertex count");
  require_cap(n < 63 && (uint64_t(1) << n) <= state_cap,
              "state space exceeds enumeration cap");
}

std::vector<uint64_t> neighbor_masks(const Graph& g) {
  std::vector<uint64_t> nbr(static_cast<size_t>(g.n), 0);
  for (int v = 0; v < g.n; ++v)
    for (int u : g.adj[static_cast<size_t>(v)]) nbr[static_cast<size_t>(v)] |= uint64_t(1) << u;
  return nbr;
}

}  // namespace

series::TruncatedSeries<Rational> brute_Z_hardcore(const Graph& g, uint64_t state_cap) {
  check_cap(g.n, state_cap);
  auto nbr = neighbor_masks(g);
  std::vector<uint64_t> by_size(static_cast<size_t>(g.n) + 1, 0);
  uint64_t total = uint64_t(1) << g.n;
  for (uint64_t mask = 0; mask < total; ++mask) {
    bool independent = true;
    for (uint64_t rest = mask; rest;) {
      int v = std::countr_zero(rest);
      rest &= rest - 1;
      if (nbr[static_cast<size_t>(v)] & mask) {
        independent = false;
        break;
      }
    }
    if (independent) ++by_size[static_cast<size_t>(std::popcount(mask))];
  }
  series::TruncatedSeries<Rational> out(g.n);
  for (int k = 0; k <= g.n; ++k) out.c[static_cast<size_t>(k)] = Rational(by_size[static_cast<size_t>(k)]);
  return out;
}

IsingBruteTable brute_Z_ising(const Graph& g, uint64_t state_cap) {
  check_cap(g.n, state_cap);
  IsingBruteTable table;
  table.n = g.n;
  table.edges = g.edge_count();
  std::vector<std::pair<int, int>> edge_list;
  for (int v = 0; v < g.n; ++v)
    for (int u : g.adj[static_cast<size_t>(v)])
      if (u > v) edge_list.emplace_back(v, u);

  uint64_t total = uint64_t(1) << g.n;
  for (uint64_t mask = 0; mask < total; ++mask) {  // bit set = spin +1
    int disagree = 0;
    for (const auto& [v, u] : edge_list)
      disagree += static_cast<int>(((mask >> v) ^ (mask >> u)) & 1);
    ++table.counts[{std::popcount(mask), disagree}];
  }
  return table;
}

series::TruncatedSeries<double> IsingBruteTable::to_series(double beta) const {
  series::TruncatedSeries<double> out(2 * n);
  for (const auto& [kd, count] : counts)
    out.c[static_cast<size_t>(2 * kd.first)] +=
        static_cast<double>(count) * std::exp(-2.0 * beta * kd.second);
  return out;
}

double IsingBruteTable::value(double beta, double z) const {
  return series::evaluate(to_series(beta), z);
}

void ExactDistribution::validate() const {
  Rational total(0);
  std::set<std::string> seen;
  for (const auto& [key, p] : outcomes) {
    require(p >= 0, "negative probability");
    require(seen.insert(key).second, "duplicate outcome key");
    total += p;
  }
  require(total == 1, "probabilities must sum to 1");
}

TvResult tv_distance(const ExactDistribution& p, const std::map<std::string, uint64_t>& counts) {
  p.validate();
  uint64_t N = 0;
  for (const auto& [key, c] : counts) N += c;
  require(N > 0, "empty sample");

  TvResult res;
  double sum_abs = 0.0;
  std::set<std::string> covered;
  for (const auto& [key, prob] : p.outcomes) {
    covered.insert(key);
    auto it = counts.find(key);
    double emp = it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(N);
    double pd = static_cast<double>(prob);
    sum_abs += std::abs(pd - emp);
    res.radius += 0.5 * std::sqrt(pd * (1.0 - pd) / static_cast<double>(N));
  }
  for (const auto& [key, c] : counts)  // mass the exact law puts nowhere
    if (!covered.count(key)) sum_abs += static_cast<double>(c) / static_cast<double>(N);
  res.tv = 0.5 * sum_abs;
  return res;
}

namespace {

std::optional<std::filesystem::path> cache_file_for(const std::string& key) {
  const char* dir = std::getenv("PIROGOV_CACHE_DIR");
  if (!dir || !*dir) return std::nullopt;
  uint64_t h = splitmix64(std::hash<std::string>{}(key) ^ 0x9e3779b97f4a7c15ULL);
  std::ostringstream name;
  name << "oracle-" << std::hex << h << ".txt";
  return std::filesystem::path(dir) / name.str();
}

}  // namespace

std::optional<std::string> disk_cache_get(const std::string& key) {
  auto path = cache_file_for(key);
  if (!path) return std::nullopt;
  std::ifstream in(*path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string stored_key;
  if (!std::getline(in, stored_key) || stored_key != key) return std::nullopt;
  std::ostringstream rest;
  rest << in.rdbuf();
  return rest.str();
}

void disk_cache_put(const std::string& key, const std::string& value) {
  require(key.find('\n') == std::string::npos, "cache key must be single-line");
  auto path = cache_file_for(key);
  if (!path) return;
  std::error_code ec;
  std::filesystem::create_directories(path->parent_path(), ec);
  auto tmp = *path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return;
    out << key << '\n' << value;
  }
  std::filesystem::rename(tmp, *path, ec);  // best effort; cache is advisory
}

std::vector<std::pair<int, int>> region_nn_edges(const lattice::Region& r) {
  std::vector<std::pair<int, int>> edges;
  const auto& pts = r.points();
  for (size_t i = 0; i < pts.size(); ++i)
    for (const auto& q : lattice::nn_neighbors(r.geometry(), pts[i])) {
      if (!r.contains(q)) continue;
      int j = r.index_of(q);
      if (j > static_cast<int>(i)) edges.emplace_back(static_cast<int>(i), j);
    }
  std::sort(edges.begin(), edges.end());
  return edges;
}

int parity_count(const lattice::Region& r, int parity) {
  require(parity == 0 || parity == 1, "parity must be 0 or 1");
  int count = 0;
  for (const auto& p : r.points()) {
    int s = 0;
    for (int x : p) s += x;
    if (((s % 2) + 2) % 2 == parity) ++count;
  }
  return count;
}

std::vector<lattice::Point> padded_free_cells(const lattice::Region& r) {
  std::vector<lattice::Point> free;
  for (const auto& p : r.points())
    if (r.dist_to_complement(p, 3) >= 3) free.push_back(p);
  return free;
}

namespace {

int point_parity(const lattice::Point& p) {
  int s = 0;
  for (int x : p) s += x;
  return ((s % 2) + 2) % 2;
}

void check_config_cap(size_t free_cells, int options, uint64_t state_cap) {
  double cost = 1.0;
  for (size_t i = 0; i < free_cells; ++i) cost *= options;
  require_cap(cost <= static_cast<double>(state_cap), "configuration space exceeds enumeration cap");
}

std::string serialize_series(const series::TruncatedSeries<Rational>& s) {
  std::ostringstream out;
  out << s.order;
  for (int k = 0; k <= s.order; ++k)
    if (s.c[static_cast<size_t>(k)] != 0) out << '\n' << k << ' ' << s.c[static_cast<size_t>(k)];
  return out.str();
}

std::optional<series::TruncatedSeries<Rational>> parse_series(const std::string& text) {
  std::istringstream in(text);
  int order = -1;
  if (!(in >> order) || order < 0) return std::nullopt;
  series::TruncatedSeries<Rational> s(order);
  int k = 0;
  Rational value;
  while (in >> k >> value) {
    if (k < 0 || k > order) return std::nullopt;
    s.c[static_cast<size_t>(k)] = value;
  }
  return s;
}

std::string region_cache_key(const char* tag, const lattice::Region& r, int a, int b) {
  std::ostringstream key;
  key << tag << " v1 dim=" << r.dim() << " geom=";
  if (r.geometry().is_torus())
    key << "torus" << r.geometry().torus_n;
  else
    key << "free";
  key << " cells=" << r.size() << " hash=" << std::hex << r.content_hash() << std::dec << " a="
      << a << " b=" << b;
  return key.str();
}

// Coefficient histogram of z^{#bichromatic nn edges} over colourings with the
// given fixed values (-1 marks a free cell).
series::TruncatedSeries<Rational> potts_disagreement_counts(const lattice::Region& r, int q,
                                                            const std::vector<int>& fixed,
                                                            uint64_t state_cap) {
  auto edges = region_nn_edges(r);
  std::vector<int> free_ids;
  for (size_t i = 0; i < fixed.size(); ++i)
    if (fixed[i] < 0) free_ids.push_back(static_cast<int>(i));
  check_config_cap(free_ids.size(), q, state_cap);

  std::vector<int> values = fixed;
  for (int i : free_ids) values[static_cast<size_t>(i)] = 0;
  std::vector<uint64_t> counts(edges.size() + 1, 0);
  for (;;) {
    int disagree = 0;
    for (const auto& [i, j] : edges)
      disagree += values[static_cast<size_t>(i)] != values[static_cast<size_t>(j)];
    ++counts[static_cast<size_t>(disagree)];

    size_t pos = 0;  // mixed-radix odometer over the free cells
    while (pos < free_ids.size()) {
      int& v = values[static_cast<size_t>(free_ids[pos])];
      if (++v < q) break;
      v = 0;
      ++pos;
    }
    if (pos == free_ids.size()) break;
  }

  series::TruncatedSeries<Rational> out(static_cast<int>(edges.size()));
  for (size_t k = 0; k < counts.size(); ++k) out.c[k] = Rational(counts[k]);
  return out;
}

}  // namespace

series::TruncatedSeries<Rational> brute_Z_potts_free(const lattice::Region& r, int q,
                                                     uint64_t state_cap) {
  require(q >= 2, "Potts needs at least two colours");
  std::vector<int> fixed(r.size(), -1);
  return potts_disagreement_counts(r, q, fixed, state_cap);
}

series::TruncatedSeries<Rational> brute_Z_potts_region(const lattice::Region& r, int q, int phi,
                                                       uint64_t state_cap) {
  require(q >= 2, "Potts needs at least two colours");
  require(phi >= 0 && phi < q, "boundary colour out of range");
  std::string key = region_cache_key("potts-region", r, q, phi);
  if (auto hit = disk_cache_get(key))
    if (auto parsed = parse_series(*hit)) return *parsed;

  std::vector<int> fixed(r.size(), phi);
  for (const auto& p : padded_free_cells(r)) fixed[static_cast<size_t>(r.index_of(p))] = -1;
  auto out = potts_disagreement_counts(r, q, fixed, state_cap);
  disk_cache_put(key, serialize_series(out));
  return out;
}

series::TruncatedSeries<Rational> brute_Z_hardcore_region(const lattice::Region& r, int phi,
                                                          uint64_t state_cap) {
  require(phi == 0 || phi == 1, "hard-core ground state is 0 (even) or 1 (odd)");
  require(!r.geometry().is_torus() || r.geometry().torus_n % 2 == 0,
          "hard-core ground states need an even torus side");
  std::string key = region_cache_key("hardcore-region", r, phi, 0);
  if (auto hit = disk_cache_get(key))
    if (auto parsed = parse_series(*hit)) return *parsed;

  const auto& pts = r.points();
  std::vector<int> occupied(pts.size(), 0);
  std::vector<int> free_ids;
  int fixed_occupied = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    if (r.dist_to_complement(pts[i], 3) >= 3) {
      free_ids.push_back(static_cast<int>(i));
    } else if (point_parity(pts[i]) == phi) {
      occupied[i] = 1;
      ++fixed_occupied;
    }
  }
  check_config_cap(free_ids.size(), 2, state_cap);

  std::vector<std::vector<int>> adj(pts.size());
  for (const auto& [i, j] : region_nn_edges(r)) {
    adj[static_cast<size_t>(i)].push_back(j);
    adj[static_cast<size_t>(j)].push_back(i);
  }

  int ground_total = parity_count(r, phi);
  int max_s = 0;
  for (int i : free_ids) max_s += point_parity(pts[static_cast<size_t>(i)]) == phi;
  std::vector<uint64_t> counts(static_cast<size_t>(max_s) + 1, 0);

  // DFS over free cells; an occupied choice must not touch an occupied
  // neighbour (padding cells were filled first, so cross checks see them).
  auto walk = [&](auto&& self, size_t at, int occupied_total) -> void {
    if (at == free_ids.size()) {
      int s = ground_total - occupied_total;
      internal_check(s >= 0 && s <= max_s, "hard-core flip count out of range");
      ++counts[static_cast<size_t>(s)];
      return;
    }
    size_t cell = static_cast<size_t>(free_ids[at]);
    self(self, at + 1, occupied_total);  // cell left empty
    for (int nb : adj[cell])
      if (occupied[static_cast<size_t>(nb)]) return;
    occupied[cell] = 1;
    self(self, at + 1, occupied_total + 1);
    occupied[cell] = 0;
  };
  walk(walk, 0, fixed_occupied);

  series::TruncatedSeries<Rational> out(max_s);
  for (size_t k = 0; k < counts.size(); ++k) out.c[k] = Rational(counts[k]);
  disk_cache_put(key, serialize_series(out));
  return out;
}

}  // namespace pirogov::oracle

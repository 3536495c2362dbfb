#include "pirogov/cluster.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

namespace pirogov::cluster {

SmallGraph::SmallGraph(int vertices) : n(vertices) {
  require(vertices >= 1, "graph needs at least one vertex");
  require(vertices <= 32, "small-graph representation holds at most 32 vertices");
  adj.assign(static_cast<size_t>(vertices), 0);
}

void SmallGraph::add_edge(int i, int j) {
  require(i >= 0 && i < n && j >= 0 && j < n && i != j, "bad edge");
  adj[static_cast<size_t>(i)] |= uint32_t(1) << j;
  adj[static_cast<size_t>(j)] |= uint32_t(1) << i;
}

bool SmallGraph::connected() const {
  uint32_t seen = 1, frontier = 1;
  while (frontier) {
    uint32_t next = 0;
    for (uint32_t rest = frontier; rest;) {
      int v = std::countr_zero(rest);
      rest &= rest - 1;
      next |= adj[static_cast<size_t>(v)];
    }
    frontier = next & ~seen;
    seen |= next;
  }
  return std::popcount(seen) == n;
}

int SmallGraph::edge_count() const {
  int total = 0;
  for (uint32_t row : adj) total += std::popcount(row);
  return total / 2;
}

BigInt ursell_direct(const SmallGraph& h) {
  internal_check(h.connected(), "ursell of a disconnected graph");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < h.n; ++i)
    for (int j = i + 1; j < h.n; ++j)
      if (h.has_edge(i, j)) edges.emplace_back(i, j);
  require_cap(edges.size() <= 24, "too many edges for direct enumeration");

  BigInt total = 0;
  std::vector<int> parent(static_cast<size_t>(h.n));
  std::function<int(int)> find = [&](int v) {
    while (parent[static_cast<size_t>(v)] != v) {
      parent[static_cast<size_t>(v)] = parent[static_cast<size_t>(parent[static_cast<size_t>(v)])];
      v = parent[static_cast<size_t>(v)];
    }
    return v;
  };
  uint32_t subsets = uint32_t(1) << edges.size();
  for (uint32_t mask = 0; mask < subsets; ++mask) {
    std::iota(parent.begin(), parent.end(), 0);
    int components = h.n;
    for (uint32_t rest = mask; rest;) {
      int e = std::countr_zero(rest);
      rest &= rest - 1;
      int a = find(edges[static_cast<size_t>(e)].first);
      int b = find(edges[static_cast<size_t>(e)].second);
      if (a != b) {
        parent[static_cast<size_t>(a)] = b;
        --components;
      }
    }
    if (components == 1) total += (std::popcount(mask) % 2 == 0) ? 1 : -1;
  }
  return total;
}

namespace {

BigInt factorial(int k) {
  BigInt f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

bool masks_connected(const std::vector<uint32_t>& adj) {
  int n = static_cast<int>(adj.size());
  uint32_t seen = 1, frontier = 1;
  while (frontier) {
    uint32_t next = 0;
    for (uint32_t rest = frontier; rest;) {
      int v = std::countr_zero(rest);
      rest &= rest - 1;
      next |= adj[static_cast<size_t>(v)];
    }
    frontier = next & ~seen;
    seen |= next;
  }
  return std::popcount(seen) == n;
}

// Merge v into u and relabel; parallel edges collapse in the bitmask, which
// is exactly the y=0 reduction (a second contraction of the pair would make
// a loop, and loops kill the term).
std::vector<uint32_t> contract_edge(const std::vector<uint32_t>& adj, int u, int v) {
  int n = static_cast<int>(adj.size());
  std::vector<int> map(static_cast<size_t>(n));
  int next = 0;
  for (int w = 0; w < n; ++w) map[static_cast<size_t>(w)] = (w == v) ? -1 : next++;
  std::vector<uint32_t> out(static_cast<size_t>(n - 1), 0);
  for (int w = 0; w < n; ++w) {
    if (w == v) continue;
    uint32_t row = adj[static_cast<size_t>(w)];
    if (w == u) row |= adj[static_cast<size_t>(v)];
    uint32_t mapped = 0;
    for (uint32_t rest = row; rest;) {
      int t = std::countr_zero(rest);
      rest &= rest - 1;
      int mt = (t == v) ? map[static_cast<size_t>(u)] : map[static_cast<size_t>(t)];
      if (mt != map[static_cast<size_t>(w)]) mapped |= uint32_t(1) << mt;
    }
    out[static_cast<size_t>(map[static_cast<size_t>(w)])] = mapped;
  }
  return out;
}

// T(G; 1, 0) for connected simple G. Trees give 1, complete graphs (n-1)!.
BigInt tutte_one_zero(std::vector<uint32_t> adj, std::map<std::vector<uint32_t>, BigInt>& memo) {
  int n = static_cast<int>(adj.size());
  if (n == 1) return 1;
  int twice_edges = 0;
  for (uint32_t row : adj) twice_edges += std::popcount(row);
  int edges = twice_edges / 2;
  if (edges == n - 1) return 1;                        // spanning tree of itself
  if (edges == n * (n - 1) / 2) return factorial(n - 1);

  auto it = memo.find(adj);
  if (it != memo.end()) return it->second;

  int u = 0;
  while (adj[static_cast<size_t>(u)] == 0) ++u;
  int v = std::countr_zero(adj[static_cast<size_t>(u)]);

  std::vector<uint32_t> removed = adj;
  removed[static_cast<size_t>(u)] &= ~(uint32_t(1) << v);
  removed[static_cast<size_t>(v)] &= ~(uint32_t(1) << u);

  BigInt result = tutte_one_zero(contract_edge(adj, u, v), memo);
  if (masks_connected(removed)) result += tutte_one_zero(std::move(removed), memo);
  memo.emplace(std::move(adj), result);
  return result;
}

}  // namespace

BigInt ursell(const SmallGraph& h, int cap) {
  require_cap(h.n <= cap, "cluster too large for Ursell evaluation");
  internal_check(h.connected(), "ursell of a disconnected graph");
  std::map<std::vector<uint32_t>, BigInt> memo;
  BigInt t = tutte_one_zero(h.adj, memo);
  return (h.n % 2 == 1) ? t : -t;
}

std::vector<std::vector<int>> rooted_trees(int n) {
  require(n >= 1, "trees need at least one vertex");
  std::vector<std::vector<int>> out;
  std::vector<int> level(static_cast<size_t>(n));
  std::iota(level.begin(), level.end(), 1);  // the path
  for (;;) {
    out.push_back(level);
    int p = -1;
    for (int i = n - 1; i >= 0; --i) {
      if (level[static_cast<size_t>(i)] > 2) {
        p = i;
        break;
      }
    }
    if (p < 0) break;
    int q = -1;
    for (int i = p - 1; i >= 0; --i) {
      if (level[static_cast<size_t>(i)] == level[static_cast<size_t>(p)] - 1) {
        q = i;
        break;
      }
    }
    for (int i = p; i < n; ++i)
      level[static_cast<size_t>(i)] = level[static_cast<size_t>(i - (p - q))];
  }
  return out;
}

bool IncompatibilityPool::adjacent(int i, int j) const {
  const auto& row = neighbors[static_cast<size_t>(i)];
  return std::binary_search(row.begin(), row.end(), j);
}

namespace {

struct ClusterWalk {
  const IncompatibilityPool& pool;
  int order_cap;
  const std::function<void(const Cluster&)>& fn;
  const std::vector<bool>* allowed;

  std::vector<int> items;          // current connected set, ascending discovery
  std::vector<bool> in_set, banned;
  std::map<std::vector<uint64_t>, BigInt> phi_memo;
  Cluster scratch;

  bool usable(int i) const { return !allowed || (*allowed)[static_cast<size_t>(i)]; }

  void emit_multisets(int sum_min) {
    // items joined the set in DFS order; clusters present them sorted
    scratch.items = items;
    std::sort(scratch.items.begin(), scratch.items.end());
    scratch.mult.assign(scratch.items.size(), 1);
    assign_mults(0, sum_min);
  }

  // `used` = full order of the multiset with current mults at positions < pos
  // and multiplicity 1 from pos onward.
  void assign_mults(size_t pos, int used) {
    if (pos == scratch.items.size()) {
      finish_cluster(used);
      return;
    }
    int mo = pool.min_order[static_cast<size_t>(scratch.items[pos])];
    for (int mult = 1; used + (mult - 1) * mo <= order_cap; ++mult) {
      scratch.mult[pos] = mult;
      assign_mults(pos + 1, used + (mult - 1) * mo);
    }
    scratch.mult[pos] = 1;
  }

  void finish_cluster(int total) {
    scratch.total_order = total;
    int occurrences = 0;
    for (int m : scratch.mult) occurrences += m;

    std::vector<uint64_t> key;
    key.reserve(1 + 2 * scratch.items.size());
    key.push_back(static_cast<uint64_t>(scratch.items.size()));
    for (size_t i = 0; i < scratch.items.size(); ++i) {
      uint64_t row = 0;
      for (size_t j = 0; j < scratch.items.size(); ++j)
        if (j != i && pool.adjacent(scratch.items[i], scratch.items[j])) row |= uint64_t(1) << j;
      key.push_back(row);
    }
    for (int m : scratch.mult) key.push_back(static_cast<uint64_t>(m));

    auto it = phi_memo.find(key);
    if (it != phi_memo.end()) {
      scratch.phi = it->second;
    } else {
      SmallGraph h(occurrences);
      std::vector<int> offset(scratch.items.size() + 1, 0);
      for (size_t i = 0; i < scratch.items.size(); ++i)
        offset[i + 1] = offset[i] + scratch.mult[i];
      for (size_t i = 0; i < scratch.items.size(); ++i) {
        for (int a = offset[i]; a < offset[i + 1]; ++a)
          for (int b = a + 1; b < offset[i + 1]; ++b) h.add_edge(a, b);
        for (size_t j = i + 1; j < scratch.items.size(); ++j) {
          if (!pool.adjacent(scratch.items[i], scratch.items[j])) continue;
          for (int a = offset[i]; a < offset[i + 1]; ++a)
            for (int b = offset[j]; b < offset[j + 1]; ++b) h.add_edge(a, b);
        }
      }
      scratch.phi = ursell(h);
      phi_memo.emplace(std::move(key), scratch.phi);
    }

    BigInt denom = 1;
    for (int m : scratch.mult) denom *= factorial(m);
    scratch.mult_factor = Rational(BigInt(1), denom);
    fn(scratch);
  }

  void grow(int root, int sum_min) {
    emit_multisets(sum_min);
    std::vector<int> cands;
    for (int i : items) {
      for (int nb : pool.neighbors[static_cast<size_t>(i)]) {
        if (nb <= root || in_set[static_cast<size_t>(nb)] || banned[static_cast<size_t>(nb)])
          continue;
        if (!usable(nb)) continue;
        if (sum_min + pool.min_order[static_cast<size_t>(nb)] > order_cap) continue;
        cands.push_back(nb);
      }
    }
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    std::vector<int> newly_banned;
    for (int nb : cands) {
      items.push_back(nb);
      in_set[static_cast<size_t>(nb)] = true;
      grow(root, sum_min + pool.min_order[static_cast<size_t>(nb)]);
      in_set[static_cast<size_t>(nb)] = false;
      items.pop_back();
      banned[static_cast<size_t>(nb)] = true;
      newly_banned.push_back(nb);
    }
    for (int nb : newly_banned) banned[static_cast<size_t>(nb)] = false;
  }

  void run() {
    int P = static_cast<int>(pool.size());
    in_set.assign(static_cast<size_t>(P), false);
    banned.assign(static_cast<size_t>(P), false);
    for (int root = 0; root < P; ++root) {
      if (!usable(root)) continue;
      if (pool.min_order[static_cast<size_t>(root)] > order_cap) continue;
      items.assign(1, root);
      in_set[static_cast<size_t>(root)] = true;
      grow(root, pool.min_order[static_cast<size_t>(root)]);
      in_set[static_cast<size_t>(root)] = false;
    }
  }
};

}  // namespace

void for_each_cluster(const IncompatibilityPool& pool, int order_cap,
                      const std::function<void(const Cluster&)>& fn,
                      const std::vector<bool>* allowed) {
  require(order_cap >= 1, "order cap must be positive");
  require(pool.neighbors.size() == pool.min_order.size(), "malformed pool");
  for (int mo : pool.min_order) require(mo >= 1, "minimum orders must be positive");
  if (allowed) require(allowed->size() == pool.size(), "allowed mask size mismatch");
  ClusterWalk walk{pool, order_cap, fn, allowed, {}, {}, {}, {}, {}};
  walk.run();
}

std::vector<Cluster> enumerate_clusters(const IncompatibilityPool& pool, int order_cap,
                                        const std::vector<bool>* allowed) {
  std::vector<Cluster> out;
  for_each_cluster(pool, order_cap, [&](const Cluster& c) { out.push_back(c); }, allowed);
  return out;
}

}  // namespace pirogov::cluster

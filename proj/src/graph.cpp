#include "pirogov/graph.hpp"

#include <algorithm>
#include <deque>

namespace pirogov {

Graph Graph::from_region_nn(const lattice::Region& r) {
  Graph g(static_cast<int>(r.size()));
  for (const auto& p : r.points()) {
    int u = r.index_of(p);
    for (const auto& q : lattice::nn_neighbors(r.geometry(), p)) {
      if (!r.contains(q)) continue;
      int v = r.index_of(q);
      if (u < v) g.add_edge(u, v);
    }
  }
  return g;
}

void Graph::add_edge(int u, int v) {
  require(u >= 0 && u < n && v >= 0 && v < n && u != v, "bad edge");
  if (adjacent(u, v)) return;
  adj[static_cast<size_t>(u)].insert(
      std::lower_bound(adj[static_cast<size_t>(u)].begin(), adj[static_cast<size_t>(u)].end(), v),
      v);
  adj[static_cast<size_t>(v)].insert(
      std::lower_bound(adj[static_cast<size_t>(v)].begin(), adj[static_cast<size_t>(v)].end(), u),
      u);
}

bool Graph::adjacent(int u, int v) const {
  const auto& row = adj[static_cast<size_t>(u)];
  return std::binary_search(row.begin(), row.end(), v);
}

int Graph::max_degree() const {
  size_t d = 0;
  for (const auto& row : adj) d = std::max(d, row.size());
  return static_cast<int>(d);
}

bool Graph::connected() const {
  if (n <= 1) return true;
  std::vector<bool> seen(static_cast<size_t>(n), false);
  std::deque<int> queue{0};
  seen[0] = true;
  int reached = 1;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int v : adj[static_cast<size_t>(u)]) {
      if (!seen[static_cast<size_t>(v)]) {
        seen[static_cast<size_t>(v)] = true;
        ++reached;
        queue.push_back(v);
      }
    }
  }
  return reached == n;
}

int Graph::edge_count() const {
  size_t e = 0;
  for (const auto& row : adj) e += row.size();
  return static_cast<int>(e / 2);
}

Graph Graph::induced(const std::vector<int>& verts) const {
  std::vector<int> sorted = verts;
  std::sort(sorted.begin(), sorted.end());
  Graph g(static_cast<int>(sorted.size()));
  for (size_t i = 0; i < sorted.size(); ++i)
    for (size_t j = i + 1; j < sorted.size(); ++j)
      if (adjacent(sorted[i], sorted[j])) g.add_edge(static_cast<int>(i), static_cast<int>(j));
  return g;
}

namespace {

// Connected supersets of S avoiding `banned`, emitted once each: candidates
// adjacent to S are tried in ascending order, and every candidate is banned
// for the branches that follow it, which forces a unique generation path.
void grow_connected(const Graph& g, std::vector<int>& S, std::vector<bool>& in_set,
                    std::vector<bool>& banned, int max_size,
                    std::vector<std::vector<int>>& out, uint64_t budget = 0) {
  std::vector<int> sorted = S;
  std::sort(sorted.begin(), sorted.end());
  out.push_back(sorted);
  require_cap(budget == 0 || out.size() <= budget, "connected-subset budget exceeded");
  if (static_cast<int>(S.size()) >= max_size) return;
  std::vector<int> cands;
  for (int u : S)
    for (int v : g.adj[static_cast<size_t>(u)])
      if (!in_set[static_cast<size_t>(v)] && !banned[static_cast<size_t>(v)])
        cands.push_back(v);
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
  std::vector<int> newly_banned;
  for (int v : cands) {
    S.push_back(v);
    in_set[static_cast<size_t>(v)] = true;
    grow_connected(g, S, in_set, banned, max_size, out, budget);
    in_set[static_cast<size_t>(v)] = false;
    S.pop_back();
    banned[static_cast<size_t>(v)] = true;
    newly_banned.push_back(v);
  }
  for (int v : newly_banned) banned[static_cast<size_t>(v)] = false;
}

void sort_canonical(std::vector<std::vector<int>>& sets) {
  std::sort(sets.begin(), sets.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
}

}  // namespace

std::vector<std::vector<int>> connected_subsets(const Graph& g, int root, int max_size) {
  require(root >= 0 && root < g.n, "root out of range");
  require(max_size >= 1, "max_size must be positive");
  std::vector<std::vector<int>> out;
  std::vector<int> S{root};
  std::vector<bool> in_set(static_cast<size_t>(g.n), false);
  std::vector<bool> banned(static_cast<size_t>(g.n), false);
  in_set[static_cast<size_t>(root)] = true;
  grow_connected(g, S, in_set, banned, max_size, out);
  sort_canonical(out);
  return out;
}

std::vector<std::vector<int>> all_connected_subsets(const Graph& g, int max_size,
                                                    uint64_t budget) {
  require(max_size >= 1, "max_size must be positive");
  std::vector<std::vector<int>> out;
  // Rooting each set at its minimum vertex avoids duplicates: vertices below
  // the root are banned from the start.
  for (int root = 0; root < g.n; ++root) {
    std::vector<int> S{root};
    std::vector<bool> in_set(static_cast<size_t>(g.n), false);
    std::vector<bool> banned(static_cast<size_t>(g.n), false);
    for (int v = 0; v < root; ++v) banned[static_cast<size_t>(v)] = true;
    in_set[static_cast<size_t>(root)] = true;
    grow_connected(g, S, in_set, banned, max_size, out, budget);
  }
  sort_canonical(out);
  return out;
}

namespace {

int avail_degree(const Graph& g, const std::vector<bool>& avail, int v) {
  int d = 0;
  for (int u : g.adj[static_cast<size_t>(v)])
    if (avail[static_cast<size_t>(u)]) ++d;
  return d;
}

// Greedy clique cover of the available vertices (pairs where possible): every
// independent set meets each part at most once, so the part count bounds alpha.
int clique_cover_bound(const Graph& g, std::vector<bool> avail) {
  int parts = 0;
  for (int v = 0; v < g.n; ++v) {
    if (!avail[static_cast<size_t>(v)]) continue;
    avail[static_cast<size_t>(v)] = false;
    for (int u : g.adj[static_cast<size_t>(v)]) {
      if (avail[static_cast<size_t>(u)]) {
        avail[static_cast<size_t>(u)] = false;
        break;
      }
    }
    ++parts;
  }
  return parts;
}

void alpha_branch(const Graph& g, std::vector<bool>& avail, int current, int& best) {
  // Force vertices of available degree 0 (take) and 1 (taking the vertex and
  // dropping its lone neighbour is never worse).
  bool reduced = true;
  std::vector<int> undo;
  while (reduced) {
    reduced = false;
    for (int v = 0; v < g.n; ++v) {
      if (!avail[static_cast<size_t>(v)]) continue;
      int d = avail_degree(g, avail, v);
      if (d == 0) {
        avail[static_cast<size_t>(v)] = false;
        undo.push_back(v);
        ++current;
        reduced = true;
      } else if (d == 1) {
        avail[static_cast<size_t>(v)] = false;
        undo.push_back(v);
        for (int u : g.adj[static_cast<size_t>(v)]) {
          if (avail[static_cast<size_t>(u)]) {
            avail[static_cast<size_t>(u)] = false;
            undo.push_back(u);
            break;
          }
        }
        ++current;
        reduced = true;
      }
    }
  }

  int pick = -1, pick_deg = -1;
  for (int v = 0; v < g.n; ++v) {
    if (!avail[static_cast<size_t>(v)]) continue;
    int d = avail_degree(g, avail, v);
    if (d > pick_deg) {
      pick = v;
      pick_deg = d;
    }
  }
  if (pick < 0) {
    best = std::max(best, current);
  } else if (current + clique_cover_bound(g, avail) > best) {
    std::vector<int> removed{pick};
    avail[static_cast<size_t>(pick)] = false;
    for (int u : g.adj[static_cast<size_t>(pick)]) {
      if (avail[static_cast<size_t>(u)]) {
        avail[static_cast<size_t>(u)] = false;
        removed.push_back(u);
      }
    }
    alpha_branch(g, avail, current + 1, best);  // take pick, drop N(pick)
    for (size_t i = 1; i < removed.size(); ++i) avail[static_cast<size_t>(removed[i])] = true;
    alpha_branch(g, avail, current, best);  // leave pick out
    avail[static_cast<size_t>(pick)] = true;
  }
  for (int v : undo) avail[static_cast<size_t>(v)] = true;
}

}  // namespace

int independence_number(const Graph& g) {
  std::vector<bool> avail(static_cast<size_t>(g.n), true);
  int best = 0;
  alpha_branch(g, avail, 0, best);
  return best;
}

}  // namespace pirogov

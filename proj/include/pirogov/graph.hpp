#pragma once

#include <vector>

#include "pirogov/lattice.hpp"

namespace pirogov {

// Bounded-degree host graph for polymer models. Vertices are 0..n-1; when
// built from a Region, vertex order matches the region's sorted point list
// and adjacency is nearest-neighbour.
struct Graph {
  int n = 0;
  std::vector<std::vector<int>> adj;  // sorted, no self-loops

  Graph() = default;
  explicit Graph(int vertices) : n(vertices), adj(vertices) {}

  static Graph from_region_nn(const lattice::Region& r);

  void add_edge(int u, int v);
  bool adjacent(int u, int v) const;
  int max_degree() const;
  bool connected() const;
  int edge_count() const;

  // Induced subgraph on `verts` (sorted ids); vertex i of the result is verts[i].
  Graph induced(const std::vector<int>& verts) const;
};

// Connected vertex sets containing `root` with size <= max_size, each exactly
// once, ordered by (size, lexicographic id list).
std::vector<std::vector<int>> connected_subsets(const Graph& g, int root, int max_size);

// All connected vertex sets of size <= max_size (each once, same order).
// A nonzero budget caps how many sets may be produced; exceeding it raises
// CapError so callers on large hosts fail fast instead of filling memory.
std::vector<std::vector<int>> all_connected_subsets(const Graph& g, int max_size,
                                                    uint64_t budget = 0);

// Maximum size of an independent vertex set, by branch and bound with
// degree-(0,1) reductions and a greedy clique-cover bound. Exact.
int independence_number(const Graph& g);

}  // namespace pirogov

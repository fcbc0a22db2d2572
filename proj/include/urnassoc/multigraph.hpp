#pragma once

#include "measure.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace urnassoc {

// Ordered vertices 0..n-1 and ordered edges (i, j), i <= j; loops and
// parallel edges allowed. The last vertex n-1 plays the role of v_n.
struct MultiGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;

  int m() const { return static_cast<int>(edges.size()); }
  int last() const { return n - 1; }

  void validate() const {
    if (n < 1) throw std::invalid_argument("graph needs at least one vertex");
    if (m() > 30) throw std::invalid_argument("at most 30 edges are supported");
    for (const auto& [i, j] : edges)
      if (i < 0 || j >= n || i > j) throw std::invalid_argument("edge endpoints must satisfy 1 <= i <= j <= n");
  }

  // X(G): edges incident to the last vertex (loops there included).
  Mask X() const {
    Mask x = 0;
    for (int e = 0; e < m(); ++e)
      if (edges[e].second == last()) x |= Mask(1) << e;
    return x;
  }

  bool is_loop(int e) const { return edges[e].first == edges[e].second; }

  int degree(int v) const {
    int d = 0;
    for (const auto& [i, j] : edges) d += (i == v) + (j == v);
    return d;
  }

  // Edges incident to v, by index.
  std::vector<int> incident(int v) const {
    std::vector<int> out;
    for (int e = 0; e < m(); ++e)
      if (edges[e].first == v || edges[e].second == v) out.push_back(e);
    return out;
  }

  int other_end(int e, int v) const { return edges[e].first == v ? edges[e].second : edges[e].first; }

  bool operator==(const MultiGraph&) const = default;
  auto operator<=>(const MultiGraph&) const = default;
};

inline std::pair<int, int> normalized(int a, int b) { return a <= b ? std::make_pair(a, b) : std::make_pair(b, a); }

// perm[old] = new. The caller keeps the last vertex fixed when X matters.
inline MultiGraph permute_vertices(const MultiGraph& g, const std::vector<int>& perm) {
  MultiGraph h{g.n, {}};
  for (const auto& [i, j] : g.edges) h.edges.push_back(normalized(perm[i], perm[j]));
  return h;
}

// perm[old] = new.
inline MultiGraph permute_edges(const MultiGraph& g, const std::vector<int>& perm) {
  MultiGraph h{g.n, std::vector<std::pair<int, int>>(g.edges.size())};
  for (int e = 0; e < g.m(); ++e) h.edges[perm[e]] = g.edges[e];
  return h;
}

inline Mask map_mask(Mask s, const std::vector<int>& perm) {
  Mask out = 0;
  for (int e = 0; e < static_cast<int>(perm.size()); ++e)
    if ((s >> e) & 1) {
      if (perm[e] < 0) throw std::logic_error("mapping a removed edge");
      out |= Mask(1) << perm[e];
    }
  return out;
}

inline std::vector<int> swap_permutation(int size, int a, int b) {
  std::vector<int> p(size);
  for (int i = 0; i < size; ++i) p[i] = i;
  std::swap(p[a], p[b]);
  return p;
}

struct EdgeRemoval {
  MultiGraph graph;
  std::vector<int> edge_map;  // old edge -> new edge, -1 for the removed one
};

// Swap the chosen edge into last position, then drop it.
inline EdgeRemoval delete_edge(const MultiGraph& g, int idx) {
  if (idx < 0 || idx >= g.m()) throw std::invalid_argument("edge index out of range");
  std::vector<int> map = swap_permutation(g.m(), idx, g.m() - 1);
  MultiGraph h = permute_edges(g, map);
  h.edges.pop_back();
  map[idx] = -1;
  return {std::move(h), std::move(map)};
}

struct Contraction {
  MultiGraph graph;
  std::vector<int> vertex_map;  // old vertex -> new vertex
  std::vector<int> edge_map;    // old edge -> new edge, -1 for the contracted one
};

// e = (i, j), i < j: v_j merges into v_i, vertices above j shift down by one.
// Edge order follows the deletion convention.
inline Contraction contract_edge(const MultiGraph& g, int idx) {
  if (idx < 0 || idx >= g.m()) throw std::invalid_argument("edge index out of range");
  if (g.is_loop(idx)) throw std::invalid_argument("cannot contract a loop");
  auto [i, j] = g.edges[idx];
  std::vector<int> vmap(g.n);
  for (int k = 0; k < g.n; ++k) vmap[k] = k < j ? k : (k == j ? i : k - 1);
  EdgeRemoval del = delete_edge(g, idx);
  MultiGraph h = permute_vertices(del.graph, vmap);
  h.n = g.n - 1;
  return {std::move(h), std::move(vmap), std::move(del.edge_map)};
}

// All perfect matchings of an even list of edge indices, each as a list of
// pairs (a, b) with a < b, sorted by a.
inline std::vector<std::vector<std::pair<int, int>>> perfect_matchings(std::vector<int> items) {
  std::sort(items.begin(), items.end());
  std::vector<std::vector<std::pair<int, int>>> out;
  if (items.size() % 2) return out;
  std::vector<std::pair<int, int>> cur;
  auto rec = [&](auto&& self, std::vector<int> rest) -> void {
    if (rest.empty()) {
      out.push_back(cur);
      return;
    }
    int a = rest[0];
    for (std::size_t t = 1; t < rest.size(); ++t) {
      std::vector<int> next;
      for (std::size_t u = 1; u < rest.size(); ++u)
        if (u != t) next.push_back(rest[u]);
      cur.emplace_back(a, rest[t]);
      self(self, next);
      cur.pop_back();
    }
  };
  rec(rec, items);
  return out;
}

// pi-split of vertex v (0-based): v is replaced by |pi| new vertices placed
// at v, v+1, ...; pair t (pairs sorted by smaller edge index) goes to v+t.
// Vertices above v shift up by |pi| - 1. Edge labels are preserved.
inline MultiGraph split_vertex(const MultiGraph& g, int v, std::vector<std::pair<int, int>> pi) {
  for (int e : g.incident(v))
    if (g.is_loop(e)) throw std::invalid_argument("split vertex carries a loop");
  std::vector<int> inc = g.incident(v);
  std::vector<int> seen;
  for (auto& [a, b] : pi) {
    if (a > b) std::swap(a, b);
    seen.push_back(a);
    seen.push_back(b);
  }
  std::sort(seen.begin(), seen.end());
  if (seen != inc || std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw std::invalid_argument("pi is not a perfect matching of the edges at v");
  std::sort(pi.begin(), pi.end());
  int a = static_cast<int>(pi.size());
  auto shift = [&](int k) { return k < v ? k : k + a - 1; };
  MultiGraph h{g.n + a - 1, {}};
  std::vector<int> owner(g.m(), -1);
  for (int t = 0; t < a; ++t) owner[pi[t].first] = owner[pi[t].second] = v + t;
  for (int e = 0; e < g.m(); ++e) {
    auto [i, j] = g.edges[e];
    int ni = i == v ? owner[e] : shift(i);
    int nj = j == v ? owner[e] : shift(j);
    h.edges.push_back(normalized(ni, nj));
  }
  return h;
}

// Permutation of [n] sending each listed source to its target; the other
// vertices fill the remaining slots in increasing order. Sources and targets
// must stay within the same block (prefix [0, d) or the middle [d, n-1)), so
// the last vertex is fixed and the prefix is preserved setwise.
inline std::vector<int> block_permutation(int n, int d, const std::vector<std::pair<int, int>>& moves) {
  std::vector<int> perm(n, -1);
  std::vector<char> taken(n, 0);
  auto block = [&](int x) { return x < d ? 0 : (x < n - 1 ? 1 : 2); };
  for (auto [s, t] : moves) {
    if (block(s) != block(t) || block(s) == 2) throw std::logic_error("move crosses blocks");
    perm[s] = t;
    taken[t] = 1;
  }
  for (int b = 0; b < 3; ++b) {
    int lo = b == 0 ? 0 : (b == 1 ? d : n - 1), hi = b == 0 ? d : (b == 1 ? n - 1 : n);
    int slot = lo;
    for (int x = lo; x < hi; ++x) {
      if (perm[x] >= 0) continue;
      while (taken[slot]) ++slot;
      perm[x] = slot;
      taken[slot] = 1;
    }
  }
  return perm;
}

}  // namespace urnassoc

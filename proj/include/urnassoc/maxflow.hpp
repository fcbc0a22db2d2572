#pragma once

#include <algorithm>
#include <cstddef>
#include <queue>
#include <stdexcept>
#include <vector>

namespace urnassoc {

// Exact max-flow by shortest augmenting paths (Edmonds-Karp). Cap may be any
// exact ordered ring type: mpq_class, mpz_class, __int128. Arcs are scanned in
// insertion order, so the resulting flow is reproducible.
template <typename Cap>
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t nodes) : adj_(nodes) {}

  std::size_t add_node() {
    adj_.emplace_back();
    return adj_.size() - 1;
  }

  std::size_t node_count() const { return adj_.size(); }

  // Returns an arc id usable with flow_on().
  std::size_t add_edge(std::size_t u, std::size_t v, const Cap& cap) {
    if (cap < Cap(0)) throw std::invalid_argument("negative capacity");
    std::size_t id = arcs_.size();
    arcs_.push_back({v, cap, Cap(0)});
    adj_[u].push_back(id);
    arcs_.push_back({u, Cap(0), Cap(0)});
    adj_[v].push_back(id + 1);
    return id;
  }

  Cap run(std::size_t s, std::size_t t) {
    Cap total(0);
    if (s == t) return total;
    std::vector<std::size_t> via(adj_.size());
    std::vector<char> seen(adj_.size());
    for (;;) {
      std::fill(seen.begin(), seen.end(), 0);
      std::queue<std::size_t> q;
      q.push(s);
      seen[s] = 1;
      while (!q.empty() && !seen[t]) {
        std::size_t u = q.front();
        q.pop();
        for (std::size_t id : adj_[u]) {
          const Arc& a = arcs_[id];
          if (!seen[a.to] && a.flow < a.cap) {
            seen[a.to] = 1;
            via[a.to] = id;
            q.push(a.to);
          }
        }
      }
      if (!seen[t]) break;
      Cap push = residual(via[t]);
      for (std::size_t v = t; v != s; v = arcs_[via[v] ^ 1].to) {
        Cap r = residual(via[v]);
        if (r < push) push = r;
      }
      for (std::size_t v = t; v != s; v = arcs_[via[v] ^ 1].to) {
        arcs_[via[v]].flow += push;
        arcs_[via[v] ^ 1].flow -= push;
      }
      total += push;
    }
    return total;
  }

  const Cap& flow_on(std::size_t arc) const { return arcs_[arc].flow; }

  // Nodes reachable from s in the residual graph; valid after run().
  std::vector<char> source_side(std::size_t s) const {
    std::vector<char> seen(adj_.size());
    std::queue<std::size_t> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop();
      for (std::size_t id : adj_[u]) {
        const Arc& a = arcs_[id];
        if (!seen[a.to] && a.flow < a.cap) {
          seen[a.to] = 1;
          q.push(a.to);
        }
      }
    }
    return seen;
  }

 private:
  struct Arc {
    std::size_t to;
    Cap cap;
    Cap flow;
  };

  Cap residual(std::size_t id) const { return arcs_[id].cap - arcs_[id].flow; }

  std::vector<std::vector<std::size_t>> adj_;
  std::vector<Arc> arcs_;
};

}  // namespace urnassoc

#pragma once

#include "maxflow.hpp"
#include "measure.hpp"
#include "poset.hpp"
#include "report.hpp"

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace urnassoc {

struct WeightedBipartiteGraph {
  int n1 = 0, n2 = 0;
  std::vector<std::pair<int, int>> edges;  // (side1 vertex, side2 vertex)
  std::vector<Rational> f1, f2;

  Rational total1() const {
    Rational t(0);
    for (const auto& x : f1) t += x;
    return t;
  }
  Rational total2() const {
    Rational t(0);
    for (const auto& x : f2) t += x;
    return t;
  }
  bool balanced() const { return total1() == total2(); }

  void validate() const {
    if (static_cast<int>(f1.size()) != n1 || static_cast<int>(f2.size()) != n2)
      throw std::invalid_argument("weight vector size mismatch");
    for (const auto& [u, v] : edges)
      if (u < 0 || u >= n1 || v < 0 || v >= n2) throw std::invalid_argument("edge endpoint out of range");
    for (const auto& x : f1)
      if (x < 0) throw std::invalid_argument("negative weight");
    for (const auto& x : f2)
      if (x < 0) throw std::invalid_argument("negative weight");
    if (!balanced()) throw std::invalid_argument("weights are not balanced");
  }

  std::vector<std::vector<int>> side1_adjacency() const {
    std::vector<std::vector<int>> adj(n1);
    for (const auto& [u, v] : edges) adj[u].push_back(v);
    return adj;
  }
};

// omega indexed like G.edges.
using FlowCertificate = std::vector<Rational>;

inline bool validate_certificate(const WeightedBipartiteGraph& g, const FlowCertificate& omega) {
  if (omega.size() != g.edges.size()) return false;
  std::vector<Rational> s1(g.n1, Rational(0)), s2(g.n2, Rational(0));
  for (std::size_t e = 0; e < omega.size(); ++e) {
    if (omega[e] < 0) return false;
    s1[g.edges[e].first] += omega[e];
    s2[g.edges[e].second] += omega[e];
  }
  return s1 == g.f1 && s2 == g.f2;
}

struct FlowOutcome {
  std::optional<FlowCertificate> certificate;
  std::vector<int> violating;  // U ⊆ side1 with f(U) > f(N(U)) when no certificate
};

inline std::vector<int> neighbourhood(const WeightedBipartiteGraph& g, const std::vector<int>& u) {
  std::vector<char> in(g.n1, 0), hit(g.n2, 0);
  for (int x : u) in[x] = 1;
  for (const auto& [a, b] : g.edges)
    if (in[a]) hit[b] = 1;
  std::vector<int> out;
  for (int v = 0; v < g.n2; ++v)
    if (hit[v]) out.push_back(v);
  return out;
}

inline Rational weight_of(const std::vector<Rational>& f, const std::vector<int>& u) {
  Rational t(0);
  for (int x : u) t += f[x];
  return t;
}

// Source -> side1 (f), side1 -> side2 (sum bound), side2 -> sink (f). A
// saturating flow is an (NMP-B) certificate; otherwise the source side of a
// minimum cut violates Hall's condition.
inline FlowOutcome find_flow_certificate(const WeightedBipartiteGraph& g) {
  g.validate();
  std::size_t src = 0, sink = 1;
  MaxFlow<Rational> net(2 + g.n1 + g.n2);
  Rational big = g.total1() + 1;
  for (int u = 0; u < g.n1; ++u) net.add_edge(src, 2 + u, g.f1[u]);
  for (int v = 0; v < g.n2; ++v) net.add_edge(2 + g.n1 + v, sink, g.f2[v]);
  std::vector<std::size_t> arc;
  for (const auto& [u, v] : g.edges) arc.push_back(net.add_edge(2 + u, 2 + g.n1 + v, big));
  Rational value = net.run(src, sink);
  FlowOutcome out;
  if (value == g.total1()) {
    FlowCertificate omega;
    for (std::size_t a : arc) omega.push_back(net.flow_on(a));
    out.certificate = std::move(omega);
  } else {
    auto side = net.source_side(src);
    for (int u = 0; u < g.n1; ++u)
      if (side[2 + u]) out.violating.push_back(u);
  }
  return out;
}

inline PropertyReport check_hall_weighted(const WeightedBipartiteGraph& g) {
  PropertyReport r{"hall", Verdict::pass, nullptr, "", json::object()};
  FlowOutcome fo = find_flow_certificate(g);
  if (!fo.certificate) {
    r.verdict = Verdict::fail;
    auto nu = neighbourhood(g, fo.violating);
    r.witness = {{"U", fo.violating},
                 {"N(U)", nu},
                 {"f(U)", to_string(weight_of(g.f1, fo.violating))},
                 {"f(N(U))", to_string(weight_of(g.f2, nu))}};
  }
  return r;
}

// Every maximal independent set is U1 ∪ (V2 \ N(U1)) for some U1 ⊆ V1 such that
// each vertex of V1 \ U1 has a neighbour in V2 \ N(U1). Enumerates U1.
inline PropertyReport check_lym_independent(const WeightedBipartiteGraph& g, int max_side = 22) {
  g.validate();
  PropertyReport r{"lym-independent", Verdict::pass, nullptr, "", json::object()};
  if (g.n1 > max_side) {
    r.verdict = Verdict::inconclusive;
    r.note = "side 1 too large for independent-set enumeration";
    return r;
  }
  auto adj = g.side1_adjacency();
  Rational bound = g.total1();
  std::size_t maximal = 0;
  for (std::uint64_t u1 = 0; u1 < (std::uint64_t(1) << g.n1); ++u1) {
    std::vector<int> us;
    std::vector<char> hit(g.n2, 0);
    for (int u = 0; u < g.n1; ++u)
      if ((u1 >> u) & 1) {
        us.push_back(u);
        for (int v : adj[u]) hit[v] = 1;
      }
    bool is_maximal = true;
    for (int u = 0; u < g.n1 && is_maximal; ++u) {
      if ((u1 >> u) & 1) continue;
      bool blocked = false;
      for (int v : adj[u]) blocked = blocked || !hit[v];
      is_maximal = blocked;
    }
    if (!is_maximal) continue;
    ++maximal;
    std::vector<int> u2;
    for (int v = 0; v < g.n2; ++v)
      if (!hit[v]) u2.push_back(v);
    Rational s = weight_of(g.f1, us) + weight_of(g.f2, u2);
    if (s > bound) {
      r.verdict = Verdict::fail;
      r.witness = {{"side1", us}, {"side2", u2}, {"f(U)", to_string(s)}, {"f(V1)", to_string(bound)}};
      return r;
    }
  }
  r.details["maximal_independent_sets"] = maximal;
  return r;
}

// ---- H_X ---------------------------------------------------------------------

struct HX {
  Mask X = 0;
  int k = 0;
  std::vector<Mask> side1, side2;  // k-subsets and (k+1)-subsets of X, by mask value
  WeightedBipartiteGraph graph;
};

inline HX build_H_X(int m, Mask X) {
  if (m < 0 || m > 30 || (X >> m) != 0) throw std::invalid_argument("X must be a subset of [m]");
  int size = popcount(X);
  if (size % 2 == 0) throw std::invalid_argument("|X| must be odd");
  HX h;
  h.X = X;
  h.k = (size - 1) / 2;
  for (Mask s = X;; s = (s - 1) & X) {
    if (popcount(s) == h.k) h.side1.push_back(s);
    if (popcount(s) == h.k + 1) h.side2.push_back(s);
    if (s == 0) break;
  }
  std::sort(h.side1.begin(), h.side1.end());
  std::sort(h.side2.begin(), h.side2.end());
  auto& g = h.graph;
  g.n1 = static_cast<int>(h.side1.size());
  g.n2 = static_cast<int>(h.side2.size());
  for (int u = 0; u < g.n1; ++u)
    for (int v = 0; v < g.n2; ++v)
      if (subset_of(h.side1[u], h.side2[v])) g.edges.emplace_back(u, v);
  g.f1.assign(g.n1, Rational(0));
  g.f2.assign(g.n2, Rational(0));
  return h;
}

// g_nu(S) = nu(S) nu(X \ S) on both sides.
inline void weight_g(HX& h, const SetMeasure& nu) {
  for (std::size_t u = 0; u < h.side1.size(); ++u)
    h.graph.f1[u] = nu.at(h.side1[u]) * nu.at(h.X & ~h.side1[u]);
  for (std::size_t v = 0; v < h.side2.size(); ++v)
    h.graph.f2[v] = nu.at(h.side2[v]) * nu.at(h.X & ~h.side2[v]);
}

// Certificate (or cut) for (H_X, g_nu), with witness sets in 1-based form.
inline PropertyReport certify_H_X(const SetMeasure& nu, Mask X) {
  HX h = build_H_X(nu.ground, X);
  weight_g(h, nu);
  PropertyReport r{"hx-certificate", Verdict::pass, nullptr, "", json::object()};
  FlowOutcome fo = find_flow_certificate(h.graph);
  r.details["X"] = set_json(X);
  if (fo.certificate && validate_certificate(h.graph, *fo.certificate)) {
    json edges = json::array();
    for (std::size_t e = 0; e < h.graph.edges.size(); ++e)
      if ((*fo.certificate)[e] != 0)
        edges.push_back({{"from", set_json(h.side1[h.graph.edges[e].first])},
                         {"to", set_json(h.side2[h.graph.edges[e].second])},
                         {"mass", to_string((*fo.certificate)[e])}});
    r.details["certificate"] = edges;
  } else {
    r.verdict = Verdict::fail;
    json u = json::array();
    for (int x : fo.violating) u.push_back(set_json(h.side1[x]));
    r.witness = {{"X", set_json(X)}, {"U", u}};
  }
  return r;
}

// ---- Griggs posets -------------------------------------------------------------

struct RankedLevelPoset {
  std::vector<int> parts;                 // |X_1|, ..., |X_n|
  std::vector<std::vector<int>> allowed;  // I_i

  void validate() const {
    if (parts.size() != allowed.size()) throw std::invalid_argument("one progression per part");
    int total = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      total += parts[i];
      const auto& I = allowed[i];
      for (int x : I)
        if (x < 0 || x > parts[i]) throw std::invalid_argument("progression out of range");
      for (std::size_t t = 2; t < I.size(); ++t)
        if (I[t] - I[t - 1] != I[1] - I[0]) throw std::invalid_argument("not an arithmetic progression");
      for (std::size_t t = 1; t < I.size(); ++t)
        if (I[t] <= I[t - 1]) throw std::invalid_argument("progression must increase");
    }
    if (total > 20) throw std::invalid_argument("ground set too large");
  }

  // Elements as 0/1 points over X = X_1 ⊔ ... ⊔ X_n.
  std::vector<Point> elements() const {
    validate();
    int total = 0;
    for (int p : parts) total += p;
    std::vector<Point> out;
    for (Mask s = 0; s < (Mask(1) << total); ++s) {
      bool ok = true;
      int off = 0;
      for (std::size_t i = 0; i < parts.size() && ok; ++i) {
        int c = popcount((s >> off) & ((Mask(1) << parts[i]) - 1));
        ok = std::find(allowed[i].begin(), allowed[i].end(), c) != allowed[i].end();
        off += parts[i];
      }
      if (!ok) continue;
      Point x(total);
      for (int b = 0; b < total; ++b) x[b] = (s >> b) & 1;
      out.push_back(std::move(x));
    }
    return out;
  }
};

// Level check: uniform-weight Hall condition between consecutive nonempty
// ranks. Secondary: exhaustive antichains for posets with at most
// exhaustive_limit elements, within the cap.
inline PropertyReport check_griggs_lym(const RankedLevelPoset& p, std::size_t cap = 1'000'000,
                                       std::size_t exhaustive_limit = 12) {
  PropertyReport r{"griggs-lym", Verdict::pass, nullptr, "", json::object()};
  std::vector<Point> elems = p.elements();
  std::map<int, std::vector<int>> levels;
  for (std::size_t i = 0; i < elems.size(); ++i) levels[rank_of(elems[i])].push_back(static_cast<int>(i));
  std::vector<int> ranks;
  for (const auto& [k, v] : levels) ranks.push_back(k);
  for (std::size_t t = 0; t + 1 < ranks.size(); ++t) {
    const auto& lo = levels[ranks[t]];
    const auto& hi = levels[ranks[t + 1]];
    WeightedBipartiteGraph g;
    g.n1 = static_cast<int>(lo.size());
    g.n2 = static_cast<int>(hi.size());
    g.f1.assign(g.n1, frac(1, g.n1));
    g.f2.assign(g.n2, frac(1, g.n2));
    for (int u = 0; u < g.n1; ++u)
      for (int v = 0; v < g.n2; ++v)
        if (leq(elems[lo[u]], elems[hi[v]])) g.edges.emplace_back(u, v);
    FlowOutcome fo = find_flow_certificate(g);
    if (!fo.certificate) {
      r.verdict = Verdict::fail;
      json u = json::array();
      for (int x : fo.violating) u.push_back(elems[lo[x]]);
      r.witness = {{"ranks", {ranks[t], ranks[t + 1]}}, {"U", u}};
      return r;
    }
  }
  r.details["elements"] = elems.size();
  if (elems.size() > exhaustive_limit) {
    r.details["exhaustive_antichains"] = false;
    r.note = "level check only";
    return r;
  }
  Poset P(elems);
  std::optional<json> bad;
  bool complete = enumerate_upsets(P, cap, [&](const Bits& up) {
    Rational s(0);
    auto mins = P.minimal(up);
    for (std::size_t i : mins) s += frac(1, static_cast<long>(levels[rank_of(elems[i])].size()));
    if (s > 1) {
      json a = json::array();
      for (std::size_t i : mins) a.push_back(elems[i]);
      bad = json{{"antichain", a}, {"sum", to_string(s)}};
      return false;
    }
    return true;
  });
  if (bad) {
    r.verdict = Verdict::fail;
    r.witness = *bad;
  } else if (!complete) {
    r.note = "antichain enumeration exceeded the cap; level check only";
  }
  r.details["exhaustive_antichains"] = complete;
  return r;
}

}  // namespace urnassoc

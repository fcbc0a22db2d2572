#pragma once

#include "bipartite.hpp"
#include "multigraph.hpp"
#include "poset.hpp"
#include "report.hpp"
#include "urn_model.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace urnassoc {

using Count = std::uint64_t;

inline Count checked_add(Count a, Count b) {
  Count c;
  if (__builtin_add_overflow(a, b, &c)) throw std::overflow_error("orientation count overflow");
  return c;
}

inline Count checked_mul(Count a, Count b) {
  Count c;
  if (__builtin_mul_overflow(a, b, &c)) throw std::overflow_error("orientation count overflow");
  return c;
}

// Either d-admissibility (occupation) or a-admissibility (ball counts).
struct AdmissibilitySpec {
  bool ball = false;
  int d = 0;
  std::vector<int> a;

  static AdmissibilitySpec occ(int d) { return {false, d, {}}; }
  static AdmissibilitySpec balls(std::vector<int> a) {
    int d = static_cast<int>(a.size());
    return {true, d, std::move(a)};
  }
  int prefix() const { return ball ? static_cast<int>(a.size()) : d; }
};

// Values of S -> M(S) for all S ⊆ ground, indexed by S compressed to ground.
struct SubsetTable {
  Mask ground = 0;
  std::vector<Count> val;

  static SubsetTable filled(Mask ground, Count c) {
    return SubsetTable{ground, std::vector<Count>(std::size_t(1) << popcount(ground), c)};
  }

  std::size_t index(Mask s) const {
    if (!subset_of(s, ground)) throw std::invalid_argument("S is not a subset of X");
    std::size_t idx = 0;
    int pos = 0;
    for (int e = 0; e < 32; ++e)
      if ((ground >> e) & 1) {
        if ((s >> e) & 1) idx |= std::size_t(1) << pos;
        ++pos;
      }
    return idx;
  }

  Mask expand(std::size_t idx) const {
    Mask s = 0;
    int pos = 0;
    for (int e = 0; e < 32; ++e)
      if ((ground >> e) & 1) {
        if ((idx >> pos) & 1) s |= Mask(1) << e;
        ++pos;
      }
    return s;
  }

  Count at(Mask s) const { return val[index(s)]; }
  Count& at(Mask s) { return val[index(s)]; }

  bool operator==(const SubsetTable&) const = default;
};

// Table of G expressed through a table of a relabeled graph: out(S) = t(map(S)).
inline SubsetTable pull(const SubsetTable& t, Mask ground, const std::vector<int>& edge_map) {
  if (map_mask(ground, edge_map) != t.ground) throw std::logic_error("X is not carried by the edge map");
  SubsetTable out = SubsetTable::filled(ground, 0);
  for (std::size_t i = 0; i < out.val.size(); ++i) out.val[i] = t.at(map_mask(out.expand(i), edge_map));
  return out;
}

inline std::vector<int> identity_map(int m) {
  std::vector<int> p(m);
  for (int i = 0; i < m; ++i) p[i] = i;
  return p;
}

// ---- brute force ---------------------------------------------------------------

inline constexpr std::uint64_t kOrientationBudget = std::uint64_t(1) << 24;

inline bool has_loop_at_last(const MultiGraph& g) {
  for (int e = 0; e < g.m(); ++e)
    if (g.is_loop(e) && g.edges[e].first == g.last()) return true;
  return false;
}

// Bit e of dir: edge e points toward its larger endpoint. Loops add one in and
// one out at their vertex regardless of the bit.
inline bool admissible(const MultiGraph& g, const AdmissibilitySpec& spec, Mask dir) {
  int d = spec.prefix();
  std::vector<int> in(d, 0), out(d, 0);
  for (int e = 0; e < g.m(); ++e) {
    auto [i, j] = g.edges[e];
    int from = ((dir >> e) & 1) ? i : j, to = ((dir >> e) & 1) ? j : i;
    if (from < d) ++out[from];
    if (to < d) ++in[to];
  }
  for (int v = 0; v < d; ++v) {
    if (spec.ball ? (in[v] != spec.a[v] || out[v] != spec.a[v]) : (in[v] < 1 || out[v] < 1)) return false;
  }
  return true;
}

inline void check_spec(const MultiGraph& g, const AdmissibilitySpec& spec) {
  g.validate();
  if (spec.prefix() < 0 || spec.prefix() > g.n - 1) throw std::invalid_argument("need 0 <= d <= n-1");
  for (int x : spec.a)
    if (x < 0) throw std::invalid_argument("negative a entry");
}

// Number of admissible orientations with Out(v_n) = S and In(v_n) = X \ S.
inline Count brute_M(const MultiGraph& g, const AdmissibilitySpec& spec, Mask S,
                     std::uint64_t budget = kOrientationBudget) {
  check_spec(g, spec);
  Mask X = g.X();
  if (!subset_of(S, X)) throw std::invalid_argument("S is not a subset of X");
  if (has_loop_at_last(g)) return 0;
  std::vector<int> free;
  Mask fixed = 0;
  for (int e = 0; e < g.m(); ++e) {
    if (g.is_loop(e)) continue;
    if ((X >> e) & 1) {
      if (!((S >> e) & 1)) fixed |= Mask(1) << e;  // into v_n, the larger endpoint
    } else {
      free.push_back(e);
    }
  }
  if ((std::uint64_t(1) << free.size()) > budget) throw BudgetExceeded("too many orientations");
  Count c = 0;
  for (std::uint64_t bits = 0; bits < (std::uint64_t(1) << free.size()); ++bits) {
    Mask dir = fixed;
    for (std::size_t t = 0; t < free.size(); ++t)
      if ((bits >> t) & 1) dir |= Mask(1) << free[t];
    if (admissible(g, spec, dir)) ++c;
  }
  return c;
}

inline Count brute_M_occ(const MultiGraph& g, int d, Mask S) { return brute_M(g, AdmissibilitySpec::occ(d), S); }
inline Count brute_M_ball(const MultiGraph& g, const std::vector<int>& a, Mask S) {
  return brute_M(g, AdmissibilitySpec::balls(a), S);
}

// All S at once, one pass over the orientations of non-loop edges.
inline SubsetTable brute_table(const MultiGraph& g, const AdmissibilitySpec& spec,
                               std::uint64_t budget = kOrientationBudget) {
  check_spec(g, spec);
  Mask X = g.X();
  SubsetTable t = SubsetTable::filled(X, 0);
  if (has_loop_at_last(g)) return t;
  std::vector<int> proper;
  for (int e = 0; e < g.m(); ++e)
    if (!g.is_loop(e)) proper.push_back(e);
  if ((std::uint64_t(1) << proper.size()) > budget) throw BudgetExceeded("too many orientations");
  for (std::uint64_t bits = 0; bits < (std::uint64_t(1) << proper.size()); ++bits) {
    Mask dir = 0;
    for (std::size_t k = 0; k < proper.size(); ++k)
      if ((bits >> k) & 1) dir |= Mask(1) << proper[k];
    if (!admissible(g, spec, dir)) continue;
    Mask S = X & ~dir;  // edges at v_n pointing away from it
    ++t.at(S);
  }
  return t;
}

// ---- recurrences -----------------------------------------------------------------

// Evaluates M through the deletion/contraction/splitting identities, choosing
// edges by fixed rules. Tables are memoized on the labeled graph and spec.
class OrientationEngine {
 public:
  SubsetTable occ(const MultiGraph& g, int d) {
    check_spec(g, AdmissibilitySpec::occ(d));
    auto key = std::make_pair(g, d);
    if (auto it = memo_occ_.find(key); it != memo_occ_.end()) return it->second;
    SubsetTable t = occ_step(g, d);
    memo_occ_.emplace(key, t);
    return t;
  }

  SubsetTable ball(const MultiGraph& g, const std::vector<int>& a) {
    check_spec(g, AdmissibilitySpec::balls(a));
    auto key = std::make_pair(g, a);
    if (auto it = memo_ball_.find(key); it != memo_ball_.end()) return it->second;
    SubsetTable t = ball_step(g, a);
    memo_ball_.emplace(key, t);
    return t;
  }

  SubsetTable table(const MultiGraph& g, const AdmissibilitySpec& spec) {
    return spec.ball ? ball(g, spec.a) : occ(g, spec.d);
  }

  void clear() {
    memo_occ_.clear();
    memo_ball_.clear();
  }

 private:
  // Relabels vertices by perm and moves the listed edges to the end, in order.
  struct Relabeled {
    MultiGraph graph;
    std::vector<int> edge_perm;
  };

  static Relabeled relabel(const MultiGraph& g, const std::vector<int>& vperm, const std::vector<int>& to_end) {
    int m = g.m();
    std::vector<int> perm(m, -1);
    int slot = 0;
    for (int e = 0; e < m; ++e)
      if (std::find(to_end.begin(), to_end.end(), e) == to_end.end()) perm[e] = slot++;
    for (int e : to_end) perm[e] = slot++;
    return {permute_edges(permute_vertices(g, vperm), perm), perm};
  }

  static MultiGraph drop_last_edges(MultiGraph g, int k) {
    g.edges.resize(g.edges.size() - k);
    return g;
  }

  static SubsetTable add(SubsetTable a, const SubsetTable& b) {
    if (a.ground != b.ground) throw std::logic_error("table grounds differ");
    for (std::size_t i = 0; i < a.val.size(); ++i) a.val[i] = checked_add(a.val[i], b.val[i]);
    return a;
  }

  static SubsetTable scale(SubsetTable a, Count c) {
    for (auto& x : a.val) x = checked_mul(x, c);
    return a;
  }

  // Table of the relabeled graph r, expressed on the original graph g.
  static SubsetTable back(const MultiGraph& g, const Relabeled& r, const SubsetTable& t) {
    return pull(t, g.X(), r.edge_perm);
  }

  // The smaller graph keeps the edge indices 0..m'-1 of r.graph.
  static SubsetTable lift(const MultiGraph& bigger, const SubsetTable& t) {
    return pull(t, bigger.X(), identity_map(bigger.m()));
  }

  SubsetTable occ_step(const MultiGraph& g, int d) {
    int n = g.n, m = g.m(), last = g.last();
    Mask X = g.X();
    if (has_loop_at_last(g)) return SubsetTable::filled(X, 0);
    // Case 1: a loop elsewhere.
    for (int e = 0; e < m; ++e) {
      if (!g.is_loop(e)) continue;
      int v = g.edges[e].first;
      bool prefix = v < d;
      auto r = relabel(g, block_permutation(n, d, {{v, prefix ? d - 1 : d}}), {e});
      MultiGraph h = drop_last_edges(r.graph, 1);
      return back(g, r, restrict_ground(occ(h, prefix ? d - 1 : d), r.graph));
    }
    // Case 2: both endpoints in the prefix.
    for (int e = 0; e < m; ++e) {
      auto [i, j] = g.edges[e];
      if (j >= d) continue;
      auto r = relabel(g, block_permutation(n, d, {{i, d - 2}, {j, d - 1}}), {e});
      if (r.graph.degree(d - 2) < 2 || r.graph.degree(d - 1) < 2) return SubsetTable::filled(X, 0);
      // Edges parallel to e become loops of G/e, which count once but stand
      // for two orientations of G.
      int parallel = 0;
      for (int f = 0; f < m; ++f) parallel += f != e && g.edges[f] == g.edges[e];
      MultiGraph del = drop_last_edges(r.graph, 1);
      Contraction con = contract_edge(r.graph, m - 1);
      SubsetTable t = add(restrict_ground(occ(del, d), r.graph),
                          scale(restrict_ground(occ(con.graph, d - 1), r.graph), Count(1) << parallel));
      return back(g, r, t);
    }
    // Case 3: one endpoint in the prefix, the other in the middle.
    for (int e = 0; e < m; ++e) {
      auto [i, j] = g.edges[e];
      if (!(i < d && j >= d && j < last)) continue;
      auto r = relabel(g, block_permutation(n, d, {{i, d - 1}, {j, d}}), {e});
      if (r.graph.degree(d - 1) < 2) return SubsetTable::filled(X, 0);
      MultiGraph del = drop_last_edges(r.graph, 1);
      SubsetTable t = add(restrict_ground(occ(del, d), r.graph), restrict_ground(occ(del, d - 1), r.graph));
      return back(g, r, t);
    }
    // Case 4: both endpoints in the middle.
    for (int e = 0; e < m; ++e) {
      auto [i, j] = g.edges[e];
      if (!(i >= d && j < last)) continue;
      auto r = relabel(g, block_permutation(n, d, {{i, d}, {j, d + 1}}), {e});
      MultiGraph del = drop_last_edges(r.graph, 1);
      return back(g, r, scale(restrict_ground(occ(del, d), r.graph), 2));
    }
    // Case 5: every edge is at v_n.
    SubsetTable t = SubsetTable::filled(X, 0);
    for (std::size_t idx = 0; idx < t.val.size(); ++idx) {
      Mask S = t.expand(idx);
      bool ok = true;
      for (int v = 0; v < d && ok; ++v) {
        Mask part = 0;
        for (int e = 0; e < m; ++e)
          if (g.edges[e].first == v) part |= Mask(1) << e;
        int c = popcount(S & part);
        ok = 0 < c && c < popcount(part);
      }
      t.val[idx] = ok ? 1 : 0;
    }
    return t;
  }

  SubsetTable ball_step(const MultiGraph& g, const std::vector<int>& a) {
    int n = g.n, m = g.m(), last = g.last();
    int d = static_cast<int>(a.size());
    Mask X = g.X();
    for (int v = 0; v < d; ++v)
      if (g.degree(v) != 2 * a[v]) return SubsetTable::filled(X, 0);
    if (d == 0) {
      if (has_loop_at_last(g)) return SubsetTable::filled(X, 0);
      int free = 0;
      for (int e = 0; e < m; ++e) free += !g.is_loop(e) && !((X >> e) & 1);
      return SubsetTable::filled(X, Count(1) << free);
    }
    int v = d - 1;
    std::vector<int> head(a.begin(), a.end() - 1);
    // Loop at v_d.
    for (int e : g.incident(v)) {
      if (!g.is_loop(e)) continue;
      auto r = relabel(g, identity_map(n), {e});
      std::vector<int> a2 = a;
      --a2[v];
      return back(g, r, restrict_ground(ball(drop_last_edges(r.graph, 1), a2), r.graph));
    }
    // Vertex splitting.
    if (a[v] != 1) {
      std::vector<int> a2 = head;
      a2.insert(a2.end(), a[v], 1);
      SubsetTable sum = SubsetTable::filled(X, 0);
      for (const auto& pi : perfect_matchings(g.incident(v))) {
        MultiGraph h = split_vertex(g, v, pi);
        sum = add(sum, pull(ball(h, a2), X, identity_map(m)));
      }
      Count f = 1;
      for (int k = 2; k <= a[v]; ++k) f *= k;
      for (auto& x : sum.val) {
        if (x % f != 0) throw std::logic_error("vertex splitting sum not divisible by a_d!");
        x /= f;
      }
      return sum;
    }
    // a_d = 1: two edges at v_d.
    std::vector<int> ys = g.incident(v);
    int e1 = ys[0], e2 = ys[1];
    int w1 = g.other_end(e1, v), w2 = g.other_end(e2, v);
    if (w1 != w2) {
      // Type 1: contract f, chosen so that v_n is not an endpoint of f.
      int e = e1, f = e2;
      if (w2 == last) std::swap(e, f);
      auto r = relabel(g, identity_map(n), {e, f});
      Contraction con = contract_edge(r.graph, m - 1);
      return back(g, r, restrict_ground(ball(con.graph, head), r.graph));
    }
    int w = w1;
    if (w < v) {
      // Type 2: common neighbour in the prefix, moved to v_{d-1}.
      std::vector<int> vperm = block_permutation(n, d, {{w, d - 2}, {v, d - 1}});
      auto r = relabel(g, vperm, {e1, e2});
      std::vector<int> a2(d, 0);
      for (int x = 0; x < d; ++x) a2[vperm[x]] = a[x];
      a2.pop_back();
      --a2[d - 2];
      MultiGraph h = drop_last_edges(r.graph, 2);
      return back(g, r, scale(restrict_ground(ball(h, a2), r.graph), 2));
    }
    if (w < last) {
      // Type 3: common neighbour in the middle, moved to v_{d+1}.
      auto r = relabel(g, block_permutation(n, d, {{w, d}}), {e1, e2});
      MultiGraph h = drop_last_edges(r.graph, 2);
      return back(g, r, scale(restrict_ground(ball(h, head), r.graph), 2));
    }
    // Type 4: both edges go to v_n.
    auto r = relabel(g, identity_map(n), {e1, e2});
    MultiGraph h = drop_last_edges(r.graph, 2);
    SubsetTable inner = ball(h, head);
    Mask pair = (Mask(1) << (m - 2)) | (Mask(1) << (m - 1));
    SubsetTable t = SubsetTable::filled(r.graph.X(), 0);
    for (std::size_t idx = 0; idx < t.val.size(); ++idx) {
      Mask S = t.expand(idx);
      if (popcount(S & pair) == 1) t.val[idx] = inner.at(S & ~pair);
    }
    return back(g, r, t);
  }

  // A table of a graph whose edges are a prefix of `bigger`'s edges (or a
  // contraction keeping those indices), re-expressed on X(bigger). The edges
  // dropped are never in X here, so X is unchanged.
  static SubsetTable restrict_ground(const SubsetTable& t, const MultiGraph& bigger) {
    if (t.ground != bigger.X()) throw std::logic_error("X changed across a recurrence step");
    return t;
  }

  std::map<std::pair<MultiGraph, int>, SubsetTable> memo_occ_;
  std::map<std::pair<MultiGraph, std::vector<int>>, SubsetTable> memo_ball_;
};

inline Count rec_M_occ(const MultiGraph& g, int d, Mask S) {
  OrientationEngine eng;
  return eng.occ(g, d).at(S);
}

inline Count rec_M_ball(const MultiGraph& g, const std::vector<int>& a, Mask S) {
  OrientationEngine eng;
  return eng.ball(g, a).at(S);
}

// ---- NMP of orientation weights ----------------------------------------------------

inline PropertyReport verify_orientation_nmp(const MultiGraph& g, const AdmissibilitySpec& spec,
                                             OrientationEngine* engine = nullptr) {
  Mask X = g.X();
  if (popcount(X) % 2 == 0) throw std::invalid_argument("|X(G)| must be odd");
  OrientationEngine local;
  OrientationEngine& eng = engine ? *engine : local;
  SubsetTable t = eng.table(g, spec);
  HX h = build_H_X(g.m(), X);
  for (std::size_t u = 0; u < h.side1.size(); ++u) h.graph.f1[u] = Rational(static_cast<unsigned long>(t.at(h.side1[u])));
  for (std::size_t v = 0; v < h.side2.size(); ++v) h.graph.f2[v] = Rational(static_cast<unsigned long>(t.at(h.side2[v])));
  PropertyReport r{"orientation-nmp", Verdict::pass, nullptr, "", json::object()};
  if (!h.graph.balanced()) {
    r.verdict = Verdict::fail;
    r.witness = {{"reason", "unbalanced weights"},
                 {"level_k", to_string(h.graph.total1())},
                 {"level_k+1", to_string(h.graph.total2())}};
    return r;
  }
  FlowOutcome fo = find_flow_certificate(h.graph);
  if (!fo.certificate || !validate_certificate(h.graph, *fo.certificate)) {
    r.verdict = Verdict::fail;
    json u = json::array();
    for (int x : fo.violating) u.push_back(set_json(h.side1[x]));
    r.witness = {{"U", u}};
  }
  r.details["total_weight"] = to_string(h.graph.total1());
  return r;
}

// ---- decomposition into orientation counts ----------------------------------------

// Law of Z given the conditioning event of spec.
inline SetMeasure conditioned_ball_set(const UrnModel& u, const AdmissibilitySpec& spec) {
  return spec.ball ? ball_set_measure_ball(u, spec.a) : ball_set_measure_occ(u, spec.d);
}

inline Rational conditioning_probability(const UrnModel& u, const AdmissibilitySpec& spec) {
  return spec.ball ? prob_ball_event(u, spec.a) : prob_occ_event(u, spec.d);
}

// Checks nu(S) nu(X \ S) = c * sum_G p_G M_G(S) for all S ⊆ X with one
// constant c = P(Q)^{-2}. G ranges over multigraphs on the urns whose edge i
// joins the urns of ball i in two independent samples, with X(G) = X.
inline PropertyReport pG_decomposition_check(const UrnModel& u, const AdmissibilitySpec& spec, Mask X) {
  u.validate();
  int m = u.balls, n = u.urns;
  if (m > 30 || (m < 30 && (X >> m) != 0)) throw std::invalid_argument("X must be a subset of the balls");
  if (spec.prefix() > n - 1) throw std::invalid_argument("need d <= n-1");
  SetMeasure nu = conditioned_ball_set(u, spec);
  Rational q = conditioning_probability(u, spec);
  int last = n - 1;
  std::vector<std::vector<std::pair<int, int>>> choices(m);
  for (int i = 0; i < m; ++i) {
    if ((X >> i) & 1) {
      for (int c = 0; c <= last; ++c) choices[i].emplace_back(c, last);
    } else {
      for (int c = 0; c < last; ++c)
        for (int c2 = c; c2 < last; ++c2) choices[i].emplace_back(c, c2);
    }
  }
  std::vector<Rational> rhs(std::size_t(1) << popcount(X), Rational(0));
  SubsetTable shape = SubsetTable::filled(X, 0);
  std::size_t graphs = 0;
  std::vector<std::size_t> pick(m, 0);
  // With one urn a ball outside X has no edge at all: no graphs.
  bool any = std::none_of(choices.begin(), choices.end(), [](const auto& c) { return c.empty(); });
  while (any) {
    MultiGraph g{n, {}};
    Rational pg(1);
    for (int i = 0; i < m; ++i) {
      auto [c, c2] = choices[i][pick[i]];
      g.edges.emplace_back(c, c2);
      pg *= u.probs[i][c] * u.probs[i][c2];
    }
    if (pg != 0) {
      ++graphs;
      SubsetTable t = brute_table(g, spec);
      for (std::size_t idx = 0; idx < rhs.size(); ++idx)
        if (t.val[idx]) rhs[idx] += pg * Rational(static_cast<unsigned long>(t.val[idx]));
    }
    int i = 0;
    while (i < m && ++pick[i] == choices[i].size()) pick[i++] = 0;
    if (i == m) break;
  }
  PropertyReport r{"pg-decomposition", Verdict::pass, nullptr, "", json::object()};
  Rational expected = 1 / (q * q);
  std::optional<Rational> ratio;
  json rows = json::array();
  for (std::size_t idx = 0; idx < rhs.size(); ++idx) {
    Mask S = shape.expand(idx);
    Rational lhs = nu.at(S) * nu.at(X & ~S);
    rows.push_back({{"S", set_json(S)}, {"lhs", to_string(lhs)}, {"rhs", to_string(rhs[idx])}});
    if (rhs[idx] == 0) {
      if (lhs != 0 && r.verdict == Verdict::pass) {
        r.verdict = Verdict::fail;
        r.witness = {{"S", set_json(S)}, {"reason", "zero sum with nonzero lhs"}};
      }
      continue;
    }
    Rational here = lhs / rhs[idx];
    if (!ratio) ratio = here;
    if (here != *ratio && r.verdict == Verdict::pass) {
      r.verdict = Verdict::fail;
      r.witness = {{"S", set_json(S)}, {"ratio", to_string(here)}, {"first_ratio", to_string(*ratio)}};
    }
  }
  r.details["X"] = set_json(X);
  r.details["graphs"] = graphs;
  r.details["P(Q)^-2"] = to_string(expected);
  r.details["rows"] = rows;
  if (!ratio) {
    // Every sum vanishes; so does every product (else the check already failed).
    if (r.verdict == Verdict::pass) r.note = "both sides vanish for every S; no ratio to compare";
    return r;
  }
  if (r.verdict == Verdict::pass && *ratio != expected) {
    r.verdict = Verdict::fail;
    r.witness = {{"ratio", to_string(*ratio)}, {"expected", to_string(expected)}};
  }
  r.details["ratio"] = to_string(*ratio);
  return r;
}

// ---- reduction of the level-k inequality to H_X blocks ------------------------------

// All up-sets of 2^[m], each as the list of its members.
template <typename Fn>
void for_each_boolean_upset(int m, Fn&& fn) {
  std::vector<Point> pts;
  for (Mask s = 0; s < (Mask(1) << m); ++s) {
    Point p(m);
    for (int i = 0; i < m; ++i) p[i] = (s >> i) & 1;
    pts.push_back(p);
  }
  Poset P(pts);
  enumerate_upsets(P, std::numeric_limits<std::size_t>::max(), [&](const Bits& b) {
    std::vector<char> member(std::size_t(1) << m, 0);
    for (std::size_t i = b.find_first(); i != Bits::npos; i = b.find_next(i)) member[i] = 1;
    fn(member);
    return true;
  });
}

// For every up-set A, checks that
//   nu(A, k+1) nu(k) - nu(A, k) nu(k+1)
// equals the sum over (X, Y) blocks, Y = S ∩ T, X = S ∪ T, and that each block
// equals the H_{X \ Y} certificate sum for the weight S' -> nu(S' ∪ Y) nu(X \ S'),
// hence is nonnegative when the certificate exists.
inline PropertyReport st_xy_reduction_check(const SetMeasure& nu, int k) {
  int m = nu.ground;
  if (m < 1 || m > 5) throw std::invalid_argument("st_xy reduction is limited to 1 <= m <= 5");
  if (k < 0 || k >= m) throw std::invalid_argument("need 0 <= k < m");
  struct Block {
    Mask X, Y;
    HX h;
    std::optional<FlowCertificate> cert;
    std::optional<Rational> min_value;
  };
  std::vector<Block> blocks;
  for (Mask X = 0; X < (Mask(1) << m); ++X)
    for (Mask Y = X;; Y = (Y - 1) & X) {
      int x = popcount(X), y = popcount(Y);
      // |S| = k, |T| = k + 1 forces |X| + |Y| = 2k + 1.
      if (x + y == 2 * k + 1) {
        Mask Xp = X & ~Y;
        HX h = build_H_X(m, Xp);
        for (std::size_t a = 0; a < h.side1.size(); ++a) h.graph.f1[a] = nu.at(h.side1[a] | Y) * nu.at((Xp & ~h.side1[a]) | Y);
        for (std::size_t b = 0; b < h.side2.size(); ++b) h.graph.f2[b] = nu.at(h.side2[b] | Y) * nu.at((Xp & ~h.side2[b]) | Y);
        FlowOutcome fo = find_flow_certificate(h.graph);
        blocks.push_back({X, Y, std::move(h), fo.certificate, std::nullopt});
      }
      if (Y == 0) break;
    }
  PropertyReport r{"st-xy-reduction", Verdict::pass, nullptr, "", json::object()};
  auto fail = [&](json w) {
    if (r.verdict == Verdict::pass) {
      r.verdict = Verdict::fail;
      r.witness = std::move(w);
    }
  };
  for (const auto& b : blocks)
    if (!b.cert) fail({{"X", set_json(b.X)}, {"Y", set_json(b.Y)}, {"reason", "no certificate"}});
  Rational lk = nu.level_mass(k), lk1 = nu.level_mass(k + 1);
  std::size_t upsets = 0;
  for_each_boolean_upset(m, [&](const std::vector<char>& A) {
    ++upsets;
    Rational ak(0), ak1(0);
    for (Mask s = 0; s < A.size(); ++s)
      if (A[s]) {
        if (popcount(s) == k) ak += nu.at(s);
        if (popcount(s) == k + 1) ak1 += nu.at(s);
      }
    Rational global = ak1 * lk - ak * lk1;
    Rational pairs(0), sum(0);
    for (Mask S = 0; S < A.size(); ++S) {
      if (popcount(S) != k) continue;
      for (Mask T = 0; T < A.size(); ++T)
        if (popcount(T) == k + 1) pairs += (Rational(A[T]) - Rational(A[S])) * nu.at(S) * nu.at(T);
    }
    for (auto& b : blocks) {
      Rational direct(0);
      for (std::size_t a = 0; a < b.h.side1.size(); ++a) {
        Mask S = b.h.side1[a] | b.Y, T = (b.X & ~b.h.side1[a]);
        direct += (Rational(A[T]) - Rational(A[S])) * b.h.graph.f1[a];
      }
      if (b.cert) {
        Rational via(0);
        for (std::size_t e = 0; e < b.h.graph.edges.size(); ++e) {
          auto [a, c] = b.h.graph.edges[e];
          via += (*b.cert)[e] * (Rational(A[b.h.side2[c] | b.Y]) - Rational(A[b.h.side1[a] | b.Y]));
        }
        if (via != direct) fail({{"X", set_json(b.X)}, {"Y", set_json(b.Y)}, {"reason", "certificate sum differs from block"}});
      }
      if (direct < 0) fail({{"X", set_json(b.X)}, {"Y", set_json(b.Y)}, {"block", to_string(direct)}});
      if (!b.min_value || direct < *b.min_value) b.min_value = direct;
      sum += direct;
    }
    if (global != pairs || pairs != sum) fail({{"reason", "block sum differs from global difference"},
                                               {"global", to_string(global)}, {"blocks", to_string(sum)}});
  });
  json per = json::array();
  for (const auto& b : blocks)
    per.push_back({{"X", set_json(b.X)}, {"Y", set_json(b.Y)}, {"certified", b.cert.has_value()},
                   {"min_over_upsets", b.min_value ? to_string(*b.min_value) : "none"}});
  r.details["k"] = k;
  r.details["upsets"] = upsets;
  r.details["blocks"] = per;
  return r;
}

}  // namespace urnassoc

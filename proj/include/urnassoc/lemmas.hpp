#pragma once

#include "orientations.hpp"
#include "random.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace urnassoc {

// Seeded identity checks for every step of the two recurrences. Both sides of
// each identity are computed by brute force, so a violation points at the
// identity itself, not at the engine.

struct LemmaTally {
  std::string name;
  int instances = 0;
  int violations = 0;
  json first_violation;  // null when none

  json to_json() const {
    json j{{"identity", name}, {"instances", instances}, {"violations", violations}};
    if (!first_violation.is_null()) j["first_violation"] = first_violation;
    return j;
  }
};

namespace detail {

inline std::vector<Mask> subsets_of(Mask X) {
  std::vector<Mask> out;
  for (Mask s = X;; s = (s - 1) & X) {
    out.push_back(s);
    if (s == 0) break;
  }
  return out;
}

inline MultiGraph plus_edge(MultiGraph g, int i, int j) {
  g.edges.push_back(normalized(i, j));
  return g;
}

// Random edges avoiding `avoid` and loops at the last vertex.
inline MultiGraph random_base(Rng& rng, int n, int m, int avoid) {
  std::uniform_int_distribution<int> v(0, n - 1);
  MultiGraph g{n, {}};
  while (g.m() < m) {
    int i = v(rng), j = v(rng);
    if (i == avoid || j == avoid || (i == n - 1 && j == n - 1)) continue;
    g.edges.push_back(normalized(i, j));
  }
  return g;
}

// Adds an edge from every odd-degree prefix vertex (other than `skip`) to a
// random vertex outside the prefix, so a_i = deg/2 is a valid ball spec.
inline void make_prefix_even(Rng& rng, MultiGraph& g, int d, int skip) {
  std::uniform_int_distribution<int> out(d, g.n - 1);
  for (int v = 0; v < d; ++v)
    if (v != skip && g.degree(v) % 2) g.edges.push_back(normalized(v, out(rng)));
}

inline std::vector<int> half_degrees(const MultiGraph& g, int d) {
  std::vector<int> a;
  for (int v = 0; v < d; ++v) a.push_back(g.degree(v) / 2);
  return a;
}

class Tallies {
 public:
  explicit Tallies(std::vector<std::string> names) {
    for (auto& s : names) t_.push_back(LemmaTally{std::move(s), 0, 0, nullptr});
  }
  void record(int k, bool ok, const MultiGraph& g, const AdmissibilitySpec& spec, Mask S) {
    ++t_[k].instances;
    if (ok) return;
    if (t_[k].violations++ == 0) {
      json jspec = spec.ball ? json{{"a", spec.a}} : json{{"d", spec.d}};
      t_[k].first_violation = {{"graph", json{{"vertices", g.n}, {"edges", g.edges}}}, {"spec", jspec}, {"S", set_json(S)}};
    }
  }
  int min_instances() const {
    int lo = t_.front().instances;
    for (const auto& x : t_) lo = std::min(lo, x.instances);
    return lo;
  }
  std::vector<LemmaTally> take() { return std::move(t_); }

 private:
  std::vector<LemmaTally> t_;
};

}  // namespace detail

inline const std::vector<std::string>& occupation_identity_names() {
  static const std::vector<std::string> names = {
      "occ: loop at v_d",
      "occ: loop at a middle vertex",
      "occ: loop at v_n",
      "occ: edge v_{d-1}v_d deletion-contraction (2^l for l parallel copies)",
      "occ: edge v_{d-1}v_d with an endpoint of degree 1 (zero)",
      "occ: edge v_d v_{d+1}, v_{d+1} in the middle",
      "occ: edge v_d v_{d+1} with deg(v_d) = 1 (zero)",
      "occ: edge inside the middle (factor 2)",
  };
  return names;
}

inline const std::vector<std::string>& ball_identity_names() {
  static const std::vector<std::string> names = {
      "ball: loop at v_d",
      "ball: perfect-matching vertex split (exact division by a_d!)",
      "ball: a_d = 1, distinct neighbours (contraction)",
      "ball: a_d = 1, parallel pair into the prefix",
      "ball: a_d = 1, parallel pair into the middle",
      "ball: a_d = 1, parallel pair into v_n",
  };
  return names;
}

struct OccupationIdentityResult {
  std::vector<LemmaTally> tallies;
  // Instances of the deletion-contraction step where e has parallel copies,
  // and how many of them violate the identity without the 2^l factor.
  int parallel_instances = 0;
  int verbatim_violations = 0;
};

// Runs until every identity has been checked on at least min_instances
// instances; one instance covers every S ⊆ X.
inline OccupationIdentityResult occupation_identity_sweep(std::uint64_t seed, int min_instances,
                                                          int max_rounds = 100000) {
  Rng rng(seed);
  detail::Tallies tally(occupation_identity_names());
  OccupationIdentityResult res;
  auto occ = [](const MultiGraph& g, int d, Mask S) { return brute_M(g, AdmissibilitySpec::occ(d), S); };
  for (int round = 0; round < max_rounds && tally.min_instances() < min_instances; ++round) {
    int n = 3 + round % 3, m = 1 + round % 5;
    MultiGraph base = detail::random_base(rng, n, m, -1);
    int last = n - 1;
    for (int d = 1; d < n; ++d) {
      auto spec = AdmissibilitySpec::occ(d);
      auto check_all = [&](int k, const MultiGraph& g, auto&& want) {
        bool ok = true;
        Mask bad = 0;
        for (Mask S : detail::subsets_of(g.X()))
          if (occ(g, d, S) != want(S) && ok) {
            ok = false;
            bad = S;
          }
        tally.record(k, ok, g, spec, bad);
      };
      MultiGraph g0 = detail::plus_edge(base, d - 1, d - 1);
      check_all(0, g0, [&](Mask S) { return occ(base, d - 1, S); });
      if (d < last) {
        MultiGraph g1 = detail::plus_edge(base, d, d);
        check_all(1, g1, [&](Mask S) { return occ(base, d, S); });
      }
      MultiGraph g2 = detail::plus_edge(base, last, last);
      check_all(2, g2, [&](Mask) { return Count(0); });
      if (d >= 2) {
        MultiGraph g3 = detail::plus_edge(base, d - 2, d - 1);
        Contraction con = contract_edge(g3, g3.m() - 1);
        bool deg = g3.degree(d - 2) >= 2 && g3.degree(d - 1) >= 2;
        Count l = std::count(base.edges.begin(), base.edges.end(), std::make_pair(d - 2, d - 1));
        check_all(deg ? 3 : 4, g3, [&](Mask S) {
          return deg ? occ(base, d, S) + (Count(1) << l) * occ(con.graph, d - 1, S) : Count(0);
        });
        if (deg && l > 0) {
          ++res.parallel_instances;
          bool differs = false;
          for (Mask S : detail::subsets_of(g3.X()))
            differs = differs || occ(g3, d, S) != occ(base, d, S) + occ(con.graph, d - 1, S);
          res.verbatim_violations += differs;
        }
      }
      if (d < last) {
        MultiGraph g4 = detail::plus_edge(base, d - 1, d);
        bool deg = g4.degree(d - 1) >= 2;
        check_all(deg ? 5 : 6, g4, [&](Mask S) { return deg ? occ(base, d, S) + occ(base, d - 1, S) : Count(0); });
      }
      if (d + 1 < last) {
        std::uniform_int_distribution<int> middle(d, last - 1);
        int i = middle(rng), j = middle(rng);
        if (i != j) check_all(7, detail::plus_edge(base, i, j), [&](Mask S) { return 2 * occ(base, d, S); });
      }
    }
  }
  res.tallies = tally.take();
  return res;
}

inline std::vector<LemmaTally> ball_identity_sweep(std::uint64_t seed, int min_instances, int max_rounds = 100000) {
  Rng rng(seed);
  detail::Tallies tally(ball_identity_names());
  auto bal = [](const MultiGraph& g, const std::vector<int>& a, Mask S) {
    return brute_M(g, AdmissibilitySpec::balls(a), S);
  };
  for (int round = 0; round < max_rounds && tally.min_instances() < min_instances; ++round) {
    int n = 3 + round % 3, m = 1 + round % 4, kind = round % 6;
    int last = n - 1;
    std::uniform_int_distribution<int> pick_d(1, n - 1);
    int d = pick_d(rng), v = d - 1;
    std::uniform_int_distribution<int> any(0, n - 1), outside(d, n - 1), mid(d, std::max(d, last - 1));
    MultiGraph g;
    if (kind <= 1) {
      g = detail::random_base(rng, n, m, -1);
      for (int e = g.m() - 1; e >= 0; --e)
        if (g.is_loop(e) && g.edges[e].first == v) g.edges.erase(g.edges.begin() + e);
      detail::make_prefix_even(rng, g, d, -1);
      if (kind == 0) {
        g = detail::plus_edge(g, v, v);
      } else {
        while (g.degree(v) < 4) {
          g = detail::plus_edge(g, v, outside(rng));
          g = detail::plus_edge(g, v, outside(rng));
        }
      }
    } else {
      g = detail::random_base(rng, n, m, v);
      int w1, w2;
      if (kind == 2) {
        do {
          w1 = any(rng);
          w2 = any(rng);
        } while (w1 == v || w2 == v || w1 == w2);
      } else if (kind == 3) {
        if (v == 0) continue;
        w1 = w2 = std::uniform_int_distribution<int>(0, v - 1)(rng);
      } else if (kind == 4) {
        if (d >= last) continue;
        w1 = w2 = mid(rng);
      } else {
        w1 = w2 = last;
      }
      g = detail::plus_edge(g, v, w1);
      g = detail::plus_edge(g, v, w2);
      detail::make_prefix_even(rng, g, d, v);
    }
    std::vector<int> a = detail::half_degrees(g, d);
    auto spec = AdmissibilitySpec::balls(a);
    std::vector<int> head(a.begin(), a.end() - 1);
    std::vector<int> ys = g.incident(v);
    bool ok = true;
    Mask bad = 0;
    auto expect = [&](Mask S, Count want) {
      if (ok && bal(g, a, S) != want) {
        ok = false;
        bad = S;
      }
    };
    if (kind == 0) {
      int e = *std::find_if(ys.begin(), ys.end(), [&](int x) { return g.is_loop(x); });
      EdgeRemoval r = delete_edge(g, e);
      std::vector<int> a2 = a;
      --a2[v];
      for (Mask S : detail::subsets_of(g.X())) expect(S, bal(r.graph, a2, map_mask(S, r.edge_map)));
    } else if (kind == 1) {
      std::vector<int> a2 = head;
      a2.insert(a2.end(), a[v], 1);
      Count f = 1;
      for (int k = 2; k <= a[v]; ++k) f *= k;
      for (Mask S : detail::subsets_of(g.X())) {
        Count sum = 0;
        for (const auto& pi : perfect_matchings(ys)) sum += bal(split_vertex(g, v, pi), a2, S);
        if (sum % f) {
          ok = false;
          bad = S;
        }
        expect(S, sum / f);
      }
    } else if (kind == 2) {
      int e1 = ys[0], e2 = ys[1];
      int f = g.other_end(e2, v) == last ? e1 : e2;
      Contraction con = contract_edge(g, f);
      for (Mask S : detail::subsets_of(g.X())) expect(S, bal(con.graph, head, map_mask(S, con.edge_map)));
    } else {
      int e1 = ys[0], e2 = ys[1], w = g.other_end(e1, v);
      EdgeRemoval r1 = delete_edge(g, e2);
      EdgeRemoval r2 = delete_edge(r1.graph, r1.edge_map[e1]);
      auto carry = [&](Mask S) { return map_mask(map_mask(S, r1.edge_map), r2.edge_map); };
      Mask pair = (Mask(1) << e1) | (Mask(1) << e2);
      if (kind == 3) {
        std::vector<int> a2 = head;
        --a2[w];
        for (Mask S : detail::subsets_of(g.X())) expect(S, 2 * bal(r2.graph, a2, carry(S)));
      } else if (kind == 4) {
        for (Mask S : detail::subsets_of(g.X())) expect(S, 2 * bal(r2.graph, head, carry(S)));
      } else {
        for (Mask S : detail::subsets_of(g.X()))
          expect(S, popcount(S & pair) == 1 ? bal(r2.graph, head, carry(S & ~pair)) : 0);
      }
    }
    tally.record(kind, ok, g, spec, bad);
  }
  return tally.take();
}

}  // namespace urnassoc

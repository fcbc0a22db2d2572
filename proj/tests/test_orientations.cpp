#include "oracles.hpp"

#include <urnassoc/orientations.hpp>
#include <urnassoc/random.hpp>

#include <gtest/gtest.h>

using namespace urnassoc;

namespace {

using Edges = std::vector<std::pair<int, int>>;

Count oracle_M(const MultiGraph& g, const AdmissibilitySpec& spec, Mask S) {
  return oracle::orientations(g.n, g.edges, spec.ball, spec.prefix(), spec.a, S);
}

Count M(const MultiGraph& g, const AdmissibilitySpec& spec, Mask S) { return brute_M(g, spec, S); }

std::vector<Mask> subsets(Mask X) {
  std::vector<Mask> out;
  for (Mask s = X;; s = (s - 1) & X) {
    out.push_back(s);
    if (s == 0) break;
  }
  return out;
}

MultiGraph random_graph(Rng& rng, int n, int m) {
  std::uniform_int_distribution<int> v(0, n - 1);
  MultiGraph g{n, {}};
  for (int e = 0; e < m; ++e) g.edges.push_back(normalized(v(rng), v(rng)));
  return g;
}

// Degree-matching a for the first d vertices, if every such degree is even.
std::optional<std::vector<int>> matching_a(const MultiGraph& g, int d) {
  std::vector<int> a;
  for (int v = 0; v < d; ++v) {
    if (g.degree(v) % 2) return std::nullopt;
    a.push_back(g.degree(v) / 2);
  }
  return a;
}

// Appends edge e and returns the graph; its index is m.
MultiGraph with_edge(MultiGraph g, int i, int j) {
  g.edges.push_back(normalized(i, j));
  return g;
}

}  // namespace

TEST(Brute, Examples) {
  MultiGraph triple{2, {{0, 1}, {0, 1}, {0, 1}}};
  EXPECT_EQ(brute_M_occ(triple, 1, 0b001), 1u);
  EXPECT_EQ(brute_M_occ(triple, 1, 0b000), 0u);
  MultiGraph dbl{2, {{0, 1}, {0, 1}}};
  EXPECT_EQ(brute_M_ball(dbl, {1}, 0b01), 1u);
  for (Mask S : subsets(triple.X())) EXPECT_EQ(brute_M_ball(triple, {1}, S), 0u);
  MultiGraph loop_last{3, {{0, 2}, {2, 2}, {1, 2}}};
  for (Mask S : subsets(loop_last.X())) {
    EXPECT_EQ(brute_M_occ(loop_last, 1, S), 0u);
    EXPECT_EQ(rec_M_occ(loop_last, 1, S), 0u);
  }
  MultiGraph g{4, {{0, 1}, {1, 3}, {0, 3}, {2, 2}, {1, 2}}};
  for (Mask S : subsets(g.X())) EXPECT_EQ(brute_M_ball(g, {}, S), brute_M_occ(g, 0, S));
  EXPECT_THROW(brute_M_occ(triple, 1, 0b1000), std::invalid_argument);
}

TEST(Brute, MatchesOracleAndTable) {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 2 + trial % 4, m = 1 + trial % 6;
    MultiGraph g = random_graph(rng, n, m);
    for (int d = 0; d < n; ++d) {
      auto spec = AdmissibilitySpec::occ(d);
      SubsetTable t = brute_table(g, spec);
      for (Mask S : subsets(g.X())) {
        EXPECT_EQ(M(g, spec, S), oracle_M(g, spec, S));
        EXPECT_EQ(t.at(S), M(g, spec, S));
      }
      if (auto a = matching_a(g, d)) {
        auto bs = AdmissibilitySpec::balls(*a);
        SubsetTable tb = brute_table(g, bs);
        for (Mask S : subsets(g.X())) {
          EXPECT_EQ(M(g, bs, S), oracle_M(g, bs, S));
          EXPECT_EQ(tb.at(S), M(g, bs, S));
        }
      }
    }
  }
}

TEST(Transforms, DeleteContractSplit) {
  MultiGraph g{3, {{0, 1}, {1, 2}, {0, 2}}};
  EdgeRemoval last = delete_edge(g, 2);
  EXPECT_EQ(last.edge_map, (std::vector<int>{0, 1, -1}));
  EdgeRemoval first = delete_edge(g, 0);
  EXPECT_EQ(first.edge_map, (std::vector<int>{-1, 1, 0}));
  EXPECT_EQ(first.graph.edges, (Edges{{0, 2}, {1, 2}}));
  EXPECT_EQ(first.graph.X(), map_mask(g.X(), {2, 1, 0}));

  MultiGraph k2{2, {{0, 1}}};
  Contraction c = contract_edge(k2, 0);
  EXPECT_EQ(c.graph.n, 1);
  EXPECT_TRUE(c.graph.edges.empty());
  Contraction par = contract_edge(MultiGraph{2, {{0, 1}, {0, 1}}}, 1);
  EXPECT_EQ(par.graph.edges, (Edges{{0, 0}}));
  Contraction top = contract_edge(g, 1);  // {v2, v3}: v3 merges into v2
  EXPECT_EQ(top.vertex_map, (std::vector<int>{0, 1, 1}));
  EXPECT_EQ(top.graph.n, 2);
  EXPECT_EQ(top.graph.edges, (Edges{{0, 1}, {0, 1}}));
  EXPECT_EQ(top.graph.X(), Mask(0b11));
  EXPECT_THROW(contract_edge(MultiGraph{2, {{1, 1}}}, 0), std::invalid_argument);

  EXPECT_EQ(perfect_matchings({4, 1, 7, 2}).size(), 3u);
  EXPECT_EQ(perfect_matchings({0, 1, 2, 3, 4, 5}).size(), 15u);
  MultiGraph two{3, {{0, 1}, {1, 2}}};
  EXPECT_EQ(split_vertex(two, 1, {{0, 1}}), two);

  // Five edges at v_4 (0-based 3), paired (0 3)(1 4)(2 ... ) style: pairs are
  // reattached in order of their smaller edge.
  MultiGraph star{6, {{0, 3}, {1, 3}, {2, 3}, {3, 4}, {3, 5}, {3, 5}}};
  MultiGraph s = split_vertex(star, 3, {{1, 4}, {0, 3}, {2, 5}});
  EXPECT_EQ(s.n, 8);
  EXPECT_EQ(s.edges, (Edges{{0, 3}, {1, 4}, {2, 5}, {3, 6}, {4, 7}, {5, 7}}));
  EXPECT_THROW(split_vertex(star, 3, {{0, 1}, {2, 3}}), std::invalid_argument);
  EXPECT_THROW(split_vertex(MultiGraph{2, {{0, 0}, {0, 1}, {0, 1}}}, 0, {{1, 2}}), std::invalid_argument);
}

TEST(Recurrence, Examples) {
  MultiGraph triple{2, {{0, 1}, {0, 1}, {0, 1}}};
  EXPECT_EQ(rec_M_occ(triple, 1, 0b001), 1u);
  EXPECT_EQ(rec_M_occ(triple, 1, 0b000), 0u);
  MultiGraph dbl{2, {{0, 1}, {0, 1}}};
  EXPECT_EQ(rec_M_ball(dbl, {1}, 0b01), 1u);
  // Star: every edge at v_n; value is the product of the interval indicators.
  MultiGraph star{3, {{0, 2}, {0, 2}, {1, 2}}};
  EXPECT_EQ(rec_M_occ(star, 1, 0b001), 1u);
  EXPECT_EQ(rec_M_occ(star, 1, 0b011), 0u);
  EXPECT_EQ(rec_M_occ(star, 2, 0b101), 0u);
  // d = 0: 2^(free edges) for every S.
  MultiGraph free{3, {{0, 1}, {0, 2}, {1, 1}, {0, 1}}};
  for (Mask S : subsets(free.X())) EXPECT_EQ(rec_M_ball(free, {}, S), 4u);
  // Type 4 shape, no edge of the pair in S.
  MultiGraph t4{2, {{0, 1}, {0, 1}, {1, 1}}};
  EXPECT_EQ(rec_M_ball(MultiGraph{2, {{0, 1}, {0, 1}}}, {1}, 0b00), 0u);
  for (Mask S : subsets(t4.X())) EXPECT_EQ(rec_M_ball(t4, {1}, S), 0u);
}

TEST(Recurrence, MatchesBruteExhaustiveSmall) {
  // Every labeled multigraph with <= 3 vertices and <= 4 edges.
  OrientationEngine eng;
  std::size_t checked = 0;
  for (int n = 1; n <= 3; ++n) {
    Edges pairs;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) pairs.emplace_back(i, j);
    for (int m = 0; m <= 4; ++m) {
      std::vector<std::size_t> pick(m, 0);
      for (;;) {
        MultiGraph g{n, {}};
        for (int e = 0; e < m; ++e) g.edges.push_back(pairs[pick[e]]);
        for (int d = 0; d < n; ++d) {
          SubsetTable b = brute_table(g, AdmissibilitySpec::occ(d));
          ASSERT_EQ(eng.occ(g, d), b) << "n=" << n << " m=" << m << " d=" << d;
          std::vector<int> a(d, 0);
          for (;;) {
            ASSERT_EQ(eng.ball(g, a), brute_table(g, AdmissibilitySpec::balls(a)));
            ++checked;
            int i = 0;
            while (i < d && ++a[i] > 2) a[i++] = 0;
            if (i == d) break;
          }
        }
        int e = 0;
        while (e < m && ++pick[e] == pairs.size()) pick[e++] = 0;
        if (e == m) break;
      }
    }
  }
  EXPECT_GT(checked, 1000u);
}

TEST(Recurrence, MatchesBruteRandomLarger) {
  Rng rng(17);
  OrientationEngine eng;
  for (int trial = 0; trial < 200; ++trial) {
    int n = 4 + trial % 3, m = 5 + trial % 4;
    MultiGraph g = random_graph(rng, n, m);
    for (int d = 0; d < n; ++d) {
      ASSERT_EQ(eng.occ(g, d), brute_table(g, AdmissibilitySpec::occ(d)));
      if (auto a = matching_a(g, d)) {
        ASSERT_EQ(eng.ball(g, *a), brute_table(g, AdmissibilitySpec::balls(*a)));
      }
    }
  }
}

// Each identity is checked with brute force on both sides.
TEST(Identities, Occupation) {
  Rng rng(23);
  std::uniform_int_distribution<int> coin(0, 1);
  int seen[6] = {0, 0, 0, 0, 0, 0};
  for (int trial = 0; trial < 400; ++trial) {
    int n = 3 + trial % 3, m = 1 + trial % 5;
    MultiGraph base = random_graph(rng, n, m);
    int last = n - 1;
    for (int d = 1; d < n; ++d) {
      auto occ = [&](const MultiGraph& g, int dd, Mask S) { return M(g, AdmissibilitySpec::occ(dd), S); };
      // Loop at v_d: d-admissible iff the rest is (d-1)-admissible.
      MultiGraph g1 = with_edge(base, d - 1, d - 1);
      for (Mask S : subsets(g1.X())) EXPECT_EQ(occ(g1, d, S), occ(base, d - 1, S));
      // Loop in the middle does nothing.
      if (d < last) {
        MultiGraph g2 = with_edge(base, d, d);
        for (Mask S : subsets(g2.X())) EXPECT_EQ(occ(g2, d, S), occ(base, d, S));
        ++seen[0];
      }
      // Loop at v_n kills everything.
      MultiGraph g3 = with_edge(base, last, last);
      for (Mask S : subsets(g3.X())) EXPECT_EQ(occ(g3, d, S), 0u);
      // Edge v_{d-1} v_d.
      if (d >= 2) {
        MultiGraph g4 = with_edge(base, d - 2, d - 1);
        Contraction con = contract_edge(g4, g4.m() - 1);
        bool deg = g4.degree(d - 2) >= 2 && g4.degree(d - 1) >= 2;
        // Loops of G/e made from edges parallel to e count once each.
        Count loops = std::count(base.edges.begin(), base.edges.end(), std::make_pair(d - 2, d - 1));
        for (Mask S : subsets(g4.X())) {
          Count want = occ(base, d, S) + (Count(1) << loops) * occ(con.graph, d - 1, S);
          EXPECT_EQ(occ(g4, d, S), deg ? want : 0u);
        }
        if (loops == 0 && deg) {
          for (Mask S : subsets(g4.X())) EXPECT_EQ(occ(g4, d, S), occ(base, d, S) + occ(con.graph, d - 1, S));
        }
        ++seen[1 + deg];
      }
      // Edge v_d v_{d+1}, v_{d+1} in the middle.
      if (d < last) {
        MultiGraph g5 = with_edge(base, d - 1, d);
        bool deg = g5.degree(d - 1) >= 2;
        for (Mask S : subsets(g5.X()))
          EXPECT_EQ(occ(g5, d, S), deg ? occ(base, d, S) + occ(base, d - 1, S) : 0u);
        ++seen[3 + deg];
      }
      // Edge inside the middle: factor 2.
      if (d + 1 < last) {
        MultiGraph g6 = with_edge(base, d, d + coin(rng));
        if (!g6.is_loop(g6.m() - 1)) {
          for (Mask S : subsets(g6.X())) EXPECT_EQ(occ(g6, d, S), 2 * occ(base, d, S));
        }
        ++seen[5];
      }
    }
  }
  for (int c : seen) EXPECT_GT(c, 5);
}

TEST(Identities, Balls) {
  Rng rng(29);
  int seen[7] = {0, 0, 0, 0, 0, 0, 0};
  for (int trial = 0; trial < 3000; ++trial) {
    int n = 3 + trial % 3, m = 2 + trial % 6;
    MultiGraph g = random_graph(rng, n, m);
    int last = n - 1;
    for (int d = 1; d < n; ++d) {
      auto a = matching_a(g, d);
      if (!a) continue;
      int v = d - 1;
      auto bal = [&](const MultiGraph& h, const std::vector<int>& aa, Mask S) {
        return M(h, AdmissibilitySpec::balls(aa), S);
      };
      std::vector<int> head(a->begin(), a->end() - 1);
      std::vector<int> ys = g.incident(v);
      bool loop = false;
      for (int e : ys) loop = loop || g.is_loop(e);
      if (loop) {
        // Drop the loop (moved to the end) and lower a_d.
        int e = *std::find_if(ys.begin(), ys.end(), [&](int x) { return g.is_loop(x); });
        EdgeRemoval r = delete_edge(g, e);
        std::vector<int> a2 = *a;
        --a2[v];
        for (Mask S : subsets(g.X())) EXPECT_EQ(bal(g, *a, S), bal(r.graph, a2, map_mask(S, r.edge_map)));
        ++seen[0];
        continue;
      }
      if ((*a)[v] >= 2) {
        std::vector<int> a2 = head;
        a2.insert(a2.end(), (*a)[v], 1);
        Count f = 1;
        for (int k = 2; k <= (*a)[v]; ++k) f *= k;
        for (Mask S : subsets(g.X())) {
          Count sum = 0;
          for (const auto& pi : perfect_matchings(ys)) sum += bal(split_vertex(g, v, pi), a2, S);
          EXPECT_EQ(sum % f, 0u);
          EXPECT_EQ(bal(g, *a, S), sum / f);
        }
        ++seen[1];
        continue;
      }
      if ((*a)[v] != 1) continue;
      int e1 = ys[0], e2 = ys[1];
      int w1 = g.other_end(e1, v), w2 = g.other_end(e2, v);
      if (w1 != w2) {
        int f = w2 == last ? e1 : e2;
        Contraction con = contract_edge(g, f);
        for (Mask S : subsets(g.X())) EXPECT_EQ(bal(g, *a, S), bal(con.graph, head, map_mask(S, con.edge_map)));
        ++seen[2];
        continue;
      }
      // Remove both edges; they become the last two after the swaps.
      EdgeRemoval r1 = delete_edge(g, e2);
      EdgeRemoval r2 = delete_edge(r1.graph, r1.edge_map[e1]);
      auto carry = [&](Mask S) { return map_mask(map_mask(S, r1.edge_map), r2.edge_map); };
      Mask pair = (Mask(1) << e1) | (Mask(1) << e2);
      if (w1 < v) {
        std::vector<int> a2 = head;
        --a2[w1];
        for (Mask S : subsets(g.X())) EXPECT_EQ(bal(g, *a, S), 2 * bal(r2.graph, a2, carry(S)));
        ++seen[3];
      } else if (w1 < last) {
        for (Mask S : subsets(g.X())) EXPECT_EQ(bal(g, *a, S), 2 * bal(r2.graph, head, carry(S)));
        ++seen[4];
      } else {
        for (Mask S : subsets(g.X())) {
          Count want = popcount(S & pair) == 1 ? bal(r2.graph, head, carry(S & ~pair)) : 0;
          EXPECT_EQ(bal(g, *a, S), want);
        }
        ++seen[5 + (popcount(g.X()) > 2)];
      }
    }
  }
  for (int c : seen) EXPECT_GT(c, 3);
}

TEST(OrientationNmp, CertificatesAndBalance) {
  Rng rng(31);
  OrientationEngine eng;
  int certified = 0;
  for (int trial = 0; trial < 300; ++trial) {
    int n = 2 + trial % 4, m = 3 + trial % 5;
    MultiGraph g = random_graph(rng, n, m);
    if (popcount(g.X()) % 2 == 0) continue;
    int d = static_cast<int>(rng() % n);
    for (auto spec : {AdmissibilitySpec::occ(d), AdmissibilitySpec::balls(matching_a(g, d).value_or(std::vector<int>(d, 1)))}) {
      SubsetTable t = brute_table(g, spec);
      int k = (popcount(g.X()) - 1) / 2;
      Count lo = 0, hi = 0;
      for (Mask S : subsets(g.X())) {
        if (popcount(S) == k) lo += t.at(S);
        if (popcount(S) == k + 1) hi += t.at(S);
      }
      EXPECT_EQ(lo, hi);
      PropertyReport r = verify_orientation_nmp(g, spec, &eng);
      EXPECT_EQ(r.verdict, Verdict::pass) << r.to_json().dump();
      ++certified;
    }
  }
  EXPECT_GT(certified, 100);
  EXPECT_THROW(verify_orientation_nmp(MultiGraph{2, {{0, 1}, {0, 1}}}, AdmissibilitySpec::occ(1)),
               std::invalid_argument);
  PropertyReport zero = verify_orientation_nmp(MultiGraph{2, {{1, 1}}}, AdmissibilitySpec::occ(0));
  EXPECT_EQ(zero.verdict, Verdict::pass);
}

TEST(Decomposition, RatioIsConditioningConstant) {
  Rng rng(37);
  UrnModel uniform = UrnModel::ordinary_model(2, {frac(1, 2), frac(1, 2)});
  for (Mask X : {Mask(0b00), Mask(0b01), Mask(0b10), Mask(0b11)}) {
    PropertyReport r = pG_decomposition_check(uniform, AdmissibilitySpec::occ(1), X);
    EXPECT_EQ(r.verdict, Verdict::pass) << r.to_json().dump();
    EXPECT_EQ(r.details["ratio"], "16/9");
  }
  PropertyReport r0 = pG_decomposition_check(uniform, AdmissibilitySpec::occ(0), 0b11);
  EXPECT_EQ(r0.details["ratio"], "1/1");
  UrnModel det{2, 3, {{Rational(1), Rational(0), Rational(0)}, {Rational(0), Rational(1), Rational(0)}}};
  PropertyReport rd = pG_decomposition_check(det, AdmissibilitySpec::occ(1), 0b00);
  EXPECT_EQ(rd.verdict, Verdict::pass);
  EXPECT_EQ(rd.details["graphs"], 1u);
  for (int trial = 0; trial < 30; ++trial) {
    UrnModel u = random_model(rng, 2 + trial % 2, 2 + (trial / 2) % 2);
    int d = static_cast<int>(rng() % u.urns);
    Mask X = static_cast<Mask>(rng() % (1u << u.balls));
    // With every product nu(S) nu(X \ S) zero there is no ratio to compare.
    auto expect_pass = [&](const AdmissibilitySpec& spec) {
      SetMeasure nu = conditioned_ball_set(u, spec);
      bool any = false;
      for (Mask S : subsets(X)) any = any || nu.at(S) * nu.at(X & ~S) != 0;
      PropertyReport r = pG_decomposition_check(u, spec, X);
      EXPECT_EQ(r.verdict, Verdict::pass);
      EXPECT_EQ(r.details.contains("ratio"), any);
    };
    expect_pass(AdmissibilitySpec::occ(d));
    std::vector<int> a(d);
    for (auto& x : a) x = static_cast<int>(rng() % 2);
    if (prob_ball_event(u, a) != 0) expect_pass(AdmissibilitySpec::balls(a));
  }
}

TEST(Decomposition, ExhaustiveDeskScale) {
  // Every X for a grid of models with m <= 3, n <= 3.
  std::vector<std::vector<Rational>> rows = {{frac(1, 2), frac(1, 2)},
                                             {frac(1, 3), frac(2, 3)},
                                             {frac(1, 3), frac(1, 3), frac(1, 3)},
                                             {frac(1, 6), frac(1, 2), frac(1, 3)}};
  int checked = 0;
  for (const auto& row : rows)
    for (int m = 1; m <= 3; ++m) {
      UrnModel u = UrnModel::ordinary_model(m, row);
      for (int d = 0; d < u.urns; ++d) {
        std::vector<AdmissibilitySpec> specs;
        if (prob_occ_event(u, d) != 0) specs.push_back(AdmissibilitySpec::occ(d));  // else undefined
        for (Mask bits = 0; bits < (Mask(1) << d); ++bits) {
          std::vector<int> a(d);
          for (int i = 0; i < d; ++i) a[i] = (bits >> i) & 1;
          if (prob_ball_event(u, a) != 0) specs.push_back(AdmissibilitySpec::balls(a));
        }
        for (const auto& spec : specs)
          for (Mask X = 0; X < (Mask(1) << m); ++X) {
            PropertyReport r = pG_decomposition_check(u, spec, X);
            EXPECT_EQ(r.verdict, Verdict::pass) << r.to_json().dump();
            ++checked;
          }
      }
    }
  EXPECT_GT(checked, 50);
}

TEST(StXyReduction, BlocksSumToGlobal) {
  SetMeasure uni{3, {}};
  for (Mask s = 0; s < 8; ++s) uni.add(s, frac(1, 8));
  PropertyReport ru = st_xy_reduction_check(uni, 1);
  EXPECT_EQ(ru.verdict, Verdict::pass);
  for (const auto& b : ru.details["blocks"]) EXPECT_EQ(b["min_over_upsets"], "0/1");

  UrnModel u = UrnModel::ordinary_model(2, {frac(1, 2), frac(1, 2)});
  PropertyReport r = st_xy_reduction_check(ball_set_measure_occ(u, 1), 0);
  EXPECT_EQ(r.verdict, Verdict::pass) << r.to_json().dump();
  EXPECT_EQ(r.details["upsets"], 6u);

  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    UrnModel v = random_model(rng, 3 + trial % 2, 3);
    SetMeasure nu = ball_set_measure_occ(v, 1);
    for (int k = 0; k < v.balls; ++k) EXPECT_EQ(st_xy_reduction_check(nu, k).verdict, Verdict::pass);
  }
}

#include <urnassoc/bipartite.hpp>
#include <urnassoc/random.hpp>
#include <urnassoc/urn_model.hpp>

#include <gtest/gtest.h>

using namespace urnassoc;

namespace {

Rational q(const char* s) { return parse_rational(s); }

// Hall's condition by brute force over all U ⊆ side1.
bool hall_brute(const WeightedBipartiteGraph& g) {
  for (std::uint64_t s = 0; s < (std::uint64_t(1) << g.n1); ++s) {
    std::vector<int> u;
    for (int i = 0; i < g.n1; ++i)
      if ((s >> i) & 1) u.push_back(i);
    if (weight_of(g.f1, u) > weight_of(g.f2, neighbourhood(g, u))) return false;
  }
  return true;
}

WeightedBipartiteGraph random_graph(Rng& rng) {
  std::uniform_int_distribution<int> size(1, 5), w(0, 3), coin(0, 99);
  WeightedBipartiteGraph g;
  g.n1 = size(rng);
  g.n2 = size(rng);
  int density = coin(rng);
  for (int u = 0; u < g.n1; ++u)
    for (int v = 0; v < g.n2; ++v)
      if (coin(rng) < density) g.edges.emplace_back(u, v);
  for (int u = 0; u < g.n1; ++u) g.f1.emplace_back(w(rng));
  for (int v = 0; v < g.n2; ++v) g.f2.emplace_back(w(rng));
  Rational t1 = g.total1(), t2 = g.total2();
  if (t1 == 0 || t2 == 0) {
    g.f1.assign(g.n1, Rational(0));
    g.f2.assign(g.n2, Rational(0));
  } else {
    for (auto& x : g.f2) x = x * t1 / t2;
  }
  return g;
}

}  // namespace

TEST(HX, Shapes) {
  HX h1 = build_H_X(3, 0b010);
  EXPECT_EQ(h1.side1, (std::vector<Mask>{0}));
  EXPECT_EQ(h1.side2, (std::vector<Mask>{0b010}));
  EXPECT_EQ(h1.graph.edges.size(), 1u);
  HX h3 = build_H_X(3, 0b111);
  EXPECT_EQ(h3.side1.size(), 3u);
  EXPECT_EQ(h3.graph.edges.size(), 6u);
  HX h5 = build_H_X(5, 0b11111);
  EXPECT_EQ(h5.side1.size(), 10u);
  EXPECT_EQ(h5.side2.size(), 10u);
  std::vector<int> deg1(10), deg2(10);
  for (auto [u, v] : h5.graph.edges) {
    ++deg1[u];
    ++deg2[v];
  }
  for (int x : deg1) EXPECT_EQ(x, 3);
  for (int x : deg2) EXPECT_EQ(x, 3);
  EXPECT_THROW(build_H_X(2, 0b11), std::invalid_argument);
}

TEST(HX, Weights) {
  SetMeasure uni{3, {}};
  for (Mask s = 0; s < 8; ++s) uni.mass[s] = q("1/8");
  HX h = build_H_X(3, 0b111);
  weight_g(h, uni);
  for (const auto& x : h.graph.f1) EXPECT_EQ(x, q("1/64"));
  for (const auto& x : h.graph.f2) EXPECT_EQ(x, q("1/64"));
  SetMeasure point{3, {{0b001, Rational(1)}}};
  weight_g(h, point);
  for (const auto& x : h.graph.f1) EXPECT_EQ(x, 0);
  EXPECT_TRUE(h.graph.balanced());
}

TEST(Flow, Examples) {
  WeightedBipartiteGraph single{1, 1, {{0, 0}}, {q("2/3")}, {q("2/3")}};
  auto fo = find_flow_certificate(single);
  ASSERT_TRUE(fo.certificate);
  EXPECT_EQ((*fo.certificate)[0], q("2/3"));

  HX h = build_H_X(3, 0b111);
  h.graph.f1.assign(3, Rational(1));
  h.graph.f2.assign(3, Rational(1));
  fo = find_flow_certificate(h.graph);
  ASSERT_TRUE(fo.certificate);
  // Not necessarily the symmetric 1/2 everywhere; check validity and that the
  // symmetric one is valid too.
  EXPECT_TRUE(validate_certificate(h.graph, *fo.certificate));
  EXPECT_TRUE(validate_certificate(h.graph, FlowCertificate(6, q("1/2"))));

  WeightedBipartiteGraph none{1, 1, {}, {Rational(1)}, {Rational(1)}};
  EXPECT_TRUE(check_hall_weighted(none).failed());
  EXPECT_EQ(check_hall_weighted(none).witness["U"], json::array({0}));
  EXPECT_TRUE(check_lym_independent(none).failed());
  WeightedBipartiteGraph complete{2, 2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {q("1/3"), q("2/3")}, {q("1/2"), q("1/2")}};
  EXPECT_TRUE(check_hall_weighted(complete).passed());
  WeightedBipartiteGraph unbalanced{1, 1, {{0, 0}}, {Rational(1)}, {Rational(2)}};
  EXPECT_THROW(check_hall_weighted(unbalanced), std::invalid_argument);
}

TEST(Flow, FormulationsAgree) {
  Rng rng(99);
  int fails = 0;
  for (int t = 0; t < 400; ++t) {
    WeightedBipartiteGraph g = random_graph(rng);
    bool brute = hall_brute(g);
    auto hall = check_hall_weighted(g);
    auto lym = check_lym_independent(g);
    auto fo = find_flow_certificate(g);
    EXPECT_EQ(hall.passed(), brute);
    EXPECT_EQ(lym.passed(), brute);
    EXPECT_EQ(fo.certificate.has_value(), brute);
    if (fo.certificate) {
      EXPECT_TRUE(validate_certificate(g, *fo.certificate));
    } else {
      ++fails;
      EXPECT_GT(weight_of(g.f1, fo.violating), weight_of(g.f2, neighbourhood(g, fo.violating)));
    }
  }
  EXPECT_GT(fails, 20);
}

TEST(Flow, SumClosure) {
  Rng rng(4);
  std::uniform_int_distribution<int> w(0, 4);
  for (int t = 0; t < 60; ++t) {
    WeightedBipartiteGraph a = random_graph(rng);
    // Weights induced by random edge flows always admit certificates.
    auto induced = [&](WeightedBipartiteGraph g) {
      g.f1.assign(g.n1, Rational(0));
      g.f2.assign(g.n2, Rational(0));
      for (auto [u, v] : g.edges) {
        Rational x = frac(w(rng), 3);
        g.f1[u] += x;
        g.f2[v] += x;
      }
      return g;
    };
    WeightedBipartiteGraph g1 = induced(a), g2 = induced(a);
    auto c1 = find_flow_certificate(g1), c2 = find_flow_certificate(g2);
    ASSERT_TRUE(c1.certificate && c2.certificate);
    WeightedBipartiteGraph s = g1;
    for (int u = 0; u < s.n1; ++u) s.f1[u] += g2.f1[u];
    for (int v = 0; v < s.n2; ++v) s.f2[v] += g2.f2[v];
    FlowCertificate omega(a.edges.size());
    for (std::size_t e = 0; e < omega.size(); ++e) omega[e] = (*c1.certificate)[e] + (*c2.certificate)[e];
    EXPECT_TRUE(validate_certificate(s, omega));
  }
}

TEST(Griggs, Examples) {
  auto boolean = check_griggs_lym({{3}, {{0, 1, 2, 3}}});
  EXPECT_TRUE(boolean.passed());
  EXPECT_TRUE(boolean.details["exhaustive_antichains"].get<bool>());
  EXPECT_TRUE(check_griggs_lym({{1, 1}, {{0, 1}, {1}}}).passed());
  EXPECT_TRUE(check_griggs_lym({{2, 1}, {{1}, {0, 1}}}).passed());
  EXPECT_THROW(check_griggs_lym({{3}, {{0, 1, 3}}}), std::invalid_argument);
}

TEST(Griggs, BaseCaseShapes) {
  // I_i = {1..|X_i|-1} for the first d parts and everything for the rest.
  for (int a = 2; a <= 4; ++a)
    for (int b = 1; b <= 3; ++b)
      for (int c = 0; c <= 2; ++c) {
        std::vector<int> inner, all_b, all_c;
        for (int x = 1; x < a; ++x) inner.push_back(x);
        for (int x = 0; x <= b; ++x) all_b.push_back(x);
        for (int x = 0; x <= c; ++x) all_c.push_back(x);
        RankedLevelPoset p{{a, b, c}, {inner, all_b, all_c}};
        EXPECT_TRUE(check_griggs_lym(p).passed()) << a << b << c;
      }
}

TEST(Griggs, NonLymPosetFails) {
  // Two parts with incompatible steps still satisfy LYM by the theorem; a
  // non-progression is rejected. Build a failing case by hand instead.
  WeightedBipartiteGraph g{2, 2, {{0, 0}, {1, 0}}, {q("1/2"), q("1/2")}, {q("1/2"), q("1/2")}};
  EXPECT_TRUE(check_hall_weighted(g).failed());
}

#include "oracles.hpp"

#include <urnassoc/random.hpp>
#include <urnassoc/urn_model.hpp>

#include <gtest/gtest.h>

using namespace urnassoc;

namespace {

Rational q(const char* s) { return parse_rational(s); }

UrnModel uniform22() { return UrnModel::ordinary_model(2, {q("1/2"), q("1/2")}); }

}  // namespace

TEST(Rational, ParsesAndPrints) {
  EXPECT_EQ(parse_rational("2/4"), Rational(1, 2));
  EXPECT_EQ(parse_rational("3"), Rational(3));
  EXPECT_EQ(parse_rational(" -1/3 "), Rational(-1, 3));
  EXPECT_EQ(to_string(Rational(3)), "3/1");
  EXPECT_THROW(parse_rational("1/0"), std::invalid_argument);
  EXPECT_THROW(parse_rational("a/2"), std::invalid_argument);
  EXPECT_THROW(parse_rational("1/-2"), std::invalid_argument);
}

TEST(UrnModel, RejectsBadRows) {
  UrnModel u{1, 2, {{q("1/2"), q("1/3")}}};
  EXPECT_THROW(u.validate(), std::invalid_argument);
  u.probs = {{q("3/2"), q("-1/2")}};
  EXPECT_THROW(u.validate(), std::invalid_argument);
}

TEST(Assignments, SingleFairBall) {
  UrnModel u{1, 2, {{q("1/2"), q("1/2")}}};
  std::vector<Rational> w;
  enumerate_assignments(u, [&](const std::vector<int>&, const Rational& x) { w.push_back(x); });
  EXPECT_EQ(w, (std::vector<Rational>{q("1/2"), q("1/2")}));
}

TEST(Assignments, DeterministicRows) {
  UrnModel u{2, 2, {{q("1"), q("0")}, {q("0"), q("1")}}};
  std::map<std::vector<int>, Rational> w;
  enumerate_assignments(u, [&](const std::vector<int>& s, const Rational& x) { w[s] = x; });
  EXPECT_EQ(w.size(), 4u);
  EXPECT_EQ(w[(std::vector<int>{0, 1})], 1);
  EXPECT_EQ(w[(std::vector<int>{0, 0})], 0);
}

TEST(Assignments, BudgetGuard) {
  UrnModel u = UrnModel::ordinary_model(3, {q("1/2"), q("1/2")});
  EXPECT_THROW(enumerate_assignments(u, [](auto&&, auto&&) {}, 7), BudgetExceeded);
  EXPECT_NO_THROW(enumerate_assignments(u, [](auto&&, auto&&) {}, 8));
}

TEST(EnumerationMeasure, Uniform22) {
  FiniteMeasure mu = enumeration_measure(uniform22());
  EXPECT_EQ(mu.at({2, 0}), q("1/4"));
  EXPECT_EQ(mu.at({1, 1}), q("1/2"));
  EXPECT_EQ(mu.at({0, 2}), q("1/4"));
  EXPECT_EQ(mu.mass.size(), 3u);
}

TEST(OccupationMeasure, Uniform22) {
  FiniteMeasure mu = occupation_measure(uniform22());
  EXPECT_EQ(mu.at({1, 1}), q("1/2"));
  EXPECT_EQ(mu.at({1, 0}), q("1/4"));
  EXPECT_EQ(mu.at({0, 1}), q("1/4"));
  EXPECT_EQ(mu.at({0, 0}), 0);
}

TEST(Measures, MatchBruteForceOnRandomModels) {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    int m = 1 + trial % 4, n = 1 + (trial / 4) % 4;
    UrnModel u = random_model(rng, m, n);
    FiniteMeasure mu = enumeration_measure(u), occ = occupation_measure(u);
    EXPECT_EQ(mu.mass, oracle::counts_law(u, false));
    EXPECT_EQ(occ.mass, oracle::counts_law(u, true));
    mu.validate();
    occ.validate();
    for (const auto& [x, w] : mu.mass) EXPECT_EQ(rank_of(x), m);
    if (m == 1) {
      EXPECT_EQ(mu.mass, occ.mass);
    }
  }
}

TEST(IntervalMeasure, SpecialCutpoints) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    int m = 1 + trial % 3, n = 1 + trial % 3;
    UrnModel u = random_model(rng, m, n);
    std::vector<int> unit;
    for (int c = 0; c <= m + 1; ++c) unit.push_back(c);
    EXPECT_EQ(interval_measure(u, IntervalSpec::uniform(n, unit)).mass, enumeration_measure(u).mass);
    EXPECT_EQ(interval_measure(u, IntervalSpec::uniform(n, {0, 1, m + 1})),
              occupation_measure(u));
  }
}

TEST(IntervalMeasure, CoarseFirstUrn) {
  IntervalSpec spec{{{0, 2, 3}, {0, 1, 2, 3}}};
  FiniteMeasure mu = interval_measure(uniform22(), spec);
  EXPECT_EQ(mu.prob([](const Point& x) { return x[0] == 0; }), q("3/4"));
  EXPECT_EQ(mu.prob([](const Point& x) { return x[0] == 1; }), q("1/4"));
  EXPECT_THROW(interval_measure(uniform22(), IntervalSpec{{{0, 3}, {0, 2, 2, 3}}}),
               std::invalid_argument);
}

TEST(BallSetMeasure, OccExamples) {
  SetMeasure nu = ball_set_measure_occ(uniform22(), 1);
  EXPECT_EQ(nu.at(0b00), q("1/3"));
  EXPECT_EQ(nu.at(0b01), q("1/3"));
  EXPECT_EQ(nu.at(0b10), q("1/3"));
  EXPECT_EQ(nu.at(0b11), 0);
  UrnModel one{1, 2, {{q("1/2"), q("1/2")}}};
  EXPECT_EQ(ball_set_measure_occ(one, 1).mass, (std::map<Mask, Rational>{{0, Rational(1)}}));
  UrnModel dead{1, 2, {{q("0"), q("1")}}};
  EXPECT_THROW(ball_set_measure_occ(dead, 1), std::domain_error);
}

TEST(BallSetMeasure, BallExamples) {
  SetMeasure nu = ball_set_measure_ball(uniform22(), {1});
  EXPECT_EQ(nu.at(0b01), q("1/2"));
  EXPECT_EQ(nu.at(0b10), q("1/2"));
  EXPECT_EQ(ball_set_measure_ball(uniform22(), {0}).mass,
            (std::map<Mask, Rational>{{0b11, Rational(1)}}));
  EXPECT_THROW(ball_set_measure_ball(uniform22(), {3}), std::domain_error);
}

TEST(BallSetMeasure, MatchBruteForce) {
  Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    int m = 1 + trial % 3, n = 2 + trial % 2;
    UrnModel u = random_model(rng, m, n);
    auto all = oracle::assignments(u);
    for (int d = 0; d < n; ++d) {
      std::map<Mask, Rational> law;
      Rational z(0);
      for (const auto& [s, w] : all) {
        bool ok = true;
        for (int j = 0; j < d; ++j) ok = ok && std::count(s.begin(), s.end(), j) > 0;
        if (!ok || w == 0) continue;
        Mask zs = 0;
        for (int i = 0; i < m; ++i)
          if (s[i] == n - 1) zs |= Mask(1) << i;
        law[zs] += w;
        z += w;
      }
      if (z == 0) {
        EXPECT_THROW(ball_set_measure_occ(u, d), std::domain_error);
        continue;
      }
      for (auto& [k, w] : law) w /= z;
      EXPECT_EQ(ball_set_measure_occ(u, d).mass, law);
      if (d == 0) {
        EXPECT_EQ(ball_set_measure_ball(u, {}).mass, law);
      }
    }
  }
}

TEST(Refinement, SizesAndRows) {
  auto [v, r] = refine_model(uniform22(), 1);
  EXPECT_EQ(v.urns, 3);
  EXPECT_EQ(r.blocks[1], (std::vector<int>{1, 2}));
  EXPECT_EQ(v.probs[0], (std::vector<Rational>{q("1/2"), q("1/2"), q("0")}));
  EXPECT_EQ(v.probs[1], (std::vector<Rational>{q("1/2"), q("0"), q("1/2")}));
  EXPECT_TRUE(refinement_consistent(uniform22(), v, r));
  EXPECT_THROW(refine_model(uniform22(), 2), std::invalid_argument);
}

TEST(Refinement, AssignmentRuleAndConsistency) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    int m = 1 + trial % 3, n = 1 + trial % 4;
    UrnModel u = random_model(rng, m, n);
    for (int d = 0; d < n; ++d) {
      auto [v, r] = refine_model(u, d);
      EXPECT_EQ(v.urns, d + m * (n - d));
      v.validate();
      EXPECT_TRUE(refinement_consistent(u, v, r));
      for (const auto& [s, w] : oracle::assignments(u)) {
        Point refined = occupancy(r.refine_assignment(s), v.urns);
        EXPECT_EQ(r.collapse(refined), occupancy(s, n));
        for (int c = d; c < v.urns; ++c) EXPECT_LE(refined[c], 1);
      }
    }
  }
}

#pragma once

#include "measure.hpp"
#include "rational.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace urnassoc {

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultEnumerationBudget = 10'000'000;

struct UrnModel {
  int balls = 0;  // m
  int urns = 0;   // n
  std::vector<std::vector<Rational>> probs;  // probs[i][j], 0-based

  void validate() const {
    if (balls < 1 || urns < 1) throw std::invalid_argument("need at least one ball and one urn");
    if (balls > 30) throw std::invalid_argument("at most 30 balls are supported");
    if (static_cast<int>(probs.size()) != balls) throw std::invalid_argument("row count != balls");
    for (const auto& row : probs) {
      if (static_cast<int>(row.size()) != urns) throw std::invalid_argument("column count != urns");
      Rational s(0);
      for (const auto& p : row) {
        if (p < 0 || p > 1) throw std::invalid_argument("probability outside [0,1]");
        s += p;
      }
      if (s != 1) throw std::invalid_argument("row does not sum to 1");
    }
  }

  // Every ball has the same row.
  bool ordinary() const {
    for (const auto& row : probs)
      if (row != probs.front()) return false;
    return true;
  }

  static UrnModel ordinary_model(int m, const std::vector<Rational>& row) {
    UrnModel u{m, static_cast<int>(row.size()), std::vector<std::vector<Rational>>(m, row)};
    u.validate();
    return u;
  }

  bool operator==(const UrnModel&) const = default;
};

// Visits all n^m assignments (0-based urn per ball) with their weights.
template <typename Fn>
void enumerate_assignments(const UrnModel& u, Fn&& fn,
                           std::uint64_t budget = kDefaultEnumerationBudget) {
  std::uint64_t total = 1;
  for (int i = 0; i < u.balls; ++i) {
    total *= static_cast<std::uint64_t>(u.urns);
    if (total > budget) throw BudgetExceeded("n^m exceeds the enumeration budget");
  }
  std::vector<int> sigma(u.balls, 0);
  std::vector<Rational> prefix(u.balls + 1, Rational(1));
  for (int i = 0; i < u.balls; ++i) prefix[i + 1] = prefix[i] * u.probs[i][0];
  for (;;) {
    fn(static_cast<const std::vector<int>&>(sigma), static_cast<const Rational&>(prefix[u.balls]));
    int i = u.balls - 1;
    while (i >= 0 && sigma[i] == u.urns - 1) sigma[i--] = 0;
    if (i < 0) return;
    ++sigma[i];
    for (int k = i; k < u.balls; ++k) prefix[k + 1] = prefix[k] * u.probs[k][sigma[k]];
  }
}

inline Point occupancy(const std::vector<int>& sigma, int n) {
  Point b(n, 0);
  for (int j : sigma) ++b[j];
  return b;
}

// Law of (B_1, ..., B_n), built ball by ball.
inline FiniteMeasure enumeration_measure(const UrnModel& u) {
  std::map<Point, Rational> cur{{Point(u.urns, 0), Rational(1)}};
  for (int i = 0; i < u.balls; ++i) {
    std::map<Point, Rational> next;
    for (const auto& [x, w] : cur)
      for (int j = 0; j < u.urns; ++j) {
        if (u.probs[i][j] == 0) continue;
        Point y = x;
        ++y[j];
        next[y] += w * u.probs[i][j];
      }
    cur = std::move(next);
  }
  return FiniteMeasure{u.urns, Point(u.urns, u.balls), std::move(cur)};
}

inline FiniteMeasure pushforward(const FiniteMeasure& mu, const Point& box,
                                 const std::function<Point(const Point&)>& f) {
  FiniteMeasure out{static_cast<int>(box.size()), box, {}};
  for (const auto& [x, w] : mu.mass) out.add(f(x), w);
  return out;
}

inline FiniteMeasure occupation_measure(const UrnModel& u) {
  return pushforward(enumeration_measure(u), Point(u.urns, 1), [](const Point& x) {
    Point y(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) y[j] = x[j] > 0 ? 1 : 0;
    return y;
  });
}

// Per urn j: 0 = c_0 < c_1 < ... < c_k = m + 1.
struct IntervalSpec {
  std::vector<std::vector<int>> cutpoints;

  void validate(int m, int n) const {
    if (static_cast<int>(cutpoints.size()) != n) throw std::invalid_argument("one cutpoint list per urn");
    for (const auto& c : cutpoints) {
      if (c.size() < 2 || c.front() != 0 || c.back() != m + 1)
        throw std::invalid_argument("cutpoints must run from 0 to m+1");
      for (std::size_t t = 1; t < c.size(); ++t)
        if (c[t] <= c[t - 1]) throw std::invalid_argument("cutpoints must increase strictly");
    }
  }

  // Index t with c_t <= b < c_{t+1}.
  int index(int j, int b) const {
    const auto& c = cutpoints[j];
    int t = 0;
    while (t + 1 < static_cast<int>(c.size()) && c[t + 1] <= b) ++t;
    return t;
  }

  static IntervalSpec uniform(int n, const std::vector<int>& cuts) {
    return IntervalSpec{std::vector<std::vector<int>>(n, cuts)};
  }
};

inline FiniteMeasure interval_measure(const UrnModel& u, const IntervalSpec& spec) {
  spec.validate(u.balls, u.urns);
  Point box(u.urns);
  for (int j = 0; j < u.urns; ++j) box[j] = static_cast<int>(spec.cutpoints[j].size()) - 2;
  return pushforward(enumeration_measure(u), box, [&](const Point& x) {
    Point y(x.size());
    for (int j = 0; j < u.urns; ++j) y[j] = spec.index(j, x[j]);
    return y;
  });
}

// Law of Z = sigma^{-1}(n) given that urns 1..d are all occupied.
inline SetMeasure ball_set_measure_occ(const UrnModel& u, int d) {
  if (d < 0 || d > u.urns - 1) throw std::invalid_argument("need 0 <= d <= n-1");
  Mask full = d == 0 ? 0 : (Mask(1) << d) - 1;
  std::map<std::pair<Mask, Mask>, Rational> cur{{{0, 0}, Rational(1)}};
  for (int i = 0; i < u.balls; ++i) {
    std::map<std::pair<Mask, Mask>, Rational> next;
    for (const auto& [st, w] : cur)
      for (int j = 0; j < u.urns; ++j) {
        const Rational& p = u.probs[i][j];
        if (p == 0) continue;
        auto [z, occ] = st;
        if (j == u.urns - 1) z |= Mask(1) << i;
        if (j < d) occ |= Mask(1) << j;
        next[{z, occ}] += w * p;
      }
    cur = std::move(next);
  }
  SetMeasure nu{u.balls, {}};
  Rational q(0);
  for (const auto& [st, w] : cur)
    if (st.second == full) {
      nu.add(st.first, w);
      q += w;
    }
  if (q == 0) throw std::domain_error("conditioning event Q_d^occ has zero probability");
  for (auto& [s, w] : nu.mass) w /= q;
  return nu;
}

// P(Q_d^occ).
inline Rational prob_occ_event(const UrnModel& u, int d) {
  return enumeration_measure(u).prob([&](const Point& x) {
    for (int j = 0; j < d; ++j)
      if (x[j] == 0) return false;
    return true;
  });
}

// P(B_1 = a_1, ..., B_d = a_d).
inline Rational prob_ball_event(const UrnModel& u, const std::vector<int>& a) {
  return enumeration_measure(u).prob([&](const Point& x) {
    for (std::size_t j = 0; j < a.size(); ++j)
      if (x[j] != a[j]) return false;
    return true;
  });
}

// Law of Z = sigma^{-1}(n) given B_i = a_i for i <= d.
inline SetMeasure ball_set_measure_ball(const UrnModel& u, const std::vector<int>& a) {
  int d = static_cast<int>(a.size());
  if (d > u.urns - 1) throw std::invalid_argument("need d <= n-1");
  for (int x : a)
    if (x < 0) throw std::invalid_argument("negative ball count");
  std::map<std::pair<Mask, std::vector<int>>, Rational> cur{{{0, std::vector<int>(d, 0)}, Rational(1)}};
  for (int i = 0; i < u.balls; ++i) {
    std::map<std::pair<Mask, std::vector<int>>, Rational> next;
    for (const auto& [st, w] : cur)
      for (int j = 0; j < u.urns; ++j) {
        const Rational& p = u.probs[i][j];
        if (p == 0) continue;
        auto [z, cnt] = st;
        if (j == u.urns - 1) z |= Mask(1) << i;
        if (j < d && ++cnt[j] > a[j]) continue;
        next[{z, cnt}] += w * p;
      }
    cur = std::move(next);
  }
  SetMeasure nu{u.balls, {}};
  Rational q(0);
  for (const auto& [st, w] : cur)
    if (st.second == a) {
      nu.add(st.first, w);
      q += w;
    }
  if (q == 0) throw std::domain_error("conditioning event Q_a has zero probability");
  for (auto& [s, w] : nu.mass) w /= q;
  return nu;
}

// Urn refinement: old urns j > d are split into m private urns, one per ball.
struct Refinement {
  int d = 0;
  int balls = 0;
  int old_urns = 0;
  int new_urns = 0;
  std::vector<std::vector<int>> blocks;  // old urn -> new urns summing to it (0-based)

  int new_index(int ball, int old_urn) const {
    return old_urn < d ? old_urn : d + balls * (old_urn - d) + ball;
  }

  std::vector<int> refine_assignment(const std::vector<int>& sigma) const {
    std::vector<int> out(sigma.size());
    for (std::size_t i = 0; i < sigma.size(); ++i) out[i] = new_index(static_cast<int>(i), sigma[i]);
    return out;
  }

  // Block sums of a refined vector.
  Point collapse(const Point& x) const {
    Point y(old_urns, 0);
    for (int j = 0; j < old_urns; ++j)
      for (int c : blocks[j]) y[j] += x[c];
    return y;
  }
};

inline std::pair<UrnModel, Refinement> refine_model(const UrnModel& u, int d) {
  if (d < 0 || d >= u.urns) throw std::invalid_argument("need 0 <= d < n");
  Refinement r{d, u.balls, u.urns, d + u.balls * (u.urns - d), {}};
  r.blocks.resize(u.urns);
  for (int j = 0; j < u.urns; ++j) {
    if (j < d) {
      r.blocks[j] = {j};
    } else {
      for (int i = 0; i < u.balls; ++i) r.blocks[j].push_back(r.new_index(i, j));
    }
  }
  UrnModel v{u.balls, r.new_urns, std::vector<std::vector<Rational>>(u.balls, std::vector<Rational>(r.new_urns, Rational(0)))};
  for (int i = 0; i < u.balls; ++i)
    for (int j = 0; j < u.urns; ++j) v.probs[i][r.new_index(i, j)] = u.probs[i][j];
  return {std::move(v), std::move(r)};
}

// The refined occupation measure pushed through the block sums must equal the
// law of (B_1^occ, ..., B_d^occ, B_{d+1}, ..., B_n).
inline bool refinement_consistent(const UrnModel& u, const UrnModel& refined, const Refinement& r) {
  FiniteMeasure lhs = pushforward(occupation_measure(refined), Point(u.urns, u.balls),
                                  [&](const Point& x) { return r.collapse(x); });
  FiniteMeasure rhs = pushforward(enumeration_measure(u), Point(u.urns, u.balls), [&](const Point& x) {
    Point y = x;
    for (int j = 0; j < r.d; ++j) y[j] = std::min(y[j], 1);
    return y;
  });
  return lhs.mass == rhs.mass;
}

}  // namespace urnassoc

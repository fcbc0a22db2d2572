#pragma once

#include "maxflow.hpp"
#include "poset.hpp"
#include "rational.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace urnassoc {

struct FiniteMeasure {
  int dim = 0;
  Point box;  // inclusive per-coordinate upper bounds
  std::map<Point, Rational> mass;

  Rational total() const {
    Rational t(0);
    for (const auto& [x, w] : mass) t += w;
    return t;
  }

  template <typename Pred>
  Rational prob(Pred&& pred) const {
    Rational t(0);
    for (const auto& [x, w] : mass)
      if (pred(x)) t += w;
    return t;
  }

  Rational at(const Point& x) const {
    auto it = mass.find(x);
    return it == mass.end() ? Rational(0) : it->second;
  }

  void add(const Point& x, const Rational& w) {
    if (w == 0) return;
    auto& slot = mass[x];
    slot += w;
    if (slot == 0) mass.erase(x);
  }

  // Throws unless masses are nonnegative, sum to one and fit the box.
  void validate() const {
    if (static_cast<int>(box.size()) != dim) throw std::invalid_argument("box dimension mismatch");
    for (const auto& [x, w] : mass) {
      if (static_cast<int>(x.size()) != dim) throw std::invalid_argument("point dimension mismatch");
      if (w < 0) throw std::invalid_argument("negative mass");
      for (int i = 0; i < dim; ++i)
        if (x[i] < 0 || x[i] > box[i]) throw std::invalid_argument("point outside box");
    }
    if (total() != 1) throw std::invalid_argument("total mass is not 1");
  }

  bool binary() const {
    for (int b : box)
      if (b != 1) return false;
    return true;
  }

  bool operator==(const FiniteMeasure&) const = default;
};

using Mask = std::uint32_t;

inline int popcount(Mask s) { return __builtin_popcount(s); }

// Law of a random subset Z of [m]; bit i of a mask stands for ball i+1.
struct SetMeasure {
  int ground = 0;
  std::map<Mask, Rational> mass;

  Rational at(Mask s) const {
    auto it = mass.find(s);
    return it == mass.end() ? Rational(0) : it->second;
  }

  void add(Mask s, const Rational& w) {
    if (w == 0) return;
    auto& slot = mass[s];
    slot += w;
    if (slot == 0) mass.erase(s);
  }

  Rational total() const {
    Rational t(0);
    for (const auto& [s, w] : mass) t += w;
    return t;
  }

  Rational level_mass(int k) const {
    Rational t(0);
    for (const auto& [s, w] : mass)
      if (popcount(s) == k) t += w;
    return t;
  }

  // nu(. | |Z| = k); empty measure when the level has zero mass.
  SetMeasure level(int k) const {
    SetMeasure out{ground, {}};
    Rational z = level_mass(k);
    if (z == 0) return out;
    for (const auto& [s, w] : mass)
      if (popcount(s) == k) out.mass[s] = w / z;
    return out;
  }

  bool operator==(const SetMeasure&) const = default;
};

// Increasing event on a bounded box, stored as its antichain of minimal points.
struct UpSet {
  Point box;
  std::vector<Point> minimal;  // sorted, pairwise incomparable

  static UpSet generated_by(Point box, std::vector<Point> gens) {
    std::sort(gens.begin(), gens.end());
    gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
    std::vector<Point> keep;
    for (std::size_t i = 0; i < gens.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < gens.size() && !dominated; ++j)
        dominated = j != i && leq(gens[j], gens[i]);
      if (!dominated) keep.push_back(gens[i]);
    }
    return UpSet{std::move(box), std::move(keep)};
  }

  static UpSet whole(const Point& box) { return generated_by(box, {Point(box.size(), 0)}); }
  static UpSet empty(const Point& box) { return UpSet{box, {}}; }

  // {x : x_j >= t}
  static UpSet threshold(const Point& box, int j, int t) {
    Point g(box.size(), 0);
    g[j] = t;
    return generated_by(box, {g});
  }

  bool contains(const Point& x) const {
    for (const auto& g : minimal)
      if (leq(g, x)) return true;
    return false;
  }

  bool operator==(const UpSet&) const = default;
};

inline UpSet intersect(const UpSet& a, const UpSet& b) {
  std::vector<Point> gens;
  for (const auto& x : a.minimal)
    for (const auto& y : b.minimal) {
      Point z(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) z[i] = std::max(x[i], y[i]);
      gens.push_back(std::move(z));
    }
  return UpSet::generated_by(a.box, std::move(gens));
}

inline UpSet unite(const UpSet& a, const UpSet& b) {
  std::vector<Point> gens = a.minimal;
  gens.insert(gens.end(), b.minimal.begin(), b.minimal.end());
  return UpSet::generated_by(a.box, std::move(gens));
}

// Visits every point of the box in lexicographic order.
template <typename Fn>
void for_each_box_point(const Point& box, Fn&& fn) {
  Point x(box.size(), 0);
  for (;;) {
    fn(static_cast<const Point&>(x));
    std::size_t i = x.size();
    for (;;) {
      if (i == 0) return;
      --i;
      if (x[i] < box[i]) {
        ++x[i];
        break;
      }
      x[i] = 0;
    }
  }
}

inline Rational measure_of(const FiniteMeasure& mu, const UpSet& a) {
  return mu.prob([&](const Point& x) { return a.contains(x); });
}

// Some x in A, y outside A differing only in coordinate j. For an up-set it is
// enough to look at neighbours x - e_j.
inline bool affects(int j, const UpSet& a) {
  bool found = false;
  for_each_box_point(a.box, [&](const Point& x) {
    if (found || x[j] == 0 || !a.contains(x)) return;
    Point y = x;
    --y[j];
    if (!a.contains(y)) found = true;
  });
  return found;
}

inline bool disjoint_dependence(const UpSet& a, const UpSet& b) {
  for (int j = 0; j < static_cast<int>(a.box.size()); ++j)
    if (affects(j, a) && affects(j, b)) return false;
  return true;
}

inline bool negatively_correlated(const FiniteMeasure& mu, const UpSet& a, const UpSet& b) {
  return measure_of(mu, intersect(a, b)) <= measure_of(mu, a) * measure_of(mu, b);
}

// First (s, t) with P(x_i>=s, x_j>=t) > P(x_i>=s) P(x_j>=t), if any.
inline std::optional<std::pair<int, int>> rv_correlation_violation(const FiniteMeasure& mu, int i,
                                                                   int j) {
  if (i == j) throw std::invalid_argument("coordinates must differ");
  for (int s = 1; s <= mu.box[i]; ++s)
    for (int t = 1; t <= mu.box[j]; ++t) {
      Rational pa = mu.prob([&](const Point& x) { return x[i] >= s; });
      Rational pb = mu.prob([&](const Point& x) { return x[j] >= t; });
      Rational pab = mu.prob([&](const Point& x) { return x[i] >= s && x[j] >= t; });
      if (pab > pa * pb) return std::make_pair(s, t);
    }
  return std::nullopt;
}

inline bool rv_negatively_correlated(const FiniteMeasure& mu, int i, int j) {
  return !rv_correlation_violation(mu, i, j).has_value();
}

// Restriction to {x_i = a_i, i in fixed}, renormalized; dimension is kept.
inline FiniteMeasure condition(const FiniteMeasure& mu, const std::map<int, int>& fixed) {
  FiniteMeasure out{mu.dim, mu.box, {}};
  Rational z(0);
  for (const auto& [x, w] : mu.mass) {
    bool ok = true;
    for (const auto& [i, a] : fixed) ok = ok && x[i] == a;
    if (ok) {
      out.mass[x] = w;
      z += w;
    }
  }
  if (z == 0) throw std::domain_error("conditioning event has zero probability");
  for (auto& [x, w] : out.mass) w /= z;
  return out;
}

using ExternalField = std::vector<Rational>;

inline FiniteMeasure impose_external_field(const FiniteMeasure& mu, const ExternalField& w) {
  if (static_cast<int>(w.size()) != mu.dim) throw std::invalid_argument("field dimension mismatch");
  for (const auto& wi : w)
    if (wi < 0) throw std::invalid_argument("negative field weight");
  FiniteMeasure out{mu.dim, mu.box, {}};
  Rational z(0);
  for (const auto& [x, p] : mu.mass) {
    Rational q = p;
    for (int i = 0; i < mu.dim; ++i)
      for (int e = 0; e < x[i]; ++e) q *= w[i];
    if (q != 0) {
      out.mass[x] = q;
      z += q;
    }
  }
  if (z == 0) throw std::domain_error("external field leaves zero mass");
  for (auto& [x, q] : out.mass) q /= z;
  return out;
}

// ---- stochastic dominance of set measures ----------------------------------

struct CouplingEdge {
  Mask from;
  Mask to;
  Rational mass;
};

struct DominanceResult {
  bool holds = false;
  std::vector<CouplingEdge> coupling;  // when holds: from ⊆ to, marginals lo and hi
  std::vector<Mask> violating;         // when not: minimal sets of A with hi(A) < lo(A)
};

inline bool subset_of(Mask a, Mask b) { return (a & ~b) == 0; }

inline Rational upset_mass(const SetMeasure& nu, const std::vector<Mask>& gens) {
  Rational t(0);
  for (const auto& [s, w] : nu.mass)
    for (Mask g : gens)
      if (subset_of(g, s)) {
        t += w;
        break;
      }
  return t;
}

// hi dominates lo iff an upward coupling exists (Strassen); decided by max-flow.
inline DominanceResult stochastic_dominance(const SetMeasure& hi, const SetMeasure& lo) {
  if (hi.ground != lo.ground) throw std::invalid_argument("ground sets differ");
  std::vector<Mask> los, his;
  for (const auto& [s, w] : lo.mass) los.push_back(s);
  for (const auto& [s, w] : hi.mass) his.push_back(s);
  std::size_t src = 0, sink = 1;
  MaxFlow<Rational> net(2 + los.size() + his.size());
  Rational big = lo.total() + hi.total() + 1;
  for (std::size_t i = 0; i < los.size(); ++i) net.add_edge(src, 2 + i, lo.at(los[i]));
  for (std::size_t j = 0; j < his.size(); ++j)
    net.add_edge(2 + los.size() + j, sink, hi.at(his[j]));
  std::vector<std::tuple<std::size_t, Mask, Mask>> inner;
  for (std::size_t i = 0; i < los.size(); ++i)
    for (std::size_t j = 0; j < his.size(); ++j)
      if (subset_of(los[i], his[j]))
        inner.emplace_back(net.add_edge(2 + i, 2 + los.size() + j, big), los[i], his[j]);
  Rational value = net.run(src, sink);
  DominanceResult out;
  out.holds = value == lo.total();
  if (out.holds) {
    for (const auto& [arc, a, b] : inner)
      if (net.flow_on(arc) != 0) out.coupling.push_back({a, b, net.flow_on(arc)});
  } else {
    auto side = net.source_side(src);
    std::vector<Mask> reach;
    for (std::size_t i = 0; i < los.size(); ++i)
      if (side[2 + i]) reach.push_back(los[i]);
    for (Mask a : reach) {
      bool minimal = true;
      for (Mask b : reach) minimal = minimal && (b == a || !subset_of(b, a));
      if (minimal) out.violating.push_back(a);
    }
  }
  return out;
}

inline bool stochastically_dominates(const SetMeasure& hi, const SetMeasure& lo) {
  return stochastic_dominance(hi, lo).holds;
}

// Exhaustive cross-check over every up-set of 2^[m]; intended for m <= 5.
inline std::optional<std::vector<Mask>> dominance_violation_exhaustive(const SetMeasure& hi,
                                                                       const SetMeasure& lo) {
  int m = hi.ground;
  std::vector<Point> pts;
  for (Mask s = 0; s < (Mask(1) << m); ++s) {
    Point x(m);
    for (int i = 0; i < m; ++i) x[i] = (s >> i) & 1;
    pts.push_back(x);
  }
  Poset P(pts);
  std::optional<std::vector<Mask>> found;
  enumerate_upsets(P, std::size_t(-1), [&](const Bits& a) {
    Rational h(0), l(0);
    for (std::size_t i = a.find_first(); i != Bits::npos; i = a.find_next(i)) {
      h += hi.at(Mask(i));
      l += lo.at(Mask(i));
    }
    if (h < l) {
      std::vector<Mask> gens;
      for (std::size_t i : P.minimal(a)) gens.push_back(Mask(i));
      found = gens;
      return false;
    }
    return true;
  });
  return found;
}

}  // namespace urnassoc

#pragma once

#include "maxflow.hpp"
#include "measure.hpp"
#include "poset.hpp"
#include "random.hpp"
#include "report.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace urnassoc {

inline constexpr std::size_t kUpsetCap = 1'000'000;
inline constexpr std::size_t kDirectTraceLimit = 4096;
inline constexpr std::uint64_t kFmNodeCap = 50'000'000;

struct RankSequence {
  std::vector<Rational> r;  // r[j] = P(|x| = j), j = 0..n
};

inline void require_binary(const FiniteMeasure& mu, const char* what) {
  if (!mu.binary()) throw std::invalid_argument(std::string(what) + " needs a measure on {0,1}^n");
}

inline RankSequence rank_sequence(const FiniteMeasure& mu) {
  require_binary(mu, "rank sequence");
  RankSequence s{std::vector<Rational>(mu.dim + 1, Rational(0))};
  for (const auto& [x, w] : mu.mass) s.r[rank_of(x)] += w;
  return s;
}

namespace detail {

inline Integer lcm_of_denominators(const FiniteMeasure& mu) {
  Integer L = 1;
  for (const auto& [x, w] : mu.mass) mpz_lcm(L.get_mpz_t(), L.get_mpz_t(), w.get_den_mpz_t());
  return L;
}

// Support of mu on its non-constant coordinates, masses scaled by L to integers.
struct Support {
  std::vector<int> coords;  // original indices of the non-constant coordinates
  std::vector<Point> points;
  std::vector<Integer> mass;
  Integer L;
};

inline Support support_of(const FiniteMeasure& mu) {
  Support s;
  s.L = lcm_of_denominators(mu);
  if (mu.mass.empty()) return s;
  const Point& first = mu.mass.begin()->first;
  for (int i = 0; i < mu.dim; ++i) {
    bool constant = true;
    for (const auto& [x, w] : mu.mass) constant = constant && x[i] == first[i];
    if (!constant) s.coords.push_back(i);
  }
  for (const auto& [x, w] : mu.mass) {
    Point p;
    for (int i : s.coords) p.push_back(x[i]);
    s.points.push_back(std::move(p));
    Rational scaled = w * s.L;
    s.mass.push_back(scaled.get_num());
  }
  return s;
}

inline Point project(const Point& x, const std::vector<int>& positions) {
  Point p;
  for (int i : positions) p.push_back(x[i]);
  return p;
}

// Distinct projections of the support onto positions, with summed masses and
// the projection index of every support point.
struct Projection {
  std::vector<Point> points;
  std::vector<Integer> mass;
  std::vector<int> of;  // support index -> projection index
};

inline Projection project_support(const Support& s, const std::vector<int>& positions) {
  Projection p;
  std::map<Point, int> index;
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    Point q = project(s.points[k], positions);
    auto [it, fresh] = index.emplace(q, static_cast<int>(p.points.size()));
    if (fresh) {
      p.points.push_back(q);
      p.mass.push_back(0);
    }
    p.mass[it->second] += s.mass[k];
    p.of.push_back(it->second);
  }
  return p;
}

inline std::vector<int> positions_of(std::uint32_t mask, int k) {
  std::vector<int> out;
  for (int i = 0; i < k; ++i)
    if ((mask >> i) & 1) out.push_back(i);
  return out;
}

// mu = marginal(S) x marginal(complement) on the support coordinates.
inline bool factorizes(const Support& s, std::uint32_t mask) {
  int k = static_cast<int>(s.coords.size());
  std::uint32_t full = k == 32 ? ~0u : (1u << k) - 1;
  Projection a = project_support(s, positions_of(mask, k));
  Projection b = project_support(s, positions_of(full & ~mask, k));
  if (a.points.size() * b.points.size() != s.points.size()) return false;
  for (std::size_t x = 0; x < s.points.size(); ++x)
    if (s.mass[x] * s.L != a.mass[a.of[x]] * b.mass[b.of[x]]) return false;
  return true;
}

}  // namespace detail

// Finest partition of the non-constant coordinates into blocks with mu the
// product of its block marginals. Blocks are listed by smallest member; each
// block is the smallest factorizing set containing its members. Positions
// refer to Support::coords. With more than 14 coordinates one block is returned.
inline std::vector<std::vector<int>> independent_blocks(const detail::Support& s) {
  int k = static_cast<int>(s.coords.size());
  if (k == 0) return {};
  std::vector<int> all(k);
  for (int i = 0; i < k; ++i) all[i] = i;
  if (k > 14) return {all};
  std::vector<std::uint32_t> masks;
  for (std::uint32_t m = 1; m < (1u << k); ++m) masks.push_back(m);
  std::stable_sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
    return __builtin_popcount(a) < __builtin_popcount(b);
  });
  std::vector<std::vector<int>> blocks;
  std::uint32_t assigned = 0;
  for (int i = 0; i < k; ++i) {
    if ((assigned >> i) & 1) continue;
    for (std::uint32_t m : masks) {
      if (!((m >> i) & 1) || (m & assigned)) continue;
      if (m == (1u << k) - 1 - assigned || detail::factorizes(s, m)) {
        blocks.push_back(detail::positions_of(m, k));
        assigned |= m;
        break;
      }
    }
  }
  return blocks;
}

namespace detail {

template <typename Int>
Int to_int(const Integer& z) {
  if constexpr (std::is_same_v<Int, Integer>) {
    return z;
  } else {
    if (!z.fits_slong_p()) throw std::logic_error("mass does not fit a machine word");
    return Int(z.get_si());
  }
}

// Smallest integer type that holds products of two scaled masses and sums of them.
inline bool fits_int128(const Integer& L) { return mpz_sizeinbase(L.get_mpz_t(), 2) < 56; }

// Maximum of sum_{y in B} c[y] over up-sets B of P, by min-cut on the
// closure network. Returns the value and B.
template <typename Int>
std::pair<Int, std::vector<char>> max_weight_upset(const Poset& P, const std::vector<Int>& c) {
  std::size_t n = P.size();
  Int pos(0), big(1);
  for (const auto& x : c) {
    if (x > Int(0)) pos += x;
    big += x > Int(0) ? x : Int(0) - x;
  }
  if (pos == Int(0)) return {Int(0), std::vector<char>(n, 0)};
  MaxFlow<Int> net(n + 2);
  std::size_t src = n, sink = n + 1;
  for (std::size_t y = 0; y < n; ++y) {
    if (c[y] > Int(0)) net.add_edge(src, y, c[y]);
    if (c[y] < Int(0)) net.add_edge(y, sink, Int(0) - c[y]);
    for (std::size_t z = P.up[y].find_first(); z != Bits::npos; z = P.up[y].find_next(z))
      if (z != y) net.add_edge(y, z, big);
  }
  Int cut = net.run(src, sink);
  std::vector<char> side = net.source_side(src);
  side.resize(n);
  return {pos - cut, side};
}

struct SplitWitness {
  std::vector<int> a_positions, b_positions;  // block positions
  std::vector<Point> a_points, b_points;      // trace points in those positions
};

// NA of the measure given by (support, masses) restricted to the given block
// positions. Returns inconclusive if some trace enumeration exceeds the cap.
template <typename Int>
Verdict na_block(const Support& s, const std::vector<int>& block, std::size_t cap,
                 std::optional<SplitWitness>& witness) {
  int k = static_cast<int>(block.size());
  if (k < 2) return Verdict::pass;
  Int L = to_int<Int>(s.L);
  Verdict verdict = Verdict::pass;
  for (std::uint32_t mask = 1; mask < (1u << k) - 1; ++mask) {
    if (!(mask & 1)) continue;  // unordered splits: the first position goes to I
    std::vector<int> I, J;
    for (int t = 0; t < k; ++t) ((mask >> t) & 1 ? I : J).push_back(block[t]);
    Projection pi = project_support(s, I), pj = project_support(s, J);
    bool swap = pj.points.size() < pi.points.size();
    const Projection& E = swap ? pj : pi;
    const Projection& F = swap ? pi : pj;
    const std::vector<int>& Epos = swap ? J : I;
    const std::vector<int>& Fpos = swap ? I : J;
    // Joint masses w[e][f].
    std::vector<std::map<int, Int>> w(E.points.size());
    for (std::size_t x = 0; x < s.points.size(); ++x) {
      int e = swap ? pj.of[x] : pi.of[x], f = swap ? pi.of[x] : pj.of[x];
      w[e][f] += to_int<Int>(s.mass[x]);
    }
    std::vector<Int> nf;
    for (const auto& m : F.mass) nf.push_back(to_int<Int>(m));
    Poset PE(E.points), PF(F.points);
    std::vector<Bits> direct;
    bool use_direct = enumerate_upsets(PF, kDirectTraceLimit, [&](const Bits& b) {
      direct.push_back(b);
      return true;
    });
    if (!use_direct) direct.clear();
    bool found = false;
    bool complete = enumerate_upsets(PE, cap, [&](const Bits& A) {
      std::size_t size = A.count();
      if (size == 0 || size == PE.size()) return true;
      Int NA(0);
      std::vector<Int> a(PF.size(), Int(0));
      for (std::size_t e = A.find_first(); e != Bits::npos; e = A.find_next(e))
        for (const auto& [f, m] : w[e]) {
          a[f] += m;
          NA += m;
        }
      std::vector<Int> c(PF.size());
      bool any_positive = false;
      for (std::size_t f = 0; f < c.size(); ++f) {
        c[f] = L * a[f] - NA * nf[f];
        any_positive = any_positive || c[f] > Int(0);
      }
      if (!any_positive) return true;
      std::optional<std::vector<char>> B;
      if (use_direct) {
        for (const auto& b : direct) {
          Int v(0);
          for (std::size_t f = b.find_first(); f != Bits::npos; f = b.find_next(f)) v += c[f];
          if (v > Int(0)) {
            std::vector<char> in(PF.size(), 0);
            for (std::size_t f = b.find_first(); f != Bits::npos; f = b.find_next(f)) in[f] = 1;
            B = in;
            break;
          }
        }
      } else {
        auto [best, in] = max_weight_upset(PF, c);
        if (best > Int(0)) B = in;
      }
      if (!B) return true;
      SplitWitness sw{Epos, Fpos, {}, {}};
      for (std::size_t e = A.find_first(); e != Bits::npos; e = A.find_next(e)) sw.a_points.push_back(E.points[e]);
      for (std::size_t f = 0; f < B->size(); ++f)
        if ((*B)[f]) sw.b_points.push_back(F.points[f]);
      witness = sw;
      found = true;
      return false;
    });
    if (found) return Verdict::fail;
    if (!complete) verdict = Verdict::inconclusive;
  }
  return verdict;
}

// Up-set of the full box generated by points given on some support positions.
inline UpSet embed_upset(const FiniteMeasure& mu, const Support& s, const std::vector<int>& positions,
                         const std::vector<Point>& pts) {
  std::vector<Point> gens;
  for (const auto& p : pts) {
    Point g(mu.dim, 0);
    for (std::size_t t = 0; t < positions.size(); ++t) g[s.coords[positions[t]]] = p[t];
    gens.push_back(std::move(g));
  }
  return UpSet::generated_by(mu.box, std::move(gens));
}

inline json na_witness_json(const FiniteMeasure& mu, const UpSet& A, const UpSet& B) {
  return {{"A", upset_json(A)},
          {"B", upset_json(B)},
          {"P(A)", to_string(measure_of(mu, A))},
          {"P(B)", to_string(measure_of(mu, B))},
          {"P(A and B)", to_string(measure_of(mu, intersect(A, B)))}};
}

// All distinct positive-probability conditionings {x_i = a_i, i in S}, keyed by
// the surviving support. Calls fn(fixed) once per distinct conditional measure.
template <typename Fn>
void for_each_conditioning(const FiniteMeasure& mu, Fn&& fn) {
  if (mu.dim > 20) throw std::invalid_argument("conditioning sweep supports at most 20 coordinates");
  std::vector<Point> pts;
  for (const auto& [x, w] : mu.mass) pts.push_back(x);
  std::set<std::vector<int>> seen;
  for (std::uint32_t S = 0; S < (1u << mu.dim); ++S) {
    std::vector<int> idx = positions_of(S, mu.dim);
    std::set<Point> values;
    for (const auto& x : pts) values.insert(project(x, idx));
    for (const auto& v : values) {
      std::vector<int> survivors;
      for (std::size_t k = 0; k < pts.size(); ++k)
        if (project(pts[k], idx) == v) survivors.push_back(static_cast<int>(k));
      if (!seen.insert(survivors).second) continue;
      std::map<int, int> fixed;
      for (std::size_t t = 0; t < idx.size(); ++t) fixed[idx[t]] = v[t];
      if (!fn(static_cast<const std::map<int, int>&>(fixed))) return;
    }
  }
}

}  // namespace detail

// ---- NA and NC ------------------------------------------------------------------------

inline PropertyReport check_NA(const FiniteMeasure& mu, std::size_t cap = kUpsetCap) {
  mu.validate();
  PropertyReport r{"NA", Verdict::pass, nullptr, "", json::object()};
  detail::Support s = detail::support_of(mu);
  auto blocks = independent_blocks(s);
  r.details["nonconstant_coordinates"] = s.coords.size();
  r.details["independent_blocks"] = blocks.size();
  for (const auto& block : blocks) {
    std::optional<detail::SplitWitness> w;
    Verdict v = detail::fits_int128(s.L) ? detail::na_block<__int128>(s, block, cap, w)
                                         : detail::na_block<Integer>(s, block, cap, w);
    if (v == Verdict::fail) {
      UpSet A = detail::embed_upset(mu, s, w->a_positions, w->a_points);
      UpSet B = detail::embed_upset(mu, s, w->b_positions, w->b_points);
      if (!disjoint_dependence(A, B) || negatively_correlated(mu, A, B))
        throw std::logic_error("NA witness does not reproduce");
      r.verdict = Verdict::fail;
      r.witness = detail::na_witness_json(mu, A, B);
      return r;
    }
    if (v == Verdict::inconclusive) {
      r.verdict = merge(r.verdict, v);
      r.note = "up-set enumeration cap exceeded on some coordinate split";
    }
  }
  return r;
}

inline PropertyReport check_NC(const FiniteMeasure& mu) {
  mu.validate();
  PropertyReport r{"NC", Verdict::pass, nullptr, "", json::object()};
  for (int i = 0; i < mu.dim; ++i)
    for (int j = i + 1; j < mu.dim; ++j)
      if (auto v = rv_correlation_violation(mu, i, j)) {
        auto [s, t] = *v;
        r.verdict = Verdict::fail;
        r.witness = {{"i", i + 1},
                     {"j", j + 1},
                     {"s", s},
                     {"t", t},
                     {"P(xi>=s)", to_string(mu.prob([&](const Point& x) { return x[i] >= s; }))},
                     {"P(xj>=t)", to_string(mu.prob([&](const Point& x) { return x[j] >= t; }))},
                     {"P(both)", to_string(mu.prob([&](const Point& x) { return x[i] >= s && x[j] >= t; }))}};
        return r;
      }
  return r;
}

namespace detail {

template <typename Check>
PropertyReport conditional_sweep(const FiniteMeasure& mu, const std::string& name, Check&& check) {
  mu.validate();
  PropertyReport r{name, Verdict::pass, nullptr, "", json::object()};
  std::size_t count = 0;
  for_each_conditioning(mu, [&](const std::map<int, int>& fixed) {
    ++count;
    PropertyReport inner = check(condition(mu, fixed));
    if (inner.verdict == Verdict::fail) {
      r.verdict = Verdict::fail;
      r.witness = inner.witness;
      r.witness["conditioning"] = conditioning_json(fixed);
      return false;
    }
    if (inner.verdict != Verdict::pass) {
      r.verdict = merge(r.verdict, inner.verdict);
      r.note = inner.note;
    }
    return true;
  });
  r.details["conditionings"] = count;
  return r;
}

}  // namespace detail

inline PropertyReport check_CNA(const FiniteMeasure& mu, std::size_t cap = kUpsetCap) {
  return detail::conditional_sweep(mu, "CNA", [&](const FiniteMeasure& c) { return check_NA(c, cap); });
}

inline PropertyReport check_CNC(const FiniteMeasure& mu) {
  return detail::conditional_sweep(mu, "CNC", [&](const FiniteMeasure& c) { return check_NC(c); });
}

// ---- set-measure properties -------------------------------------------------------------

inline json mask_list_json(const std::vector<Mask>& sets) {
  json a = json::array();
  for (Mask s : sets) a.push_back(set_json(s));
  return a;
}

// nu(. | |Z| = k+1) dominates nu(. | |Z| = k) for every k >= 0 with both levels charged.
inline PropertyReport check_NMP(const SetMeasure& nu) {
  PropertyReport r{"NMP", Verdict::pass, nullptr, "", json::object()};
  json levels = json::array();
  for (int k = 0; k < nu.ground; ++k) {
    if (nu.level_mass(k) == 0 || nu.level_mass(k + 1) == 0) continue;
    levels.push_back(k);
    SetMeasure lo = nu.level(k), hi = nu.level(k + 1);
    DominanceResult d = stochastic_dominance(hi, lo);
    if (!d.holds) {
      r.verdict = Verdict::fail;
      r.witness = {{"k", k},
                   {"A", mask_list_json(d.violating)},
                   {"P(A | |Z|=k)", to_string(upset_mass(lo, d.violating))},
                   {"P(A | |Z|=k+1)", to_string(upset_mass(hi, d.violating))}};
      break;
    }
  }
  r.details["levels_checked"] = levels;
  return r;
}

inline SetMeasure condition_set(const SetMeasure& nu, Mask S, Mask values) {
  SetMeasure out{nu.ground, {}};
  Rational z(0);
  for (const auto& [s, w] : nu.mass)
    if ((s & S) == values) {
      out.mass[s] = w;
      z += w;
    }
  if (z == 0) throw std::domain_error("conditioning event has zero probability");
  for (auto& [s, w] : out.mass) w /= z;
  return out;
}

inline Rational conditional_set_prob(const SetMeasure& nu, Mask S, Mask values) {
  Rational z(0);
  for (const auto& [s, w] : nu.mass)
    if ((s & S) == values) z += w;
  return z;
}

// For all S and a <= b on S: nu(. | z_S = b) dominates nu(. | z_S = a).
inline PropertyReport check_SCP(const SetMeasure& nu) {
  if (nu.ground > 20) throw std::invalid_argument("SCP check supports at most 20 balls");
  PropertyReport r{"SCP", Verdict::pass, nullptr, "", json::object()};
  std::size_t pairs = 0;
  for (Mask S = 1; S < (Mask(1) << nu.ground); ++S)
    for (Mask b = S;; b = (b - 1) & S) {
      if (conditional_set_prob(nu, S, b) != 0)
        for (Mask a = b; a != 0;) {
          a = (a - 1) & b;  // proper subsets of b
          if (conditional_set_prob(nu, S, a) == 0) continue;
          ++pairs;
          SetMeasure lo = condition_set(nu, S, a), hi = condition_set(nu, S, b);
          DominanceResult d = stochastic_dominance(hi, lo);
          if (!d.holds) {
            r.verdict = Verdict::fail;
            r.witness = {{"S", set_json(S)},
                         {"a", set_json(a)},
                         {"b", set_json(b)},
                         {"A", mask_list_json(d.violating)},
                         {"P(A | z_S=a)", to_string(upset_mass(lo, d.violating))},
                         {"P(A | z_S=b)", to_string(upset_mass(hi, d.violating))}};
            r.details["pairs_checked"] = pairs;
            return r;
          }
        }
      if (b == 0) break;
    }
  r.details["pairs_checked"] = pairs;
  return r;
}

// ---- ULC and Rayleigh ------------------------------------------------------------------------

inline PropertyReport check_ULC(const FiniteMeasure& mu) {
  mu.validate();
  RankSequence s = rank_sequence(mu);
  int n = mu.dim;
  PropertyReport r{"ULC", Verdict::pass, nullptr, "", json::object()};
  json ranks = json::array();
  for (const auto& x : s.r) ranks.push_back(to_string(x));
  r.details["ranks"] = ranks;
  int lo = -1, hi = -1;
  for (int j = 0; j <= n; ++j)
    if (s.r[j] != 0) {
      if (lo < 0) lo = j;
      hi = j;
    }
  for (int j = lo; j <= hi; ++j)
    if (s.r[j] == 0) {
      r.verdict = Verdict::fail;
      r.witness = {{"j", j}, {"reason", "internal zero"}, {"ranks", ranks}};
      return r;
    }
  for (int j = 1; j < n; ++j) {
    Rational a = s.r[j] / Rational(binomial(n, j)), b = s.r[j + 1] / Rational(binomial(n, j + 1)),
             c = s.r[j - 1] / Rational(binomial(n, j - 1));
    if (a * a < b * c) {
      r.verdict = Verdict::fail;
      r.witness = {{"j", j}, {"reason", "log-concavity"}, {"lhs", to_string(a * a)}, {"rhs", to_string(b * c)},
                   {"ranks", ranks}};
      return r;
    }
  }
  return r;
}

struct RayleighOptions {
  std::vector<Rational> grid = {frac(1, 4), frac(1, 2), Rational(1), Rational(2), Rational(4)};
  int max_grid_dim = 6;  // full grid only up to this dimension
  int random_fields = 200;
  std::uint64_t seed = 0;
};

// Binary NC: P(x_i = x_j = 1) <= P(x_i = 1) P(x_j = 1) for all i < j.
inline std::optional<std::pair<int, int>> binary_nc_violation(const FiniteMeasure& mu) {
  std::vector<Rational> p(mu.dim, Rational(0));
  std::vector<std::vector<Rational>> q(mu.dim, std::vector<Rational>(mu.dim, Rational(0)));
  for (const auto& [x, w] : mu.mass)
    for (int i = 0; i < mu.dim; ++i) {
      if (!x[i]) continue;
      p[i] += w;
      for (int j = i + 1; j < mu.dim; ++j)
        if (x[j]) q[i][j] += w;
    }
  for (int i = 0; i < mu.dim; ++i)
    for (int j = i + 1; j < mu.dim; ++j)
      if (q[i][j] > p[i] * p[j]) return std::make_pair(i, j);
  return std::nullopt;
}

// NC under external fields. A fail is exact; a pass only covers the fields tried.
inline PropertyReport check_Rayleigh(const FiniteMeasure& mu, const RayleighOptions& opt = {}) {
  mu.validate();
  require_binary(mu, "Rayleigh check");
  PropertyReport r{"Rayleigh", Verdict::pass_sampled, nullptr, "", json::object()};
  std::size_t tried = 0;
  auto attempt = [&](const ExternalField& w) {
    ++tried;
    FiniteMeasure t = impose_external_field(mu, w);
    if (auto v = binary_nc_violation(t)) {
      auto [i, j] = *v;
      json field = json::array();
      for (const auto& x : w) field.push_back(to_string(x));
      auto p = [&](auto pred) { return to_string(t.prob(pred)); };
      r.verdict = Verdict::fail;
      r.witness = {{"field", field},
                   {"i", i + 1},
                   {"j", j + 1},
                   {"P(xi=1)", p([&](const Point& x) { return x[i] == 1; })},
                   {"P(xj=1)", p([&](const Point& x) { return x[j] == 1; })},
                   {"P(both)", p([&](const Point& x) { return x[i] == 1 && x[j] == 1; })}};
      return true;
    }
    return false;
  };
  if (mu.dim <= opt.max_grid_dim) {
    std::vector<std::size_t> idx(mu.dim, 0);
    for (;;) {
      ExternalField w;
      for (int i = 0; i < mu.dim; ++i) w.push_back(opt.grid[idx[i]]);
      if (attempt(w)) break;
      int i = 0;
      while (i < mu.dim && ++idx[i] == opt.grid.size()) idx[i++] = 0;
      if (i == mu.dim) break;
    }
  }
  Rng rng(opt.seed);
  std::uniform_int_distribution<long> num(1, 16), den(1, 16);
  for (int t = 0; t < opt.random_fields && r.verdict != Verdict::fail; ++t) {
    ExternalField w;
    for (int i = 0; i < mu.dim; ++i) w.push_back(frac(num(rng), den(rng)));
    attempt(w);
  }
  r.details["fields_tried"] = tried;
  if (r.verdict != Verdict::fail) r.note = "no violation among the fields tried";
  return r;
}

// ---- Feder-Mihail --------------------------------------------------------------------------

namespace detail {

// Searches for a nontrivial up-set A with mu(A and x_j=1) < mu(A) mu(x_j=1)
// for every non-constant j. Branch and bound over up-set traces of the support.
template <typename Int>
std::optional<std::vector<std::size_t>> fm_counterexample(const Support& s, std::uint64_t node_cap,
                                                          bool& capped, std::uint64_t& nodes) {
  std::size_t n = s.points.size();
  int k = static_cast<int>(s.coords.size());
  Int L = to_int<Int>(s.L);
  std::vector<Int> N(n), Nj(k, Int(0));
  for (std::size_t x = 0; x < n; ++x) {
    N[x] = to_int<Int>(s.mass[x]);
    for (int j = 0; j < k; ++j)
      if (s.points[x][j]) Nj[j] += N[x];
  }
  // Functionals: each coordinate, their sum, and sums over coordinate groups
  // whose total is constant on the support (those vanish identically).
  std::vector<std::vector<int>> lambdas;
  for (int j = 0; j < k; ++j) lambdas.push_back({j});
  std::vector<int> all(k);
  for (int j = 0; j < k; ++j) all[j] = j;
  lambdas.push_back(all);
  if (k <= 16) {
    std::vector<std::uint32_t> groups;
    for (std::uint32_t g = 1; g < (1u << k); ++g) {
      if (__builtin_popcount(g) < 2) continue;
      bool minimal = true;
      for (std::uint32_t h : groups) minimal = minimal && (h & g) != h;
      if (!minimal) continue;
      int sum0 = -1;
      bool constant = true;
      for (std::size_t x = 0; x < n && constant; ++x) {
        int t = 0;
        for (int j = 0; j < k; ++j)
          if ((g >> j) & 1) t += s.points[x][j];
        if (sum0 < 0) sum0 = t;
        constant = t == sum0;
      }
      if (constant) {
        groups.push_back(g);
        lambdas.push_back(positions_of(g, k));
      }
    }
  }
  std::size_t F = lambdas.size();
  std::vector<std::vector<Int>> val(F, std::vector<Int>(n, Int(0)));
  for (std::size_t f = 0; f < F; ++f)
    for (std::size_t x = 0; x < n; ++x)
      for (int j : lambdas[f]) val[f][x] += N[x] * (L * Int(s.points[x][j]) - Nj[j]);
  Poset P(s.points);
  std::vector<Int> cur(F, Int(0)), neg(F, Int(0));
  auto negpart = [](const Int& v) { return v < Int(0) ? v : Int(0); };
  for (std::size_t f = 0; f < F; ++f)
    for (std::size_t x = 0; x < n; ++x) neg[f] += negpart(val[f][x]);
  std::vector<char> chosen(n, 0), forbidden(n, 0);
  std::optional<std::vector<std::size_t>> found;
  auto pruned = [&]() {
    for (std::size_t f = 0; f < F; ++f)
      if (cur[f] + neg[f] >= Int(0)) return true;
    return false;
  };
  auto rec = [&](auto&& self, std::size_t pos) -> void {
    if (found || capped) return;
    if (++nodes > node_cap) {
      capped = true;
      return;
    }
    if (pruned()) return;
    if (pos == n) {
      bool all_negative = true;
      for (int j = 0; j < k; ++j) all_negative = all_negative && cur[j] < Int(0);
      if (all_negative) {
        std::vector<std::size_t> a;
        for (std::size_t x = 0; x < n; ++x)
          if (chosen[x]) a.push_back(x);
        found = a;
      }
      return;
    }
    std::size_t i = P.top_down[pos];
    if (forbidden[i]) {
      self(self, pos + 1);
      return;
    }
    for (std::size_t f = 0; f < F; ++f) neg[f] -= negpart(val[f][i]);
    // include i
    chosen[i] = 1;
    for (std::size_t f = 0; f < F; ++f) cur[f] += val[f][i];
    self(self, pos + 1);
    for (std::size_t f = 0; f < F; ++f) cur[f] -= val[f][i];
    chosen[i] = 0;
    // exclude i and everything below it
    std::vector<std::size_t> newly;
    for (std::size_t y = P.down[i].find_first(); y != Bits::npos; y = P.down[i].find_next(y))
      if (y != i && !forbidden[y]) {
        forbidden[y] = 1;
        newly.push_back(y);
        for (std::size_t f = 0; f < F; ++f) neg[f] -= negpart(val[f][y]);
      }
    forbidden[i] = 1;
    self(self, pos + 1);
    forbidden[i] = 0;
    for (std::size_t y : newly) {
      forbidden[y] = 0;
      for (std::size_t f = 0; f < F; ++f) neg[f] += negpart(val[f][y]);
    }
    for (std::size_t f = 0; f < F; ++f) neg[f] += negpart(val[f][i]);
  };
  rec(rec, 0);
  return found;
}

}  // namespace detail

inline PropertyReport check_FM(const FiniteMeasure& mu, std::uint64_t node_cap = kFmNodeCap) {
  mu.validate();
  require_binary(mu, "FM check");
  PropertyReport r{"FM", Verdict::pass, nullptr, "", json::object()};
  detail::Support s = detail::support_of(mu);
  if (s.coords.empty()) return r;
  bool capped = false;
  std::uint64_t nodes = 0;
  auto found = detail::fits_int128(s.L) ? detail::fm_counterexample<__int128>(s, node_cap, capped, nodes)
                                        : detail::fm_counterexample<Integer>(s, node_cap, capped, nodes);
  r.details["search_nodes"] = nodes;
  if (found) {
    std::vector<Point> pts;
    std::vector<int> positions(s.coords.size());
    for (std::size_t t = 0; t < positions.size(); ++t) positions[t] = static_cast<int>(t);
    for (std::size_t x : *found) pts.push_back(s.points[x]);
    UpSet A = detail::embed_upset(mu, s, positions, pts);
    Rational pa = measure_of(mu, A);
    json D = json::array();
    for (int j : s.coords) {
      Rational pj = mu.prob([&](const Point& x) { return x[j] == 1; });
      Rational both = mu.prob([&](const Point& x) { return x[j] == 1 && A.contains(x); });
      if (both >= pa * pj) throw std::logic_error("FM witness does not reproduce");
      D.push_back({{"j", j + 1}, {"P(A and xj=1)", to_string(both)}, {"P(A)P(xj=1)", to_string(pa * pj)}});
    }
    r.verdict = Verdict::fail;
    r.witness = {{"A", upset_json(A)}, {"P(A)", to_string(pa)}, {"coordinates", D}};
  } else if (capped) {
    r.verdict = Verdict::inconclusive;
    r.note = "search node cap exceeded";
  }
  return r;
}

inline PropertyReport check_CFM(const FiniteMeasure& mu, std::uint64_t node_cap = kFmNodeCap) {
  require_binary(mu, "CFM check");
  PropertyReport r = detail::conditional_sweep(mu, "CFM", [&](const FiniteMeasure& c) { return check_FM(c, node_cap); });
  return r;
}

// ---- witness replay -------------------------------------------------------------------------

// Re-verifies a fail witness against the base predicates. Returns true iff the
// witness describes a genuine violation for this measure.
inline bool replay_witness(const std::string& property, const FiniteMeasure& mu0, const json& w) {
  FiniteMeasure mu = w.contains("conditioning") ? condition(mu0, conditioning_from_json(w.at("conditioning"))) : mu0;
  if (property == "NA" || property == "CNA") {
    UpSet A = upset_from_json(mu.box, w.at("A")), B = upset_from_json(mu.box, w.at("B"));
    return disjoint_dependence(A, B) && !negatively_correlated(mu, A, B);
  }
  if (property == "NC" || property == "CNC") {
    int i = w.at("i").get<int>() - 1, j = w.at("j").get<int>() - 1, s = w.at("s"), t = w.at("t");
    if (i == j || i < 0 || j < 0 || i >= mu.dim || j >= mu.dim) return false;
    Rational pa = mu.prob([&](const Point& x) { return x[i] >= s; });
    Rational pb = mu.prob([&](const Point& x) { return x[j] >= t; });
    return mu.prob([&](const Point& x) { return x[i] >= s && x[j] >= t; }) > pa * pb;
  }
  if (property == "FM" || property == "CFM") {
    UpSet A = upset_from_json(mu.box, w.at("A"));
    Rational pa = measure_of(mu, A);
    if (pa == 0 || pa == 1) return false;
    detail::Support s = detail::support_of(mu);
    for (int j : s.coords) {
      Rational pj = mu.prob([&](const Point& x) { return x[j] == 1; });
      if (mu.prob([&](const Point& x) { return x[j] == 1 && A.contains(x); }) >= pa * pj) return false;
    }
    return true;
  }
  if (property == "ULC") {
    PropertyReport again = check_ULC(mu);
    return again.failed() && again.witness.at("j") == w.at("j");
  }
  if (property == "Rayleigh") {
    ExternalField field;
    for (const auto& x : w.at("field")) field.push_back(parse_rational(x.get<std::string>()));
    FiniteMeasure t = impose_external_field(mu, field);
    int i = w.at("i").get<int>() - 1, j = w.at("j").get<int>() - 1;
    Rational pi = t.prob([&](const Point& x) { return x[i] == 1; });
    Rational pj = t.prob([&](const Point& x) { return x[j] == 1; });
    return t.prob([&](const Point& x) { return x[i] == 1 && x[j] == 1; }) > pi * pj;
  }
  throw std::invalid_argument("no replay for property " + property);
}

inline bool replay_witness(const std::string& property, const SetMeasure& nu, const json& w) {
  std::vector<Mask> gens;
  for (const auto& s : w.at("A")) gens.push_back(set_from_json(s));
  if (property == "NMP") {
    int k = w.at("k");
    if (nu.level_mass(k) == 0 || nu.level_mass(k + 1) == 0) return false;
    return upset_mass(nu.level(k), gens) > upset_mass(nu.level(k + 1), gens);
  }
  if (property == "SCP") {
    Mask S = set_from_json(w.at("S")), a = set_from_json(w.at("a")), b = set_from_json(w.at("b"));
    if (!subset_of(a, b) || !subset_of(b, S)) return false;
    if (conditional_set_prob(nu, S, a) == 0 || conditional_set_prob(nu, S, b) == 0) return false;
    return upset_mass(condition_set(nu, S, a), gens) > upset_mass(condition_set(nu, S, b), gens);
  }
  throw std::invalid_argument("no replay for property " + property);
}

}  // namespace urnassoc

#pragma once

#include <boost/dynamic_bitset.hpp>

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

namespace urnassoc {

using Bits = boost::dynamic_bitset<std::uint64_t>;
using Point = std::vector<int>;

inline bool leq(const Point& x, const Point& y) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > y[i]) return false;
  return true;
}

inline int rank_of(const Point& x) { return std::accumulate(x.begin(), x.end(), 0); }

// A finite subposet of N^k under the coordinatewise order.
struct Poset {
  std::vector<Point> points;
  std::vector<Bits> down;  // down[i] = {j : points[j] <= points[i]}, i included
  std::vector<Bits> up;    // up[i] = {j : points[j] >= points[i]}, i included
  std::vector<std::size_t> top_down;  // indices by decreasing rank

  explicit Poset(std::vector<Point> pts) : points(std::move(pts)) {
    std::size_t n = points.size();
    down.assign(n, Bits(n));
    up.assign(n, Bits(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (leq(points[j], points[i])) {
          down[i].set(j);
          up[j].set(i);
        }
    top_down.resize(n);
    std::iota(top_down.begin(), top_down.end(), 0);
    std::stable_sort(top_down.begin(), top_down.end(), [&](std::size_t a, std::size_t b) {
      return rank_of(points[a]) > rank_of(points[b]);
    });
  }

  std::size_t size() const { return points.size(); }

  Bits up_closure(const Bits& s) const {
    Bits out(size());
    for (std::size_t i = s.find_first(); i != Bits::npos; i = s.find_next(i)) out |= up[i];
    return out;
  }

  // Minimal elements of a subset.
  std::vector<std::size_t> minimal(const Bits& s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = s.find_first(); i != Bits::npos; i = s.find_next(i)) {
      Bits below = down[i] & s;
      if (below.count() == 1) out.push_back(i);
    }
    return out;
  }
};

// Calls leaf(upset) for every up-set of the poset (as a subset of its points),
// including the empty set and the whole poset. Stops and returns false once
// more than cap up-sets have been produced; leaf may also return false to stop.
template <typename Leaf>
bool enumerate_upsets(const Poset& P, std::size_t cap, Leaf&& leaf) {
  std::size_t n = P.size();
  std::size_t produced = 0;
  bool stopped = false;
  Bits chosen(n), forbidden(n);
  auto rec = [&](auto&& self, std::size_t pos) -> void {
    if (stopped) return;
    if (pos == n) {
      if (++produced > cap || !leaf(static_cast<const Bits&>(chosen))) stopped = true;
      return;
    }
    std::size_t i = P.top_down[pos];
    if (!forbidden.test(i)) {
      chosen.set(i);
      self(self, pos + 1);
      chosen.reset(i);
      if (stopped) return;
      Bits saved = forbidden;
      forbidden |= P.down[i];
      self(self, pos + 1);
      forbidden = std::move(saved);
    } else {
      self(self, pos + 1);
    }
  };
  rec(rec, 0);
  return !stopped || produced <= cap;
}

// Number of up-sets, or cap + 1 if there are more than cap.
inline std::size_t count_upsets(const Poset& P, std::size_t cap) {
  std::size_t c = 0;
  enumerate_upsets(P, cap, [&](const Bits&) { ++c; return true; });
  return c;
}

}  // namespace urnassoc

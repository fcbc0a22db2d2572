#pragma once

#include "urn_model.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace urnassoc {

// All randomness in the library and CLI flows from this generator.
using Rng = std::mt19937_64;

// n nonnegative rationals summing to 1, each w_j / sum(w) with w_j uniform in [0, spread].
inline std::vector<Rational> random_row(Rng& rng, int n, int spread = 6) {
  std::uniform_int_distribution<int> pick(0, spread);
  for (;;) {
    std::vector<int> w(n);
    int total = 0;
    for (auto& x : w) total += (x = pick(rng));
    if (total == 0) continue;
    std::vector<Rational> row;
    for (int x : w) row.push_back(frac(x, total));
    return row;
  }
}

inline UrnModel random_model(Rng& rng, int m, int n, int spread = 6) {
  UrnModel u{m, n, {}};
  for (int i = 0; i < m; ++i) u.probs.push_back(random_row(rng, n, spread));
  return u;
}

}  // namespace urnassoc

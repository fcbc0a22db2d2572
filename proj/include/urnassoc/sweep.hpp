#pragma once

#include "bipartite.hpp"
#include "lemmas.hpp"
#include "negdep.hpp"
#include "orientations.hpp"
#include "random.hpp"
#include "urn_model.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace urnassoc {

// Model families, spec enumeration and the theorem-verification harnesses
// shared by the CLI sweep command and the acceptance runner.

// ---- model families ---------------------------------------------------------------

// Point masses, the uniform row, and every permutation of (1/2, 1/(2(n-1)), ...).
inline std::vector<std::vector<Rational>> row_grid(int n) {
  std::set<std::vector<Rational>> rows;
  for (int j = 0; j < n; ++j) {
    std::vector<Rational> r(n, Rational(0));
    r[j] = 1;
    rows.insert(r);
  }
  rows.insert(std::vector<Rational>(n, frac(1, n)));
  if (n >= 2)
    for (int j = 0; j < n; ++j) {
      std::vector<Rational> r(n, frac(1, 2 * (n - 1)));
      r[j] = frac(1, 2);
      rows.insert(r);
    }
  return {rows.begin(), rows.end()};
}

struct ModelInstance {
  std::string key;
  UrnModel model;
};

// Generalized models with rows from row_grid(n). Balls are taken as a
// multiset of rows: relabeling balls changes neither mu nor mu^occ, and only
// relabels the ground set of the ball-set measures.
inline std::vector<ModelInstance> grid_models(int m, int n) {
  auto rows = row_grid(n);
  std::vector<ModelInstance> out;
  std::vector<std::size_t> pick(m, 0);
  for (;;) {
    UrnModel u{m, n, {}};
    for (std::size_t p : pick) u.probs.push_back(rows[p]);
    std::string key = "grid m=" + std::to_string(m) + " n=" + std::to_string(n) + " rows=";
    for (std::size_t t = 0; t < pick.size(); ++t) key += (t ? "," : "") + std::to_string(pick[t]);
    out.push_back({key, u});
    // Next non-decreasing index tuple.
    int i = m - 1;
    while (i >= 0 && pick[i] + 1 == rows.size()) --i;
    if (i < 0) break;
    ++pick[i];
    for (int t = i + 1; t < m; ++t) pick[t] = pick[i];
  }
  return out;
}

// Every grid model with 1 <= m <= max_m, 1 <= n <= max_n plus random_count
// seeded random rational models in the same range.
inline std::vector<ModelInstance> theorem_family(int max_m, int max_n, int random_count, std::uint64_t seed) {
  std::vector<ModelInstance> out;
  for (int m = 1; m <= max_m; ++m)
    for (int n = 1; n <= max_n; ++n)
      for (auto& inst : grid_models(m, n)) out.push_back(std::move(inst));
  Rng rng(seed);
  std::uniform_int_distribution<int> pm(1, max_m), pn(1, max_n);
  for (int t = 0; t < random_count; ++t) {
    int m = pm(rng), n = pn(rng);
    out.push_back({"random #" + std::to_string(t) + " m=" + std::to_string(m) + " n=" + std::to_string(n),
                   random_model(rng, m, n)});
  }
  return out;
}

// ---- conditioning specs ---------------------------------------------------------------

// d with P(Q_d^occ) > 0.
inline std::vector<AdmissibilitySpec> occ_specs(const UrnModel& u) {
  std::vector<AdmissibilitySpec> out;
  for (int d = 0; d < u.urns; ++d)
    if (prob_occ_event(u, d) != 0) out.push_back(AdmissibilitySpec::occ(d));
  return out;
}

// a of length 0..n-1, entries 0..m, with P(B_i = a_i, i <= d) > 0.
inline std::vector<AdmissibilitySpec> ball_specs(const UrnModel& u) {
  std::vector<AdmissibilitySpec> out;
  for (int d = 0; d < u.urns; ++d) {
    std::vector<int> a(d, 0);
    for (;;) {
      int sum = 0;
      for (int x : a) sum += x;
      if (sum <= u.balls && prob_ball_event(u, a) != 0) out.push_back(AdmissibilitySpec::balls(a));
      int i = 0;
      while (i < d && ++a[i] > u.balls) a[i++] = 0;
      if (i == d) break;
    }
  }
  return out;
}

inline std::string spec_key(const AdmissibilitySpec& s) {
  if (!s.ball) return "d=" + std::to_string(s.d);
  std::string k = "a=(";
  for (std::size_t i = 0; i < s.a.size(); ++i) k += (i ? "," : "") + std::to_string(s.a[i]);
  return k + ")";
}

// ---- summaries ------------------------------------------------------------------------

struct SweepSummary {
  std::string name;
  long instances = 0;
  long passed = 0;
  long failed = 0;
  long undecided = 0;
  json violations = json::array();    // first few failures
  json inconclusive = json::array();  // first few inconclusive instances

  void add(const std::string& key, const PropertyReport& r) {
    ++instances;
    if (r.passed()) {
      ++passed;
    } else if (r.failed()) {
      if (failed++ < 20) violations.push_back({{"instance", key}, {"report", r.to_json()}});
    } else if (undecided++ < 20) {
      inconclusive.push_back({{"instance", key}, {"report", r.to_json()}});
    }
  }
  bool ok() const { return instances > 0 && passed == instances; }

  json to_json() const {
    return {{"sweep", name},           {"instances", instances},     {"passed", passed},
            {"failed", failed},        {"inconclusive_count", undecided}, {"violations", violations},
            {"inconclusive", inconclusive}};
  }
};

// ---- theorem harnesses over urn models ------------------------------------------------------

// CNA of mu and mu^occ.
inline SweepSummary sweep_cna(const std::vector<ModelInstance>& family) {
  SweepSummary s{"cna"};
  for (const auto& [key, u] : family) {
    s.add(key + " mu", check_CNA(enumeration_measure(u)));
    s.add(key + " mu^occ", check_CNA(occupation_measure(u)));
  }
  return s;
}

// NMP of nu_d^occ and nu_a over every positive-probability spec.
inline SweepSummary sweep_nmp(const std::vector<ModelInstance>& family) {
  SweepSummary s{"nmp"};
  for (const auto& [key, u] : family) {
    for (const auto& spec : occ_specs(u)) s.add(key + " " + spec_key(spec), check_NMP(conditioned_ball_set(u, spec)));
    for (const auto& spec : ball_specs(u)) s.add(key + " " + spec_key(spec), check_NMP(conditioned_ball_set(u, spec)));
  }
  return s;
}

// Flow certificates for (H_X, g_nu), every odd X ⊆ [m].
inline SweepSummary sweep_hx(const std::vector<ModelInstance>& family) {
  SweepSummary s{"hx-certificates"};
  for (const auto& [key, u] : family) {
    std::vector<AdmissibilitySpec> specs = occ_specs(u);
    for (auto& b : ball_specs(u)) specs.push_back(std::move(b));
    for (const auto& spec : specs) {
      SetMeasure nu = conditioned_ball_set(u, spec);
      for (Mask X = 1; X < (Mask(1) << u.balls); ++X)
        if (popcount(X) % 2) {
          PropertyReport r = certify_H_X(nu, X);
          r.details.erase("certificate");
          s.add(key + " " + spec_key(spec) + " X=" + set_json(X).dump(), r);
        }
    }
  }
  return s;
}

// Ratio constancy of the two-sample decomposition, every X ⊆ [m].
inline SweepSummary sweep_decomposition(const std::vector<ModelInstance>& family) {
  SweepSummary s{"pg-decomposition"};
  for (const auto& [key, u] : family) {
    std::vector<AdmissibilitySpec> specs = occ_specs(u);
    for (auto& b : ball_specs(u)) specs.push_back(std::move(b));
    for (const auto& spec : specs)
      for (Mask X = 0; X < (Mask(1) << u.balls); ++X) {
        PropertyReport r = pG_decomposition_check(u, spec, X);
        r.details.erase("rows");
        s.add(key + " " + spec_key(spec) + " X=" + set_json(X).dump(), r);
      }
  }
  return s;
}

// Refined occupation measures: pushforward identity, CNC, CFM and CNA, every d.
inline SweepSummary sweep_refinement(const std::vector<ModelInstance>& family) {
  SweepSummary s{"refinement"};
  for (const auto& [key, u] : family)
    for (int d = 0; d < u.urns; ++d) {
      auto [refined, map] = refine_model(u, d);
      std::string k = key + " d=" + std::to_string(d);
      PropertyReport push{"pushforward", refinement_consistent(u, refined, map) ? Verdict::pass : Verdict::fail,
                          nullptr, "", json::object()};
      if (push.failed()) push.witness = {{"d", d}};
      s.add(k, push);
      FiniteMeasure occ = occupation_measure(refined);
      s.add(k, check_CNC(occ));
      s.add(k, check_CFM(occ));
      s.add(k, check_CNA(occ));
    }
  return s;
}

// Cutpoint sequences 0 = c_0 < ... < c_k = m + 1 with every gap in {1, 2}.
inline std::vector<std::vector<int>> small_gap_cutpoints(int m) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur{0};
  auto rec = [&](auto&& self) -> void {
    if (cur.back() == m + 1) {
      out.push_back(cur);
      return;
    }
    for (int g = 1; g <= 2; ++g)
      if (cur.back() + g <= m + 1) {
        cur.push_back(cur.back() + g);
        self(self);
        cur.pop_back();
      }
  };
  rec(rec);
  return out;
}

// CNA of interval measures whose cutpoint gaps are all 1 or 2.
inline SweepSummary sweep_interval(const std::vector<ModelInstance>& family) {
  SweepSummary s{"interval-cna"};
  for (const auto& [key, u] : family) {
    auto choices = small_gap_cutpoints(u.balls);
    std::vector<std::size_t> pick(u.urns, 0);
    for (;;) {
      IntervalSpec spec;
      std::string k = key + " cuts=";
      for (int j = 0; j < u.urns; ++j) {
        spec.cutpoints.push_back(choices[pick[j]]);
        k += json(choices[pick[j]]).dump();
      }
      PropertyReport r = check_CNA(interval_measure(u, spec));
      if (r.failed()) r.witness["cutpoints"] = spec.cutpoints;
      s.add(k, r);
      int j = 0;
      while (j < u.urns && ++pick[j] == choices.size()) pick[j++] = 0;
      if (j == u.urns) break;
    }
  }
  return s;
}

// ---- orientation calculus --------------------------------------------------------------------

// Every labeled multigraph on n vertices with m edges (ordered edge list).
template <typename Fn>
void for_each_labeled_graph(int n, int m, Fn&& fn) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) pairs.emplace_back(i, j);
  std::vector<std::size_t> pick(m, 0);
  MultiGraph g{n, std::vector<std::pair<int, int>>(m)};
  for (;;) {
    for (int e = 0; e < m; ++e) g.edges[e] = pairs[pick[e]];
    fn(static_cast<const MultiGraph&>(g));
    int e = 0;
    while (e < m && ++pick[e] == pairs.size()) pick[e++] = 0;
    if (e == m) break;
  }
}

// Every occupation spec and every ball spec with a_i in 0..ceil(deg_i / 2):
// the matching values plus at least one mismatching value per prefix vertex.
inline std::vector<AdmissibilitySpec> graph_specs(const MultiGraph& g) {
  std::vector<AdmissibilitySpec> out;
  for (int d = 0; d < g.n; ++d) out.push_back(AdmissibilitySpec::occ(d));
  for (int d = 0; d < g.n; ++d) {
    std::vector<int> a(d, 0), top(d);
    for (int v = 0; v < d; ++v) top[v] = (g.degree(v) + 1) / 2;
    for (;;) {
      out.push_back(AdmissibilitySpec::balls(a));
      int i = 0;
      while (i < d && ++a[i] > top[i]) a[i++] = 0;
      if (i == d) break;
    }
  }
  return out;
}

// Compares the recurrence engine with brute force on every spec and every S.
inline PropertyReport compare_recurrence(const MultiGraph& g, OrientationEngine& engine, long& tables) {
  PropertyReport r{"recurrence", Verdict::pass, nullptr, "", json::object()};
  for (const auto& spec : graph_specs(g)) {
    ++tables;
    SubsetTable brute = brute_table(g, spec), rec = engine.table(g, spec);
    if (brute == rec) continue;
    r.verdict = Verdict::fail;
    r.witness = {{"graph", {{"vertices", g.n}, {"edges", g.edges}}},
                 {"spec", spec_key(spec)},
                 {"brute", brute.val},
                 {"rec", rec.val}};
    return r;
  }
  return r;
}

struct RecurrenceSweep {
  SweepSummary summary;
  long tables = 0;
};

// All labeled multigraphs with 1..max_n vertices and 0..max_m edges.
inline RecurrenceSweep sweep_recurrence_exhaustive(int max_n, int max_m) {
  RecurrenceSweep out{SweepSummary{"recurrence-exhaustive"}};
  OrientationEngine engine;
  for (int n = 1; n <= max_n; ++n)
    for (int m = 0; m <= max_m; ++m)
      for_each_labeled_graph(n, m, [&](const MultiGraph& g) {
        engine.clear();
        out.summary.add("n=" + std::to_string(n) + " m=" + std::to_string(m),
                        compare_recurrence(g, engine, out.tables));
      });
  return out;
}

inline MultiGraph random_multigraph(Rng& rng, int n, int m) {
  std::uniform_int_distribution<int> v(0, n - 1);
  MultiGraph g{n, {}};
  for (int e = 0; e < m; ++e) g.edges.push_back(normalized(v(rng), v(rng)));
  return g;
}

inline RecurrenceSweep sweep_recurrence_sample(int n, int m, int count, std::uint64_t seed) {
  RecurrenceSweep out{SweepSummary{"recurrence-sample"}};
  Rng rng(seed);
  OrientationEngine engine;
  for (int t = 0; t < count; ++t) {
    engine.clear();
    out.summary.add("sample #" + std::to_string(t), compare_recurrence(random_multigraph(rng, n, m), engine, out.tables));
  }
  return out;
}

// Orientation-weighted H_X certificates on random graphs with odd |X|.
inline SweepSummary sweep_orientation_nmp(int max_n, int max_m, int count, std::uint64_t seed) {
  SweepSummary s{"orientation-nmp"};
  Rng rng(seed);
  std::uniform_int_distribution<int> pn(2, max_n), pm(1, max_m);
  OrientationEngine engine;
  int made = 0;
  while (made < count) {
    MultiGraph g = random_multigraph(rng, pn(rng), pm(rng));
    if (popcount(g.X()) % 2 == 0) continue;
    ++made;
    engine.clear();
    for (const auto& spec : graph_specs(g)) {
      PropertyReport r = verify_orientation_nmp(g, spec, &engine);
      r.details.erase("certificate");
      s.add("graph #" + std::to_string(made) + " " + spec_key(spec), r);
    }
  }
  return s;
}

// ---- weighted bipartite formulations ---------------------------------------------------------

// Balanced instance with zero-weight vertices and possibly disconnected parts.
inline WeightedBipartiteGraph random_balanced_bipartite(Rng& rng, int max_side = 5) {
  std::uniform_int_distribution<int> size(1, max_side), w(0, 3), pct(0, 99);
  WeightedBipartiteGraph g;
  g.n1 = size(rng);
  g.n2 = size(rng);
  int density = pct(rng);
  for (int u = 0; u < g.n1; ++u)
    for (int v = 0; v < g.n2; ++v)
      if (pct(rng) < density) g.edges.emplace_back(u, v);
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

// The three formulations agree and every certificate re-validates.
inline PropertyReport formulations_agree(const WeightedBipartiteGraph& g) {
  PropertyReport r{"nmp-formulations", Verdict::pass, nullptr, "", json::object()};
  PropertyReport hall = check_hall_weighted(g), lym = check_lym_independent(g);
  FlowOutcome fo = find_flow_certificate(g);
  bool cert = fo.certificate.has_value();
  bool valid = !cert || validate_certificate(g, *fo.certificate);
  r.details = {{"hall", verdict_name(hall.verdict)}, {"lym", verdict_name(lym.verdict)}, {"certificate", cert}};
  if (hall.passed() != cert || lym.passed() != cert || !valid) {
    r.verdict = Verdict::fail;
    r.witness = r.details;
    r.witness["certificate_valid"] = valid;
  }
  return r;
}

// ---- counterexample searches over ordinary models ------------------------------------------

// Rows (k_1/D, ..., k_n/D) with k_j >= 0 summing to D, in lexicographic order.
inline std::vector<std::vector<Rational>> composition_rows(int n, int D) {
  std::vector<std::vector<Rational>> out;
  std::vector<int> k(n, 0);
  auto rec = [&](auto&& self, int j, int left) -> void {
    if (j == n - 1) {
      k[j] = left;
      std::vector<Rational> row;
      for (int x : k) row.push_back(frac(x, D));
      out.push_back(std::move(row));
      return;
    }
    for (int x = 0; x <= left; ++x) {
      k[j] = x;
      self(self, j + 1, left - x);
    }
  };
  rec(rec, 0, D);
  return out;
}

struct SearchResult {
  std::string property;
  long models = 0;
  std::optional<UrnModel> model;
  PropertyReport report;

  json to_json() const {
    json j{{"property", property}, {"models_searched", models}, {"found", model.has_value()}};
    if (model) {
      json rows = json::array();
      for (const auto& p : model->probs.front()) rows.push_back(to_string(p));
      j["balls"] = model->balls;
      j["row"] = rows;
      j["report"] = report.to_json();
    }
    return j;
  }
};

// Ordinary models with 2 <= m <= max_m, 2 <= n <= max_n and rows on the
// 1/D grid, in order of (m, n, row); stops at the first failing mu^occ.
inline SearchResult search_ordinary(const std::string& property, int max_m, int max_n, int D,
                                    const std::function<PropertyReport(const FiniteMeasure&)>& check) {
  SearchResult res{property, 0, std::nullopt, PropertyReport{}};
  for (int m = 2; m <= max_m; ++m)
    for (int n = 2; n <= max_n; ++n)
      for (const auto& row : composition_rows(n, D)) {
        UrnModel u = UrnModel::ordinary_model(m, row);
        ++res.models;
        PropertyReport r = check(occupation_measure(u));
        if (r.failed()) {
          res.model = u;
          res.report = r;
          return res;
        }
      }
  return res;
}

inline SearchResult search_ulc(int max_m = 6, int max_n = 4, int D = 10) {
  return search_ordinary("ULC", max_m, max_n, D, [](const FiniteMeasure& mu) { return check_ULC(mu); });
}

inline SearchResult search_rayleigh(int max_m = 6, int max_n = 4, int D = 10) {
  return search_ordinary("Rayleigh", max_m, max_n, D, [](const FiniteMeasure& mu) { return check_Rayleigh(mu); });
}

}  // namespace urnassoc

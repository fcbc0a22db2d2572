#pragma once

#include "json_io.hpp"
#include "sweep.hpp"

#include <optional>
#include <string>
#include <vector>

namespace urnassoc::cli {

// Command implementations behind the urnassoc executable. Each returns the
// JSON it prints and the exit code: 0 all pass, 1 some property fails,
// 2 usage or input error (thrown as std::invalid_argument and mapped by main).

struct CommandResult {
  int exit_code = 0;
  json output;
};

struct CheckOptions {
  std::vector<std::string> props;
  std::optional<int> d;  // number of conditioned urns
  std::optional<std::vector<int>> a;
  std::optional<std::string> cutpoints;
  std::uint64_t seed = 0;
  std::uint64_t cap = 0;  // 0: library defaults
};

// ---- check ---------------------------------------------------------------------------

namespace detail {

inline const std::vector<std::string>& measure_props() {
  static const std::vector<std::string> p = {"na", "nc", "cna", "cnc", "ulc", "rayleigh", "fm", "cfm"};
  return p;
}

inline const std::vector<std::string>& set_props() {
  static const std::vector<std::string> p = {"nmp", "scp", "hx", "pg"};
  return p;
}

struct PropName {
  std::string base;
  std::string target;  // mu, mu^occ, interval, refined; empty for set properties
};

inline PropName parse_prop(const std::string& name) {
  auto dash = name.find('-');
  std::string base = name.substr(0, dash), suffix = dash == std::string::npos ? "" : name.substr(dash + 1);
  if (std::find(set_props().begin(), set_props().end(), base) != set_props().end()) {
    if (!suffix.empty()) throw std::invalid_argument("set property takes no suffix: " + name);
    return {base, ""};
  }
  if (std::find(measure_props().begin(), measure_props().end(), base) == measure_props().end())
    throw std::invalid_argument("unknown property: " + name);
  if (suffix.empty()) return {base, "mu"};
  if (suffix == "occ") return {base, "mu^occ"};
  if (suffix == "interval") return {base, "interval"};
  if (suffix == "refined") return {base, "refined"};
  throw std::invalid_argument("unknown property suffix: " + name);
}

inline AdmissibilitySpec conditioning_spec(const UrnModel& u, const CheckOptions& opt) {
  if (opt.d && opt.a) throw std::invalid_argument("give either --d or --a, not both");
  if (!opt.d && !opt.a) throw std::invalid_argument("set properties need --d or --a");
  AdmissibilitySpec spec = opt.d ? AdmissibilitySpec::occ(*opt.d) : AdmissibilitySpec::balls(*opt.a);
  if (spec.prefix() < 0 || spec.prefix() > u.urns - 1) throw std::invalid_argument("need 0 <= d <= n-1");
  return spec;
}

inline FiniteMeasure target_measure(const UrnModel& u, const std::string& target, const CheckOptions& opt) {
  if (target == "mu") return enumeration_measure(u);
  if (target == "mu^occ") return occupation_measure(u);
  if (target == "interval") {
    if (!opt.cutpoints) throw std::invalid_argument("interval properties need --cutpoints");
    return interval_measure(u, parse_cutpoints(*opt.cutpoints, u.balls, u.urns));
  }
  if (!opt.d) throw std::invalid_argument("refined properties need --d");
  if (*opt.d < 0 || *opt.d >= u.urns) throw std::invalid_argument("need 0 <= d < n for refinement");
  return occupation_measure(refine_model(u, *opt.d).first);
}

// Runs one property on every odd (hx) or every (pg) X and keeps the first failure.
inline PropertyReport aggregate_over_X(const std::string& name, const UrnModel& u, const AdmissibilitySpec& spec,
                                       bool odd_only) {
  PropertyReport r{name, Verdict::pass, nullptr, "", json::object()};
  SetMeasure nu = conditioned_ball_set(u, spec);
  long checked = 0;
  for (Mask X = 0; X < (Mask(1) << u.balls); ++X) {
    if (odd_only && popcount(X) % 2 == 0) continue;
    ++checked;
    PropertyReport inner = odd_only ? certify_H_X(nu, X) : pG_decomposition_check(u, spec, X);
    if (inner.failed()) {
      r.verdict = Verdict::fail;
      r.witness = inner.witness;
      r.witness["X"] = set_json(X);
      break;
    }
  }
  r.details["subsets_checked"] = checked;
  return r;
}

inline PropertyReport run_prop(const UrnModel& u, const PropName& p, const CheckOptions& opt) {
  std::size_t cap = opt.cap ? opt.cap : kUpsetCap;
  std::uint64_t node_cap = opt.cap ? opt.cap : kFmNodeCap;
  if (p.target.empty()) {
    AdmissibilitySpec spec = conditioning_spec(u, opt);
    if (p.base == "hx") return aggregate_over_X("hx-certificates", u, spec, true);
    if (p.base == "pg") return aggregate_over_X("pg-decomposition", u, spec, false);
    SetMeasure nu = conditioned_ball_set(u, spec);
    return p.base == "nmp" ? check_NMP(nu) : check_SCP(nu);
  }
  FiniteMeasure mu = target_measure(u, p.target, opt);
  if (p.base == "na") return check_NA(mu, cap);
  if (p.base == "nc") return check_NC(mu);
  if (p.base == "cna") return check_CNA(mu, cap);
  if (p.base == "cnc") return check_CNC(mu);
  if (p.base == "ulc") return check_ULC(mu);
  if (p.base == "fm") return check_FM(mu, node_cap);
  if (p.base == "cfm") return check_CFM(mu, node_cap);
  RayleighOptions ro;
  ro.seed = opt.seed;
  return check_Rayleigh(mu, ro);
}

inline json options_json(const CheckOptions& opt) {
  json j = json::object();
  if (opt.d) j["d"] = *opt.d;
  if (opt.a) j["a"] = *opt.a;
  if (opt.cutpoints) j["cutpoints"] = *opt.cutpoints;
  j["seed"] = opt.seed;
  j["cap"] = opt.cap;
  return j;
}

inline CheckOptions options_from_json(const json& j) {
  CheckOptions opt;
  if (j.contains("d")) opt.d = j.at("d").get<int>();
  if (j.contains("a")) opt.a = j.at("a").get<std::vector<int>>();
  if (j.contains("cutpoints")) opt.cutpoints = j.at("cutpoints").get<std::string>();
  opt.seed = j.value("seed", std::uint64_t(0));
  opt.cap = j.value("cap", std::uint64_t(0));
  return opt;
}

}  // namespace detail

inline CommandResult cmd_check(const UrnModel& u, const CheckOptions& opt) {
  if (opt.props.empty()) throw std::invalid_argument("no properties given (--prop)");
  std::vector<detail::PropName> names;
  for (const auto& p : opt.props) names.push_back(detail::parse_prop(p));
  json results = json::array();
  Verdict overall = Verdict::pass;
  for (std::size_t i = 0; i < names.size(); ++i) {
    PropertyReport r = detail::run_prop(u, names[i], opt);
    json entry{{"prop", opt.props[i]}};
    if (!names[i].target.empty()) entry["target"] = names[i].target;
    entry.update(r.to_json());
    results.push_back(entry);
    overall = merge(overall, r.verdict);
  }
  json out{{"command", "check"},
           {"model", model_to_json(u)},
           {"options", detail::options_json(opt)},
           {"results", results},
           {"verdict", verdict_name(overall)}};
  return {overall == Verdict::fail ? 1 : 0, out};
}

// Re-verifies every fail witness of a check report against the embedded model.
inline CommandResult cmd_replay(const json& report) {
  UrnModel u;
  CheckOptions opt;
  try {
    u = model_from_json(report.at("model"));
    opt = detail::options_from_json(report.at("options"));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
  json replayed = json::array();
  bool all = true;
  try {
    for (const auto& entry : report.at("results")) {
      if (entry.at("verdict") != "fail") continue;
      std::string prop = entry.at("prop");
      detail::PropName p = detail::parse_prop(prop);
      const json& w = entry.at("witness");
      bool confirmed;
      if (p.target.empty() && (p.base == "nmp" || p.base == "scp")) {
        SetMeasure nu = conditioned_ball_set(u, detail::conditioning_spec(u, opt));
        confirmed = replay_witness(p.base == "nmp" ? "NMP" : "SCP", nu, w);
      } else if (p.target.empty()) {
        // Certificates and decompositions are deterministic: the failure must recur.
        PropertyReport again = detail::run_prop(u, p, opt);
        confirmed = again.failed() && again.witness == w;
      } else {
        std::string name = entry.at("property");
        confirmed = replay_witness(name, detail::target_measure(u, p.target, opt), w);
      }
      all = all && confirmed;
      replayed.push_back({{"prop", prop}, {"confirmed", confirmed}});
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed witness: ") + e.what());
  }
  return {all ? 0 : 1, {{"command", "replay"}, {"replayed", replayed}, {"all_confirmed", all}}};
}

// ---- orient ---------------------------------------------------------------------------

enum class OrientMode { brute, rec, both };

inline OrientMode parse_mode(const std::string& s) {
  if (s == "brute") return OrientMode::brute;
  if (s == "rec") return OrientMode::rec;
  if (s == "both") return OrientMode::both;
  throw std::invalid_argument("--mode must be brute, rec or both");
}

inline CommandResult cmd_orient(const MultiGraph& g, const AdmissibilitySpec& spec, OrientMode mode,
                                std::uint64_t budget = kOrientationBudget) {
  check_spec(g, spec);
  json out{{"command", "orient"}, {"graph", graph_to_json(g)}};
  out["spec"] = spec.ball ? json{{"a", spec.a}} : json{{"d", spec.d}};
  out["X"] = set_json(g.X());
  json notes = json::array();
  if (has_loop_at_last(g)) notes.push_back("loop at v_n: no orientation is admissible");
  if (spec.ball)
    for (int v = 0; v < spec.prefix(); ++v)
      if (g.degree(v) != 2 * spec.a[v])
        notes.push_back("deg(v_" + std::to_string(v + 1) + ") = " + std::to_string(g.degree(v)) + " != 2a_" +
                        std::to_string(v + 1) + " = " + std::to_string(2 * spec.a[v]) + ": every count is zero");
  int code = 0;
  std::optional<SubsetTable> brute, rec;
  try {
    if (mode != OrientMode::rec) brute = brute_table(g, spec, budget);
    if (mode != OrientMode::brute) {
      OrientationEngine engine;
      rec = engine.table(g, spec);
    }
  } catch (const BudgetExceeded& e) {
    throw std::invalid_argument(std::string("budget exceeded: ") + e.what());
  } catch (const std::overflow_error& e) {
    throw std::invalid_argument(e.what());
  }
  out["mode"] = mode == OrientMode::brute ? "brute" : (mode == OrientMode::rec ? "rec" : "both");
  out["table"] = table_json(rec ? *rec : *brute);
  if (mode == OrientMode::both) {
    bool agree = *brute == *rec;
    out["agree"] = agree;
    if (!agree) {
      out["brute_table"] = table_json(*brute);
      code = 1;
    }
  }
  if (popcount(g.X()) % 2 == 1) {
    PropertyReport nmp = verify_orientation_nmp(g, spec);
    out["orientation_nmp"] = nmp.to_json();
    if (nmp.failed()) code = 1;
  }
  if (!notes.empty()) out["notes"] = notes;
  return {code, out};
}

// ---- refine ---------------------------------------------------------------------------

inline CommandResult cmd_refine(const UrnModel& u, int d) {
  if (d < 0 || d >= u.urns) throw std::invalid_argument("need 0 <= d < n for refinement");
  auto [refined, map] = refine_model(u, d);
  bool consistent = refinement_consistent(u, refined, map);
  json blocks = json::array();
  for (const auto& b : map.blocks) {
    json row = json::array();
    for (int c : b) row.push_back(c + 1);
    blocks.push_back(row);
  }
  json out{{"command", "refine"},
           {"d", d},
           {"old_urns", u.urns},
           {"new_urns", map.new_urns},
           {"blocks", blocks},
           {"pushforward_consistent", consistent}};
  if (consistent) out["refined"] = model_to_json(refined);
  return {consistent ? 0 : 1, out};
}

// ---- worked examples -------------------------------------------------------------------

inline CommandResult cmd_paper_examples() {
  json out{{"command", "paper-examples"}};
  bool ok = true;
  // Two fair balls, two urns, d = 1, A = {ball 2 in urn 2}.
  UrnModel u = UrnModel::ordinary_model(2, {frac(1, 2), frac(1, 2)});
  SetMeasure nu = ball_set_measure_occ(u, 1);
  std::vector<Mask> A = {0b10};
  Rational given0 = upset_mass(condition_set(nu, 0b01, 0), A);
  Rational given1 = upset_mass(condition_set(nu, 0b01, 0b01), A);
  PropertyReport scp = check_SCP(nu);
  bool scp_ok = given0 == frac(1, 2) && given1 == 0 && scp.failed() && replay_witness("SCP", nu, scp.witness);
  ok = ok && scp_ok;
  out["scp"] = {{"model", model_to_json(u)},
                {"d", 1},
                {"A", "ball 2 in urn 2"},
                {"nu(A | z_1=0)", to_string(given0)},
                {"nu(A | z_1=1)", to_string(given1)},
                {"check_SCP", scp.to_json()},
                {"reproduced", scp_ok}};
  json refinements = json::array();
  for (int d : {1, 0}) {
    CommandResult r = cmd_refine(u, d);
    int expected = d + u.balls * (u.urns - d);
    bool good = r.exit_code == 0 && r.output.at("new_urns") == expected;
    ok = ok && good;
    refinements.push_back({{"d", d},
                           {"new_urns", r.output.at("new_urns")},
                           {"expected_new_urns", expected},
                           {"pushforward_consistent", r.output.at("pushforward_consistent")}});
  }
  out["refinement"] = refinements;
  SearchResult ulc = search_ulc(), ray = search_rayleigh();
  for (auto* s : {&ulc, &ray})
    if (s->model) {
      FiniteMeasure occ = occupation_measure(*s->model);
      if (!replay_witness(s->property, occ, s->report.witness)) throw std::logic_error("search witness does not replay");
    }
  out["ulc_search"] = ulc.to_json();
  out["rayleigh_search"] = ray.to_json();
  ok = ok && ulc.model && ray.model;
  out["all_reproduced"] = ok;
  return {ok ? 0 : 1, out};
}

// ---- sweep ----------------------------------------------------------------------------

inline const std::vector<std::string>& sweep_names() {
  static const std::vector<std::string> s = {"cna",        "nmp",      "hx",         "pg",
                                             "refinement", "interval", "recurrence", "recurrence-sample",
                                             "orientation-nmp", "formulations", "identities"};
  return s;
}

inline CommandResult cmd_sweep(const json& config) {
  static const std::vector<std::string> keys = {"sweeps",         "max_balls",      "max_urns",
                                                "interval_max_urns", "random_models", "seed",
                                                "graph_vertices", "graph_edges",    "sample",
                                                "count",          "min_instances"};
  if (!config.is_object()) throw std::invalid_argument("sweep config must be a JSON object");
  for (const auto& [k, v] : config.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw std::invalid_argument("unknown config key: " + k);
  std::vector<std::string> sweeps;
  int max_m, max_n, max_n_interval, random_models, gv, ge, count, min_instances, sample_n, sample_m, sample_count;
  std::uint64_t seed;
  try {
    sweeps = config.at("sweeps").get<std::vector<std::string>>();
    max_m = config.value("max_balls", 3);
    max_n = config.value("max_urns", 3);
    max_n_interval = config.value("interval_max_urns", 2);
    random_models = config.value("random_models", 50);
    seed = config.value("seed", std::uint64_t(0));
    gv = config.value("graph_vertices", 4);
    ge = config.value("graph_edges", 5);
    count = config.value("count", 500);
    min_instances = config.value("min_instances", 200);
    json sample = config.value("sample", json{{"vertices", 5}, {"edges", 6}, {"count", 500}});
    sample_n = sample.at("vertices");
    sample_m = sample.at("edges");
    sample_count = sample.at("count");
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed sweep config: ") + e.what());
  }
  for (const auto& s : sweeps)
    if (std::find(sweep_names().begin(), sweep_names().end(), s) == sweep_names().end())
      throw std::invalid_argument("unknown sweep: " + s);
  if (max_m < 1 || max_m > 6 || max_n < 1 || max_n > 4 || max_n_interval < 1 || max_n_interval > 4)
    throw std::invalid_argument("model ranges outside desk scale (balls 1..6, urns 1..4)");
  if (gv < 1 || gv > 5 || ge < 0 || ge > 6 || sample_n < 1 || sample_n > 6 || sample_m < 0 || sample_m > 8)
    throw std::invalid_argument("graph ranges outside desk scale");
  if (random_models < 0 || count < 0 || min_instances < 0 || sample_count < 0)
    throw std::invalid_argument("counts must be nonnegative");

  json results = json::array();
  long violations = 0, inconclusive = 0;
  auto record = [&](const SweepSummary& s, json extra = json::object()) {
    json j = s.to_json();
    j.update(extra);
    results.push_back(j);
    violations += s.failed;
    inconclusive += s.undecided;
  };
  std::vector<ModelInstance> family;
  auto fam = [&]() -> const std::vector<ModelInstance>& {
    if (family.empty()) family = theorem_family(max_m, max_n, random_models, seed);
    return family;
  };
  for (const auto& name : sweeps) {
    if (name == "cna") record(sweep_cna(fam()));
    if (name == "nmp") record(sweep_nmp(fam()));
    if (name == "hx") record(sweep_hx(fam()));
    if (name == "pg") record(sweep_decomposition(fam()));
    if (name == "refinement") record(sweep_refinement(fam()));
    if (name == "interval") record(sweep_interval(theorem_family(max_m, max_n_interval, random_models, seed)));
    if (name == "recurrence") {
      RecurrenceSweep r = sweep_recurrence_exhaustive(gv, ge);
      record(r.summary, {{"tables", r.tables}});
    }
    if (name == "recurrence-sample") {
      RecurrenceSweep r = sweep_recurrence_sample(sample_n, sample_m, sample_count, seed);
      record(r.summary, {{"tables", r.tables}});
    }
    if (name == "orientation-nmp") record(sweep_orientation_nmp(gv, ge, count, seed));
    if (name == "formulations") {
      SweepSummary s{"formulations"};
      Rng rng(seed);
      for (int t = 0; t < count; ++t) s.add("graph #" + std::to_string(t), formulations_agree(random_balanced_bipartite(rng)));
      record(s);
    }
    if (name == "identities") {
      OccupationIdentityResult occ = occupation_identity_sweep(seed, min_instances);
      std::vector<LemmaTally> all = occ.tallies;
      for (auto& t : ball_identity_sweep(seed, min_instances)) all.push_back(std::move(t));
      json rows = json::array();
      for (const auto& t : all) {
        rows.push_back(t.to_json());
        violations += t.violations;
      }
      results.push_back({{"sweep", "identities"},
                         {"identities", rows},
                         {"parallel_copy_instances", occ.parallel_instances},
                         {"fail_without_2^l_factor", occ.verbatim_violations}});
    }
  }
  json out{{"command", "sweep"},
           {"config", config},
           {"results", results},
           {"violations", violations},
           {"inconclusive", inconclusive}};
  return {violations ? 1 : 0, out};
}

}  // namespace urnassoc::cli

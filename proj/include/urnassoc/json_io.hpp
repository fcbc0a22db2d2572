#pragma once

#include "multigraph.hpp"
#include "orientations.hpp"
#include "report.hpp"
#include "urn_model.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace urnassoc {

// Files and flags are external input: every malformed case throws
// std::invalid_argument so callers can map it to exit code 2.

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << text;
}

// "p/q" strings or bare integers.
inline Rational rational_from_json(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long>());
  throw std::invalid_argument("rational must be a \"p/q\" string or an integer");
}

inline UrnModel model_from_json(const json& j) {
  try {
    UrnModel u;
    u.balls = j.at("balls").get<int>();
    u.urns = j.at("urns").get<int>();
    for (const auto& row : j.at("probs")) {
      std::vector<Rational> r;
      for (const auto& p : row) r.push_back(rational_from_json(p));
      u.probs.push_back(std::move(r));
    }
    u.validate();
    return u;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed model: ") + e.what());
  }
}

inline json model_to_json(const UrnModel& u) {
  json rows = json::array();
  for (const auto& row : u.probs) {
    json r = json::array();
    for (const auto& p : row) r.push_back(to_string(p));
    rows.push_back(r);
  }
  return {{"balls", u.balls}, {"urns", u.urns}, {"probs", rows}};
}

inline MultiGraph graph_from_json(const json& j) {
  try {
    MultiGraph g{j.at("vertices").get<int>(), {}};
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw std::invalid_argument("edge must be a pair");
      g.edges.emplace_back(e[0].get<int>() - 1, e[1].get<int>() - 1);
    }
    g.validate();
    return g;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed graph: ") + e.what());
  }
}

inline json graph_to_json(const MultiGraph& g) {
  json edges = json::array();
  for (const auto& [i, j] : g.edges) edges.push_back({i + 1, j + 1});
  return {{"vertices", g.n}, {"edges", edges}};
}

// Sorted lexicographically by point (std::map order).
inline json measure_json(const FiniteMeasure& mu) {
  json a = json::array();
  for (const auto& [x, w] : mu.mass) a.push_back({{"point", x}, {"mass", to_string(w)}});
  return a;
}

inline json set_measure_json(const SetMeasure& nu) {
  json a = json::array();
  for (const auto& [s, w] : nu.mass) a.push_back({{"set", set_json(s)}, {"mass", to_string(w)}});
  return a;
}

// S -> count rows, S as 1-based edge lists, in increasing compressed order.
inline json table_json(const SubsetTable& t) {
  json rows = json::array();
  for (std::size_t i = 0; i < t.val.size(); ++i) rows.push_back({{"S", set_json(t.expand(i))}, {"count", t.val[i]}});
  return rows;
}

inline std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument("");
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed integer list: " + text);
    }
  }
  if (out.empty()) throw std::invalid_argument("empty integer list");
  return out;
}

inline std::vector<std::string> parse_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

// Per-urn lists separated by ';', e.g. "0,2,3;0,1,2,3". A single list is
// applied to every urn.
inline IntervalSpec parse_cutpoints(const std::string& text, int m, int n) {
  IntervalSpec spec;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) spec.cutpoints.push_back(parse_int_list(item));
  if (spec.cutpoints.size() == 1) spec.cutpoints.assign(n, spec.cutpoints.front());
  spec.validate(m, n);
  return spec;
}

}  // namespace urnassoc

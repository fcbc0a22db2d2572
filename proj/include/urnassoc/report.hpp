#pragma once

#include "measure.hpp"
#include "rational.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace urnassoc {

using json = nlohmann::ordered_json;

enum class Verdict { pass, pass_sampled, fail, inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::pass_sampled: return "pass-sampled";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

inline Verdict parse_verdict(const std::string& s) {
  if (s == "pass") return Verdict::pass;
  if (s == "pass-sampled") return Verdict::pass_sampled;
  if (s == "fail") return Verdict::fail;
  if (s == "inconclusive") return Verdict::inconclusive;
  throw std::invalid_argument("unknown verdict " + s);
}

// fail > inconclusive > pass-sampled > pass
inline int severity(Verdict v) {
  switch (v) {
    case Verdict::pass: return 0;
    case Verdict::pass_sampled: return 1;
    case Verdict::inconclusive: return 2;
    case Verdict::fail: return 3;
  }
  return 3;
}

inline Verdict merge(Verdict a, Verdict b) { return severity(a) >= severity(b) ? a : b; }

struct PropertyReport {
  std::string property;
  Verdict verdict = Verdict::pass;
  json witness;  // null unless fail
  std::string note;
  json details = json::object();

  bool passed() const { return verdict == Verdict::pass || verdict == Verdict::pass_sampled; }
  bool failed() const { return verdict == Verdict::fail; }

  json to_json() const {
    json j;
    j["property"] = property;
    j["verdict"] = verdict_name(verdict);
    if (!witness.is_null()) j["witness"] = witness;
    if (!note.empty()) j["note"] = note;
    if (!details.empty()) j["details"] = details;
    return j;
  }
};

// ---- small serialization helpers shared by witnesses ------------------------

inline json rational_json(const Rational& r) { return to_string(r); }

// 1-based sorted ball list.
inline json set_json(Mask s) {
  json a = json::array();
  for (int i = 0; i < 32; ++i)
    if ((s >> i) & 1) a.push_back(i + 1);
  return a;
}

inline Mask set_from_json(const json& a) {
  Mask s = 0;
  for (const auto& v : a) {
    int i = v.get<int>();
    if (i < 1 || i > 32) throw std::invalid_argument("ball index out of range");
    s |= Mask(1) << (i - 1);
  }
  return s;
}

inline json upset_json(const UpSet& a) { return a.minimal; }

inline UpSet upset_from_json(const Point& box, const json& j) {
  std::vector<Point> gens = j.get<std::vector<Point>>();
  for (const auto& g : gens)
    if (g.size() != box.size()) throw std::invalid_argument("up-set generator dimension mismatch");
  return UpSet::generated_by(box, gens);
}

// Conditioning {i -> a_i} serialized with 1-based coordinates.
inline json conditioning_json(const std::map<int, int>& fixed) {
  json j = json::array();
  for (const auto& [i, a] : fixed) j.push_back({{"coord", i + 1}, {"value", a}});
  return j;
}

inline std::map<int, int> conditioning_from_json(const json& j) {
  std::map<int, int> out;
  for (const auto& e : j) out[e.at("coord").get<int>() - 1] = e.at("value").get<int>();
  return out;
}

}  // namespace urnassoc

#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "passrate/errors.hpp"
#include "passrate/match_data.hpp"

namespace passrate {

// 6-point Likert scale, center at 3.5.
enum class Rating : int {
  VeryGood = 1,
  Good = 2,
  SlightlyGood = 3,
  SlightlyBad = 4,
  Bad = 5,
  VeryBad = 6,
};

enum class ThreeClass : int { Good = 1, OK = 2, Bad = 3 };

inline int code(Rating r) { return static_cast<int>(r); }
inline int code(ThreeClass c) { return static_cast<int>(c); }

inline const char* rating_name(Rating r) {
  switch (r) {
    case Rating::VeryGood: return "VeryGood";
    case Rating::Good: return "Good";
    case Rating::SlightlyGood: return "SlightlyGood";
    case Rating::SlightlyBad: return "SlightlyBad";
    case Rating::Bad: return "Bad";
    case Rating::VeryBad: return "VeryBad";
  }
  return "?";
}

inline Rating parse_rating(std::string s, const std::string& ctx = {}) {
  std::string lower = s;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (int v = 1; v <= 6; ++v) {
    std::string name = rating_name(static_cast<Rating>(v));
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lower == name) return static_cast<Rating>(v);
  }
  throw SchemaError(ctx + "unknown rating '" + s + "'");
}

struct LabelSet {
  std::string observer;
  std::map<std::size_t, Rating> ratings;  // pass_index -> rating
};

inline ThreeClass aggregate_to_three(Rating r) {
  switch (r) {
    case Rating::VeryGood:
    case Rating::Good: return ThreeClass::Good;
    case Rating::SlightlyGood:
    case Rating::SlightlyBad: return ThreeClass::OK;
    case Rating::Bad:
    case Rating::VeryBad: return ThreeClass::Bad;
  }
  throw LabelRangeError("bad rating code");
}

// Triangulation merge: on disagreement pick the label nearest the scale
// center (3.5); exact ties go to observer a, the designated primary.
inline LabelSet merge_labels(const LabelSet& a, const LabelSet& b) {
  if (a.ratings.size() != b.ratings.size())
    throw CoverageError("observer label sets cover different pass sets");
  LabelSet out;
  out.observer = a.observer + "+" + b.observer;
  for (const auto& [idx, ra] : a.ratings) {
    const auto it = b.ratings.find(idx);
    if (it == b.ratings.end())
      throw CoverageError("pass " + std::to_string(idx) +
                          " rated by one observer only");
    const Rating rb = it->second;
    if (ra == rb) {
      out.ratings[idx] = ra;
      continue;
    }
    const double da = std::abs(code(ra) - 3.5);
    const double db = std::abs(code(rb) - 3.5);
    out.ratings[idx] = db < da ? rb : ra;
  }
  return out;
}

inline std::vector<std::size_t> disagreement_report(const LabelSet& a,
                                                    const LabelSet& b,
                                                    int threshold = 2) {
  if (a.ratings.size() != b.ratings.size())
    throw CoverageError("observer label sets cover different pass sets");
  std::vector<std::size_t> out;
  for (const auto& [idx, ra] : a.ratings) {
    const auto it = b.ratings.find(idx);
    if (it == b.ratings.end())
      throw CoverageError("pass " + std::to_string(idx) +
                          " rated by one observer only");
    if (std::abs(code(ra) - code(it->second)) >= threshold)
      out.push_back(idx);
  }
  return out;  // map iteration keeps pass indices sorted
}

// Label file: pass_index,observer_id,rating — may hold several observers.
inline std::vector<LabelSet> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path);
  std::map<std::string, LabelSet> by_observer;
  std::vector<std::string> order;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != "pass_index,observer_id,rating")
        throw SchemaError(path +
                          ":1: expected header 'pass_index,observer_id,rating'");
      continue;
    }
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 3)
      throw SchemaError(path + ":" + std::to_string(line_no) +
                        ": expected 3 fields");
    const auto idx =
        static_cast<std::size_t>(detail::parse_int(f[0], path, line_no));
    auto& set = by_observer[f[1]];
    if (set.observer.empty()) {
      set.observer = f[1];
      order.push_back(f[1]);
    }
    if (set.ratings.count(idx))
      throw SchemaError(path + ":" + std::to_string(line_no) +
                        ": duplicate rating for pass " + f[0]);
    set.ratings[idx] =
        parse_rating(f[2], path + ":" + std::to_string(line_no) + ": ");
  }
  std::vector<LabelSet> out;
  for (const auto& name : order) out.push_back(by_observer[name]);
  return out;
}

inline void write_labels(const std::vector<LabelSet>& sets,
                         const std::string& path) {
  std::ofstream out(path);
  out << "pass_index,observer_id,rating\n";
  for (const auto& set : sets)
    for (const auto& [idx, r] : set.ratings)
      out << idx << ',' << set.observer << ',' << rating_name(r) << '\n';
}

}  // namespace passrate

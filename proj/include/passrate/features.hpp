#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "passrate/dominant_region.hpp"
#include "passrate/match_data.hpp"
#include "passrate/motion_model.hpp"

namespace passrate {

enum class FeatureCategory { BasicGeometric, Sequential, Physiological, Strategic };

struct CatalogEntry {
  std::string name;
  FeatureCategory category;
  std::string unit;
};

inline constexpr const char* kCatalogVersion = "pass-features-v1";

inline const std::vector<CatalogEntry>& feature_catalog() {
  static const std::vector<CatalogEntry> catalog = {
      {"pass_distance", FeatureCategory::BasicGeometric, "m"},
      {"pass_ball_speed", FeatureCategory::BasicGeometric, "m/s"},
      {"pass_angle_to_attack", FeatureCategory::BasicGeometric, "rad"},
      {"passer_speed", FeatureCategory::BasicGeometric, "m/s"},
      {"passer_dist_nearest_opponent", FeatureCategory::BasicGeometric, "m"},
      {"receiver_dist_nearest_opponent", FeatureCategory::BasicGeometric, "m"},
      {"passer_dist_to_opponent_goal", FeatureCategory::BasicGeometric, "m"},
      {"end_point_dist_to_opponent_goal", FeatureCategory::BasicGeometric, "m"},
      {"pass_lateral_position", FeatureCategory::BasicGeometric, "m"},
      {"ordinal_in_player_possession", FeatureCategory::Sequential, "count"},
      {"ordinal_in_team_possession", FeatureCategory::Sequential, "count"},
      {"ordinal_in_play_possession", FeatureCategory::Sequential, "count"},
      {"team_possession_duration", FeatureCategory::Sequential, "s"},
      {"play_possession_events", FeatureCategory::Sequential, "count"},
      {"sequence_outcome_is_shot_or_goal", FeatureCategory::Sequential, "flag"},
      {"min_opponent_time_to_midpoint", FeatureCategory::Physiological, "s"},
      {"min_opponent_time_to_end_point", FeatureCategory::Physiological, "s"},
      {"opponents_able_to_intercept", FeatureCategory::Physiological, "count"},
      {"receiver_time_to_end_point", FeatureCategory::Physiological, "s"},
      {"passer_region_area", FeatureCategory::Strategic, "m^2"},
      {"receiver_region_area", FeatureCategory::Strategic, "m^2"},
      {"team_pitch_share", FeatureCategory::Strategic, "fraction"},
      {"team_pitch_share_change", FeatureCategory::Strategic, "fraction"},
      {"team_area_attacking_half", FeatureCategory::Strategic, "m^2"},
      {"opposing_regions_crossed", FeatureCategory::Strategic, "count"},
  };
  return catalog;
}

struct FeatureVector {
  std::size_t pass_index = 0;
  std::vector<double> values;
  std::vector<bool> mask;  // true = valid
};

struct ColumnStats {
  double mean = 0;
  double stddev = 0;
};

struct FeatureMatrix {
  std::vector<FeatureVector> rows;
  std::string catalog_version = kCatalogVersion;
  std::vector<ColumnStats> standardization;  // empty until standardize()

  std::size_t columns() const { return feature_catalog().size(); }
};

struct FeatureConfig {
  MotionModel model;
  TimeStepGrid grid;
  // 16 boundary sides keep region areas within ~2% of the 32-side result
  // at roughly two-thirds of the per-frame cost; feature extraction favours
  // throughput because it subdivides every pass frame.
  int n_sides = 16;
  FacingMode facing = FacingMode::FaceBall;
  double assumed_ball_speed = 15.0;  // m/s, when no receive step exists
};

// Per-match feature evaluation with shared possession-sequence and
// dominant-subdivision caches.
class FeatureExtractor {
 public:
  FeatureExtractor(const MatchDataset& ds, FeatureConfig config)
      : ds_(ds),
        config_(std::move(config)),
        player_seqs_(possession_sequences(ds, PossessionKind::PlayerPossession)),
        team_seqs_(possession_sequences(ds, PossessionKind::TeamPossession)),
        play_seqs_(possession_sequences(ds, PossessionKind::PlayPossession)) {}

  FeatureVector compute(const PassRecord& pass) {
    const auto& catalog = feature_catalog();
    FeatureVector fv;
    fv.pass_index = pass.pass_index;
    fv.values.assign(catalog.size(), 0.0);
    fv.mask.assign(catalog.size(), true);
    std::size_t col = 0;
    auto set = [&](double v) {
      fv.values[col] = v;
      ++col;
    };
    auto set_masked = [&]() {
      fv.mask[col] = false;
      fv.values[col] = std::numeric_limits<double>::quiet_NaN();
      ++col;
    };

    const int step = pass.pass_event.step;
    const Team team = ds_.team_of(pass.passer);
    const double atk = ds_.attack_sign(team, step);
    const Vec2 pass_vec = pass.end_point - pass.start_point;
    const double pass_dist = geom::norm(pass_vec);
    const PlayerState passer_st =
        player_state(ds_, pass.passer, step, config_.facing);

    // --- basic geometric ---
    set(pass_dist);
    if (pass.receive_step)
      set(pass_dist /
          std::max(ds_.clock.seconds(*pass.receive_step - step), 1e-9));
    else
      set_masked();
    set(pass_dist > 1e-9
            ? std::acos(std::clamp(pass_vec.x * atk / pass_dist, -1.0, 1.0))
            : 0.0);
    set(passer_st.speed);

    const auto opponents_at = [&](int s) {
      std::vector<int> out;
      for (int id : ds_.players_on_pitch(s))
        if (ds_.team_of(id) != team) out.push_back(id);
      return out;
    };
    auto nearest_opponent_dist = [&](Vec2 from, int s) -> std::optional<double> {
      double best = std::numeric_limits<double>::infinity();
      for (int id : opponents_at(s))
        best = std::min(best, geom::dist(from, ds_.trajectory_of(id).at(s)));
      if (!std::isfinite(best)) return std::nullopt;
      return best;
    };
    if (auto d = nearest_opponent_dist(pass.start_point, step)) set(*d);
    else set_masked();
    if (pass.receiver && pass.receive_step) {
      if (auto d = nearest_opponent_dist(pass.end_point, *pass.receive_step))
        set(*d);
      else
        set_masked();
    } else {
      set_masked();
    }
    const Vec2 goal{atk * ds_.pitch.half_length, 0};
    set(geom::dist(pass.start_point, goal));
    set(geom::dist(pass.end_point, goal));
    set(std::abs(pass.start_point.y));

    // --- sequential ---
    const auto ordinal_in = [&](const std::vector<PossessionSequence>& seqs)
        -> std::optional<double> {
      for (const auto& seq : seqs) {
        for (std::size_t i = 0; i < seq.event_indices.size(); ++i)
          if (seq.event_indices[i] == pass.event_index)
            return static_cast<double>(i + 1);
      }
      return std::nullopt;
    };
    const auto enclosing = [&](const std::vector<PossessionSequence>& seqs)
        -> const PossessionSequence* {
      for (const auto& seq : seqs)
        for (std::size_t idx : seq.event_indices)
          if (idx == pass.event_index) return &seq;
      return nullptr;
    };
    for (const auto* seqs : {&player_seqs_, &team_seqs_, &play_seqs_}) {
      if (auto ord = ordinal_in(*seqs)) set(*ord);
      else set_masked();
    }
    if (const auto* seq = enclosing(team_seqs_)) {
      const int first = ds_.events[seq->event_indices.front()].step;
      set(ds_.clock.seconds(step - first));
    } else {
      set_masked();
    }
    if (const auto* seq = enclosing(play_seqs_)) {
      double count = 0;
      for (std::size_t idx : seq->event_indices)
        if (idx <= pass.event_index) ++count;
      set(count);
    } else {
      set_masked();
    }
    if (const auto* seq = enclosing(team_seqs_)) {
      // A shot is itself a ball touch, so it closes the run from inside
      // rather than appearing as the run's outcome.
      const EventKind last = ds_.events[seq->event_indices.back()].kind;
      set(last == EventKind::Shot || seq->outcome == EventKind::Goal ? 1.0
                                                                     : 0.0);
    } else {
      set_masked();
    }

    // --- physiological ---
    const auto opponents = opponents_at(step);
    auto min_opp_time = [&](Vec2 target) -> std::optional<double> {
      double best = std::numeric_limits<double>::infinity();
      for (int id : opponents) {
        const auto st = player_state(ds_, id, step, config_.facing);
        best = std::min(best,
                        reach_time(config_.model, st, target, config_.grid,
                                   config_.n_sides));
      }
      if (opponents.empty()) return std::nullopt;
      return std::min(best, config_.grid.tau_max);
    };
    const Vec2 midpoint = (pass.start_point + pass.end_point) / 2;
    if (auto t = min_opp_time(midpoint)) set(*t);
    else set_masked();
    if (auto t = min_opp_time(pass.end_point)) set(*t);
    else set_masked();

    const double ball_time =
        pass.receive_step
            ? ds_.clock.seconds(*pass.receive_step - step)
            : pass_dist / config_.assumed_ball_speed;
    if (opponents.empty()) {
      set_masked();
    } else {
      double count = 0;
      for (int id : opponents) {
        const auto st = player_state(ds_, id, step, config_.facing);
        const Vec2 closest = geom::closest_point_on_segment(
            st.position, pass.start_point, pass.end_point);
        if (reach_time(config_.model, st, closest, config_.grid,
                       config_.n_sides) <= ball_time)
          ++count;
      }
      set(count);
    }
    if (pass.receiver && ds_.trajectory_of(*pass.receiver).covers(step)) {
      const auto st = player_state(ds_, *pass.receiver, step, config_.facing);
      set(std::min(reach_time(config_.model, st, pass.end_point, config_.grid,
                              config_.n_sides),
                   config_.grid.tau_max));
    } else {
      set_masked();
    }

    // --- strategic (dominant region) ---
    const DominantSubdivision* at_pass = subdivision_at(step);
    const DominantSubdivision* at_receive =
        pass.receive_step ? subdivision_at(*pass.receive_step) : nullptr;
    auto area_of = [](const geom::Polygon& p) {
      return std::abs(geom::polygon_area_signed(p));
    };
    auto team_area = [&](const DominantSubdivision& sub, bool attacking_only) {
      double total = 0;
      for (const auto& [id, poly] : sub.regions) {
        if (ds_.team_of(id) != team) continue;
        if (attacking_only) {
          // keep x * atk >= 0
          total += area_of(geom::clip_halfplane(poly, {0, 0}, {-atk, 0}));
        } else {
          total += area_of(poly);
        }
      }
      return total;
    };

    if (at_pass && at_pass->regions.count(pass.passer))
      set(area_of(at_pass->regions.at(pass.passer)));
    else
      set_masked();
    if (at_receive && pass.receiver &&
        at_receive->regions.count(*pass.receiver))
      set(area_of(at_receive->regions.at(*pass.receiver)));
    else
      set_masked();
    const double share_at_pass =
        at_pass ? team_area(*at_pass, false) / ds_.pitch.area() : 0;
    if (at_pass) set(share_at_pass);
    else set_masked();
    if (at_pass && at_receive)
      set(team_area(*at_receive, false) / ds_.pitch.area() - share_at_pass);
    else
      set_masked();
    if (at_pass) set(team_area(*at_pass, true));
    else set_masked();
    if (at_pass) {
      double crossed = 0;
      for (const auto& [id, poly] : at_pass->regions) {
        if (ds_.team_of(id) == team || poly.size() < 3) continue;
        if (geom::segment_crosses_polygon(pass.start_point, pass.end_point,
                                          poly))
          ++crossed;
      }
      set(crossed);
    } else {
      set_masked();
    }
    return fv;
  }

  const DominantSubdivision* subdivision_at(int step) {
    auto it = subdivisions_.find(step);
    if (it != subdivisions_.end())
      return it->second ? &*it->second : nullptr;
    std::optional<DominantSubdivision> sub;
    std::map<int, PlayerState> states;
    for (int id : ds_.players_on_pitch(step))
      states[id] = player_state(ds_, id, step, config_.facing);
    try {
      if (states.size() >= 2)
        sub = dominant_subdivision(states, config_.model, config_.grid,
                                   config_.n_sides, ds_.pitch);
    } catch (const std::exception&) {
      sub.reset();
    }
    auto [pos, _] = subdivisions_.emplace(step, std::move(sub));
    return pos->second ? &*pos->second : nullptr;
  }

 private:
  const MatchDataset& ds_;
  FeatureConfig config_;
  std::vector<PossessionSequence> player_seqs_;
  std::vector<PossessionSequence> team_seqs_;
  std::vector<PossessionSequence> play_seqs_;
  std::map<int, std::optional<DominantSubdivision>> subdivisions_;
};

inline FeatureVector compute_features(const MatchDataset& ds,
                                      const PassRecord& pass,
                                      const FeatureConfig& config) {
  FeatureExtractor ex(ds, config);
  return ex.compute(pass);
}

inline FeatureMatrix feature_matrix(const MatchDataset& ds,
                                    const std::vector<PassRecord>& passes,
                                    const FeatureConfig& config) {
  FeatureExtractor ex(ds, config);
  FeatureMatrix m;
  m.rows.reserve(passes.size());
  for (const auto& p : passes) m.rows.push_back(ex.compute(p));
  return m;
}

// Masked-aware per-column z-scoring; masked entries impute to the column
// mean, i.e. 0 after standardization. Zero-variance columns map to 0.
inline std::vector<ColumnStats> column_stats(const FeatureMatrix& m) {
  const std::size_t n = m.columns();
  std::vector<ColumnStats> stats(n);
  for (std::size_t c = 0; c < n; ++c) {
    double sum = 0;
    std::size_t cnt = 0;
    for (const auto& row : m.rows)
      if (row.mask[c]) {
        sum += row.values[c];
        ++cnt;
      }
    const double mean = cnt ? sum / static_cast<double>(cnt) : 0.0;
    double ss = 0;
    for (const auto& row : m.rows)
      if (row.mask[c]) ss += (row.values[c] - mean) * (row.values[c] - mean);
    stats[c] = {mean, cnt ? std::sqrt(ss / static_cast<double>(cnt)) : 0.0};
  }
  return stats;
}

inline FeatureMatrix apply_standardization(
    const FeatureMatrix& m, const std::vector<ColumnStats>& stats) {
  FeatureMatrix out = m;
  out.standardization = stats;
  for (auto& row : out.rows)
    for (std::size_t c = 0; c < stats.size(); ++c) {
      if (!row.mask[c] || stats[c].stddev <= 0) {
        row.values[c] = 0.0;
      } else {
        row.values[c] = (row.values[c] - stats[c].mean) / stats[c].stddev;
      }
    }
  return out;
}

inline FeatureMatrix standardize(const FeatureMatrix& m) {
  if (m.rows.size() < 2)
    throw TooFewExamplesError("standardize needs at least 2 rows");
  return apply_standardization(m, column_stats(m));
}

inline void write_feature_matrix(const FeatureMatrix& m,
                                 const std::string& path) {
  std::ofstream out(path);
  out << "# catalog_version=" << m.catalog_version << '\n';
  out << "pass_index";
  for (const auto& e : feature_catalog()) out << ',' << e.name;
  out << '\n';
  char buf[64];
  for (const auto& row : m.rows) {
    out << row.pass_index;
    for (std::size_t c = 0; c < row.values.size(); ++c) {
      out << ',';
      if (!row.mask[c]) continue;  // masked entries stay empty
      std::snprintf(buf, sizeof buf, "%.17g", row.values[c]);
      out << buf;
    }
    out << '\n';
  }
}

inline FeatureMatrix read_feature_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path);
  FeatureMatrix m;
  std::string line;
  int line_no = 0;
  const std::size_t n = feature_catalog().size();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("catalog_version=");
      if (pos != std::string::npos)
        m.catalog_version = line.substr(pos + 16);
      continue;
    }
    if (line.rfind("pass_index", 0) == 0) continue;  // header
    const auto f = detail::split_csv(line);
    if (f.size() != n + 1)
      throw SchemaError(path + ":" + std::to_string(line_no) +
                        ": expected " + std::to_string(n + 1) + " fields");
    FeatureVector row;
    row.pass_index =
        static_cast<std::size_t>(detail::parse_int(f[0], path, line_no));
    row.values.assign(n, std::numeric_limits<double>::quiet_NaN());
    row.mask.assign(n, false);
    for (std::size_t c = 0; c < n; ++c) {
      if (f[c + 1].empty()) continue;
      row.values[c] = detail::parse_double(f[c + 1], path, line_no);
      row.mask[c] = true;
    }
    m.rows.push_back(std::move(row));
  }
  return m;
}

}  // namespace passrate

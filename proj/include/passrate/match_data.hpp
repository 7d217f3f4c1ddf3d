#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "passrate/errors.hpp"
#include "passrate/geometry.hpp"

namespace passrate {

using geom::Vec2;

enum class Team { Home, Away };

inline Team other_team(Team t) {
  return t == Team::Home ? Team::Away : Team::Home;
}

enum class EventKind {
  Pass,
  Touch,
  Shot,
  Tackle,
  Goal,
  Foul,
  StartOfHalf,
  EndOfHalf,
  OutOfPlay,
  Interception,
};

inline const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::Pass: return "Pass";
    case EventKind::Touch: return "Touch";
    case EventKind::Shot: return "Shot";
    case EventKind::Tackle: return "Tackle";
    case EventKind::Goal: return "Goal";
    case EventKind::Foul: return "Foul";
    case EventKind::StartOfHalf: return "StartOfHalf";
    case EventKind::EndOfHalf: return "EndOfHalf";
    case EventKind::OutOfPlay: return "OutOfPlay";
    case EventKind::Interception: return "Interception";
  }
  return "?";
}

inline std::optional<EventKind> parse_event_kind(const std::string& s) {
  static const std::array<EventKind, 10> kinds = {
      EventKind::Pass,      EventKind::Touch,      EventKind::Shot,
      EventKind::Tackle,    EventKind::Goal,       EventKind::Foul,
      EventKind::StartOfHalf, EventKind::EndOfHalf, EventKind::OutOfPlay,
      EventKind::Interception};
  for (EventKind k : kinds)
    if (s == event_kind_name(k)) return k;
  return std::nullopt;
}

// The ball is considered touched by the participant of these events.
inline bool is_ball_touch(EventKind k) {
  return k == EventKind::Pass || k == EventKind::Touch ||
         k == EventKind::Shot || k == EventKind::Tackle ||
         k == EventKind::Interception;
}

inline bool is_stoppage(EventKind k) {
  return k == EventKind::Foul || k == EventKind::Goal ||
         k == EventKind::OutOfPlay || k == EventKind::StartOfHalf ||
         k == EventKind::EndOfHalf;
}

struct Clock {
  int frequency_hz = 10;
  int max_step = 0;

  double seconds(int step) const {
    return static_cast<double>(step) / frequency_hz;
  }
  double dt() const { return 1.0 / frequency_hz; }
};

struct Pitch {
  double half_length = 52.5;  // x extent
  double half_width = 34.0;   // y extent

  double area() const { return 4 * half_length * half_width; }
  bool contains(Vec2 p, double margin = 0) const {
    return std::abs(p.x) <= half_length + margin &&
           std::abs(p.y) <= half_width + margin;
  }
  geom::Polygon rectangle() const {
    return {{-half_length, -half_width},
            {half_length, -half_width},
            {half_length, half_width},
            {-half_length, half_width}};
  }
};

struct Trajectory {
  int player = 0;
  int first_step = 0;
  int last_step = -1;
  std::vector<Vec2> samples;  // one per step in [first_step, last_step]

  bool covers(int step) const {
    return step >= first_step && step <= last_step;
  }
  Vec2 at(int step) const {
    if (!covers(step))
      throw OutOfIntervalError("step " + std::to_string(step) +
                               " outside interval of player " +
                               std::to_string(player));
    return samples[static_cast<std::size_t>(step - first_step)];
  }
};

struct Event {
  int step = 0;
  EventKind kind = EventKind::Touch;
  std::vector<int> participants;  // 1 or 2 players; may be empty for stoppages
};

struct PlayerState {
  Vec2 position;
  Vec2 velocity;
  double speed = 0;
  double facing = 0;  // radians in [-pi, pi)
};

struct PassRecord {
  std::size_t pass_index = 0;   // ordinal among Pass events
  std::size_t event_index = 0;  // into MatchDataset::events
  Event pass_event;
  int passer = 0;
  std::optional<int> receive_step;
  std::optional<int> receiver;
  bool completed = false;
  Vec2 start_point;
  Vec2 end_point;
};

enum class PossessionKind { PlayerPossession, TeamPossession, PlayPossession };

struct PossessionSequence {
  PossessionKind kind = PossessionKind::PlayerPossession;
  std::vector<std::size_t> event_indices;  // into MatchDataset::events
  EventKind outcome = EventKind::EndOfHalf;
};

struct MatchDataset {
  std::set<int> players;
  std::map<int, Team> team_map;
  std::map<int, Trajectory> trajectories;
  std::vector<Event> events;
  Clock clock;
  Pitch pitch;

  Team team_of(int player) const {
    auto it = team_map.find(player);
    if (it == team_map.end())
      throw IntegrityError("unknown player " + std::to_string(player));
    return it->second;
  }
  const Trajectory& trajectory_of(int player) const {
    auto it = trajectories.find(player);
    if (it == trajectories.end())
      throw IntegrityError("no trajectory for player " +
                           std::to_string(player));
    return it->second;
  }
  std::vector<int> players_on_pitch(int step) const {
    std::vector<int> out;
    for (const auto& [id, tr] : trajectories)
      if (tr.covers(step)) out.push_back(id);
    return out;
  }
  // Half of the match at `step` (1 or 2), from StartOfHalf events.
  int half_at(int step) const {
    int half = 1, seen = 0;
    for (const Event& e : events) {
      if (e.step > step) break;
      if (e.kind == EventKind::StartOfHalf && ++seen >= 2) half = 2;
    }
    return half;
  }
  // +1 if `team` attacks toward +x at `step`, else -1.
  double attack_sign(Team team, int step) const {
    const double h1 = team == Team::Home ? 1.0 : -1.0;
    return half_at(step) == 1 ? h1 : -h1;
  }
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline double parse_double(const std::string& s, const std::string& file,
                           int line_no) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw SchemaError(file + ":" + std::to_string(line_no) +
                      ": bad numeric field '" + s + "'");
  }
}

inline int parse_int(const std::string& s, const std::string& file,
                     int line_no) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw SchemaError(file + ":" + std::to_string(line_no) +
                      ": bad integer field '" + s + "'");
  }
}

}  // namespace detail

inline constexpr double kSpeedCapMetersPerSecond = 12.0;

inline MatchDataset load_match(const std::string& trajectory_file,
                               const std::string& event_file,
                               const std::string& team_file) {
  MatchDataset ds;

  {  // teams: player_id,team
    std::ifstream in(team_file);
    if (!in) throw SchemaError("cannot open " + team_file);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line_no == 1) {
        if (line != "player_id,team")
          throw SchemaError(team_file + ":1: expected header 'player_id,team'");
        continue;
      }
      if (line.empty()) continue;
      auto f = detail::split_csv(line);
      if (f.size() != 2)
        throw SchemaError(team_file + ":" + std::to_string(line_no) +
                          ": expected 2 fields");
      const int id = detail::parse_int(f[0], team_file, line_no);
      Team t;
      if (f[1] == "HOME") t = Team::Home;
      else if (f[1] == "AWAY") t = Team::Away;
      else
        throw SchemaError(team_file + ":" + std::to_string(line_no) +
                          ": team must be HOME or AWAY, got '" + f[1] + "'");
      ds.players.insert(id);
      ds.team_map[id] = t;
    }
  }

  {  // trajectories: step,player_id,x,y
    std::ifstream in(trajectory_file);
    if (!in) throw SchemaError("cannot open " + trajectory_file);
    std::string line;
    int line_no = 0;
    std::map<int, std::vector<std::pair<int, Vec2>>> rows;
    while (std::getline(in, line)) {
      ++line_no;
      if (line_no == 1) {
        if (line != "step,player_id,x,y")
          throw SchemaError(trajectory_file +
                            ":1: expected header 'step,player_id,x,y'");
        continue;
      }
      if (line.empty()) continue;
      auto f = detail::split_csv(line);
      if (f.size() != 4)
        throw SchemaError(trajectory_file + ":" + std::to_string(line_no) +
                          ": expected 4 fields");
      const int step = detail::parse_int(f[0], trajectory_file, line_no);
      const int id = detail::parse_int(f[1], trajectory_file, line_no);
      const double x = detail::parse_double(f[2], trajectory_file, line_no);
      const double y = detail::parse_double(f[3], trajectory_file, line_no);
      if (!ds.players.count(id))
        throw IntegrityError(trajectory_file + ":" + std::to_string(line_no) +
                             ": player " + std::to_string(id) +
                             " not in team file");
      rows[id].push_back({step, {x, y}});
    }
    for (auto& [id, samples] : rows) {
      std::stable_sort(samples.begin(), samples.end(),
                       [](auto& a, auto& b) { return a.first < b.first; });
      Trajectory tr;
      tr.player = id;
      tr.first_step = samples.front().first;
      tr.last_step = samples.back().first;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const int expect = tr.first_step + static_cast<int>(i);
        if (samples[i].first != expect)
          throw IntegrityError("trajectory gap for player " +
                               std::to_string(id) + " at step " +
                               std::to_string(expect));
        if (!ds.pitch.contains(samples[i].second, 2.0))
          throw IntegrityError("player " + std::to_string(id) +
                               " outside pitch bounds at step " +
                               std::to_string(samples[i].first));
        tr.samples.push_back(samples[i].second);
      }
      const double cap =
          kSpeedCapMetersPerSecond / ds.clock.frequency_hz + 1e-9;
      for (std::size_t i = 1; i < tr.samples.size(); ++i) {
        if (geom::dist(tr.samples[i - 1], tr.samples[i]) > cap)
          throw IntegrityError(
              "speed cap violated for player " + std::to_string(id) +
              " at step " + std::to_string(tr.first_step + (int)i));
      }
      ds.clock.max_step = std::max(ds.clock.max_step, tr.last_step);
      ds.trajectories[id] = std::move(tr);
    }
  }

  {  // events: step,kind,player1,player2
    std::ifstream in(event_file);
    if (!in) throw SchemaError("cannot open " + event_file);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line_no == 1) {
        if (line != "step,kind,player1,player2")
          throw SchemaError(event_file +
                            ":1: expected header 'step,kind,player1,player2'");
        continue;
      }
      if (line.empty()) continue;
      auto f = detail::split_csv(line);
      if (f.size() != 4)
        throw SchemaError(event_file + ":" + std::to_string(line_no) +
                          ": expected 4 fields");
      Event e;
      e.step = detail::parse_int(f[0], event_file, line_no);
      auto kind = parse_event_kind(f[1]);
      if (!kind)
        throw SchemaError(event_file + ":" + std::to_string(line_no) +
                          ": unknown event kind '" + f[1] + "'");
      e.kind = *kind;
      for (int fi : {2, 3}) {
        if (f[static_cast<std::size_t>(fi)].empty()) continue;
        const int id =
            detail::parse_int(f[static_cast<std::size_t>(fi)], event_file,
                              line_no);
        if (!ds.players.count(id))
          throw IntegrityError(event_file + ":" + std::to_string(line_no) +
                               ": unknown player " + std::to_string(id));
        e.participants.push_back(id);
      }
      if (e.kind == EventKind::Pass && e.participants.size() != 1)
        throw IntegrityError(event_file + ":" + std::to_string(line_no) +
                             ": Pass must have exactly one participant");
      if (is_ball_touch(e.kind)) {
        if (e.participants.empty())
          throw IntegrityError(event_file + ":" + std::to_string(line_no) +
                               ": ball-touch event needs a participant");
        if (!ds.trajectory_of(e.participants[0]).covers(e.step))
          throw IntegrityError(event_file + ":" + std::to_string(line_no) +
                               ": participant " +
                               std::to_string(e.participants[0]) +
                               " is off the pitch at step " +
                               std::to_string(e.step));
      }
      ds.events.push_back(std::move(e));
    }
    std::stable_sort(ds.events.begin(), ds.events.end(),
                     [](const Event& a, const Event& b) {
                       return a.step < b.step;
                     });
  }
  return ds;
}

// Canonical fixed-point formatting: exact round-trip through load_match.
inline std::string format_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  // avoid "-0.000"
  if (std::string(buf) == "-0.000") return "0.000";
  return buf;
}

inline void write_match(const MatchDataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream out(dir + "/trajectories.csv");
    out << "step,player_id,x,y\n";
    for (const auto& [id, tr] : ds.trajectories)
      for (int s = tr.first_step; s <= tr.last_step; ++s) {
        const Vec2 p = tr.at(s);
        out << s << ',' << id << ',' << format_coord(p.x) << ','
            << format_coord(p.y) << '\n';
      }
  }
  {
    std::ofstream out(dir + "/events.csv");
    out << "step,kind,player1,player2\n";
    for (const Event& e : ds.events) {
      out << e.step << ',' << event_kind_name(e.kind) << ',';
      if (!e.participants.empty()) out << e.participants[0];
      out << ',';
      if (e.participants.size() > 1) out << e.participants[1];
      out << '\n';
    }
  }
  {
    std::ofstream out(dir + "/teams.csv");
    out << "player_id,team\n";
    for (const auto& [id, t] : ds.team_map)
      out << id << ',' << (t == Team::Home ? "HOME" : "AWAY") << '\n';
  }
}

inline MatchDataset load_match_dir(const std::string& dir) {
  return load_match(dir + "/trajectories.csv", dir + "/events.csv",
                    dir + "/teams.csv");
}

struct BallSample {
  Vec2 position;
  bool extrapolated = false;
};

inline BallSample ball_position(const MatchDataset& ds, int step) {
  const Event* before = nullptr;
  const Event* after = nullptr;
  for (const Event& e : ds.events) {
    if (!is_ball_touch(e.kind)) continue;
    if (e.step <= step) before = &e;
    if (e.step >= step && !after) after = &e;
    if (e.step > step) break;
  }
  auto toucher_pos = [&](const Event& e) {
    return ds.trajectory_of(e.participants[0]).at(e.step);
  };
  if (before && after) {
    if (before->step == after->step) return {toucher_pos(*before), false};
    const Vec2 a = toucher_pos(*before);
    const Vec2 b = toucher_pos(*after);
    const double t = static_cast<double>(step - before->step) /
                     (after->step - before->step);
    return {a + (b - a) * t, false};
  }
  if (before) return {toucher_pos(*before), true};
  if (after) return {toucher_pos(*after), true};
  throw IntegrityError("no ball-touch events in match");
}

enum class FacingMode { MotionDirection, FaceBall };

inline PlayerState player_state(const MatchDataset& ds, int player, int step,
                                FacingMode mode = FacingMode::FaceBall) {
  const Trajectory& tr = ds.trajectory_of(player);
  if (!tr.covers(step))
    throw OutOfIntervalError("player " + std::to_string(player) +
                             " off pitch at step " + std::to_string(step));
  PlayerState st;
  st.position = tr.at(step);
  // 5-step central window, clamped one-sided at the interval ends.
  const int lo = std::max(tr.first_step, step - 2);
  const int hi = std::min(tr.last_step, step + 2);
  if (hi > lo)
    st.velocity = (tr.at(hi) - tr.at(lo)) / ((hi - lo) * ds.clock.dt());
  st.speed = geom::norm(st.velocity);
  if (mode == FacingMode::MotionDirection) {
    st.facing = st.speed > 1e-9
                    ? geom::normalize_angle(
                          std::atan2(st.velocity.y, st.velocity.x))
                    : 0.0;
  } else {
    const Vec2 d = ball_position(ds, step).position - st.position;
    st.facing =
        geom::norm(d) > 1e-9 ? geom::normalize_angle(std::atan2(d.y, d.x))
                             : 0.0;
  }
  return st;
}

inline std::vector<PassRecord> extract_passes(const MatchDataset& ds) {
  std::vector<PassRecord> out;
  for (std::size_t i = 0; i < ds.events.size(); ++i) {
    const Event& e = ds.events[i];
    if (e.kind != EventKind::Pass) continue;
    PassRecord rec;
    rec.pass_index = out.size();
    rec.event_index = i;
    rec.pass_event = e;
    rec.passer = e.participants[0];
    rec.start_point = ds.trajectory_of(rec.passer).at(e.step);
    const Event* next_touch = nullptr;
    for (std::size_t j = i + 1; j < ds.events.size(); ++j) {
      if (is_ball_touch(ds.events[j].kind) && ds.events[j].step > e.step) {
        next_touch = &ds.events[j];
        break;
      }
    }
    if (next_touch) {
      rec.receiver = next_touch->participants[0];
      rec.receive_step = next_touch->step;
      rec.completed = ds.team_of(*rec.receiver) == ds.team_of(rec.passer);
      rec.end_point = ds.trajectory_of(*rec.receiver).at(next_touch->step);
    } else {
      // No further touch: extrapolate 10 m along the passer's motion.
      const PlayerState st =
          player_state(ds, rec.passer, e.step, FacingMode::MotionDirection);
      rec.end_point = rec.start_point +
                      Vec2{std::cos(st.facing), std::sin(st.facing)} * 10.0;
      rec.completed = false;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<PossessionSequence> possession_sequences(
    const MatchDataset& ds, PossessionKind kind) {
  std::vector<PossessionSequence> out;
  if (kind == PossessionKind::PlayPossession) {
    PossessionSequence cur;
    cur.kind = kind;
    for (std::size_t i = 0; i < ds.events.size(); ++i) {
      cur.event_indices.push_back(i);
      if (is_stoppage(ds.events[i].kind) &&
          ds.events[i].kind != EventKind::StartOfHalf) {
        cur.outcome = ds.events[i].kind;
        out.push_back(std::move(cur));
        cur = {};
        cur.kind = kind;
      }
    }
    if (!cur.event_indices.empty()) {
      cur.outcome = EventKind::EndOfHalf;
      out.push_back(std::move(cur));
    }
    return out;
  }

  // Player/team possession: maximal runs over ball-touch events.
  std::vector<std::size_t> touches;
  for (std::size_t i = 0; i < ds.events.size(); ++i)
    if (is_ball_touch(ds.events[i].kind)) touches.push_back(i);

  auto run_key = [&](std::size_t idx) -> int {
    const int p = ds.events[idx].participants[0];
    return kind == PossessionKind::PlayerPossession
               ? p
               : static_cast<int>(ds.team_of(p));
  };
  PossessionSequence cur;
  cur.kind = kind;
  for (std::size_t t = 0; t < touches.size(); ++t) {
    if (!cur.event_indices.empty() &&
        run_key(touches[t]) != run_key(cur.event_indices.back())) {
      // The event that took possession away terminates the run.
      cur.outcome = ds.events[touches[t]].kind;
      out.push_back(std::move(cur));
      cur = {};
      cur.kind = kind;
    }
    cur.event_indices.push_back(touches[t]);
  }
  if (!cur.event_indices.empty()) {
    // Terminated by end of match or a trailing stoppage.
    cur.outcome = EventKind::EndOfHalf;
    const std::size_t last = cur.event_indices.back();
    for (std::size_t j = last + 1; j < ds.events.size(); ++j)
      if (is_stoppage(ds.events[j].kind)) {
        cur.outcome = ds.events[j].kind;
        break;
      }
    out.push_back(std::move(cur));
  }
  // A stoppage between runs refines the outcome of the preceding run.
  for (auto& seq : out) {
    const std::size_t last = seq.event_indices.back();
    for (std::size_t j = last + 1; j < ds.events.size(); ++j) {
      if (is_ball_touch(ds.events[j].kind)) break;
      if (is_stoppage(ds.events[j].kind)) {
        seq.outcome = ds.events[j].kind;
        break;
      }
    }
  }
  return out;
}

}  // namespace passrate

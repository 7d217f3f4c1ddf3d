#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "passrate/labels.hpp"
#include "passrate/match_data.hpp"

namespace passrate {

struct SynthConfig {
  unsigned seed = 42;
  int players_per_team = 11;
  int duration_steps = 6000;
  double pass_rate = 0.005;  // per free step
  double noise_level = 0.1;  // observer label perturbation probability
};

namespace detail {

// Seeded waypoint wander around a home anchor; per-step displacement stays
// well under the 12 m/s cap.
inline std::vector<Vec2> wander_path(std::mt19937& rng, Vec2 anchor,
                                     int steps, double dt,
                                     const Pitch& pitch) {
  std::uniform_real_distribution<double> off(-12.0, 12.0);
  std::uniform_real_distribution<double> spd(1.5, 6.0);
  std::vector<Vec2> path;
  path.reserve(static_cast<std::size_t>(steps));
  Vec2 pos = anchor;
  Vec2 target = anchor;
  double speed = spd(rng);
  for (int t = 0; t < steps; ++t) {
    if (geom::dist(pos, target) < 0.5) {
      target = anchor + Vec2{off(rng), off(rng)};
      target.x = std::clamp(target.x, -pitch.half_length + 1.0,
                            pitch.half_length - 1.0);
      target.y = std::clamp(target.y, -pitch.half_width + 1.0,
                            pitch.half_width - 1.0);
      speed = spd(rng);
    }
    const Vec2 d = target - pos;
    const double n = geom::norm(d);
    if (n > 1e-9) pos = pos + d * std::min(speed * dt / n, 1.0);
    path.push_back(pos);
  }
  return path;
}

}  // namespace detail

inline MatchDataset generate_match(const SynthConfig& config) {
  MatchDataset ds;
  std::mt19937 rng(config.seed);

  const int n = config.players_per_team;
  std::vector<int> home, away;
  for (int i = 0; i < n; ++i) {
    home.push_back(i + 1);
    away.push_back(i + 101);
  }
  std::uniform_real_distribution<double> ax(-45.0, 45.0);
  std::uniform_real_distribution<double> ay(-28.0, 28.0);
  for (int id : home) {
    ds.players.insert(id);
    ds.team_map[id] = Team::Home;
  }
  for (int id : away) {
    ds.players.insert(id);
    ds.team_map[id] = Team::Away;
  }
  for (int id : ds.players) {
    Trajectory tr;
    tr.player = id;
    tr.first_step = 0;
    tr.last_step = config.duration_steps - 1;
    tr.samples = detail::wander_path(rng, {ax(rng), ay(rng)},
                                     config.duration_steps, ds.clock.dt(),
                                     ds.pitch);
    ds.clock.max_step = tr.last_step;
    ds.trajectories[id] = std::move(tr);
  }

  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto pick = [&](const std::vector<int>& v) {
    std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
    return v[d(rng)];
  };
  auto teammates_of = [&](int p) {
    return ds.team_map[p] == Team::Home ? home : away;
  };
  auto opponents_of = [&](int p) {
    return ds.team_map[p] == Team::Home ? away : home;
  };
  auto emit = [&](int step, EventKind kind, std::vector<int> parts) {
    ds.events.push_back({step, kind, std::move(parts)});
  };

  const int half = config.duration_steps / 2;
  emit(0, EventKind::StartOfHalf, {});
  int holder = home[0];
  int pending_receiver = -1;
  int pending_step = -1;
  EventKind pending_kind = EventKind::Touch;
  int last_touch = 0;

  for (int t = 1; t < config.duration_steps - 1; ++t) {
    if (t == half) {
      emit(t - 1, EventKind::EndOfHalf, {});
      emit(t, EventKind::StartOfHalf, {});
      continue;
    }
    if (pending_step >= 0) {
      if (t == pending_step) {
        emit(t, pending_kind, {pending_receiver});
        holder = pending_receiver;
        last_touch = t;
        pending_step = -1;
      }
      continue;  // ball in flight
    }
    const double r = u(rng);
    if (r < config.pass_rate) {
      emit(t, EventKind::Pass, {holder});
      last_touch = t;
      const bool complete = u(rng) < 0.85;
      const int receiver = complete
                               ? pick(teammates_of(holder))
                               : pick(opponents_of(holder));
      const double d = geom::dist(ds.trajectories[holder].at(t),
                                  ds.trajectories[receiver].at(t));
      const int travel = std::clamp(
          static_cast<int>(std::lround(d / 15.0 * ds.clock.frequency_hz)), 3,
          30);
      pending_receiver = receiver;
      pending_step = std::min(t + travel, config.duration_steps - 2);
      pending_kind =
          complete ? EventKind::Touch : EventKind::Interception;
    } else if (r < config.pass_rate + 0.0006) {
      emit(t, EventKind::Shot, {holder});
      last_touch = t;
      if (u(rng) < 0.3) {
        emit(std::min(t + 5, config.duration_steps - 2), EventKind::Goal,
             {holder});
      } else {
        emit(std::min(t + 5, config.duration_steps - 2),
             EventKind::OutOfPlay, {});
      }
      holder = pick(opponents_of(holder));
      t = std::min(t + 10, config.duration_steps - 2);
    } else if (r < config.pass_rate + 0.0012) {
      const int tackler = pick(opponents_of(holder));
      emit(t, EventKind::Tackle, {tackler, holder});
      holder = tackler;
      last_touch = t;
    } else if (r < config.pass_rate + 0.0015) {
      emit(t, EventKind::Foul, {pick(opponents_of(holder)), holder});
    } else if (r < config.pass_rate + 0.0018) {
      emit(t, EventKind::OutOfPlay, {});
      holder = pick(opponents_of(holder));
    } else if (t - last_touch >= 8) {
      emit(t, EventKind::Touch, {holder});
      last_touch = t;
    }
  }
  emit(config.duration_steps - 1, EventKind::EndOfHalf, {});
  std::stable_sort(
      ds.events.begin(), ds.events.end(),
      [](const Event& a, const Event& b) { return a.step < b.step; });
  return ds;
}

// Hidden planted rule over pressure, pass length and completion; the two
// observer sets independently perturb the rule rating by one step with
// probability noise_level.
inline Rating planted_rating(const MatchDataset& ds, const PassRecord& pass) {
  double nearest = 50.0;
  for (int id : ds.players_on_pitch(pass.pass_event.step)) {
    if (ds.team_of(id) == ds.team_of(pass.passer)) continue;
    nearest = std::min(nearest,
                       geom::dist(pass.start_point,
                                  ds.trajectory_of(id).at(pass.pass_event.step)));
  }
  const double d = geom::dist(pass.start_point, pass.end_point);
  const double score = 3.5 - 0.9 * (nearest - 4.0) / 2.5 +
                       0.55 * (d - 12.0) / 8.0 +
                       (pass.completed ? -0.9 : 1.6);
  return static_cast<Rating>(
      std::clamp(static_cast<int>(std::lround(score)), 1, 6));
}

inline std::pair<LabelSet, LabelSet> generate_labels(
    const MatchDataset& ds, const std::vector<PassRecord>& passes,
    double noise_level, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LabelSet a, b;
  a.observer = "obs1";
  b.observer = "obs2";
  for (const auto& pass : passes) {
    const int base = code(planted_rating(ds, pass));
    for (LabelSet* set : {&a, &b}) {
      int v = base;
      if (u(rng) < noise_level) v += u(rng) < 0.5 ? -1 : 1;
      set->ratings[pass.pass_index] =
          static_cast<Rating>(std::clamp(v, 1, 6));
    }
  }
  return {a, b};
}

}  // namespace passrate

#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <vector>

#include "passrate/errors.hpp"
#include "passrate/geometry.hpp"
#include "passrate/match_data.hpp"

namespace passrate {

enum class MotionModelKind { Circle, Ellipse, DataDriven };

struct TimeStepGrid {
  double tau_step = 0.1;
  double tau_max = 10.0;

  int steps() const {
    return static_cast<int>(std::lround(tau_max / tau_step));
  }
  double tau_at(int i) const { return i * tau_step; }
};

// Displacement table for the data-driven model, 95th-percentile reach
// per (initial speed bin, angle-from-heading bin, elapsed-time bin).
struct ReachTable {
  int speed_bins = 4;
  int angle_bins = 16;
  int tau_bins = 20;
  double speed_max = 8.0;   // m/s, upper edge of last speed bin
  double tau_bin_width = 0.5;  // s
  std::vector<double> distance;  // [speed][angle][tau]

  double& at(int s, int a, int t) {
    return distance[static_cast<std::size_t>((s * angle_bins + a) * tau_bins +
                                             t)];
  }
  double at(int s, int a, int t) const {
    return distance[static_cast<std::size_t>((s * angle_bins + a) * tau_bins +
                                             t)];
  }
};

struct MotionModel {
  MotionModelKind kind = MotionModelKind::Ellipse;
  double v_max = 7.8;  // m/s
  double a_max = 3.0;  // m/s^2
  ReachTable table;    // used iff kind == DataDriven
};

struct ReachableBoundary {
  int player = 0;
  double tau = 0;
  geom::Polygon polygon;  // simple, counter-clockwise
};

inline constexpr double kMinReachMeters = 0.01;

namespace detail {

inline double circle_radius(const MotionModel& m, double speed, double tau) {
  return std::min(m.v_max * tau, speed * tau + 0.5 * m.a_max * tau * tau);
}

struct EllipseReach {
  double forward;
  double backward;
  double lateral;
};

// Kinematic reach envelope: accelerate forward; decelerate to rest before
// moving backward; pure acceleration laterally. All capped by v_max * tau.
inline EllipseReach ellipse_reach(const MotionModel& m, double speed,
                                  double tau) {
  const double cap = m.v_max * tau;
  const double fwd = std::min(speed * tau + 0.5 * m.a_max * tau * tau, cap);
  const double tau_rev = speed / m.a_max;
  const double back_free = tau > tau_rev
                               ? -speed * tau_rev +
                                     0.5 * m.a_max * (tau - tau_rev) *
                                         (tau - tau_rev)
                               : 0.0;
  const double back = std::min(std::max(0.0, back_free), cap);
  const double lat = std::min(0.5 * m.a_max * tau * tau, cap);
  return {std::max(fwd, kMinReachMeters), std::max(back, kMinReachMeters),
          std::max(lat, kMinReachMeters)};
}

// Bilinear interpolation over (speed, tau); nearest bin in angle.
inline double table_reach(const ReachTable& t, double speed, double rel_angle,
                          double tau) {
  const double a01 =
      (geom::normalize_angle(rel_angle) + M_PI) / (2 * M_PI);  // [0,1)
  int ai = static_cast<int>(a01 * t.angle_bins);
  ai = std::clamp(ai, 0, t.angle_bins - 1);

  const double sw = t.speed_max / t.speed_bins;
  const double sc = std::clamp(speed / sw - 0.5, 0.0,
                               static_cast<double>(t.speed_bins - 1));
  const int s0 = static_cast<int>(sc);
  const int s1 = std::min(s0 + 1, t.speed_bins - 1);
  const double sf = sc - s0;

  const double tc = std::clamp(tau / t.tau_bin_width - 0.5, 0.0,
                               static_cast<double>(t.tau_bins - 1));
  const int t0 = static_cast<int>(tc);
  const int t1 = std::min(t0 + 1, t.tau_bins - 1);
  const double tf = tc - t0;

  const double d00 = t.at(s0, ai, t0), d01 = t.at(s0, ai, t1);
  const double d10 = t.at(s1, ai, t0), d11 = t.at(s1, ai, t1);
  return (1 - sf) * ((1 - tf) * d00 + tf * d01) +
         sf * ((1 - tf) * d10 + tf * d11);
}

}  // namespace detail

inline ReachableBoundary reachable_polygon(const MotionModel& model,
                                           const PlayerState& state,
                                           double tau, int n_sides = 32) {
  if (tau <= 0) throw DegenerateError("tau must be positive");
  if (n_sides < 8) throw DegenerateError("n_sides must be >= 8");
  ReachableBoundary rb;
  rb.tau = tau;
  rb.polygon.reserve(static_cast<std::size_t>(n_sides));

  const double cf = std::cos(state.facing);
  const double sf = std::sin(state.facing);
  auto to_world = [&](double fx, double fy) {  // facing-frame -> world
    return state.position + Vec2{fx * cf - fy * sf, fx * sf + fy * cf};
  };

  switch (model.kind) {
    case MotionModelKind::Circle: {
      const double r = std::max(detail::circle_radius(model, state.speed, tau),
                                kMinReachMeters);
      for (int i = 0; i < n_sides; ++i) {
        const double a = 2 * M_PI * i / n_sides;
        rb.polygon.push_back(state.position +
                             Vec2{r * std::cos(a), r * std::sin(a)});
      }
      break;
    }
    case MotionModelKind::Ellipse: {
      const auto r = detail::ellipse_reach(model, state.speed, tau);
      const double center = (r.forward - r.backward) / 2;
      const double semi_major = (r.forward + r.backward) / 2;
      const double semi_minor = r.lateral;
      for (int i = 0; i < n_sides; ++i) {
        const double a = 2 * M_PI * i / n_sides;
        rb.polygon.push_back(to_world(center + semi_major * std::cos(a),
                                      semi_minor * std::sin(a)));
      }
      break;
    }
    case MotionModelKind::DataDriven: {
      for (int i = 0; i < n_sides; ++i) {
        const double a = 2 * M_PI * i / n_sides;  // angle from heading
        const double d = std::max(
            detail::table_reach(model.table, state.speed, a, tau),
            kMinReachMeters);
        rb.polygon.push_back(to_world(d * std::cos(a), d * std::sin(a)));
      }
      break;
    }
  }
  return rb;
}

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

// Smallest grid tau whose reachable polygon contains the target; binary
// search is valid because the boundaries are nested in tau.
inline double reach_time(const MotionModel& model, const PlayerState& state,
                         Vec2 target, const TimeStepGrid& grid,
                         int n_sides = 32) {
  const int n = grid.steps();
  auto contains = [&](int i) {
    const auto rb = reachable_polygon(model, state, grid.tau_at(i), n_sides);
    return geom::point_in_polygon_tol(target, rb.polygon, 1e-9);
  };
  if (!contains(n)) return kUnreachable;
  int lo = 1, hi = n;  // tau_at(hi) is known to contain the target
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (contains(mid)) hi = mid;
    else lo = mid + 1;
  }
  return grid.tau_at(lo);
}

inline ReachTable fit_data_driven(
    const std::vector<const Trajectory*>& trajectories, const Clock& clock,
    const ReachTable& bins = ReachTable{}) {
  std::size_t total_steps = 0;
  for (const auto* tr : trajectories) total_steps += tr->samples.size();
  if (total_steps < 1000)
    throw InsufficientDataError("need >= 1000 trajectory steps, have " +
                                std::to_string(total_steps));

  ReachTable t = bins;
  t.distance.assign(
      static_cast<std::size_t>(t.speed_bins * t.angle_bins * t.tau_bins), 0.0);
  std::vector<std::vector<double>> samples(t.distance.size());

  const double dt = clock.dt();
  const double sw = t.speed_max / t.speed_bins;
  for (const auto* tr : trajectories) {
    const int n = static_cast<int>(tr->samples.size());
    for (int i = 2; i + 1 < n; ++i) {
      const Vec2 v = (tr->samples[static_cast<std::size_t>(i + 1)] -
                      tr->samples[static_cast<std::size_t>(i - 1)]) /
                     (2 * dt);
      const double speed = geom::norm(v);
      const double heading = speed > 1e-6 ? std::atan2(v.y, v.x) : 0.0;
      int sbin = std::min(static_cast<int>(speed / sw), t.speed_bins - 1);
      for (int tb = 0; tb < t.tau_bins; ++tb) {
        const double tau = (tb + 1) * t.tau_bin_width;
        const int j = i + static_cast<int>(std::lround(tau / dt));
        if (j >= n) break;
        const Vec2 d = tr->samples[static_cast<std::size_t>(j)] -
                       tr->samples[static_cast<std::size_t>(i)];
        const double rel =
            geom::normalize_angle(std::atan2(d.y, d.x) - heading);
        int abin = static_cast<int>((rel + M_PI) / (2 * M_PI) * t.angle_bins);
        abin = std::clamp(abin, 0, t.angle_bins - 1);
        samples[static_cast<std::size_t>(
                    (sbin * t.angle_bins + abin) * t.tau_bins + tb)]
            .push_back(geom::norm(d));
      }
    }
  }

  for (std::size_t c = 0; c < samples.size(); ++c) {
    auto& v = samples[c];
    if (v.empty()) continue;
    const std::size_t q =
        std::min(v.size() - 1,
                 static_cast<std::size_t>(0.95 * static_cast<double>(v.size())));
    std::nth_element(v.begin(), v.begin() + static_cast<long>(q), v.end());
    t.distance[c] = v[q];
  }
  // Fill empty bins from the nearest populated tau bin in the same cell,
  // then from the nearest populated angle bin.
  for (int s = 0; s < t.speed_bins; ++s)
    for (int a = 0; a < t.angle_bins; ++a)
      for (int tb = 0; tb < t.tau_bins; ++tb) {
        if (t.at(s, a, tb) > 0) continue;
        for (int off = 1; off < std::max(t.tau_bins, t.angle_bins); ++off) {
          double fill = 0;
          if (tb - off >= 0 && t.at(s, a, tb - off) > 0)
            fill = t.at(s, a, tb - off);
          else if (tb + off < t.tau_bins && t.at(s, a, tb + off) > 0)
            fill = t.at(s, a, tb + off);
          else {
            const int al = (a - off % t.angle_bins + t.angle_bins) %
                           t.angle_bins;
            const int ar = (a + off) % t.angle_bins;
            if (t.at(s, al, tb) > 0) fill = t.at(s, al, tb);
            else if (t.at(s, ar, tb) > 0) fill = t.at(s, ar, tb);
          }
          if (fill > 0) {
            t.at(s, a, tb) = fill;
            break;
          }
        }
        if (t.at(s, a, tb) <= 0) t.at(s, a, tb) = kMinReachMeters;
      }
  // Isotonic clamp: distances non-decreasing in tau within each cell.
  for (int s = 0; s < t.speed_bins; ++s)
    for (int a = 0; a < t.angle_bins; ++a)
      for (int tb = 1; tb < t.tau_bins; ++tb)
        t.at(s, a, tb) = std::max(t.at(s, a, tb), t.at(s, a, tb - 1));
  return t;
}

inline void write_reach_table(const ReachTable& t, const std::string& path) {
  std::ofstream out(path);
  out << "speed_bin,angle_bin,tau_bin,distance\n";
  char buf[64];
  for (int s = 0; s < t.speed_bins; ++s)
    for (int a = 0; a < t.angle_bins; ++a)
      for (int tb = 0; tb < t.tau_bins; ++tb) {
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g\n", s, a, tb,
                      t.at(s, a, tb));
        out << buf;
      }
}

}  // namespace passrate

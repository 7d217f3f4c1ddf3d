#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "passrate/errors.hpp"
#include "passrate/geometry.hpp"
#include "passrate/match_data.hpp"
#include "passrate/motion_model.hpp"

namespace passrate {

struct IntersectionVertex {
  Vec2 point;
  double tau = 0;
  std::pair<int, int> pair;  // player ids
};

struct PairGraph {
  std::vector<IntersectionVertex> vertices;
  std::vector<std::pair<int, int>> edges;  // vertex indices
};

using VertexPath = std::vector<int>;  // vertex indices, in path order

struct PairBoundary {
  std::pair<int, int> pair;
  std::vector<Vec2> polyline;
};

struct DominantSubdivision {
  int step = 0;
  std::map<int, geom::Polygon> regions;
  // A player's dominance can be disconnected: a far blob they reach before
  // anyone else, separate from the ground at their feet. regions holds the
  // piece around the player; any further pieces land here.
  std::map<int, std::vector<geom::Polygon>> satellites;
  std::vector<int> fallback_players;  // regions rebuilt from the grid oracle
};

struct OwnershipGrid {
  double cell_size = 0.5;
  int nx = 0;
  int ny = 0;
  Vec2 origin;                // lower-left pitch corner
  std::vector<int> owner;     // row-major, [iy * nx + ix]

  Vec2 cell_center(int ix, int iy) const {
    return origin + Vec2{(ix + 0.5) * cell_size, (iy + 0.5) * cell_size};
  }
  int at(int ix, int iy) const {
    return owner[static_cast<std::size_t>(iy * nx + ix)];
  }
};

inline double region_area(const geom::Polygon& polygon) {
  return geom::polygon_area(polygon);
}

inline std::vector<IntersectionVertex> pair_intersections(
    const ReachableBoundary& a, const ReachableBoundary& b) {
  std::vector<IntersectionVertex> out;
  const auto& pa = a.polygon;
  const auto& pb = b.polygon;
  const std::size_t na = pa.size();
  const std::size_t nb = pb.size();
  // Only edges inside the other ring's bounds can cross; prefiltering by
  // box keeps the pairwise scan close to linear for barely touching rings.
  Vec2 blo = pb[0], bhi = pb[0];
  for (const Vec2 v : pb) {
    blo.x = std::min(blo.x, v.x);
    blo.y = std::min(blo.y, v.y);
    bhi.x = std::max(bhi.x, v.x);
    bhi.y = std::max(bhi.y, v.y);
  }
  std::vector<std::size_t> ia;
  for (std::size_t i = 0; i < na; ++i) {
    const Vec2 u = pa[i], w = pa[(i + 1) % na];
    if (std::max(u.x, w.x) < blo.x || std::min(u.x, w.x) > bhi.x ||
        std::max(u.y, w.y) < blo.y || std::min(u.y, w.y) > bhi.y)
      continue;
    ia.push_back(i);
  }
  // Per-edge boxes of b let the inner loop reject almost every pair with
  // four comparisons; only genuinely touching edges reach the exact test.
  std::vector<std::array<double, 4>> ebb(nb);
  for (std::size_t j = 0; j < nb; ++j) {
    const Vec2 u = pb[j], w = pb[(j + 1) % nb];
    ebb[j] = {std::min(u.x, w.x), std::max(u.x, w.x), std::min(u.y, w.y),
              std::max(u.y, w.y)};
  }
  for (const std::size_t i : ia)
    for (std::size_t j = 0; j < nb; ++j) {
      const Vec2 u = pa[i], w = pa[(i + 1) % na];
      if (ebb[j][1] < std::min(u.x, w.x) || ebb[j][0] > std::max(u.x, w.x) ||
          ebb[j][3] < std::min(u.y, w.y) || ebb[j][2] > std::max(u.y, w.y))
        continue;
      const auto p = geom::segment_intersection(pa[i], pa[(i + 1) % na],
                                                pb[j], pb[(j + 1) % nb]);
      if (!p) continue;
      bool dup = false;
      for (const auto& v : out)
        if (geom::dist(v.point, *p) < 1e-9) {
          dup = true;
          break;
        }
      if (!dup) out.push_back({*p, a.tau, {a.player, b.player}});
    }
  return out;
}

// Vertices sit on discrete tau levels (the grid rings, plus any refinement
// rings inserted near the boundary tip). Edges join consecutive levels, plus
// every vertex pair sharing the minimum level.
inline PairGraph build_pair_graph(std::vector<IntersectionVertex> vertices,
                                  double tau_step,
                                  double max_edge_len =
                                      std::numeric_limits<double>::infinity()) {
  PairGraph g;
  g.vertices = std::move(vertices);
  if (g.vertices.empty()) return g;
  const double tol = tau_step * 1e-6;

  std::vector<double> levels;
  for (const auto& v : g.vertices) levels.push_back(v.tau);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end(),
                           [&](double a, double b) { return b - a < tol; }),
               levels.end());
  auto level_of = [&](double tau) {
    const auto it = std::lower_bound(levels.begin(), levels.end(), tau - tol);
    return static_cast<int>(it - levels.begin());
  };

  const int n = static_cast<int>(g.vertices.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const int li = level_of(g.vertices[static_cast<std::size_t>(i)].tau);
      const int lj = level_of(g.vertices[static_cast<std::size_t>(j)].tau);
      // A gap wider than one grid step means the curves are disjoint there.
      const bool adjacent =
          std::abs(li - lj) == 1 &&
          std::abs(g.vertices[static_cast<std::size_t>(i)].tau -
                   g.vertices[static_cast<std::size_t>(j)].tau) <
              tau_step + tol;
      const bool both_min = li == 0 && lj == 0;
      // When one front crosses the other more than twice per ring, vertices
      // at adjacent taus may sit on different branches of the locus; a
      // length cap keeps such spurious cross-branch chords out.
      if (adjacent &&
          geom::dist(g.vertices[static_cast<std::size_t>(i)].point,
                     g.vertices[static_cast<std::size_t>(j)].point) >
              max_edge_len)
        continue;
      if (adjacent || both_min) g.edges.push_back({i, j});
    }
  return g;
}

namespace detail {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<std::size_t>(a)] = b;
    return true;
  }
};

}  // namespace detail

// Kruskal restricted to endpoint degree < 2: yields simple paths spanning
// the graph's components.
inline std::vector<VertexPath> spanning_paths(const PairGraph& g) {
  struct EdgeRec {
    double len;
    Vec2 lo, hi;
    int a, b;
  };
  std::vector<EdgeRec> edges;
  edges.reserve(g.edges.size());
  for (auto [a, b] : g.edges) {
    const Vec2 pa = g.vertices[static_cast<std::size_t>(a)].point;
    const Vec2 pb = g.vertices[static_cast<std::size_t>(b)].point;
    EdgeRec r{geom::dist(pa, pb), pa, pb, a, b};
    if (!geom::lex_less(r.lo, r.hi)) std::swap(r.lo, r.hi);
    edges.push_back(r);
  }
  std::sort(edges.begin(), edges.end(), [](const EdgeRec& x, const EdgeRec& y) {
    if (x.len != y.len) return x.len < y.len;
    if (x.lo != y.lo) return geom::lex_less(x.lo, y.lo);
    return geom::lex_less(x.hi, y.hi);
  });

  const std::size_t n = g.vertices.size();
  std::vector<int> degree(n, 0);
  std::vector<std::vector<int>> adj(n);
  detail::UnionFind uf(n);
  for (const auto& e : edges) {
    if (degree[static_cast<std::size_t>(e.a)] >= 2 ||
        degree[static_cast<std::size_t>(e.b)] >= 2)
      continue;
    if (!uf.unite(e.a, e.b)) continue;  // would close a cycle
    ++degree[static_cast<std::size_t>(e.a)];
    ++degree[static_cast<std::size_t>(e.b)];
    adj[static_cast<std::size_t>(e.a)].push_back(e.b);
    adj[static_cast<std::size_t>(e.b)].push_back(e.a);
  }

  std::vector<VertexPath> paths;
  std::vector<bool> visited(n, false);
  for (std::size_t start = 0; start < n; ++start) {
    if (visited[start] || degree[start] > 1) continue;  // path endpoints
    VertexPath path;
    int cur = static_cast<int>(start);
    int prev = -1;
    while (cur >= 0) {
      visited[static_cast<std::size_t>(cur)] = true;
      path.push_back(cur);
      int next = -1;
      for (int nb : adj[static_cast<std::size_t>(cur)])
        if (nb != prev) {
          next = nb;
          break;
        }
      prev = cur;
      cur = next;
    }
    paths.push_back(std::move(path));
  }
  return paths;
}

inline PairBoundary select_boundary(const PairGraph& g,
                                    const std::vector<VertexPath>& paths) {
  if (paths.empty()) throw NoPathError("no spanning paths");
  auto path_polyline = [&](const VertexPath& p) {
    std::vector<Vec2> line;
    line.reserve(p.size());
    for (int i : p) line.push_back(g.vertices[static_cast<std::size_t>(i)].point);
    return line;
  };
  auto path_length = [&](const VertexPath& p) {
    double len = 0;
    for (std::size_t i = 1; i < p.size(); ++i)
      len += geom::dist(g.vertices[static_cast<std::size_t>(p[i - 1])].point,
                        g.vertices[static_cast<std::size_t>(p[i])].point);
    return len;
  };
  auto has_equal_tau_edge = [&](const VertexPath& p) {
    for (std::size_t i = 1; i < p.size(); ++i)
      if (std::abs(g.vertices[static_cast<std::size_t>(p[i - 1])].tau -
                   g.vertices[static_cast<std::size_t>(p[i])].tau) < 1e-12)
        return true;
    return false;
  };
  auto lex_line_less = [](const std::vector<Vec2>& a,
                          const std::vector<Vec2>& b) {
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
      if (a[i] == b[i]) continue;
      return geom::lex_less(a[i], b[i]);
    }
    return a.size() < b.size();
  };

  const VertexPath* best = nullptr;
  if (paths.size() == 1) {
    best = &paths[0];
  } else {
    std::vector<const VertexPath*> qualifying;
    for (const auto& p : paths)
      if (has_equal_tau_edge(p)) qualifying.push_back(&p);
    if (qualifying.size() == 1) {
      best = qualifying[0];
    } else {
      // None or several qualify: fall back to the longest candidate.
      const auto& pool = qualifying.empty()
                             ? [&] {
                                 std::vector<const VertexPath*> all;
                                 for (const auto& p : paths) all.push_back(&p);
                                 return all;
                               }()
                             : qualifying;
      double best_len = -1;
      std::vector<Vec2> best_line;
      for (const auto* p : pool) {
        const double len = path_length(*p);
        auto line = path_polyline(*p);
        if (len > best_len ||
            (len == best_len && lex_line_less(line, best_line))) {
          best = p;
          best_len = len;
          best_line = std::move(line);
        }
      }
    }
  }
  PairBoundary b;
  if (!g.vertices.empty()) b.pair = g.vertices[0].pair;
  b.polyline = path_polyline(*best);
  return b;
}

// --- enclosing-polygon walk ------------------------------------------------

namespace detail {

struct WalkHit {
  Vec2 point;
  std::size_t segment;
  double t;  // distance from ray origin
};

inline std::optional<WalkHit> shoot_ray(
    Vec2 origin, Vec2 dir, const std::vector<geom::Segment>& segs) {
  std::optional<WalkHit> best;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Vec2 r = dir;
    const Vec2 s = segs[i].b - segs[i].a;
    const double denom = geom::cross(r, s);
    if (std::abs(denom) < 1e-14) continue;
    const Vec2 qp = segs[i].a - origin;
    const double t = geom::cross(qp, s) / denom;
    const double u = geom::cross(qp, r) / denom;
    if (t <= 1e-9 || u < -1e-12 || u > 1 + 1e-12) continue;
    if (!best || t < best->t) best = WalkHit{origin + dir * t, i, t};
  }
  return best;
}

inline bool on_segment(Vec2 p, const geom::Segment& s, double tol) {
  return geom::point_segment_distance(p, s.a, s.b) <= tol;
}

}  // namespace detail

// Trace the innermost face containing `site` by walking the segment
// arrangement, taking the most counter-clockwise turn at every crossing.
inline geom::Polygon enclosing_polygon(Vec2 site,
                                       const std::vector<geom::Segment>& segments,
                                       Vec2 pitch_center = {0, 0}) {
  constexpr double kTol = 1e-9;

  // Site sitting on a segment: nudge it toward the pitch center.
  for (const auto& s : segments)
    if (detail::on_segment(site, s, kTol)) {
      Vec2 d = pitch_center - site;
      const double n = geom::norm(d);
      site = n > kTol ? site + d * (1e-6 / n) : site + Vec2{1e-6, 0};
      break;
    }

  // Initial hit; rotate the ray slightly if it lands on a segment endpoint
  // or an arrangement vertex.
  std::optional<detail::WalkHit> first;
  for (double rot : {0.0, 1e-4, -1e-4, 3e-4, -3e-4, 1e-3}) {
    const Vec2 dir{std::cos(rot), std::sin(rot)};
    auto hit = detail::shoot_ray(site, dir, segments);
    if (!hit) continue;
    bool clean = geom::dist(hit->point, segments[hit->segment].a) > 1e-7 &&
                 geom::dist(hit->point, segments[hit->segment].b) > 1e-7;
    if (clean)
      for (std::size_t i = 0; i < segments.size() && clean; ++i)
        if (i != hit->segment && detail::on_segment(hit->point, segments[i], 1e-7))
          clean = false;
    if (clean) {
      first = hit;
      break;
    }
  }
  if (!first) throw OpenBoundaryError("ray from site hit nothing cleanly");

  const Vec2 q0 = first->point;
  const std::size_t s0 = first->segment;
  // Walk with the site on the left.
  Vec2 d = segments[s0].b - segments[s0].a;
  d = d / geom::norm(d);
  if (geom::cross(d, site - q0) < 0) d = d * -1.0;
  const Vec2 d0 = d;

  geom::Polygon poly{q0};
  Vec2 q = q0;
  std::size_t seg = s0;
  // A region boundary has at most a few hundred vertices; a walk still
  // going after that is lost on an open arrangement and should give up
  // rather than spin through the whole 10x budget on large inputs.
  const std::size_t budget =
      std::min<std::size_t>(10 * segments.size() + 40, 2000);

  for (std::size_t iter = 0; iter < budget; ++iter) {
    // Next event: nearest crossing or the segment endpoint ahead of q.
    const geom::Segment& cs = segments[seg];
    double best_t = std::numeric_limits<double>::infinity();
    Vec2 best_p;
    const Vec2 end_fwd = geom::dot(cs.b - q, d) > 0 ? cs.b : cs.a;
    {
      const double t = geom::dot(end_fwd - q, d);
      if (t > kTol) {
        best_t = t;
        best_p = end_fwd;
      }
    }
    for (std::size_t i = 0; i < segments.size(); ++i) {
      if (i == seg) continue;
      const auto p =
          geom::segment_intersection(q, q + d * (best_t < 1e17 ? best_t + 1 : 1e6),
                                     segments[i].a, segments[i].b, kTol);
      if (!p) continue;
      const double t = geom::dot(*p - q, d);
      if (t > kTol && t < best_t - kTol) {
        best_t = t;
        best_p = *p;
      }
    }
    if (!std::isfinite(best_t))
      throw OpenBoundaryError("walk ran off an open segment");

    // Closing condition: we pass the starting point along the starting
    // segment in the starting direction.
    if (seg == s0 && geom::dot(d, d0) > 0) {
      const double tq0 = geom::dot(q0 - q, d);
      if (tq0 > kTol && tq0 <= best_t + kTol &&
          geom::point_segment_distance(q0, cs.a, cs.b) < 1e-7)
        break;
    }

    // Candidate outgoing directions at best_p.
    struct Cand {
      Vec2 dir;
      std::size_t seg;
      double turn;
    };
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      if (!detail::on_segment(best_p, segments[i], 1e-7)) continue;
      for (const Vec2 ep : {segments[i].a, segments[i].b}) {
        const double len = geom::dist(best_p, ep);
        if (len < 1e-7) continue;
        const Vec2 cd = (ep - best_p) / len;
        const double turn = std::atan2(geom::cross(d, cd), geom::dot(d, cd));
        cands.push_back({cd, i, turn});
      }
    }
    // Drop the direction we came from, unless it is all there is (antenna).
    std::vector<Cand> forward;
    for (const auto& c : cands)
      if (c.turn < M_PI - 1e-9) forward.push_back(c);
    if (forward.empty()) forward = cands;
    if (forward.empty()) throw OpenBoundaryError("dead end with no exits");

    const Cand* pick = &forward[0];
    for (const auto& c : forward)
      if (c.turn > pick->turn) pick = &c;

    poly.push_back(best_p);
    q = best_p;
    d = pick->dir;
    seg = pick->seg;
    if (poly.size() > budget) break;
  }
  if (poly.size() >= budget || poly.size() < 3)
    throw OpenBoundaryError("walk did not close within budget");
  if (std::abs(geom::polygon_area_signed(poly)) < 1e-9)
    throw OpenBoundaryError("walk traced a degenerate polygon");

  // Strip zero-area antennas and duplicate points.
  bool changed = true;
  while (changed && poly.size() >= 3) {
    changed = false;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2 prev = poly[(i + poly.size() - 1) % poly.size()];
      const Vec2 next = poly[(i + 1) % poly.size()];
      if (geom::dist(prev, next) < 1e-9 ||
          geom::dist(poly[i], next) < 1e-9) {
        poly.erase(poly.begin() + static_cast<long>(i));
        changed = true;
        break;
      }
    }
  }
  return poly;
}

// --- subdivision and grid oracle -------------------------------------------

namespace detail {

struct BoundaryCache {
  // polys[player][k] is the reachable polygon at tau_at(k + 1); boxes holds
  // the matching axis-aligned bounds (the polygons nest, so both grow
  // monotonically with k).
  std::map<int, std::vector<geom::Polygon>> polys;
  std::map<int, std::vector<std::pair<Vec2, Vec2>>> boxes;
};

inline BoundaryCache build_boundary_cache(
    const std::map<int, PlayerState>& states, const MotionModel& model,
    const TimeStepGrid& grid, int n_sides) {
  BoundaryCache cache;
  for (const auto& [id, st] : states) {
    auto& vec = cache.polys[id];
    auto& box = cache.boxes[id];
    vec.reserve(static_cast<std::size_t>(grid.steps()));
    box.reserve(static_cast<std::size_t>(grid.steps()));
    for (int k = 1; k <= grid.steps(); ++k) {
      vec.push_back(
          reachable_polygon(model, st, grid.tau_at(k), n_sides).polygon);
      Vec2 lo = vec.back()[0], hi = lo;
      for (const Vec2 v : vec.back()) {
        lo.x = std::min(lo.x, v.x);
        lo.y = std::min(lo.y, v.y);
        hi.x = std::max(hi.x, v.x);
        hi.y = std::max(hi.y, v.y);
      }
      box.push_back({lo, hi});
    }
  }
  return cache;
}

// Smallest step index whose bounding box contains the target: a lower bound
// on the reach index that only costs a binary search over boxes.
inline int reach_lower_bound(const std::vector<std::pair<Vec2, Vec2>>& boxes,
                             Vec2 target) {
  const int n = static_cast<int>(boxes.size());
  auto in_box = [&](int k) {
    const auto& [lo, hi] = boxes[static_cast<std::size_t>(k)];
    return target.x >= lo.x && target.x <= hi.x && target.y >= lo.y &&
           target.y <= hi.y;
  };
  if (!in_box(n - 1)) return n;
  int lo = 0, hi = n - 1;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (in_box(mid)) hi = mid;
    else lo = mid + 1;
  }
  return lo;
}

// Smallest step index whose polygon contains the target within [from, n-1],
// or n when unreachable.
inline int reach_index(const std::vector<geom::Polygon>& polys, Vec2 target,
                       int from) {
  const int n = static_cast<int>(polys.size());
  auto contains = [&](int k) {
    return geom::point_in_polygon_tol(target,
                                      polys[static_cast<std::size_t>(k)], 1e-9);
  };
  if (from >= n || !contains(n - 1)) return n;
  int lo = from, hi = n - 1;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (contains(mid)) hi = mid;
    else lo = mid + 1;
  }
  return lo;
}

// Continuous reach time by bisection between two taus, assuming the target
// is inside the boundary at hi and outside at lo.
inline double refined_reach_tau(const MotionModel& model,
                                const PlayerState& state, Vec2 target,
                                double lo, double hi, int n_sides) {
  for (int it = 0; it < 12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= 0) {
      lo = mid;
      continue;
    }
    const auto rb = reachable_polygon(model, state, mid, n_sides);
    if (geom::point_in_polygon_tol(target, rb.polygon, 1e-9))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

inline double cached_reach_time(const BoundaryCache& cache, int player,
                                Vec2 target, const TimeStepGrid& grid) {
  const int k = reach_index(cache.polys.at(player), target,
                            reach_lower_bound(cache.boxes.at(player), target));
  if (k >= static_cast<int>(cache.polys.at(player).size())) return kUnreachable;
  return grid.tau_at(k + 1);
}

// Cell-center ownership on a uniform grid, reusing an existing boundary
// cache (unlike grid_dominant, which builds its own). Earliest reach wins.
// Reach indices quantize time to whole steps, which would smear every
// boundary into a tie band decided by id order; index ties are therefore
// re-decided by bisecting the reach time within the tied step. Players
// whose bounding-box lower bound cannot beat the current best are skipped
// without any polygon test.
inline std::vector<int> owners_on_grid(const std::map<int, PlayerState>& states,
                                       const MotionModel& model,
                                       const BoundaryCache& cache,
                                       const std::vector<int>& ids,
                                       const TimeStepGrid& grid, Vec2 origin,
                                       double cell_size, int nx, int ny,
                                       int n_sides) {
  std::vector<int> owner(static_cast<std::size_t>(nx * ny), -1);
  const int n = grid.steps();
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const Vec2 c{origin.x + (ix + 0.5) * cell_size,
                   origin.y + (iy + 0.5) * cell_size};
      int best = n + 1;
      int who = -1;
      double who_tau = -1;  // refined tau of the current winner, lazily set
      for (const int id : ids) {
        const int lb = reach_lower_bound(cache.boxes.at(id), c);
        if (lb > best || lb >= n) continue;
        const int k = reach_index(cache.polys.at(id), c, lb);
        if (k < best) {
          best = k;
          who = id;
          who_tau = -1;
        } else if (k == best && k < n) {
          if (who_tau < 0)
            who_tau = refined_reach_tau(model, states.at(who), c,
                                        grid.tau_at(k), grid.tau_at(k + 1),
                                        n_sides);
          const double t = refined_reach_tau(model, states.at(id), c,
                                             grid.tau_at(k),
                                             grid.tau_at(k + 1), n_sides);
          if (t < who_tau) {
            who = id;
            who_tau = t;
          }
        }
      }
      if (who < 0) who = ids.front();  // nobody reaches it inside the horizon
      owner[static_cast<std::size_t>(iy * nx + ix)] = who;
    }
  return owner;
}

// Rectilinear outlines of the grid cells one player owns. The CCW edges of
// each owned cell cancel wherever two owned cells touch; the survivors
// chain into the mask boundary. Returns the outer loop of every connected
// blob, largest first; hole loops (clockwise) are dropped, so each outline
// is filled.
inline std::vector<geom::Polygon> trace_owned_cells(
    const std::vector<int>& owner, int nx, int ny, Vec2 origin,
    double cell_size, int id) {
  using Corner = std::pair<int, int>;
  std::set<std::pair<Corner, Corner>> edges;
  auto add = [&](Corner u, Corner v) {
    const auto it = edges.find({v, u});
    if (it != edges.end())
      edges.erase(it);
    else
      edges.insert({u, v});
  };
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      if (owner[static_cast<std::size_t>(iy * nx + ix)] != id) continue;
      add({ix, iy}, {ix + 1, iy});
      add({ix + 1, iy}, {ix + 1, iy + 1});
      add({ix + 1, iy + 1}, {ix, iy + 1});
      add({ix, iy + 1}, {ix, iy});
    }
  std::map<Corner, std::vector<Corner>> out;
  for (const auto& [u, v] : edges) out[u].push_back(v);
  std::vector<geom::Polygon> loops;
  while (!out.empty()) {
    const Corner start = out.begin()->first;
    std::vector<Corner> loop;
    Corner cur = start;
    Corner dir{0, 0};
    do {
      auto& nexts = out[cur];
      // Where two diagonally touching cells share a corner the tracer has
      // two ways out. The mask interior lies on the left of each directed
      // edge, so the counterclockwise choice hugs the blob in progress and
      // leaves the diagonal neighbour for its own loop; the clockwise one
      // would merge them into a self-touching figure.
      std::size_t pick = 0;
      if (nexts.size() > 1) {
        auto turn = [&](const Corner& n) {
          return dir.first * (n.second - cur.second) -
                 dir.second * (n.first - cur.first);
        };
        for (std::size_t k = 1; k < nexts.size(); ++k)
          if (turn(nexts[k]) > turn(nexts[pick])) pick = k;
      }
      const Corner nxt = nexts[pick];
      nexts.erase(nexts.begin() + static_cast<std::ptrdiff_t>(pick));
      if (nexts.empty()) out.erase(cur);
      loop.push_back(cur);
      dir = {nxt.first - cur.first, nxt.second - cur.second};
      cur = nxt;
    } while (cur != start);
    geom::Polygon poly;
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const Corner& prev = loop[(k + loop.size() - 1) % loop.size()];
      const Corner& here = loop[k];
      const Corner& nxt = loop[(k + 1) % loop.size()];
      const bool collinear = (here.first - prev.first) *
                                     (nxt.second - here.second) ==
                             (here.second - prev.second) *
                                     (nxt.first - here.first);
      if (!collinear)
        poly.push_back({origin.x + cell_size * here.first,
                        origin.y + cell_size * here.second});
    }
    if (geom::polygon_area_signed(poly) > 0) loops.push_back(std::move(poly));
  }
  std::sort(loops.begin(), loops.end(),
            [](const geom::Polygon& a, const geom::Polygon& b) {
              return geom::polygon_area_signed(a) > geom::polygon_area_signed(b);
            });
  return loops;
}

inline void bbox(const geom::Polygon& p, Vec2& lo, Vec2& hi) {
  lo = hi = p[0];
  for (const Vec2 v : p) {
    lo.x = std::min(lo.x, v.x);
    lo.y = std::min(lo.y, v.y);
    hi.x = std::max(hi.x, v.x);
    hi.y = std::max(hi.y, v.y);
  }
}

}  // namespace detail

inline OwnershipGrid grid_dominant(const std::map<int, PlayerState>& states,
                                   const MotionModel& model,
                                   const TimeStepGrid& grid, double cell_size,
                                   const Pitch& pitch = Pitch{},
                                   int n_sides = 32) {
  if (cell_size <= 0) throw DegenerateError("cell_size must be positive");
  const auto cache = detail::build_boundary_cache(states, model, grid, n_sides);
  OwnershipGrid out;
  out.cell_size = cell_size;
  out.origin = {-pitch.half_length, -pitch.half_width};
  out.nx = static_cast<int>(std::lround(2 * pitch.half_length / cell_size));
  out.ny = static_cast<int>(std::lround(2 * pitch.half_width / cell_size));
  std::vector<int> ids;
  for (const auto& [id, _] : states) ids.push_back(id);
  out.owner = detail::owners_on_grid(states, model, cache, ids, grid,
                                     out.origin, cell_size, out.nx, out.ny,
                                     n_sides);
  return out;
}

inline DominantSubdivision dominant_subdivision(
    std::map<int, PlayerState> states, const MotionModel& model,
    const TimeStepGrid& grid, int n_sides = 32, const Pitch& pitch = Pitch{}) {
  if (states.size() < 2)
    throw DegenerateError("dominant subdivision needs >= 2 players");

  // Separate (near-)coincident players deterministically.
  {
    std::vector<int> ids;
    for (const auto& [id, _] : states) ids.push_back(id);
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = i + 1; j < ids.size(); ++j)
        if (geom::dist(states[ids[i]].position, states[ids[j]].position) <
            0.01)
          states[ids[j]].position.x += 0.01;
  }

  const auto cache = detail::build_boundary_cache(states, model, grid, n_sides);

  std::map<int, std::vector<geom::Segment>> player_segments;
  std::vector<int> ids;
  for (const auto& [id, _] : states) ids.push_back(id);

  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const int a = ids[i], b = ids[j];
      std::vector<IntersectionVertex> vertices;
      const auto& pa = cache.polys.at(a);
      const auto& pb = cache.polys.at(b);
      const auto& ba = cache.boxes.at(a);
      const auto& bb = cache.boxes.at(b);
      for (int k = 0; k < grid.steps(); ++k) {
        const auto& [alo, ahi] = ba[static_cast<std::size_t>(k)];
        const auto& [blo, bhi] = bb[static_cast<std::size_t>(k)];
        if (alo.x > bhi.x || blo.x > ahi.x || alo.y > bhi.y || blo.y > ahi.y)
          continue;
        ReachableBoundary ra{a, grid.tau_at(k + 1),
                             pa[static_cast<std::size_t>(k)]};
        ReachableBoundary rbdy{b, grid.tau_at(k + 1),
                               pb[static_cast<std::size_t>(k)]};
        auto vs = pair_intersections(ra, rbdy);
        vertices.insert(vertices.end(), vs.begin(), vs.end());
      }
      if (vertices.empty()) continue;  // disjoint or nested everywhere

      // The boundary bends sharply where the two fronts first touch; grid
      // rings alone leave a chord there wide enough to cut a player off
      // from its own region. Insert refinement rings around each curve end.
      double tau_lo = vertices[0].tau, tau_hi = vertices[0].tau;
      for (const auto& v : vertices) {
        tau_lo = std::min(tau_lo, v.tau);
        tau_hi = std::max(tau_hi, v.tau);
      }
      auto add_ring = [&](double tau) {
        if (tau <= 0) return;
        const ReachableBoundary ra{
            a, tau, reachable_polygon(model, states[a], tau, n_sides).polygon};
        const ReachableBoundary rbdy{
            b, tau, reachable_polygon(model, states[b], tau, n_sides).polygon};
        auto vs = pair_intersections(ra, rbdy);
        vertices.insert(vertices.end(), vs.begin(), vs.end());
      };
      constexpr int kSub = 8;
      for (int s2 = 1; s2 < kSub; ++s2)
        add_ring(tau_lo - grid.tau_step +
                 s2 * (grid.tau_step / kSub));
      const bool closes = tau_hi < grid.tau_max - grid.tau_step * 0.5;
      if (closes)  // one front engulfs the other before tau_max
        for (int s2 = 1; s2 < kSub; ++s2)
          add_ring(tau_hi + s2 * (grid.tau_step / kSub));

      // A single locus step never spans more than a few front advances;
      // anything longer is a spurious jump between unrelated branches that
      // would slice a chord through a real region.
      const double max_edge = 20.0 * model.v_max * grid.tau_step;
      const auto g = build_pair_graph(std::move(vertices), grid.tau_step,
                                      max_edge);
      const auto paths = spanning_paths(g);
      if (paths.empty()) continue;
      // The equal-time locus of a pair can be disconnected (second lens
      // opening at higher tau) or multi-branch; every spanning path carries
      // real boundary, so collect them all. A path whose endpoints converge
      // is a pinched-off loop: seal it so the walk cannot leak through the
      // remaining gap.
      for (const auto& path : paths) {
        if (path.size() < 2) continue;
        std::vector<Vec2> line;
        line.reserve(path.size() + 1);
        for (int vi : path)
          line.push_back(g.vertices[static_cast<std::size_t>(vi)].point);
        if (line.size() >= 3 &&
            geom::dist(line.front(), line.back()) <= max_edge)
          line.push_back(line.front());
        for (std::size_t v = 1; v < line.size(); ++v) {
          const geom::Segment s{line[v - 1], line[v]};
          if (geom::dist(s.a, s.b) < 1e-12) continue;
          player_segments[a].push_back(s);
          player_segments[b].push_back(s);
        }
      }
    }

  const geom::Polygon rect = pitch.rectangle();
  std::vector<geom::Segment> walls;
  for (std::size_t i = 0; i < rect.size(); ++i)
    walls.push_back({rect[i], rect[(i + 1) % rect.size()]});

  // Coarse ownership used to validate every walked region: a walk that
  // traced the wrong face or leaked through a gap disagrees wholesale,
  // while a correct region only differs in a thin discretization band.
  const double vcell = 1.0;
  const Vec2 origin{-pitch.half_length, -pitch.half_width};
  const int vnx = static_cast<int>(std::lround(2 * pitch.half_length / vcell));
  const int vny = static_cast<int>(std::lround(2 * pitch.half_width / vcell));
  const auto vowner =
      detail::owners_on_grid(states, model, cache, ids, grid, origin, vcell,
                             vnx, vny, n_sides);

  // Fine-ownership cell size for rebuilding failed regions.
  const double fcell = 0.5;
  const int fnx = static_cast<int>(std::lround(2 * pitch.half_length / fcell));
  const int fny = static_cast<int>(std::lround(2 * pitch.half_width / fcell));

  DominantSubdivision sub;
  for (const int id : ids) {
    // The region lies within the band of coarse cells this player owns
    // (plus discretization slack), so segments entirely outside that
    // neighbourhood can never border it; dropping them makes each walk
    // step linear in the local boundary only. A walk that this filter
    // somehow truncates fails validation and takes the grid fallback.
    Vec2 blo = states[id].position, bhi = states[id].position;
    for (int iy = 0; iy < vny; ++iy)
      for (int ix = 0; ix < vnx; ++ix)
        if (vowner[static_cast<std::size_t>(iy * vnx + ix)] == id) {
          const Vec2 c{origin.x + (ix + 0.5) * vcell,
                       origin.y + (iy + 0.5) * vcell};
          blo.x = std::min(blo.x, c.x);
          blo.y = std::min(blo.y, c.y);
          bhi.x = std::max(bhi.x, c.x);
          bhi.y = std::max(bhi.y, c.y);
        }
    blo.x -= 3.0;
    blo.y -= 3.0;
    bhi.x += 3.0;
    bhi.y += 3.0;

    std::vector<geom::Segment> segs = walls;
    const auto it = player_segments.find(id);
    if (it != player_segments.end())
      for (const auto& s : it->second) {
        if (std::max(s.a.x, s.b.x) < blo.x || std::min(s.a.x, s.b.x) > bhi.x ||
            std::max(s.a.y, s.b.y) < blo.y || std::min(s.a.y, s.b.y) > bhi.y)
          continue;
        segs.push_back(s);
      }
    // Walk from a seed nudged ahead of a moving player: the region boundary
    // can touch a fast mover from behind (backward reach is ~0), and the
    // polyline discretization could then strand the position itself on the
    // wrong side of the traced face.
    Vec2 seed = states[id].position;
    if (states[id].speed > 1e-9) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const int other : ids)
        if (other != id)
          nearest = std::min(nearest, geom::dist(states[id].position,
                                                 states[other].position));
      const double ahead = std::min(0.3 * states[id].speed, 0.25 * nearest);
      seed = seed + (states[id].velocity / states[id].speed) * ahead;
    }
    bool ok = true;
    geom::Polygon region;
    try {
      region = enclosing_polygon(seed, segs);
      if (!geom::point_in_polygon_tol(seed, region, 1e-6))
        ok = false;
    } catch (const OpenBoundaryError&) {
      ok = false;
    }
    if (ok) {
      Vec2 rlo, rhi;
      detail::bbox(region, rlo, rhi);
      std::size_t owned = 0, diff = 0;
      for (int iy = 0; iy < vny; ++iy)
        for (int ix = 0; ix < vnx; ++ix) {
          const Vec2 c{origin.x + (ix + 0.5) * vcell,
                       origin.y + (iy + 0.5) * vcell};
          const bool mine = vowner[static_cast<std::size_t>(iy * vnx + ix)] ==
                            id;
          const bool inside = c.x >= rlo.x && c.x <= rhi.x && c.y >= rlo.y &&
                              c.y <= rhi.y &&
                              geom::point_in_polygon(c, region);
          owned += mine;
          diff += (mine != inside);
        }
      if (static_cast<double>(diff) >
          0.02 * static_cast<double>(owned) + 3.0)
        ok = false;
    }
    if (!ok) {
      // Rebuild the region as the traced outline of the fine-grid cells
      // this player owns. All of them lie inside the coarse-ownership
      // bounding box computed above, so the fine grid only covers that
      // neighbourhood, aligned to the full-pitch 0.5 m lattice.
      const int ix0 = std::clamp(
          static_cast<int>(std::floor((blo.x - origin.x) / fcell)), 0,
          fnx - 1);
      const int iy0 = std::clamp(
          static_cast<int>(std::floor((blo.y - origin.y) / fcell)), 0,
          fny - 1);
      const int ix1 = std::clamp(
          static_cast<int>(std::ceil((bhi.x - origin.x) / fcell)), ix0 + 1,
          fnx);
      const int iy1 = std::clamp(
          static_cast<int>(std::ceil((bhi.y - origin.y) / fcell)), iy0 + 1,
          fny);
      const Vec2 sub_origin{origin.x + ix0 * fcell, origin.y + iy0 * fcell};
      const int snx = ix1 - ix0, sny = iy1 - iy0;
      const auto sowner =
          detail::owners_on_grid(states, model, cache, ids, grid, sub_origin,
                                 fcell, snx, sny, n_sides);
      auto loops =
          detail::trace_owned_cells(sowner, snx, sny, sub_origin, fcell, id);
      if (loops.empty()) loops.push_back(pitch.rectangle());
      std::size_t main_i = 0;
      for (std::size_t li = 0; li < loops.size(); ++li)
        if (geom::point_in_polygon(states[id].position, loops[li])) {
          main_i = li;
          break;
        }
      region = std::move(loops[main_i]);
      for (std::size_t li = 0; li < loops.size(); ++li)
        if (li != main_i) sub.satellites[id].push_back(std::move(loops[li]));
      sub.fallback_players.push_back(id);
    }
    region = geom::clip_to_rect(region, -pitch.half_length, -pitch.half_width,
                                pitch.half_length, pitch.half_width);
    if (geom::polygon_area_signed(region) < 0)
      std::reverse(region.begin(), region.end());
    sub.regions[id] = std::move(region);
  }
  return sub;
}

// Owner of a point according to the polygon subdivision (-1 when no region
// contains it). Simple polygons cannot carry holes, so a region enclosing
// another player's island also covers it; when several regions contain the
// point the smallest wins, which restores the island. Ties go to the
// lowest id.
inline int subdivision_owner(const DominantSubdivision& sub, Vec2 p) {
  int who = -1;
  double best = std::numeric_limits<double>::infinity();
  auto consider = [&](int id, const geom::Polygon& poly) {
    if (!geom::point_in_polygon(p, poly)) return;
    const double a = std::abs(geom::polygon_area_signed(poly));
    if (a < best) {
      best = a;
      who = id;
    }
  };
  for (const auto& [id, poly] : sub.regions) consider(id, poly);
  for (const auto& [id, polys] : sub.satellites)
    for (const auto& poly : polys) consider(id, poly);
  return who;
}

inline double subdivision_agreement(const DominantSubdivision& sub,
                                    const OwnershipGrid& grid) {
  std::size_t agree = 0;
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix)
      if (subdivision_owner(sub, grid.cell_center(ix, iy)) ==
          grid.at(ix, iy))
        ++agree;
  return static_cast<double>(agree) /
         static_cast<double>(grid.nx * grid.ny);
}

// Half-plane-intersection Voronoi cells clipped to the pitch.
inline std::map<int, geom::Polygon> voronoi_cells(
    const std::map<int, Vec2>& sites, const Pitch& pitch = Pitch{}) {
  std::map<int, geom::Polygon> out;
  for (const auto& [id, p] : sites) {
    geom::Polygon cell = pitch.rectangle();
    for (const auto& [oid, q] : sites) {
      if (oid == id) continue;
      // Keep the side of the bisector nearer to p.
      const Vec2 mid = (p + q) / 2;
      const Vec2 normal = q - p;
      cell = geom::clip_halfplane(cell, mid, normal);
      if (cell.empty()) break;
    }
    out[id] = std::move(cell);
  }
  return out;
}

}  // namespace passrate

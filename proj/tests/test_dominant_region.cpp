#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "passrate/dominant_region.hpp"

using namespace passrate;
using geom::Vec2;

namespace {

geom::Polygon regular_ngon(Vec2 c, double r, int n) {
  geom::Polygon p;
  for (int i = 0; i < n; ++i) {
    const double a = 2 * M_PI * i / n;
    p.push_back(c + Vec2{r * std::cos(a), r * std::sin(a)});
  }
  return p;
}

PlayerState stationary(double x, double y) {
  PlayerState st;
  st.position = {x, y};
  return st;
}

}  // namespace

TEST_CASE("pair_intersections: crossing, nested, disjoint circles") {
  ReachableBoundary a{1, 0.5, regular_ngon({0, 0}, 1.0, 64)};
  ReachableBoundary b{2, 0.5, regular_ngon({1, 0}, 1.0, 64)};
  auto vs = pair_intersections(a, b);
  REQUIRE(vs.size() == 2);
  // Circles of radius 1 centered 1 apart cross near (0.5, +-sqrt(3)/2).
  for (const auto& v : vs) {
    CHECK(std::abs(v.point.x - 0.5) < 0.05);
    CHECK(std::abs(std::abs(v.point.y) - std::sqrt(3.0) / 2) < 0.05);
    CHECK(v.tau == 0.5);
    CHECK(v.pair == std::pair<int, int>{1, 2});
  }

  ReachableBoundary inner{2, 0.5, regular_ngon({0, 0}, 0.3, 64)};
  CHECK(pair_intersections(a, inner).empty());

  ReachableBoundary far{2, 0.5, regular_ngon({10, 0}, 1.0, 64)};
  CHECK(pair_intersections(a, far).empty());
}

TEST_CASE("build_pair_graph edge rule") {
  std::vector<IntersectionVertex> vs{
      {{0, 1}, 0.1, {1, 2}},   // 0: min tau
      {{0, -1}, 0.1, {1, 2}},  // 1: min tau
      {{1, 1}, 0.2, {1, 2}},   // 2
      {{2, 1}, 0.3, {1, 2}},   // 3
      {{5, 5}, 0.5, {1, 2}},   // 4: isolated (gap 0.2 from 3)
  };
  const auto g = build_pair_graph(vs, 0.1);
  auto has = [&](int a, int b) {
    for (auto [x, y] : g.edges)
      if ((x == a && y == b) || (x == b && y == a)) return true;
    return false;
  };
  CHECK(has(0, 1));  // equal minimal tau
  CHECK(has(0, 2));  // adjacent tau rings
  CHECK(has(1, 2));
  CHECK(has(2, 3));
  CHECK(!has(0, 3));  // tau gap 0.2
  CHECK(!has(3, 4));
  CHECK(g.edges.size() == 4);
}

TEST_CASE("spanning_paths: degree cap and cycle rejection") {
  // Square of vertices with all 6 edges available at equal tau spacing; the
  // restricted Kruskal must produce one simple path over all 4 vertices.
  std::vector<IntersectionVertex> vs{
      {{0, 0}, 0.1, {1, 2}},
      {{1, 0}, 0.1, {1, 2}},
      {{1, 1}, 0.1, {1, 2}},
      {{0, 1}, 0.1, {1, 2}},
  };
  const auto g = build_pair_graph(vs, 0.1);
  CHECK(g.edges.size() == 6);  // complete graph on equal-min-tau vertices
  const auto paths = spanning_paths(g);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].size() == 4);
  // Shortest edges are the unit sides; the diagonals lose. The first two
  // sides by (length, lex) order are (0,0)-(0,1) and (0,0)-(1,0), degree
  // caps then force the zig through all four corners.
  std::vector<bool> seen(4, false);
  for (int v : paths[0]) seen[static_cast<std::size_t>(v)] = true;
  CHECK(seen == std::vector<bool>(4, true));
}

TEST_CASE("spanning_paths: two components give two paths") {
  std::vector<IntersectionVertex> vs{
      {{0, 0}, 0.1, {1, 2}},
      {{0, 1}, 0.2, {1, 2}},
      {{10, 0}, 0.7, {1, 2}},
      {{10, 1}, 0.8, {1, 2}},
  };
  const auto g = build_pair_graph(vs, 0.1);
  const auto paths = spanning_paths(g);
  CHECK(paths.size() == 2);
}

TEST_CASE("select_boundary prefers the path with an equal-tau edge") {
  std::vector<IntersectionVertex> vs{
      {{0, 0}, 0.1, {1, 2}},
      {{0, 2}, 0.1, {1, 2}},   // equal-min-tau edge with vertex 0
      {{20, 0}, 0.7, {1, 2}},
      {{20, 1}, 0.8, {1, 2}},
      {{20, 2}, 0.9, {1, 2}},  // longer path but no equal-tau edge
  };
  const auto g = build_pair_graph(vs, 0.1);
  const auto paths = spanning_paths(g);
  REQUIRE(paths.size() == 2);
  const auto b = select_boundary(g, paths);
  REQUIRE(b.polyline.size() == 2);
  CHECK(std::abs(b.polyline[0].x) < 1e-12);

  CHECK_THROWS_AS(select_boundary(g, {}), NoPathError);
}

TEST_CASE("enclosing_polygon: pitch walls alone give the pitch") {
  const Pitch pitch;
  const auto rect = pitch.rectangle();
  std::vector<geom::Segment> segs;
  for (std::size_t i = 0; i < rect.size(); ++i)
    segs.push_back({rect[i], rect[(i + 1) % rect.size()]});
  const auto poly = enclosing_polygon({3, 4}, segs);
  CHECK(geom::polygon_area(poly) == doctest::Approx(pitch.area()).epsilon(1e-9));
}

TEST_CASE("enclosing_polygon: vertical chord splits the pitch") {
  const Pitch pitch;
  const auto rect = pitch.rectangle();
  std::vector<geom::Segment> segs;
  for (std::size_t i = 0; i < rect.size(); ++i)
    segs.push_back({rect[i], rect[(i + 1) % rect.size()]});
  segs.push_back({{0, -pitch.half_width}, {0, pitch.half_width}});

  const auto left = enclosing_polygon({-10, 0}, segs);
  CHECK(geom::polygon_area(left) ==
        doctest::Approx(pitch.area() / 2).epsilon(1e-9));
  CHECK(geom::point_in_polygon({-10, 0}, left));
  CHECK(!geom::point_in_polygon({10, 0}, left));

  const auto right = enclosing_polygon({10, 0}, segs);
  CHECK(geom::polygon_area(right) ==
        doctest::Approx(pitch.area() / 2).epsilon(1e-9));
}

TEST_CASE("enclosing_polygon: cross through the site's quadrant") {
  const Pitch pitch;
  const auto rect = pitch.rectangle();
  std::vector<geom::Segment> segs;
  for (std::size_t i = 0; i < rect.size(); ++i)
    segs.push_back({rect[i], rect[(i + 1) % rect.size()]});
  segs.push_back({{0, -pitch.half_width}, {0, pitch.half_width}});
  segs.push_back({{-pitch.half_length, 0}, {pitch.half_length, 0}});
  const auto q = enclosing_polygon({-10, 10}, segs);
  CHECK(geom::polygon_area(q) ==
        doctest::Approx(pitch.area() / 4).epsilon(1e-9));
}

TEST_CASE("enclosing_polygon: open boundary throws") {
  // One stub segment, no walls: nothing encloses the site.
  std::vector<geom::Segment> segs{{{1, -1}, {1, 1}}};
  CHECK_THROWS_AS(enclosing_polygon({0, 0}, segs), OpenBoundaryError);
}

TEST_CASE("two stationary players: boundary is the bisector") {
  std::map<int, PlayerState> states{{1, stationary(-5, 0)},
                                    {2, stationary(5, 0)}};
  MotionModel model;
  model.kind = MotionModelKind::Circle;
  const TimeStepGrid grid;
  const auto sub = dominant_subdivision(states, model, grid, 64);
  REQUIRE(sub.regions.size() == 2);
  CHECK(sub.fallback_players.empty());

  const Pitch pitch;
  CHECK(region_area(sub.regions.at(1)) ==
        doctest::Approx(pitch.area() / 2).epsilon(0.02));
  CHECK(region_area(sub.regions.at(2)) ==
        doctest::Approx(pitch.area() / 2).epsilon(0.02));

  // Every boundary vertex of region 1 not on a pitch wall sits within
  // 0.2 m of the true bisector x = 0.
  for (const Vec2 v : sub.regions.at(1)) {
    const bool on_wall = std::abs(std::abs(v.x) - pitch.half_length) < 1e-6 ||
                         std::abs(std::abs(v.y) - pitch.half_width) < 1e-6;
    if (!on_wall) CHECK(std::abs(v.x) <= 0.2);
  }

  // Ownership flips across the bisector.
  for (double y = -15; y <= 15; y += 3) {
    CHECK(subdivision_owner(sub, {-0.5, y}) == 1);
    CHECK(subdivision_owner(sub, {0.5, y}) == 2);
  }
}

TEST_CASE("coincident players are perturbed, not fatal") {
  std::map<int, PlayerState> states{{1, stationary(0, 0)},
                                    {2, stationary(0, 0)},
                                    {3, stationary(20, 5)}};
  MotionModel model;
  model.kind = MotionModelKind::Circle;
  const auto sub = dominant_subdivision(states, model, TimeStepGrid{});
  CHECK(sub.regions.size() == 3);
  double total = 0;
  for (const auto& [id, r] : sub.regions) total += region_area(r);
  CHECK(total == doctest::Approx(Pitch{}.area()).epsilon(0.05));
}

TEST_CASE("fewer than two players is degenerate") {
  std::map<int, PlayerState> states{{1, stationary(0, 0)}};
  CHECK_THROWS_AS(
      dominant_subdivision(states, MotionModel{}, TimeStepGrid{}),
      DegenerateError);
}

TEST_CASE("grid_dominant: two stationary players split at x=0") {
  std::map<int, PlayerState> states{{1, stationary(-5, 0)},
                                    {2, stationary(5, 0)}};
  MotionModel model;
  model.kind = MotionModelKind::Circle;
  const auto g = grid_dominant(states, model, TimeStepGrid{}, 0.5);
  CHECK(g.nx == 210);
  CHECK(g.ny == 136);
  std::size_t c1 = 0, c2 = 0;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const int o = g.at(ix, iy);
      const Vec2 c = g.cell_center(ix, iy);
      if (o == 1) {
        ++c1;
        CHECK(c.x < 0.3);
      } else if (o == 2) {
        ++c2;
        CHECK(c.x > -0.3);
      }
    }
  CHECK(c1 + c2 == static_cast<std::size_t>(g.nx * g.ny));
  CHECK(std::abs(static_cast<double>(c1) - static_cast<double>(c2)) /
            static_cast<double>(c1 + c2) <
        0.02);
}

TEST_CASE("subdivision matches the grid oracle on random ellipse frames") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ux(-40, 40), uy(-25, 25),
      uv(-5, 5);
  MotionModel model;  // ellipse
  const TimeStepGrid grid;
  for (int inst = 0; inst < 4; ++inst) {
    std::map<int, PlayerState> states;
    for (int id = 1; id <= 6; ++id) {
      PlayerState st;
      st.position = {ux(rng), uy(rng)};
      st.velocity = {uv(rng), uv(rng)};
      st.speed = geom::norm(st.velocity);
      st.facing = st.speed > 0 ? std::atan2(st.velocity.y, st.velocity.x) : 0;
      states[id] = st;
    }
    const auto sub = dominant_subdivision(states, model, grid, 32);
    const auto oracle = grid_dominant(states, model, grid, 0.5);
    const double agree = subdivision_agreement(sub, oracle);
    CAPTURE(inst);
    CHECK(agree >= 0.95);

    // A moving player's true boundary can touch the player from behind
    // (backward reach is near zero), so allow the position to sit just
    // outside its polygon as long as it is close to the border.
    auto near_boundary = [](Vec2 p, const geom::Polygon& poly, double tol) {
      for (std::size_t i = 0; i < poly.size(); ++i)
        if (geom::point_segment_distance(p, poly[i],
                                         poly[(i + 1) % poly.size()]) <= tol)
          return true;
      return false;
    };
    double total = 0;
    for (const auto& [id, r] : sub.regions) {
      CHECK((geom::point_in_polygon_tol(states[id].position, r, 1e-6) ||
             near_boundary(states[id].position, r, 0.5)));
      total += region_area(r);
    }
    for (const auto& [id, polys] : sub.satellites)
      for (const auto& r : polys) total += region_area(r);
    // Regions jointly cover the pitch; filled holes over another player's
    // island may double-count a little.
    CHECK(total >= 0.94 * Pitch{}.area());
    CHECK(total <= 1.20 * Pitch{}.area());
  }
}

TEST_CASE("voronoi_cells tile the pitch") {
  std::map<int, Vec2> sites{{1, {-20, -10}}, {2, {15, 8}}, {3, {0, 0}},
                            {4, {30, -12}}};
  const auto cells = voronoi_cells(sites);
  double total = 0;
  for (const auto& [id, c] : cells) {
    CHECK(geom::point_in_polygon_tol(sites.at(id), c, 1e-9));
    total += geom::polygon_area(c);
  }
  CHECK(total == doctest::Approx(Pitch{}.area()).epsilon(1e-9));

  // Each cell is nearer its own site than any other at interior samples.
  for (const auto& [id, c] : cells) {
    Vec2 centroid{0, 0};
    for (const Vec2 v : c) centroid = centroid + v;
    centroid = centroid / static_cast<double>(c.size());
    for (const auto& [oid, s] : sites)
      if (oid != id)
        CHECK(geom::dist(centroid, sites.at(id)) <=
              geom::dist(centroid, s) + 1e-9);
  }
}

TEST_CASE("stationary circle-model subdivision approximates Voronoi") {
  std::map<int, PlayerState> states;
  std::map<int, Vec2> sites;
  const std::vector<Vec2> pos{{-30, -10}, {-10, 12}, {5, -5}, {25, 8},
                              {40, -14}, {-45, 5}};
  for (std::size_t i = 0; i < pos.size(); ++i) {
    states[static_cast<int>(i + 1)] = stationary(pos[i].x, pos[i].y);
    sites[static_cast<int>(i + 1)] = pos[i];
  }
  MotionModel model;
  model.kind = MotionModelKind::Circle;
  const auto sub = dominant_subdivision(states, model, TimeStepGrid{}, 64);
  const auto cells = voronoi_cells(sites);

  // Compare ownership on a 1 m lattice.
  std::size_t agree = 0, total = 0;
  for (double y = -33.5; y <= 33.5; y += 1)
    for (double x = -52; x <= 52; x += 1) {
      const Vec2 p{x, y};
      int vor = -1;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [id, s] : sites) {
        const double d = geom::dist(p, s);
        if (d < best) {
          best = d;
          vor = id;
        }
      }
      ++total;
      if (subdivision_owner(sub, p) == vor) ++agree;
    }
  CHECK(static_cast<double>(agree) / static_cast<double>(total) >= 0.99);
}

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "passrate/errors.hpp"

namespace passrate::geom {

struct Vec2 {
  double x = 0;
  double y = 0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }

// Total order used for deterministic tie-breaking.
inline bool lex_less(Vec2 a, Vec2 b) {
  return a.x != b.x ? a.x < b.x : a.y < b.y;
}

using Polygon = std::vector<Vec2>;

struct Segment {
  Vec2 a;
  Vec2 b;
};

// Proper and endpoint intersections of two segments. Collinear overlaps
// return nothing (the callers treat them as degenerate no-ops).
inline std::optional<Vec2> segment_intersection(Vec2 a1, Vec2 a2, Vec2 b1,
                                                Vec2 b2, double eps = 1e-9) {
  const Vec2 r = a2 - a1;
  const Vec2 s = b2 - b1;
  const double denom = cross(r, s);
  const double scale = std::max({norm(r), norm(s), 1.0});
  if (std::abs(denom) < 1e-12 * scale * scale) return std::nullopt;
  const Vec2 qp = b1 - a1;
  const double t = cross(qp, s) / denom;
  const double u = cross(qp, r) / denom;
  const double tol_t = eps / std::max(norm(r), 1e-12);
  const double tol_u = eps / std::max(norm(s), 1e-12);
  if (t < -tol_t || t > 1 + tol_t || u < -tol_u || u > 1 + tol_u)
    return std::nullopt;
  return a1 + r * std::clamp(t, 0.0, 1.0);
}

inline double polygon_area_signed(const Polygon& poly) {
  double a = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++)
    a += cross(poly[j], poly[i]);
  return a / 2;
}

inline bool polygon_is_simple(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Skip adjacent edges (sharing a vertex).
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segment_intersection(poly[i], poly[(i + 1) % n], poly[j],
                               poly[(j + 1) % n], 0.0))
        return false;
    }
  }
  return true;
}

inline double polygon_area(const Polygon& poly) {
  if (!polygon_is_simple(poly)) throw NonSimpleError("polygon is not simple");
  return std::abs(polygon_area_signed(poly));
}

// Crossing-number test; points on the boundary may land on either side.
inline bool point_in_polygon(Vec2 p, const Polygon& poly) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if ((poly[i].y > p.y) != (poly[j].y > p.y) &&
        p.x < (poly[j].x - poly[i].x) * (p.y - poly[i].y) /
                      (poly[j].y - poly[i].y) +
                  poly[i].x)
      inside = !inside;
  }
  return inside;
}

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0) return dist(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return dist(p, a + ab * t);
}

inline Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0) return a;
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return a + ab * t;
}

inline double point_polygon_boundary_distance(Vec2 p, const Polygon& poly) {
  double d = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++)
    d = std::min(d, point_segment_distance(p, poly[j], poly[i]));
  return d;
}

// Boundary-inclusive containment with tolerance.
inline bool point_in_polygon_tol(Vec2 p, const Polygon& poly, double tol) {
  if (point_in_polygon(p, poly)) return true;
  return point_polygon_boundary_distance(p, poly) <= tol;
}

// Keeps the half-plane where dot(x - origin, normal) <= 0.
inline Polygon clip_halfplane(const Polygon& poly, Vec2 origin, Vec2 normal) {
  Polygon out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 cur = poly[i];
    const Vec2 nxt = poly[(i + 1) % n];
    const double dc = dot(cur - origin, normal);
    const double dn = dot(nxt - origin, normal);
    if (dc <= 0) out.push_back(cur);
    if ((dc < 0 && dn > 0) || (dc > 0 && dn < 0))
      out.push_back(cur + (nxt - cur) * (dc / (dc - dn)));
  }
  return out;
}

inline Polygon clip_to_rect(const Polygon& poly, double xmin, double ymin,
                            double xmax, double ymax) {
  Polygon p = poly;
  p = clip_halfplane(p, {xmin, 0}, {-1, 0});
  p = clip_halfplane(p, {xmax, 0}, {1, 0});
  p = clip_halfplane(p, {0, ymin}, {0, -1});
  p = clip_halfplane(p, {0, ymax}, {0, 1});
  return p;
}

inline Polygon convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), lex_less);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return pts;
  Polygon hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 &&
           cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0)
      --k;
    hull[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower &&
           cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0)
      --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Does the open segment touch the polygon interior?
inline bool segment_crosses_polygon(Vec2 a, Vec2 b, const Polygon& poly) {
  if (point_in_polygon((a + b) / 2, poly)) return true;
  if (point_in_polygon(a, poly) || point_in_polygon(b, poly)) return true;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++)
    if (segment_intersection(a, b, poly[j], poly[i])) return true;
  return false;
}

inline double normalize_angle(double a) {
  a = std::remainder(a, 2 * M_PI);  // (-pi, pi]
  if (a == M_PI) a = -M_PI;
  return a;
}

}  // namespace passrate::geom

#pragma once

#include <fstream>
#include <map>
#include <string>

#include "passrate/dominant_region.hpp"
#include "passrate/match_data.hpp"

namespace passrate {

namespace detail {

inline std::string svg_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace detail

// One filled polygon per player, team colored, pitch outline and player
// markers. Elements are emitted in player-id order so output is stable.
inline void write_subdivision_svg(
    const DominantSubdivision& sub, const std::map<int, Team>& team_map,
    const std::map<int, Vec2>& positions, const std::string& path,
    const OwnershipGrid* disagreement_against = nullptr,
    const Pitch& pitch = Pitch{}) {
  const double scale = 8.0;
  const double w = 2 * pitch.half_length * scale;
  const double h = 2 * pitch.half_width * scale;
  auto tx = [&](Vec2 p) {
    return Vec2{(p.x + pitch.half_length) * scale,
                (pitch.half_width - p.y) * scale};
  };

  std::ofstream out(path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h
      << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h
      << "\" fill=\"#1d7a3c\"/>\n";

  for (const auto& [id, poly] : sub.regions) {
    if (poly.size() < 3) continue;
    const bool home = team_map.count(id) && team_map.at(id) == Team::Home;
    out << "<polygon points=\"";
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2 p = tx(poly[i]);
      if (i) out << ' ';
      out << detail::svg_coord(p.x) << ',' << detail::svg_coord(p.y);
    }
    out << "\" fill=\"" << (home ? "#d1495b" : "#30638e")
        << "\" fill-opacity=\"0.55\" stroke=\"#ffffff\" "
           "stroke-width=\"1\"/>\n";
  }

  if (disagreement_against) {
    const auto& g = *disagreement_against;
    const double cs = g.cell_size * scale;
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) {
        const Vec2 c = g.cell_center(ix, iy);
        if (subdivision_owner(sub, c) == g.at(ix, iy)) continue;
        const Vec2 p = tx(c);
        out << "<rect x=\"" << detail::svg_coord(p.x - cs / 2) << "\" y=\""
            << detail::svg_coord(p.y - cs / 2) << "\" width=\""
            << detail::svg_coord(cs) << "\" height=\"" << detail::svg_coord(cs)
            << "\" fill=\"#ffd166\" fill-opacity=\"0.8\"/>\n";
      }
  }

  for (const auto& [id, pos] : positions) {
    const Vec2 p = tx(pos);
    const bool home = team_map.count(id) && team_map.at(id) == Team::Home;
    out << "<circle cx=\"" << detail::svg_coord(p.x) << "\" cy=\""
        << detail::svg_coord(p.y) << "\" r=\"5\" fill=\""
        << (home ? "#8b1e2d" : "#173f5f") << "\" stroke=\"#ffffff\" "
        << "stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << detail::svg_coord(p.x + 7) << "\" y=\""
        << detail::svg_coord(p.y + 4)
        << "\" font-size=\"11\" fill=\"#ffffff\">" << id << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace passrate

#include "insar/geometry.hpp"

#include <cmath>
#include <cstdlib>
#include <set>
#include <utility>

namespace insar {

void ProfileLine::validate() const {
  if (vertices.size() < 2)
    throw Error(Errc::InvalidArgument, "profile line needs at least 2 vertices");
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!std::isfinite(vertices[i].lat) || !std::isfinite(vertices[i].lon))
      throw Error(Errc::InvalidArgument, "profile vertex is not finite");
    if (i > 0 && vertices[i].lat == vertices[i - 1].lat && vertices[i].lon == vertices[i - 1].lon)
      throw Error(Errc::InvalidArgument, "consecutive profile vertices coincide");
  }
}

namespace {

std::vector<Pixel> bresenham(Pixel a, Pixel b) {
  std::vector<Pixel> out;
  int dc = std::abs(b.col - a.col), dr = -std::abs(b.row - a.row);
  int sc = a.col < b.col ? 1 : -1, sr = a.row < b.row ? 1 : -1;
  int err = dc + dr;
  Pixel p = a;
  while (true) {
    out.push_back(p);
    if (p == b) break;
    const int e2 = 2 * err;
    if (e2 >= dr) {
      err += dr;
      p.col += sc;
    }
    if (e2 <= dc) {
      err += dc;
      p.row += sr;
    }
  }
  return out;
}

}  // namespace

RasterizedLine rasterize_polyline(const ProfileLine& line, const GridMeta& meta) {
  line.validate();
  std::vector<Pixel> verts;
  for (const auto& v : line.vertices) {
    const PixelF f = meta.to_pixel(v);
    const Pixel p{static_cast<int>(std::lround(f.row)), static_cast<int>(std::lround(f.col))};
    if (!meta.contains(p))
      throw Error(Errc::OutOfBounds, "profile vertex (" + std::to_string(v.lat) + ", " +
                                         std::to_string(v.lon) + ") falls outside the grid");
    verts.push_back(p);
  }

  RasterizedLine out;
  std::set<std::pair<int, int>> seen;
  double offset = 0.0;
  for (std::size_t s = 0; s + 1 < verts.size(); ++s) {
    const Pixel a = verts[s], b = verts[s + 1];
    const double ex = (b.col - a.col) * meta.pixel_spacing_east;
    const double ny = (b.row - a.row) * meta.pixel_spacing_north;
    const double len = std::hypot(ex, ny);
    for (const Pixel& p : bresenham(a, b)) {
      if (!seen.insert({p.row, p.col}).second) continue;
      double along = 0.0;
      if (len > 0.0) {
        const double px = (p.col - a.col) * meta.pixel_spacing_east;
        const double py = (p.row - a.row) * meta.pixel_spacing_north;
        along = (px * ex + py * ny) / len;
      }
      out.pixels.push_back(p);
      out.distances_m.push_back(offset + along);
    }
    offset += len;
  }
  if (out.pixels.empty()) {
    out.pixels.push_back(verts.front());
    out.distances_m.push_back(0.0);
  }
  out.total_length_m = offset;
  for (const Pixel& v : verts) {
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
      if (out.pixels[i] == v) {
        out.vertex_samples.push_back(i);
        break;
      }
    }
  }
  return out;
}

ProfileLine line_from_pixels(const std::vector<Pixel>& vertices, const GridMeta& meta,
                             std::string name) {
  ProfileLine line;
  line.name = std::move(name);
  for (const Pixel& p : vertices)
    line.vertices.push_back(meta.to_latlon({static_cast<double>(p.row), static_cast<double>(p.col)}));
  return line;
}

}  // namespace insar

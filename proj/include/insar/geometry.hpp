#pragma once

#include <string>
#include <vector>

#include "insar/raster.hpp"

namespace insar {

/// Polyline over a structure, in geographic coordinates.
struct ProfileLine {
  std::vector<LatLon> vertices;
  std::string name;

  void validate() const;
};

struct RasterizedLine {
  std::vector<Pixel> pixels;
  std::vector<double> distances_m;  // along the polyline from the first vertex
  std::vector<std::size_t> vertex_samples;  // sample index of each vertex
  double total_length_m = 0.0;
};

/// Maps vertices to the nearest pixel, draws each segment with an 8-connected
/// Bresenham traversal and measures every pixel by the metric projection of
/// its center onto its segment. Pixels already visited are skipped.
RasterizedLine rasterize_polyline(const ProfileLine& line, const GridMeta& meta);

/// Pixel-space polyline helper: the vertices are converted to geographic
/// coordinates of the given pixel centers.
ProfileLine line_from_pixels(const std::vector<Pixel>& vertices, const GridMeta& meta,
                             std::string name);

}  // namespace insar

#include "insar/raster.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "insar/fileio.hpp"

namespace insar {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kEarthRadiusM = 6371008.8;
constexpr double kMetersPerDegLat = std::numbers::pi * kEarthRadiusM / 180.0;

template <typename T>
T to_little_endian(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

json grid_to_json(const GridMeta& g) {
  return json{{"width", g.width},
              {"height", g.height},
              {"pixel_spacing_east_m", g.pixel_spacing_east},
              {"pixel_spacing_north_m", g.pixel_spacing_north},
              {"origin_lat_deg", g.origin_lat},
              {"origin_lon_deg", g.origin_lon}};
}

template <typename T>
T required(const json& j, const char* key, const fs::path& where) {
  if (!j.is_object() || !j.contains(key))
    throw Error(Errc::MalformedSidecar, where.string() + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::MalformedSidecar, where.string() + ": bad type for '" + key + "'");
  }
}

GridMeta grid_from_json(const json& j, const fs::path& where) {
  GridMeta g;
  g.width = required<int>(j, "width", where);
  g.height = required<int>(j, "height", where);
  g.pixel_spacing_east = required<double>(j, "pixel_spacing_east_m", where);
  g.pixel_spacing_north = required<double>(j, "pixel_spacing_north_m", where);
  g.origin_lat = required<double>(j, "origin_lat_deg", where);
  g.origin_lon = required<double>(j, "origin_lon_deg", where);
  try {
    g.validate();
  } catch (const Error& e) {
    throw Error(Errc::MalformedSidecar, where.string() + ": " + e.what());
  }
  return g;
}

json read_sidecar(const fs::path& data_path) {
  const fs::path side = sidecar_path(data_path);
  if (!fs::exists(side))
    throw Error(Errc::MissingSidecar, "sidecar not found: " + side.string());
  try {
    return json::parse(read_file(side));
  } catch (const json::parse_error& e) {
    throw Error(Errc::MalformedSidecar, side.string() + ": " + e.what());
  }
}

std::string read_payload(const fs::path& path, std::size_t expected_bytes) {
  std::string bytes = read_file(path);
  if (bytes.size() != expected_bytes) {
    throw Error(Errc::DimensionMismatch,
                path.string() + ": sidecar implies " + std::to_string(expected_bytes) +
                    " bytes, file holds " + std::to_string(bytes.size()));
  }
  return bytes;
}

}  // namespace

void GridMeta::validate() const {
  if (width < 1 || height < 1)
    throw Error(Errc::InvalidArgument, "grid dimensions must be >= 1");
  if (!(std::isfinite(pixel_spacing_east) && pixel_spacing_east > 0.0) ||
      !(std::isfinite(pixel_spacing_north) && pixel_spacing_north > 0.0))
    throw Error(Errc::InvalidArgument, "pixel spacings must be finite and > 0");
  if (!std::isfinite(origin_lat) || !std::isfinite(origin_lon) || std::abs(origin_lat) >= 90.0)
    throw Error(Errc::InvalidArgument, "grid origin must be a finite lat/lon");
}

PixelF GridMeta::to_pixel(LatLon ll) const {
  const double m_per_deg_lon = kMetersPerDegLat * std::cos(origin_lat * std::numbers::pi / 180.0);
  return {(origin_lat - ll.lat) * kMetersPerDegLat / pixel_spacing_north,
          (ll.lon - origin_lon) * m_per_deg_lon / pixel_spacing_east};
}

LatLon GridMeta::to_latlon(PixelF p) const {
  const double m_per_deg_lon = kMetersPerDegLat * std::cos(origin_lat * std::numbers::pi / 180.0);
  return {origin_lat - p.row * pixel_spacing_north / kMetersPerDegLat,
          origin_lon + p.col * pixel_spacing_east / m_per_deg_lon};
}

void require_compatible(const GridMeta& a, const GridMeta& b) {
  if (!(a == b)) {
    throw Error(Errc::GridMismatch,
                "grid mismatch: " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                    " vs " + std::to_string(b.width) + "x" + std::to_string(b.height) +
                    " (all six grid fields must agree)");
  }
}

double pixel_distance_m(const GridMeta& meta, Pixel a, Pixel b) {
  if (!meta.contains(a) || !meta.contains(b))
    throw Error(Errc::OutOfBounds, "pixel outside grid");
  return std::hypot((b.col - a.col) * meta.pixel_spacing_east,
                    (b.row - a.row) * meta.pixel_spacing_north);
}

ComplexRaster::ComplexRaster(const GridMeta& meta) : meta_(meta) {
  meta_.validate();
  data_.assign(meta_.size(), cfloat{});
}

ComplexRaster::ComplexRaster(const GridMeta& meta, std::vector<cfloat> data)
    : meta_(meta), data_(std::move(data)) {
  meta_.validate();
  if (data_.size() != meta_.size())
    throw Error(Errc::DimensionMismatch, "complex raster data length does not match grid");
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i].real()) || !std::isfinite(data_[i].imag()))
      throw Error(Errc::NonFiniteSample, "non-finite sample at index " + std::to_string(i));
  }
}

std::string to_string(RasterKind kind) {
  switch (kind) {
    case RasterKind::Phase: return "phase";
    case RasterKind::Coherence: return "coherence";
    case RasterKind::Dem: return "dem";
    case RasterKind::DisplacementMm: return "displacement_mm";
  }
  return "phase";
}

RasterKind raster_kind_from_string(const std::string& s) {
  if (s == "phase") return RasterKind::Phase;
  if (s == "coherence") return RasterKind::Coherence;
  if (s == "dem") return RasterKind::Dem;
  if (s == "displacement_mm") return RasterKind::DisplacementMm;
  throw Error(Errc::MalformedSidecar, "unknown raster kind '" + s + "'");
}

RealRaster::RealRaster(const GridMeta& meta, RasterKind kind, double fill)
    : meta_(meta), kind_(kind) {
  meta_.validate();
  data_.assign(meta_.size(), fill);
  mask_.assign(meta_.size(), 0);
  if (!std::isfinite(fill)) {
    std::fill(data_.begin(), data_.end(), kNoData);
    std::fill(mask_.begin(), mask_.end(), std::uint8_t{1});
  }
}

void RealRaster::set(std::size_t i, double v) {
  if (std::isfinite(v)) {
    data_[i] = v;
    mask_[i] = 0;
  } else {
    mask(i);
  }
}

void RealRaster::mask(std::size_t i) {
  data_[i] = kNoData;
  mask_[i] = 1;
}

std::size_t RealRaster::masked_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

bool bit_equal(const RealRaster& a, const RealRaster& b) {
  if (!(a.meta() == b.meta()) || a.kind() != b.kind() || a.mask_bits() != b.mask_bits())
    return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.masked(i)) continue;
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

fs::path sidecar_path(const fs::path& path) {
  fs::path side = path;
  side += ".json";
  return side;
}

SlcHeader read_slc_header(const fs::path& path) {
  const json j = read_sidecar(path);
  const fs::path side = sidecar_path(path);
  SlcHeader h;
  h.grid = grid_from_json(j, side);
  h.acquisition_date = required<std::string>(j, "acquisition_date", side);
  h.wavelength_m = required<double>(j, "wavelength_m", side);
  h.incidence_deg = required<double>(j, "incidence_deg", side);
  h.slant_range_m = required<double>(j, "slant_range_m", side);
  if (!(h.wavelength_m > 0.0) || !(h.incidence_deg > 0.0 && h.incidence_deg < 90.0) ||
      !(h.slant_range_m > 0.0))
    throw Error(Errc::MalformedSidecar, side.string() + ": acquisition geometry out of range");
  return h;
}

ComplexRaster load_slc(const fs::path& path) {
  const SlcHeader h = read_slc_header(path);
  const std::string bytes = read_payload(path, h.grid.size() * 2 * sizeof(float));
  std::vector<cfloat> data(h.grid.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    float re, im;
    std::memcpy(&re, bytes.data() + 8 * i, 4);
    std::memcpy(&im, bytes.data() + 8 * i + 4, 4);
    re = to_little_endian(re);
    im = to_little_endian(im);
    if (!std::isfinite(re) || !std::isfinite(im)) {
      throw Error(Errc::NonFiniteSample, path.string() + ": non-finite sample at pixel " +
                                             std::to_string(i));
    }
    data[i] = {re, im};
  }
  return ComplexRaster(h.grid, std::move(data));
}

void save_slc(const fs::path& path, const ComplexRaster& raster, const SlcHeader& header) {
  require_compatible(raster.meta(), header.grid);
  std::string bytes(raster.size() * 8, '\0');
  for (std::size_t i = 0; i < raster.size(); ++i) {
    const float re = to_little_endian(raster[i].real());
    const float im = to_little_endian(raster[i].imag());
    std::memcpy(bytes.data() + 8 * i, &re, 4);
    std::memcpy(bytes.data() + 8 * i + 4, &im, 4);
  }
  json side = grid_to_json(header.grid);
  side["acquisition_date"] = header.acquisition_date;
  side["wavelength_m"] = header.wavelength_m;
  side["incidence_deg"] = header.incidence_deg;
  side["slant_range_m"] = header.slant_range_m;
  write_file_atomic(path, bytes);
  write_json(sidecar_path(path), side);
}

void save_real(const fs::path& path, const RealRaster& raster) {
  std::string bytes(raster.size() * 8, '\0');
  for (std::size_t i = 0; i < raster.size(); ++i) {
    const double v = to_little_endian(raster.masked(i) ? RealRaster::kNoData : raster[i]);
    std::memcpy(bytes.data() + 8 * i, &v, 8);
  }
  json side = grid_to_json(raster.meta());
  side["kind"] = to_string(raster.kind());
  write_file_atomic(path, bytes);
  write_json(sidecar_path(path), side);
}

RealRaster load_real(const fs::path& path) {
  const json j = read_sidecar(path);
  const fs::path side = sidecar_path(path);
  const GridMeta grid = grid_from_json(j, side);
  RealRaster r(grid, raster_kind_from_string(required<std::string>(j, "kind", side)));
  const std::string bytes = read_payload(path, grid.size() * sizeof(double));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double v;
    std::memcpy(&v, bytes.data() + 8 * i, 8);
    r.set(i, to_little_endian(v));
  }
  return r;
}

}  // namespace insar

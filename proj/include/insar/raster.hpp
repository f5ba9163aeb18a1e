#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "insar/error.hpp"

namespace insar {

/// Integer pixel position, row-major.
struct Pixel {
  int row = 0;
  int col = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Fractional pixel position (pixel centers sit on integers).
struct PixelF {
  double row = 0.0;
  double col = 0.0;
};

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

/// Regular grid description. Row 0 is the northern edge; the origin is the
/// center of pixel (0, 0). Geographic positions use a local equirectangular
/// mapping around the origin, which is sufficient for structure-scale
/// distances.
struct GridMeta {
  int width = 0;
  int height = 0;
  double pixel_spacing_east = 0.0;   // meters / pixel
  double pixel_spacing_north = 0.0;  // meters / pixel
  double origin_lat = 0.0;           // degrees
  double origin_lon = 0.0;           // degrees

  std::size_t size() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  bool contains(Pixel p) const {
    return p.row >= 0 && p.col >= 0 && p.row < height && p.col < width;
  }
  std::size_t index(Pixel p) const {
    return static_cast<std::size_t>(p.row) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(p.col);
  }

  /// Throws Errc::InvalidArgument unless dimensions and spacings are valid.
  void validate() const;

  PixelF to_pixel(LatLon ll) const;
  LatLon to_latlon(PixelF p) const;

  friend bool operator==(const GridMeta&, const GridMeta&) = default;
};

/// Throws Errc::GridMismatch unless all six grid fields agree.
void require_compatible(const GridMeta& a, const GridMeta& b);

/// Metric distance between two in-grid pixels using per-axis spacings.
double pixel_distance_m(const GridMeta& meta, Pixel a, Pixel b);

using cfloat = std::complex<float>;

/// Single-look complex image.
class ComplexRaster {
 public:
  ComplexRaster() = default;
  /// Zero-filled raster.
  explicit ComplexRaster(const GridMeta& meta);
  /// Takes ownership of `data`; throws on size mismatch or non-finite values.
  ComplexRaster(const GridMeta& meta, std::vector<cfloat> data);

  const GridMeta& meta() const { return meta_; }
  std::size_t size() const { return data_.size(); }

  cfloat operator()(int row, int col) const { return data_[meta_.index({row, col})]; }
  cfloat& operator()(int row, int col) { return data_[meta_.index({row, col})]; }
  cfloat operator[](std::size_t i) const { return data_[i]; }
  cfloat& operator[](std::size_t i) { return data_[i]; }

  const std::vector<cfloat>& data() const { return data_; }

 private:
  GridMeta meta_;
  std::vector<cfloat> data_;
};

enum class RasterKind { Phase, Coherence, Dem, DisplacementMm };

std::string to_string(RasterKind kind);
RasterKind raster_kind_from_string(const std::string& s);

/// Real-valued raster with an explicit nodata mask. Masked pixels always hold
/// a quiet NaN so they can never leak into arithmetic unnoticed.
class RealRaster {
 public:
  static constexpr double kNoData = std::numeric_limits<double>::quiet_NaN();

  RealRaster() = default;
  explicit RealRaster(const GridMeta& meta, RasterKind kind = RasterKind::Phase,
                      double fill = 0.0);

  const GridMeta& meta() const { return meta_; }
  RasterKind kind() const { return kind_; }
  void set_kind(RasterKind kind) { kind_ = kind; }
  std::size_t size() const { return data_.size(); }

  double operator()(int row, int col) const { return data_[meta_.index({row, col})]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double at(Pixel p) const { return data_[meta_.index(p)]; }

  bool masked(std::size_t i) const { return mask_[i] != 0; }
  bool masked(Pixel p) const { return mask_[meta_.index(p)] != 0; }
  bool masked(int row, int col) const { return masked(Pixel{row, col}); }

  /// Stores `v`; a non-finite value masks the pixel.
  void set(std::size_t i, double v);
  void set(int row, int col, double v) { set(meta_.index({row, col}), v); }
  void mask(std::size_t i);
  void mask(int row, int col) { mask(meta_.index({row, col})); }

  std::size_t masked_count() const;

  const std::vector<double>& data() const { return data_; }
  const std::vector<std::uint8_t>& mask_bits() const { return mask_; }

 private:
  GridMeta meta_;
  RasterKind kind_ = RasterKind::Phase;
  std::vector<double> data_;
  std::vector<std::uint8_t> mask_;
};

/// True when grids, kinds, masks and every unmasked value match bit-for-bit.
bool bit_equal(const RealRaster& a, const RealRaster& b);

/// Acquisition metadata carried by an SLC sidecar.
struct SlcHeader {
  GridMeta grid;
  std::string acquisition_date;  // ISO-8601
  double wavelength_m = 0.0;
  double incidence_deg = 0.0;
  double slant_range_m = 0.0;
};

/// `<name>.slc` holds little-endian interleaved (re, im) float32, row-major.
/// `<name>.slc.json` is the sidecar.
ComplexRaster load_slc(const std::filesystem::path& path);
SlcHeader read_slc_header(const std::filesystem::path& path);
void save_slc(const std::filesystem::path& path, const ComplexRaster& raster,
              const SlcHeader& header);

/// `<name>.r64` holds little-endian float64, row-major, NaN for nodata.
void save_real(const std::filesystem::path& path, const RealRaster& raster);
RealRaster load_real(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& path);

}  // namespace insar

#pragma once

#include <filesystem>
#include <vector>

#include "insar/catalog.hpp"
#include "insar/raster.hpp"

namespace insar {

/// Line-of-sight displacement of one pair, master -> slave, in millimeters.
struct DisplacementField {
  GridMeta meta;
  RealRaster los_mm;
  PairSpec pair;
};

struct DisplacementSeries {
  GridMeta meta;
  std::vector<Date> dates;
  std::vector<RealRaster> cumulative_mm;  // one per date, first identically zero
  Pixel reference_pixel;
};

/// d_mm = -1000 * lambda * phi / (4 pi). Positive means motion toward the
/// sensor; motion away (subsidence) is negative.
RealRaster phase_to_los(const RealRaster& unwrapped, double wavelength_m);

/// Subtracts the value at the reference pixel. Throws Errc::MaskedReference
/// (naming the slave date) when the reference is masked.
DisplacementField calibrate(const DisplacementField& field, Pixel reference_pixel);

/// Cumulative sum of chained consecutive pairs, each calibrated to the
/// reference pixel. Masks are sticky: a pixel lost in pair k stays masked in
/// every later epoch.
DisplacementSeries assemble_series(const std::vector<DisplacementField>& fields,
                                   Pixel reference_pixel);

/// los / cos(theta). Only meaningful if the motion is purely vertical.
RealRaster project_vertical(const RealRaster& los_mm, double incidence_deg);

/// Pixel-wise mean over unmasked samples; masked where no sample exists.
RealRaster mean_raster(const std::vector<RealRaster>& rasters);

/// Highest-valued unmasked pixel of `quality` outside `excluded` (1 = skip).
/// Ties resolve to the first pixel in row-major order.
Pixel select_reference(const RealRaster& quality, const std::vector<std::uint8_t>& excluded);

/// Pixels within `buffer_px` (Chebyshev) of any listed pixel.
std::vector<std::uint8_t> buffer_mask(const GridMeta& meta, const std::vector<Pixel>& pixels,
                                      int buffer_px);

/// Directory layout: series.json + disp_<index>_<date>.r64 per epoch.
void save_series(const std::filesystem::path& dir, const DisplacementSeries& series);
DisplacementSeries load_series(const std::filesystem::path& dir);

}  // namespace insar

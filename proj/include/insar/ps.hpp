#pragma once

#include <vector>

#include <json.hpp>

#include "insar/displacement.hpp"
#include "insar/raster.hpp"

namespace insar::ps {

struct PSCandidate {
  Pixel pixel;
  double amp_dispersion = 0.0;  // sigma_A / mu_A, population sigma
  double mean_coherence = 0.0;
  bool selected = false;
};

inline constexpr int kMinEpochs = 10;
inline constexpr double kDefaultThreshold = 0.25;

/// Temporal amplitude dispersion per pixel. Zero mean amplitude is masked.
RealRaster amplitude_dispersion(const std::vector<ComplexRaster>& stack);

/// Pixels with D_A < threshold, ascending by D_A (row-major on ties).
/// `mean_coherence`, when given, fills the candidates' coherence field.
std::vector<PSCandidate> select_ps(const RealRaster& da, double threshold,
                                   const RealRaster* mean_coherence = nullptr);

struct PixelComparison {
  Pixel pixel;
  double rmse_mm = 0.0;
  double max_abs_dev_mm = 0.0;
  int epochs = 0;
};

struct ComparisonReport {
  std::vector<PixelComparison> ps;
  int non_ps_pixels = 0;
  double ps_rmse_mean_mm = 0.0;
  double ps_rmse_median_mm = 0.0;
  double ps_max_dev_mm = 0.0;
  double non_ps_rmse_median_mm = 0.0;
};

/// Compares a DInSAR series against a reference series (ground truth or a
/// second processing variant) at every selected PS, optionally restricted to
/// `on_profile`, and summarizes the remaining unmasked pixels as non-PS.
ComparisonReport compare_ps_dinsar(const DisplacementSeries& series,
                                   const std::vector<PSCandidate>& candidates,
                                   const std::vector<RealRaster>& reference,
                                   const std::vector<Pixel>* on_profile = nullptr);

nlohmann::json to_json(const std::vector<PSCandidate>& candidates);
nlohmann::json to_json(const ComparisonReport& report);

}  // namespace insar::ps

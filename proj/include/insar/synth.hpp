#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include <json.hpp>

#include "insar/date.hpp"
#include "insar/geometry.hpp"
#include "insar/raster.hpp"

namespace insar::synth {

struct GaussianBowl {
  double center_row = 0.0;
  double center_col = 0.0;
  double sigma_px = 1.0;
  double peak_rate_mm_yr = 0.0;
};

struct LinearRamp {
  double rate_east_mm_yr_per_km = 0.0;
};

/// Deformation confined to a structure deck around a polyline. The rate peaks
/// at one vertex and tapers linearly with along-line distance.
struct BridgeLine {
  ProfileLine line;
  std::size_t peak_vertex = 0;
  double peak_rate_mm_yr = 0.0;
  double taper_m = 250.0;
  int half_width_px = 1;
  /// Deck pixels behave as bright stable scatterers.
  bool deck_scatterers = true;
};

using DeformationModel = std::variant<GaussianBowl, LinearRamp, BridgeLine>;

struct ScenarioConfig {
  GridMeta grid;
  std::vector<Date> epochs;
  DeformationModel deformation = GaussianBowl{};
  std::optional<RealRaster> dem;
  double target_coherence = 0.8;
  std::vector<double> baselines_m;  // per epoch; empty means all zero
  double wavelength_m = 0.05546576;
  double incidence_deg = 39.0;
  double slant_range_m = 850000.0;
  std::uint64_t rng_seed = 1;
  /// Extra point scatterers with constant amplitude on top of clutter.
  std::vector<Pixel> stable_scatterers;
  double scatterer_amplitude = 10.0;

  void validate() const;
};

struct TruthStack {
  std::vector<ComplexRaster> slcs;
  std::vector<RealRaster> true_displacement_mm;  // cumulative LOS, first epoch zero
  double true_coherence = 1.0;
  std::vector<Pixel> stable_scatterers;  // configured plus deck pixels
  std::vector<Pixel> structure_pixels;   // deck footprint (bridge scenarios)
};

/// Line-of-sight deformation rate (mm/yr) per pixel for the configured model.
RealRaster deformation_rate(const ScenarioConfig& config);

/// Deterministic in `rng_seed`. The common speckle field is drawn from an
/// mt19937_64 seeded with rng_seed ^ kCommonStreamSalt; epoch t draws its
/// independent component from an mt19937_64 seeded with rng_seed ^ t. Each
/// stream is consumed row-major, two Box-Muller normals (re, im) per pixel.
TruthStack generate(const ScenarioConfig& config, int threads = 1);

inline constexpr std::uint64_t kCommonStreamSalt = 0x9E3779B97F4A7C15ULL;

/// Structure-monitoring scenario: 256x256 grid at 5 m, a 1102 m deck with
/// eleven spans, deformation peaking at vertex 8, 25 epochs at 12-day repeat
/// from 2017-08-08.
ScenarioConfig bridge_scenario_default(std::uint64_t seed = 7);

/// Center of the 3x3 stable ground block placed in the default scenario.
inline constexpr Pixel kBridgeReferenceBlockCenter{40, 40};

nlohmann::json scenario_to_json(const ScenarioConfig& config);
ScenarioConfig scenario_from_json(const nlohmann::json& j);

}  // namespace insar::synth

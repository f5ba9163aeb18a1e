#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "insar/catalog.hpp"
#include "insar/displacement.hpp"
#include "insar/interferometry.hpp"
#include "insar/synth.hpp"

namespace insar::pipeline {

enum class UnwrapMethod { Mcf, QualityGuided };

UnwrapMethod unwrap_method_from_string(const std::string& s);

struct ProcessingConfig {
  FilterConfig filter;
  int looks_x = 1;  // multilook factors applied after coherence estimation
  int looks_y = 1;
  double coherence_mask = 0.3;
  UnwrapMethod method = UnwrapMethod::Mcf;
  int threads = 1;
};

nlohmann::json processing_to_json(const ProcessingConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
ProcessingConfig processing_from_json(const nlohmann::json& j);

/// One pair after interferogram formation, geometric phase removal,
/// coherence estimation, multilooking and filtering.
struct PairProducts {
  Interferogram ifg;          // raw wrapped phase (geometry removed) + coherence
  RealRaster filtered_phase;  // Goldstein output, used to resolve ambiguities
};

PairProducts form_pair(const ComplexRaster& master, const ComplexRaster& slave,
                       const PairSpec& pair, const AcquisitionMeta& acq, const RealRaster* dem,
                       const ProcessingConfig& cfg);

/// Masks pixels below the coherence threshold, unwraps the filtered phase and
/// re-attaches the raw phase: U = raw + 2 pi round((U_filtered - raw) / 2 pi).
/// With `anchor`, pixels not connected to it are masked too.
RealRaster unwrap_pair(const PairProducts& products, const ProcessingConfig& cfg,
                       std::optional<Pixel> anchor = std::nullopt);

/// Throws Errc::ContractViolation unless phase lies in (-pi, pi] and
/// coherence in [0, 1] on every unmasked pixel.
void check_interferogram(const Interferogram& ifg);

/// Throws Errc::ContractViolation unless the first epoch is zero, the
/// reference pixel is zero everywhere and masks only grow.
void check_series(const DisplacementSeries& series);

struct ReferenceChoice {
  std::optional<Pixel> fixed;
  std::vector<std::uint8_t> excluded;  // for automatic selection
};

struct StackResult {
  std::vector<PairSpec> pairs;
  std::vector<PairProducts> products;
  std::vector<RealRaster> unwrapped;
  RealRaster mean_coherence;
  Pixel reference;
  DisplacementSeries series;
};

/// Full chain over a date-sorted stack: pairs, interferograms, reference
/// selection (highest mean coherence outside `excluded` unless fixed),
/// unwrapping, conversion to LOS and cumulative assembly.
StackResult process_stack(const std::vector<ComplexRaster>& slcs,
                          const std::vector<AcquisitionMeta>& acquisitions, const RealRaster* dem,
                          const ProcessingConfig& cfg, const ReferenceChoice& reference);

/// Catalog entries for a synthetic scenario (ids S1_YYYYMMDD).
std::vector<AcquisitionMeta> scenario_acquisitions(const synth::ScenarioConfig& config,
                                                   const std::string& slc_dir = "slc");

}  // namespace insar::pipeline

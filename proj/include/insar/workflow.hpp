#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "insar/catalog.hpp"
#include "insar/displacement.hpp"
#include "insar/pipeline.hpp"
#include "insar/synth.hpp"

namespace insar::workflow {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const fs::path& path);

/// Runs `fn`, rethrowing any Error or filesystem failure as a StageError
/// named `stage`.
template <typename F>
decltype(auto) run_stage(const std::string& stage, F&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e.code(), e.what());
  } catch (const fs::filesystem_error& e) {
    throw StageError(stage, Errc::Io, e.what());
  } catch (const nlohmann::json::exception& e) {
    throw StageError(stage, Errc::Schema, e.what());
  }
}

/// Files written by `write_synthetic`, relative to its output directory.
struct SynthLayout {
  static constexpr const char* kScenario = "scenario.json";
  static constexpr const char* kCatalog = "catalog.json";
  static constexpr const char* kDem = "dem.r64";
  static constexpr const char* kLine = "bridge.geojson";
  static constexpr const char* kTruthDir = "truth";
  static constexpr const char* kTruthIndex = "truth/truth.json";
};

/// Writes SLCs, DEM, truth rasters, scenario and catalog for `config`.
/// Returns the relative paths of everything written.
std::vector<std::string> write_synthetic(const fs::path& dir, const synth::ScenarioConfig& config,
                                         const synth::TruthStack& truth);

/// Scenario JSON plus an optional `dem_path` key resolved against `base`.
synth::ScenarioConfig load_scenario(const fs::path& path);

struct LoadedStack {
  std::vector<AcquisitionMeta> acquisitions;  // sorted by date
  std::vector<ComplexRaster> slcs;
};

/// Loads every SLC named in a catalog; relative `slc_path`s resolve against
/// the catalog's directory. Sidecar dates must agree with the catalog.
LoadedStack load_stack(const fs::path& catalog_path);

struct TruthData {
  std::vector<Date> dates;
  std::vector<RealRaster> cumulative_mm;
  std::vector<Pixel> stable_scatterers;
  std::vector<Pixel> structure_pixels;
};

TruthData load_truth(const fs::path& synth_dir);

/// Pair directory name: `NN_YYYY-MM-DD_YYYY-MM-DD`.
std::string pair_dir_name(std::size_t index, const PairSpec& pair);

/// Writes phase.r64, phase_filtered.r64, coherence.r64 and pair.json.
std::vector<std::string> write_pair_products(const fs::path& dir,
                                             const pipeline::PairProducts& products,
                                             const AcquisitionMeta& master);

struct PairRecord {
  fs::path dir;
  PairSpec pair;
  AcquisitionMeta master;
  pipeline::PairProducts products;
  std::optional<RealRaster> unwrapped;
};

PairRecord load_pair(const fs::path& dir);

/// A single pair directory (holding pair.json) or a directory of them,
/// ordered by master date.
std::vector<PairRecord> load_pairs(const fs::path& dir);

/// Buffer around the structure excluded from automatic reference selection.
inline constexpr int kReferenceBufferPx = 5;

/// Highest mean-coherence pixel outside the structure buffer.
Pixel auto_reference(const std::vector<PairRecord>& pairs, const std::vector<Pixel>& structure);

/// Parses "ROW,COL"; throws InvalidArgument otherwise.
Pixel parse_pixel(const std::string& text);

DisplacementSeries series_from_pairs(const std::vector<PairRecord>& pairs, Pixel reference);

/// Stage-by-stage record of outputs and their content hashes. Rewritten
/// after every stage so it always reflects completed work.
class Manifest {
 public:
  Manifest(fs::path root, nlohmann::json config);

  void record_stage(const std::string& name, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs);
  void set(const std::string& key, nlohmann::json value);
  const nlohmann::json& document() const { return doc_; }
  void write() const;

 private:
  fs::path root_;
  nlohmann::json doc_;
};

struct DemoOptions {
  fs::path out;
  std::uint64_t seed = 7;
  int threads = 1;
  pipeline::ProcessingConfig processing;
  double ps_threshold = 0.25;
  double alert_rate_mm_yr = 10.0;
  double alert_rmse_mm = 5.0;
};

struct DemoSummary {
  Pixel reference;
  Pixel peak_pixel;
  double peak_recovered_mm = 0.0;
  double peak_truth_mm = 0.0;
  double peak_rate_mm_yr = 0.0;
  std::size_t alerts = 0;
  std::size_t profile_samples = 0;
  std::size_t epochs = 0;
};

/// Bridge scenario end to end: synth, catalog, interferograms, unwrapping,
/// series, profile, PS comparison and alerts, with a manifest of hashes.
/// Timings go to timings.json, kept out of the manifest so it stays
/// byte-stable.
DemoSummary run_demo(const DemoOptions& options);

}  // namespace insar::workflow

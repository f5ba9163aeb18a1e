#include "insar/workflow.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>

#include <openssl/evp.h>

#include "insar/fileio.hpp"
#include "insar/geometry.hpp"
#include "insar/parallel.hpp"
#include "insar/profile.hpp"
#include "insar/ps.hpp"
#include "insar/trend.hpp"

namespace insar::workflow {

using nlohmann::json;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(Errc::Io, "SHA-256 computation failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

namespace {

json pixels_to_json(const std::vector<Pixel>& pixels) {
  json a = json::array();
  for (const Pixel& p : pixels) a.push_back({p.row, p.col});
  return a;
}

std::vector<Pixel> pixels_from_json(const json& a) {
  std::vector<Pixel> out;
  for (const auto& e : a) out.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
  return out;
}

std::string truth_file(std::size_t k, const Date& d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "truth_%03zu_%s.r64", k, d.to_string().c_str());
  return buf;
}

std::vector<std::string> with_sidecars(std::vector<std::string> files) {
  std::vector<std::string> out;
  for (auto& f : files) {
    const bool raster = f.ends_with(".r64") || f.ends_with(".slc");
    out.push_back(f);
    if (raster) out.push_back(f + ".json");
  }
  return out;
}

}  // namespace

std::vector<std::string> write_synthetic(const fs::path& dir, const synth::ScenarioConfig& config,
                                         const synth::TruthStack& truth) {
  fs::create_directories(dir / "slc");
  fs::create_directories(dir / SynthLayout::kTruthDir);
  std::vector<std::string> files;

  json scenario = synth::scenario_to_json(config);
  if (config.dem) {
    save_real(dir / SynthLayout::kDem, *config.dem);
    scenario["dem_path"] = SynthLayout::kDem;
    files.push_back(SynthLayout::kDem);
  }
  write_json(dir / SynthLayout::kScenario, scenario);
  files.push_back(SynthLayout::kScenario);

  const auto acquisitions = pipeline::scenario_acquisitions(config);
  for (std::size_t t = 0; t < acquisitions.size(); ++t) {
    const auto& a = acquisitions[t];
    save_slc(dir / a.slc_path, truth.slcs[t],
             SlcHeader{config.grid, a.date.to_string(), a.wavelength_m, a.incidence_deg,
                       a.slant_range_m});
    files.push_back(a.slc_path);
  }
  Catalog cat{acquisitions, build_pairs(acquisitions, 12)};
  save_catalog(dir / SynthLayout::kCatalog, cat);
  files.push_back(SynthLayout::kCatalog);

  json epochs = json::array();
  for (std::size_t t = 0; t < config.epochs.size(); ++t) {
    const std::string name = truth_file(t, config.epochs[t]);
    save_real(dir / SynthLayout::kTruthDir / name, truth.true_displacement_mm[t]);
    epochs.push_back({{"date", config.epochs[t].to_string()}, {"file", name}});
    files.push_back(std::string(SynthLayout::kTruthDir) + "/" + name);
  }
  write_json(dir / SynthLayout::kTruthIndex,
             json{{"units", "mm (line of sight, positive toward sensor)"},
                  {"true_coherence", truth.true_coherence},
                  {"epochs", epochs},
                  {"stable_scatterers", pixels_to_json(truth.stable_scatterers)},
                  {"structure_pixels", pixels_to_json(truth.structure_pixels)}});
  files.push_back(SynthLayout::kTruthIndex);

  if (const auto* bridge = std::get_if<synth::BridgeLine>(&config.deformation)) {
    save_geojson_line(dir / SynthLayout::kLine, bridge->line);
    files.push_back(SynthLayout::kLine);
  }
  return with_sidecars(files);
}

synth::ScenarioConfig load_scenario(const fs::path& path) {
  const json j = read_json(path);
  synth::ScenarioConfig config = synth::scenario_from_json(j);
  if (j.contains("dem_path")) {
    fs::path dem = j.at("dem_path").get<std::string>();
    if (dem.is_relative()) dem = path.parent_path() / dem;
    config.dem = load_real(dem);
  }
  config.validate();
  return config;
}

LoadedStack load_stack(const fs::path& catalog_path) {
  Catalog cat = load_catalog(catalog_path);
  if (cat.acquisitions.empty()) throw Error(Errc::NotEnoughData, "catalog has no acquisitions");
  std::sort(cat.acquisitions.begin(), cat.acquisitions.end(),
            [](const auto& a, const auto& b) { return a.date < b.date; });
  LoadedStack out;
  for (const auto& a : cat.acquisitions) {
    fs::path p = a.slc_path;
    if (p.is_relative()) p = catalog_path.parent_path() / p;
    const SlcHeader h = read_slc_header(p);
    if (h.acquisition_date != a.date.to_string())
      throw Error(Errc::MalformedSidecar, p.string() + ": sidecar date " + h.acquisition_date +
                                              " disagrees with catalog date " +
                                              a.date.to_string());
    out.slcs.push_back(load_slc(p));
    if (!out.slcs.empty()) require_compatible(out.slcs.front().meta(), out.slcs.back().meta());
    out.acquisitions.push_back(a);
  }
  return out;
}

TruthData load_truth(const fs::path& synth_dir) {
  const json j = read_json(synth_dir / SynthLayout::kTruthIndex);
  TruthData t;
  for (const auto& e : j.at("epochs")) {
    t.dates.push_back(Date::parse(e.at("date").get<std::string>()));
    t.cumulative_mm.push_back(
        load_real(synth_dir / SynthLayout::kTruthDir / e.at("file").get<std::string>()));
  }
  t.stable_scatterers = pixels_from_json(j.at("stable_scatterers"));
  t.structure_pixels = pixels_from_json(j.at("structure_pixels"));
  return t;
}

std::string pair_dir_name(std::size_t index, const PairSpec& pair) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%02zu_%s_%s", index, pair.master_date.to_string().c_str(),
                pair.slave_date.to_string().c_str());
  return buf;
}

std::vector<std::string> write_pair_products(const fs::path& dir,
                                             const pipeline::PairProducts& products,
                                             const AcquisitionMeta& master) {
  fs::create_directories(dir);
  save_real(dir / "phase.r64", products.ifg.phase);
  save_real(dir / "phase_filtered.r64", products.filtered_phase);
  save_real(dir / "coherence.r64", products.ifg.coherence);
  write_json(dir / "pair.json",
             json{{"pair", pair_to_json(products.ifg.pair)},
                  {"master", acquisition_to_json(master)}});
  return with_sidecars({"phase.r64", "phase_filtered.r64", "coherence.r64", "pair.json"});
}

PairRecord load_pair(const fs::path& dir) {
  const json j = read_json(dir / "pair.json");
  if (!j.is_object() || !j.contains("pair") || !j.contains("master"))
    throw Error(Errc::Schema, (dir / "pair.json").string() + ": 'pair' and 'master' required");
  PairRecord r;
  r.dir = dir;
  r.pair = pair_from_json(j.at("pair"));
  r.master = acquisition_from_json(j.at("master"));
  r.master.validate();
  RealRaster phase = load_real(dir / "phase.r64");
  RealRaster coherence = load_real(dir / "coherence.r64");
  require_compatible(phase.meta(), coherence.meta());
  RealRaster filtered =
      fs::exists(dir / "phase_filtered.r64") ? load_real(dir / "phase_filtered.r64") : phase;
  require_compatible(phase.meta(), filtered.meta());
  const GridMeta meta = phase.meta();
  r.products = {Interferogram{meta, std::move(phase), std::move(coherence), r.pair},
                std::move(filtered)};
  if (fs::exists(dir / "unwrapped.r64")) {
    r.unwrapped = load_real(dir / "unwrapped.r64");
    require_compatible(meta, r.unwrapped->meta());
  }
  return r;
}

std::vector<PairRecord> load_pairs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::Io, dir.string() + ": not a directory");
  if (fs::exists(dir / "pair.json")) return {load_pair(dir)};
  std::vector<fs::path> subdirs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && fs::exists(e.path() / "pair.json")) subdirs.push_back(e.path());
  std::sort(subdirs.begin(), subdirs.end());
  std::vector<PairRecord> out;
  for (const auto& d : subdirs) out.push_back(load_pair(d));
  if (out.empty()) throw Error(Errc::NotEnoughData, dir.string() + ": no pair directories");
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.pair.master_date < b.pair.master_date; });
  return out;
}

Pixel auto_reference(const std::vector<PairRecord>& pairs, const std::vector<Pixel>& structure) {
  std::vector<RealRaster> coh;
  for (const auto& p : pairs) coh.push_back(p.products.ifg.coherence);
  const RealRaster mean = mean_raster(coh);
  return select_reference(mean, buffer_mask(mean.meta(), structure, kReferenceBufferPx));
}

Pixel parse_pixel(const std::string& text) {
  int row = 0, col = 0;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%d,%d%c", &row, &col, &extra) != 2)
    throw Error(Errc::InvalidArgument, "expected ROW,COL but got '" + text + "'");
  return {row, col};
}

DisplacementSeries series_from_pairs(const std::vector<PairRecord>& pairs, Pixel reference) {
  std::vector<DisplacementField> fields;
  for (const auto& p : pairs) {
    if (!p.unwrapped)
      throw Error(Errc::NotEnoughData, p.dir.string() + ": no unwrapped.r64 (run unwrap first)");
    fields.push_back({p.unwrapped->meta(), phase_to_los(*p.unwrapped, p.master.wavelength_m), p.pair});
  }
  DisplacementSeries s = assemble_series(fields, reference);
  pipeline::check_series(s);
  return s;
}

Manifest::Manifest(fs::path root, json config) : root_(std::move(root)) {
  doc_ = json{{"tool", "insar"}, {"config", std::move(config)}, {"stages", json::array()}};
}

void Manifest::record_stage(const std::string& name, const std::vector<std::string>& inputs,
                            const std::vector<std::string>& outputs) {
  json outs = json::array();
  for (const auto& rel : outputs) {
    const std::string bytes = read_file(root_ / rel);
    outs.push_back({{"path", rel}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
  }
  doc_["stages"].push_back({{"name", name}, {"inputs", inputs}, {"outputs", outs}});
  write();
}

void Manifest::set(const std::string& key, json value) {
  doc_[key] = std::move(value);
  write();
}

void Manifest::write() const { write_json(root_ / "manifest.json", doc_); }

namespace {

std::vector<RealRaster> rereferenced(const std::vector<RealRaster>& truth, Pixel ref) {
  std::vector<RealRaster> out;
  for (const auto& r : truth) {
    RealRaster c(r.meta(), RasterKind::DisplacementMm, RealRaster::kNoData);
    const double offset = r.at(ref);
    for (std::size_t i = 0; i < r.size(); ++i)
      if (!r.masked(i)) c.set(i, r[i] - offset);
    out.push_back(std::move(c));
  }
  return out;
}

std::string prefixed(const std::string& prefix, const std::string& rel) { return prefix + "/" + rel; }

}  // namespace

DemoSummary run_demo(const DemoOptions& opt) {
  using clock = std::chrono::steady_clock;
  json timings = json::object();
  auto timed = [&](const std::string& stage, auto&& fn) -> decltype(auto) {
    const auto t0 = clock::now();
    struct Guard {
      json& t;
      std::string s;
      clock::time_point t0;
      ~Guard() { t[s] = std::chrono::duration<double>(clock::now() - t0).count(); }
    } guard{timings, stage, t0};
    return run_stage(stage, fn);
  };

  const fs::path out = opt.out;
  synth::ScenarioConfig config;
  synth::TruthStack truth;
  std::optional<Manifest> manifest;

  // synth
  timed("synth", [&] {
    if (opt.processing.looks_x != 1 || opt.processing.looks_y != 1)
      throw Error(Errc::InvalidArgument, "the demo compares against full-resolution truth; looks must be 1");
    fs::create_directories(out);
    config = synth::bridge_scenario_default(opt.seed);
    json cfg = {{"scenario", synth::scenario_to_json(config)},
                {"seed", opt.seed},
                {"processing", pipeline::processing_to_json(opt.processing)},
                {"ps_threshold", opt.ps_threshold},
                {"alert_rate_mm_per_year", opt.alert_rate_mm_yr},
                {"alert_rmse_mm", opt.alert_rmse_mm}};
    manifest.emplace(out, std::move(cfg));
    manifest->write();
    truth = synth::generate(config, opt.threads);
    std::vector<std::string> files;
    for (const auto& f : write_synthetic(out / "synth", config, truth))
      files.push_back(prefixed("synth", f));
    manifest->record_stage("synth", {}, files);
  });
  const auto& bridge = std::get<synth::BridgeLine>(config.deformation);

  // catalog
  LoadedStack stack;
  Catalog catalog;
  timed("catalog", [&] {
    stack = load_stack(out / "synth" / SynthLayout::kCatalog);
    catalog = load_catalog(out / "synth" / SynthLayout::kCatalog);
    if (catalog.pairs.size() + 1 != stack.acquisitions.size())
      throw Error(Errc::ContractViolation, "catalog pairs do not chain every acquisition");
    for (const auto& p : catalog.pairs)
      if (p.gap) throw Error(Errc::ContractViolation, "unexpected gap in demo catalog");
    manifest->set("monitoring_window", {{"first", stack.acquisitions.front().date.to_string()},
                                        {"last", stack.acquisitions.back().date.to_string()},
                                        {"pairs", catalog.pairs.size()}});
    manifest->record_stage("catalog", {"synth/catalog.json"}, {});
  });

  // interferometry
  const std::size_t n = catalog.pairs.size();
  std::vector<pipeline::PairProducts> products(n);
  timed("ifg", [&] {
    const RealRaster* dem = config.dem ? &*config.dem : nullptr;
    parallel_for(n, opt.threads, [&](std::size_t k) {
      products[k] = pipeline::form_pair(stack.slcs[k], stack.slcs[k + 1], catalog.pairs[k],
                                        stack.acquisitions[k], dem, opt.processing);
      pipeline::check_interferogram(products[k].ifg);
    });
    std::vector<std::string> files;
    for (std::size_t k = 0; k < n; ++k) {
      const std::string name = prefixed("pairs", pair_dir_name(k, catalog.pairs[k]));
      for (const auto& f : write_pair_products(out / name, products[k], stack.acquisitions[k]))
        files.push_back(prefixed(name, f));
    }
    manifest->record_stage("ifg", {"synth/catalog.json"}, files);
  });

  // unwrap
  const RasterizedLine line = rasterize_polyline(bridge.line, config.grid);
  Pixel reference;
  std::vector<RealRaster> unwrapped(n);
  timed("unwrap", [&] {
    std::vector<RealRaster> coh;
    for (const auto& p : products) coh.push_back(p.ifg.coherence);
    reference = select_reference(mean_raster(coh),
                                 buffer_mask(config.grid, line.pixels, kReferenceBufferPx));
    parallel_for(n, opt.threads, [&](std::size_t k) {
      unwrapped[k] = pipeline::unwrap_pair(products[k], opt.processing, reference);
    });
    std::vector<std::string> files;
    for (std::size_t k = 0; k < n; ++k) {
      const std::string rel = prefixed(prefixed("pairs", pair_dir_name(k, catalog.pairs[k])),
                                       "unwrapped.r64");
      save_real(out / rel, unwrapped[k]);
      files.push_back(rel);
      files.push_back(rel + ".json");
    }
    manifest->record_stage("unwrap", {"pairs"}, files);
  });

  // series
  DisplacementSeries series;
  timed("series", [&] {
    std::vector<DisplacementField> fields(n);
    for (std::size_t k = 0; k < n; ++k)
      fields[k] = {config.grid, phase_to_los(unwrapped[k], stack.acquisitions[k].wavelength_m),
                   catalog.pairs[k]};
    series = assemble_series(fields, reference);
    pipeline::check_series(series);
    save_series(out / "series", series);
    std::vector<std::string> files{"series/series.json"};
    const json series_doc = read_json(out / "series" / "series.json");
    for (const auto& e : series_doc.at("epochs")) {
      files.push_back("series/" + e.at("file").get<std::string>());
      files.push_back(files.back() + ".json");
    }
    manifest->record_stage("series", {"pairs"}, files);
  });

  // profile
  ProfileSeries profile;
  timed("profile", [&] {
    profile = extract_profile(series, bridge.line);
    profile.validate();
    export_profile(out / "profile.csv", profile, ProfileFormat::Csv);
    export_profile(out / "profile.json", profile, ProfileFormat::Json);
    manifest->record_stage("profile", {"series", "synth/bridge.geojson"},
                           {"profile.csv", "profile.json"});
  });

  // ps
  timed("ps", [&] {
    const RealRaster da = ps::amplitude_dispersion(stack.slcs);
    std::vector<RealRaster> coh;
    for (const auto& p : products) coh.push_back(p.ifg.coherence);
    const RealRaster mean_coh = mean_raster(coh);
    const auto candidates = ps::select_ps(da, opt.ps_threshold, &mean_coh);
    write_json(out / "ps.json", json{{"threshold", opt.ps_threshold},
                                     {"candidates", ps::to_json(candidates)}});
    const auto report = ps::compare_ps_dinsar(
        series, candidates, rereferenced(truth.true_displacement_mm, reference), &line.pixels);
    json rep = ps::to_json(report);
    rep["truth"] = "synthetic ground truth, re-referenced to the series reference pixel";
    write_json(out / "comparison.json", rep);
    manifest->record_stage("ps", {"synth/catalog.json", "series"}, {"ps.json", "comparison.json"});
  });

  // alert
  std::vector<trend::Alert> alerts;
  timed("alert", [&] {
    const ProfileSeries reread = import_profile(out / "profile.csv");
    alerts = trend::alert_scan(reread, opt.alert_rate_mm_yr, opt.alert_rmse_mm);
    write_json(out / "alerts.json", trend::to_json(alerts, opt.alert_rate_mm_yr, opt.alert_rmse_mm));
    manifest->record_stage("alert", {"profile.csv"}, {"alerts.json"});
  });

  DemoSummary s;
  s.reference = reference;
  s.peak_pixel = line.pixels[line.vertex_samples[bridge.peak_vertex]];
  s.peak_recovered_mm = series.cumulative_mm.back().at(s.peak_pixel);
  s.peak_truth_mm =
      truth.true_displacement_mm.back().at(s.peak_pixel) - truth.true_displacement_mm.back().at(reference);
  std::vector<std::optional<double>> column;
  for (const auto& e : series.cumulative_mm)
    column.push_back(e.masked(s.peak_pixel) ? std::nullopt : std::optional<double>(e.at(s.peak_pixel)));
  s.peak_rate_mm_yr = trend::fit_trend(series.dates, column).rate_mm_per_year;
  s.alerts = alerts.size();
  s.profile_samples = profile.pixels.size();
  s.epochs = series.dates.size();

  run_stage("manifest", [&] {
    manifest->set("summary", {{"reference_pixel", {reference.row, reference.col}},
                              {"peak_pixel", {s.peak_pixel.row, s.peak_pixel.col}},
                              {"peak_recovered_mm", s.peak_recovered_mm},
                              {"peak_truth_mm", s.peak_truth_mm},
                              {"peak_rate_mm_per_year", s.peak_rate_mm_yr},
                              {"alerts", s.alerts}});
    write_json(out / "timings.json", timings);
  });
  return s;
}

}  // namespace insar::workflow

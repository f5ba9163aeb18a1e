#include "insar/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "insar/parallel.hpp"
#include "insar/phase.hpp"
#include "insar/unwrap.hpp"

namespace insar::pipeline {

UnwrapMethod unwrap_method_from_string(const std::string& s) {
  if (s == "mcf") return UnwrapMethod::Mcf;
  if (s == "quality") return UnwrapMethod::QualityGuided;
  throw Error(Errc::InvalidArgument, "unknown unwrap method '" + s + "' (mcf|quality)");
}

nlohmann::json processing_to_json(const ProcessingConfig& p) {
  return {{"goldstein_alpha", p.filter.goldstein_alpha},
          {"patch", p.filter.patch},
          {"overlap", p.filter.overlap},
          {"coherence_window", p.filter.coherence_window},
          {"looks_x", p.looks_x},
          {"looks_y", p.looks_y},
          {"coherence_mask", p.coherence_mask},
          {"unwrap_method", p.method == UnwrapMethod::Mcf ? "mcf" : "quality"}};
}

ProcessingConfig processing_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(Errc::Schema, "processing config must be a JSON object");
  ProcessingConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "goldstein_alpha") c.filter.goldstein_alpha = v.get<double>();
      else if (key == "patch") c.filter.patch = v.get<int>();
      else if (key == "overlap") c.filter.overlap = v.get<int>();
      else if (key == "coherence_window") c.filter.coherence_window = v.get<int>();
      else if (key == "looks_x") c.looks_x = v.get<int>();
      else if (key == "looks_y") c.looks_y = v.get<int>();
      else if (key == "coherence_mask") c.coherence_mask = v.get<double>();
      else if (key == "unwrap_method") c.method = unwrap_method_from_string(v.get<std::string>());
      else throw Error(Errc::Schema, "unknown processing key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Schema, std::string("processing config: ") + e.what());
  }
  c.filter.validate();
  if (!(c.coherence_mask >= 0.0 && c.coherence_mask <= 1.0))
    throw Error(Errc::Schema, "coherence_mask must lie in [0, 1]");
  if (c.looks_x < 1 || c.looks_y < 1) throw Error(Errc::Schema, "looks must be >= 1");
  return c;
}

PairProducts form_pair(const ComplexRaster& master, const ComplexRaster& slave,
                       const PairSpec& pair, const AcquisitionMeta& acq, const RealRaster* dem,
                       const ProcessingConfig& cfg) {
  cfg.filter.validate();
  Interferogram ifg = form_interferogram(master, slave, pair);
  ifg = remove_flat_earth(ifg, pair, acq);
  if (dem) ifg = remove_topographic_phase(ifg, *dem, pair, acq);
  ifg.coherence = estimate_coherence(master, slave, cfg.filter.coherence_window);
  if (cfg.looks_x > 1 || cfg.looks_y > 1) ifg = multilook(ifg, cfg.looks_x, cfg.looks_y);
  PairProducts out{ifg, ifg.phase};
  if (cfg.filter.goldstein_alpha > 0.0) out.filtered_phase = goldstein_filter(ifg, cfg.filter).phase;
  return out;
}

RealRaster unwrap_pair(const PairProducts& products, const ProcessingConfig& cfg,
                       std::optional<Pixel> anchor) {
  const RealRaster& raw = products.ifg.phase;
  const RealRaster& coh = products.ifg.coherence;
  RealRaster guide = products.filtered_phase;
  RealRaster quality = coh;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw.masked(i) || coh.masked(i) || coh[i] < cfg.coherence_mask) {
      guide.mask(i);
      quality.mask(i);
    }
  }
  if (anchor) {
    if (guide.masked(*anchor))
      throw Error(Errc::MaskedReference, "reference pixel below coherence mask in pair " +
                                             products.ifg.pair.master_id + "/" +
                                             products.ifg.pair.slave_id);
    const auto member = unwrap::connected_component(guide, *anchor);
    for (std::size_t i = 0; i < guide.size(); ++i)
      if (!member[i]) {
        guide.mask(i);
        quality.mask(i);
      }
  }
  const RealRaster u = cfg.method == UnwrapMethod::Mcf
                           ? unwrap::unwrap_mcf(guide, quality)
                           : unwrap::unwrap_quality_guided(guide, quality);
  RealRaster out(raw.meta(), RasterKind::Phase, RealRaster::kNoData);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (u.masked(i)) continue;
    out.set(i, raw[i] + kTwoPi * std::round((u[i] - raw[i]) / kTwoPi));
  }
  return out;
}

void check_interferogram(const Interferogram& ifg) {
  for (std::size_t i = 0; i < ifg.phase.size(); ++i) {
    if (!ifg.phase.masked(i) && !(ifg.phase[i] > -kPi && ifg.phase[i] <= kPi))
      throw Error(Errc::ContractViolation, "wrapped phase outside (-pi, pi]");
    if (!ifg.coherence.masked(i) && !(ifg.coherence[i] >= 0.0 && ifg.coherence[i] <= 1.0))
      throw Error(Errc::ContractViolation, "coherence outside [0, 1]");
  }
}

void check_series(const DisplacementSeries& s) {
  if (s.cumulative_mm.empty() || s.cumulative_mm.size() != s.dates.size())
    throw Error(Errc::ContractViolation, "series dates and epochs disagree");
  for (std::size_t i = 0; i < s.cumulative_mm[0].size(); ++i)
    if (!s.cumulative_mm[0].masked(i) && s.cumulative_mm[0][i] != 0.0)
      throw Error(Errc::ContractViolation, "first epoch of a series must be zero");
  for (std::size_t k = 0; k < s.cumulative_mm.size(); ++k) {
    const auto& e = s.cumulative_mm[k];
    if (e.masked(s.reference_pixel) || e.at(s.reference_pixel) != 0.0)
      throw Error(Errc::ContractViolation, "reference pixel not zero at " + s.dates[k].to_string());
    if (k > 0)
      for (std::size_t i = 0; i < e.size(); ++i)
        if (s.cumulative_mm[k - 1].masked(i) && !e.masked(i))
          throw Error(Errc::ContractViolation, "series mask shrank at " + s.dates[k].to_string());
  }
}

StackResult process_stack(const std::vector<ComplexRaster>& slcs,
                          const std::vector<AcquisitionMeta>& acquisitions, const RealRaster* dem,
                          const ProcessingConfig& cfg, const ReferenceChoice& reference) {
  if (slcs.size() != acquisitions.size())
    throw Error(Errc::InvalidArgument, "one acquisition record per SLC required");
  for (std::size_t i = 1; i < acquisitions.size(); ++i)
    if (!(acquisitions[i - 1].date < acquisitions[i].date))
      throw Error(Errc::InvalidArgument, "stack must be sorted by strictly increasing date");

  StackResult out;
  out.pairs = build_pairs(acquisitions, 1 << 30);
  const std::size_t n = out.pairs.size();
  out.products.resize(n);
  parallel_for(n, cfg.threads, [&](std::size_t k) {
    out.products[k] = form_pair(slcs[k], slcs[k + 1], out.pairs[k], acquisitions[k], dem, cfg);
    check_interferogram(out.products[k].ifg);
  });

  std::vector<RealRaster> coherences;
  for (const auto& p : out.products) coherences.push_back(p.ifg.coherence);
  out.mean_coherence = mean_raster(coherences);
  out.reference = reference.fixed ? *reference.fixed
                                  : select_reference(out.mean_coherence, reference.excluded);

  out.unwrapped.resize(n);
  std::vector<DisplacementField> fields(n);
  parallel_for(n, cfg.threads, [&](std::size_t k) {
    out.unwrapped[k] = unwrap_pair(out.products[k], cfg, out.reference);
    fields[k] = DisplacementField{out.unwrapped[k].meta(),
                                  phase_to_los(out.unwrapped[k], acquisitions[k].wavelength_m),
                                  out.pairs[k]};
  });
  out.series = assemble_series(fields, out.reference);
  check_series(out.series);
  return out;
}

std::vector<AcquisitionMeta> scenario_acquisitions(const synth::ScenarioConfig& config,
                                                   const std::string& slc_dir) {
  std::vector<AcquisitionMeta> acq;
  for (std::size_t t = 0; t < config.epochs.size(); ++t) {
    AcquisitionMeta a;
    std::string compact = config.epochs[t].to_string();
    compact.erase(std::remove(compact.begin(), compact.end(), '-'), compact.end());
    a.id = "S1_" + compact;
    a.date = config.epochs[t];
    a.wavelength_m = config.wavelength_m;
    a.incidence_deg = config.incidence_deg;
    a.slant_range_m = config.slant_range_m;
    a.slc_path = slc_dir + "/" + a.id + ".slc";
    a.baseline_m = config.baselines_m.empty() ? 0.0 : config.baselines_m[t];
    acq.push_back(std::move(a));
  }
  return acq;
}

}  // namespace insar::pipeline

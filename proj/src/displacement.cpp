#include "insar/displacement.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "insar/fileio.hpp"
#include "insar/phase.hpp"

namespace insar {

namespace fs = std::filesystem;
using nlohmann::json;

RealRaster phase_to_los(const RealRaster& unwrapped, double wavelength_m) {
  if (!(wavelength_m > 0.0)) throw Error(Errc::InvalidArgument, "wavelength must be > 0");
  const double scale = -1000.0 * wavelength_m / (4.0 * kPi);
  RealRaster out(unwrapped.meta(), RasterKind::DisplacementMm, 0.0);
  for (std::size_t i = 0; i < unwrapped.size(); ++i) {
    if (unwrapped.masked(i))
      out.mask(i);
    else
      out.set(i, scale * unwrapped[i]);
  }
  return out;
}

DisplacementField calibrate(const DisplacementField& field, Pixel reference_pixel) {
  if (!field.meta.contains(reference_pixel))
    throw Error(Errc::OutOfBounds, "reference pixel outside grid");
  if (field.los_mm.masked(reference_pixel)) {
    throw Error(Errc::MaskedReference,
                "reference pixel (" + std::to_string(reference_pixel.row) + ", " +
                    std::to_string(reference_pixel.col) + ") is masked in epoch " +
                    field.pair.slave_date.to_string());
  }
  const double offset = field.los_mm.at(reference_pixel);
  DisplacementField out = field;
  for (std::size_t i = 0; i < out.los_mm.size(); ++i)
    if (!out.los_mm.masked(i)) out.los_mm.set(i, field.los_mm[i] - offset);
  // Exact zero regardless of rounding.
  out.los_mm.set(reference_pixel.row, reference_pixel.col, 0.0);
  return out;
}

DisplacementSeries assemble_series(const std::vector<DisplacementField>& fields,
                                   Pixel reference_pixel) {
  if (fields.empty()) throw Error(Errc::NotEnoughData, "series needs at least one pair");
  const GridMeta& g = fields.front().meta;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    require_compatible(g, fields[k].meta);
    require_compatible(g, fields[k].los_mm.meta());
    const PairSpec& p = fields[k].pair;
    if (!(p.master_date < p.slave_date))
      throw Error(Errc::InvalidArgument, "pair " + std::to_string(k) + " is not chronological");
    if (k > 0) {
      const PairSpec& prev = fields[k - 1].pair;
      if (prev.slave_id != p.master_id || prev.slave_date != p.master_date)
        throw Error(Errc::InvalidArgument,
                    "pairs are not a consecutive chain at index " + std::to_string(k));
    }
  }

  DisplacementSeries s;
  s.meta = g;
  s.reference_pixel = reference_pixel;
  s.dates.push_back(fields.front().pair.master_date);
  s.cumulative_mm.emplace_back(g, RasterKind::DisplacementMm, 0.0);
  for (const auto& f : fields) {
    const DisplacementField cal = calibrate(f, reference_pixel);
    RealRaster next = s.cumulative_mm.back();
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (next.masked(i) || cal.los_mm.masked(i))
        next.mask(i);
      else
        next.set(i, next[i] + cal.los_mm[i]);
    }
    s.dates.push_back(f.pair.slave_date);
    s.cumulative_mm.push_back(std::move(next));
  }
  return s;
}

RealRaster project_vertical(const RealRaster& los_mm, double incidence_deg) {
  if (!(incidence_deg >= 0.0 && incidence_deg < 90.0))
    throw Error(Errc::InvalidArgument, "vertical projection needs 0 <= incidence < 90 degrees");
  const double inv_cos = 1.0 / std::cos(incidence_deg * kPi / 180.0);
  RealRaster out(los_mm.meta(), RasterKind::DisplacementMm, 0.0);
  for (std::size_t i = 0; i < los_mm.size(); ++i) {
    if (los_mm.masked(i))
      out.mask(i);
    else
      out.set(i, incidence_deg == 0.0 ? los_mm[i] : los_mm[i] * inv_cos);
  }
  return out;
}

RealRaster mean_raster(const std::vector<RealRaster>& rasters) {
  if (rasters.empty()) throw Error(Errc::NotEnoughData, "mean of zero rasters");
  const GridMeta& g = rasters.front().meta();
  RealRaster out(g, rasters.front().kind(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : rasters) {
      require_compatible(g, r.meta());
      if (!r.masked(i)) {
        sum += r[i];
        ++n;
      }
    }
    if (n == 0)
      out.mask(i);
    else
      out.set(i, sum / n);
  }
  return out;
}

Pixel select_reference(const RealRaster& quality, const std::vector<std::uint8_t>& excluded) {
  const GridMeta& g = quality.meta();
  std::size_t best = g.size();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (quality.masked(i) || (!excluded.empty() && excluded[i])) continue;
    if (best == g.size() || quality[i] > quality[best]) best = i;
  }
  if (best == g.size()) throw Error(Errc::NoSeed, "no eligible reference pixel");
  return {static_cast<int>(best / g.width), static_cast<int>(best % g.width)};
}

std::vector<std::uint8_t> buffer_mask(const GridMeta& meta, const std::vector<Pixel>& pixels,
                                      int buffer_px) {
  std::vector<std::uint8_t> out(meta.size(), 0);
  for (const Pixel& p : pixels)
    for (int dr = -buffer_px; dr <= buffer_px; ++dr)
      for (int dc = -buffer_px; dc <= buffer_px; ++dc) {
        const Pixel q{p.row + dr, p.col + dc};
        if (meta.contains(q)) out[meta.index(q)] = 1;
      }
  return out;
}

namespace {

std::string epoch_file(std::size_t k, const Date& d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "disp_%03zu_%s.r64", k, d.to_string().c_str());
  return buf;
}

}  // namespace

void save_series(const fs::path& dir, const DisplacementSeries& series) {
  fs::create_directories(dir);
  json epochs = json::array();
  for (std::size_t k = 0; k < series.dates.size(); ++k) {
    const std::string name = epoch_file(k, series.dates[k]);
    save_real(dir / name, series.cumulative_mm[k]);
    epochs.push_back({{"date", series.dates[k].to_string()},
                      {"file", name},
                      {"masked_pixels", series.cumulative_mm[k].masked_count()}});
  }
  const json j{{"dates", [&] {
                  json d = json::array();
                  for (const auto& x : series.dates) d.push_back(x.to_string());
                  return d;
                }()},
               {"reference_pixel", {series.reference_pixel.row, series.reference_pixel.col}},
               {"units", "mm (line of sight, positive toward sensor)"},
               {"epochs", epochs},
               {"mask_stats",
                {{"pixels", series.meta.size()},
                 {"masked_final", series.cumulative_mm.back().masked_count()}}}};
  write_json(dir / "series.json", j);
}

DisplacementSeries load_series(const fs::path& dir) {
  const json j = read_json(dir / "series.json");
  DisplacementSeries s;
  try {
    s.reference_pixel = {j.at("reference_pixel").at(0).get<int>(),
                         j.at("reference_pixel").at(1).get<int>()};
    for (const auto& e : j.at("epochs")) {
      s.dates.push_back(Date::parse(e.at("date").get<std::string>()));
      s.cumulative_mm.push_back(load_real(dir / e.at("file").get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::Schema, (dir / "series.json").string() + ": " + e.what());
  }
  if (s.cumulative_mm.empty()) throw Error(Errc::Schema, "series has no epochs");
  s.meta = s.cumulative_mm.front().meta();
  for (const auto& r : s.cumulative_mm) require_compatible(s.meta, r.meta());
  return s;
}

}  // namespace insar

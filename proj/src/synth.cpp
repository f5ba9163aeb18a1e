#include "insar/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "insar/parallel.hpp"
#include "insar/phase.hpp"

namespace insar::synth {

using nlohmann::json;

namespace {

// Unit-mean Rayleigh amplitude for a circular complex Gaussian.
const double kSpeckleScale = 2.0 / std::sqrt(kPi);

class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : gen_(seed) {}

  // Two independent standard normals from two raw draws.
  std::complex<double> next_pair() {
    const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
  }

 private:
  std::mt19937_64 gen_;
};

// Circular complex Gaussian with E|z|^2 = 4/pi, so E|z| = 1.
std::vector<std::complex<double>> speckle_field(std::uint64_t seed, std::size_t n) {
  NormalStream s(seed);
  std::vector<std::complex<double>> out(n);
  for (auto& z : out) z = s.next_pair() * (kSpeckleScale / std::sqrt(2.0));
  return out;
}

std::vector<Pixel> deck_footprint(const BridgeLine& b, const GridMeta& grid,
                                  std::vector<double>* along_m) {
  const RasterizedLine r = rasterize_polyline(b.line, grid);
  std::vector<double> along(grid.size(), -1.0);
  std::vector<Pixel> deck;
  for (std::size_t s = 0; s < r.pixels.size(); ++s) {
    along[grid.index(r.pixels[s])] = r.distances_m[s];
    deck.push_back(r.pixels[s]);
  }
  for (std::size_t s = 0; s < r.pixels.size(); ++s) {
    for (int dr = -b.half_width_px; dr <= b.half_width_px; ++dr) {
      for (int dc = -b.half_width_px; dc <= b.half_width_px; ++dc) {
        const Pixel p{r.pixels[s].row + dr, r.pixels[s].col + dc};
        if (!grid.contains(p) || along[grid.index(p)] >= 0.0) continue;
        along[grid.index(p)] = r.distances_m[s];
        deck.push_back(p);
      }
    }
  }
  if (along_m) *along_m = std::move(along);
  return deck;
}

}  // namespace

void ScenarioConfig::validate() const {
  grid.validate();
  if (epochs.size() < 2) throw Error(Errc::InvalidArgument, "scenario needs at least 2 epochs");
  for (std::size_t i = 1; i < epochs.size(); ++i)
    if (!(epochs[i - 1] < epochs[i]))
      throw Error(Errc::InvalidArgument, "scenario epochs must be strictly increasing");
  if (!(target_coherence > 0.0 && target_coherence <= 1.0))
    throw Error(Errc::InvalidArgument, "target coherence must be in (0, 1]");
  if (!baselines_m.empty() && baselines_m.size() != epochs.size())
    throw Error(Errc::InvalidArgument, "one baseline per epoch required");
  for (double b : baselines_m)
    if (!std::isfinite(b)) throw Error(Errc::InvalidArgument, "baselines must be finite");
  if (!(wavelength_m > 0.0) || !(incidence_deg > 0.0 && incidence_deg < 90.0) ||
      !(slant_range_m > 0.0))
    throw Error(Errc::InvalidArgument, "acquisition geometry out of range");
  if (dem) require_compatible(dem->meta(), grid);
  for (const Pixel& p : stable_scatterers)
    if (!grid.contains(p)) throw Error(Errc::OutOfBounds, "stable scatterer outside grid");
  if (!(scatterer_amplitude >= 0.0) || !std::isfinite(scatterer_amplitude))
    throw Error(Errc::InvalidArgument, "scatterer amplitude must be finite and >= 0");
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GaussianBowl>) {
          if (!std::isfinite(m.peak_rate_mm_yr) || !(m.sigma_px > 0.0))
            throw Error(Errc::InvalidArgument, "gaussian bowl needs finite rate and sigma > 0");
        } else if constexpr (std::is_same_v<T, LinearRamp>) {
          if (!std::isfinite(m.rate_east_mm_yr_per_km))
            throw Error(Errc::InvalidArgument, "ramp rate must be finite");
        } else {
          m.line.validate();
          if (m.peak_vertex >= m.line.vertices.size())
            throw Error(Errc::InvalidArgument, "peak vertex index out of range");
          if (!std::isfinite(m.peak_rate_mm_yr) || !(m.taper_m > 0.0) || m.half_width_px < 0)
            throw Error(Errc::InvalidArgument, "bridge line parameters out of range");
        }
      },
      deformation);
}

RealRaster deformation_rate(const ScenarioConfig& config) {
  const GridMeta& g = config.grid;
  RealRaster rate(g, RasterKind::DisplacementMm, 0.0);
  if (const auto* bowl = std::get_if<GaussianBowl>(&config.deformation)) {
    for (int r = 0; r < g.height; ++r)
      for (int c = 0; c < g.width; ++c) {
        const double dr = r - bowl->center_row, dc = c - bowl->center_col;
        rate.set(r, c, bowl->peak_rate_mm_yr *
                           std::exp(-(dr * dr + dc * dc) / (2.0 * bowl->sigma_px * bowl->sigma_px)));
      }
  } else if (const auto* ramp = std::get_if<LinearRamp>(&config.deformation)) {
    for (int r = 0; r < g.height; ++r)
      for (int c = 0; c < g.width; ++c)
        rate.set(r, c, ramp->rate_east_mm_yr_per_km * c * g.pixel_spacing_east / 1000.0);
  } else {
    const auto& b = std::get<BridgeLine>(config.deformation);
    std::vector<double> along;
    const std::vector<Pixel> deck = deck_footprint(b, g, &along);
    const RasterizedLine r = rasterize_polyline(b.line, g);
    const double peak_at = r.distances_m[r.vertex_samples.at(b.peak_vertex)];
    for (const Pixel& p : deck) {
      const double s = along[g.index(p)];
      rate.set(p.row, p.col,
               b.peak_rate_mm_yr * std::max(0.0, 1.0 - std::abs(s - peak_at) / b.taper_m));
    }
  }
  return rate;
}

TruthStack generate(const ScenarioConfig& config, int threads) {
  config.validate();
  const GridMeta& g = config.grid;
  const std::size_t n = g.size();
  const double gamma = config.target_coherence;
  const double k = 4.0 * kPi / config.wavelength_m;
  const double theta = config.incidence_deg * kPi / 180.0;
  const double R = config.slant_range_m;

  TruthStack truth;
  truth.true_coherence = gamma;

  std::vector<std::uint8_t> stable(n, 0);
  for (const Pixel& p : config.stable_scatterers) stable[g.index(p)] = 1;
  if (const auto* b = std::get_if<BridgeLine>(&config.deformation)) {
    truth.structure_pixels = deck_footprint(*b, g, nullptr);
    if (b->deck_scatterers)
      for (const Pixel& p : truth.structure_pixels) stable[g.index(p)] = 1;
  }
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c)
      if (stable[g.index({r, c})]) truth.stable_scatterers.push_back({r, c});

  const RealRaster rate = deformation_rate(config);
  const auto common = speckle_field(config.rng_seed ^ kCommonStreamSalt, n);

  // Per-pixel geometric phase factors: phase = k * B * (topo + flat).
  std::vector<double> geom(n);
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      const std::size_t i = g.index({r, c});
      const double h = (config.dem && !config.dem->masked(i)) ? (*config.dem)[i] : 0.0;
      geom[i] = h / (R * std::sin(theta)) + c * g.pixel_spacing_east / (R * std::tan(theta));
    }
  }

  const std::size_t epochs = config.epochs.size();
  truth.slcs.resize(epochs);
  truth.true_displacement_mm.resize(epochs);
  parallel_for(epochs, threads, [&](std::size_t t) {
    const double years = config.epochs.front().days_until(config.epochs[t]) / kDaysPerYear;
    const double baseline = config.baselines_m.empty() ? 0.0 : config.baselines_m[t];
    const auto independent = speckle_field(config.rng_seed ^ static_cast<std::uint64_t>(t), n);
    RealRaster disp(g, RasterKind::DisplacementMm, 0.0);
    std::vector<cfloat> data(n);
    const double a = std::sqrt(gamma), b = std::sqrt(1.0 - gamma);
    for (std::size_t i = 0; i < n; ++i) {
      const double d_mm = t == 0 ? 0.0 : rate[i] * years;
      disp.set(i, d_mm);
      std::complex<double> z = a * common[i] + b * independent[i];
      if (stable[i]) z += config.scatterer_amplitude;
      // Propagation phase -k * (range change); motion toward the sensor
      // (positive LOS) shortens the range.
      const double psi = k * (d_mm * 1e-3 - baseline * geom[i]);
      z *= std::polar(1.0, psi);
      data[i] = cfloat(static_cast<float>(z.real()), static_cast<float>(z.imag()));
    }
    truth.slcs[t] = ComplexRaster(g, std::move(data));
    truth.true_displacement_mm[t] = std::move(disp);
  });
  return truth;
}

ScenarioConfig bridge_scenario_default(std::uint64_t seed) {
  ScenarioConfig c;
  c.grid = GridMeta{256, 256, 5.0, 5.0, 44.4300, 8.8780};
  const Date start = Date::parse("2017-08-08");
  for (int t = 0; t < 25; ++t) c.epochs.push_back(start.plus_days(12 * t));

  // Eleven spans, west to east. Pixel-space vertices; 1102.4 m along-line.
  const std::vector<Pixel> vertices{{134, 18},  {131, 27},  {131, 42},  {131, 57},
                                    {131, 72},  {131, 87},  {131, 102}, {131, 117},
                                    {131, 159}, {131, 200}, {131, 228}, {131, 238}};
  BridgeLine bridge;
  bridge.line = line_from_pixels(vertices, c.grid, "deck");
  bridge.peak_vertex = 8;
  bridge.peak_rate_mm_yr = -40.0;
  bridge.taper_m = 250.0;
  bridge.half_width_px = 1;
  bridge.deck_scatterers = true;
  c.deformation = bridge;

  RealRaster dem(c.grid, RasterKind::Dem, 0.0);
  for (int r = 0; r < 256; ++r)
    for (int col = 0; col < 256; ++col) {
      const double dc = col - 200.0, dr = r - 60.0;
      dem.set(r, col, 60.0 * std::exp(-(dc * dc + dr * dr) / (2.0 * 45.0 * 45.0)) + 0.08 * r);
    }
  c.dem = std::move(dem);

  c.target_coherence = 0.8;
  for (int t = 0; t < 25; ++t)
    c.baselines_m.push_back(100.0 * std::sin(0.9 * t + 0.3) + 25.0 * std::cos(2.1 * t));
  c.wavelength_m = 0.05546576;
  c.incidence_deg = 39.0;
  c.slant_range_m = 850000.0;
  c.rng_seed = seed;

  // 3x3 stable ground block (reference candidate) plus isolated ground
  // scatterers away from the deck.
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc)
      c.stable_scatterers.push_back(
          {kBridgeReferenceBlockCenter.row + dr, kBridgeReferenceBlockCenter.col + dc});
  for (int i = 0; i < 24; ++i) {
    const int row = 20 + (i * 37) % 90 + (i % 2) * 140;
    const int col = 70 + (i * 53) % 170;
    c.stable_scatterers.push_back({row, col});
  }
  c.scatterer_amplitude = 10.0;
  return c;
}

namespace {

json pixel_json(Pixel p) { return json::array({p.row, p.col}); }

Pixel pixel_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(Errc::Schema, "pixel must be [row, col]");
  return {j[0].get<int>(), j[1].get<int>()};
}

json line_json(const ProfileLine& l) {
  json coords = json::array();
  for (const auto& v : l.vertices) coords.push_back(json::array({v.lon, v.lat}));
  return json{{"name", l.name}, {"coordinates", coords}};
}

ProfileLine line_from(const json& j) {
  ProfileLine l;
  l.name = j.value("name", "");
  for (const auto& c : j.at("coordinates")) l.vertices.push_back({c.at(1).get<double>(), c.at(0).get<double>()});
  return l;
}

}  // namespace

json scenario_to_json(const ScenarioConfig& c) {
  json j;
  j["grid"] = {{"width", c.grid.width},
               {"height", c.grid.height},
               {"pixel_spacing_east_m", c.grid.pixel_spacing_east},
               {"pixel_spacing_north_m", c.grid.pixel_spacing_north},
               {"origin_lat_deg", c.grid.origin_lat},
               {"origin_lon_deg", c.grid.origin_lon}};
  json epochs = json::array();
  for (const auto& d : c.epochs) epochs.push_back(d.to_string());
  j["epochs"] = epochs;
  if (const auto* b = std::get_if<GaussianBowl>(&c.deformation)) {
    j["deformation"] = {{"model", "gaussian_bowl"},
                        {"center_row", b->center_row},
                        {"center_col", b->center_col},
                        {"sigma_px", b->sigma_px},
                        {"peak_rate_mm_yr", b->peak_rate_mm_yr}};
  } else if (const auto* r = std::get_if<LinearRamp>(&c.deformation)) {
    j["deformation"] = {{"model", "linear_ramp"},
                        {"rate_east_mm_yr_per_km", r->rate_east_mm_yr_per_km}};
  } else {
    const auto& b = std::get<BridgeLine>(c.deformation);
    j["deformation"] = {{"model", "bridge_line"},
                        {"line", line_json(b.line)},
                        {"peak_vertex", b.peak_vertex},
                        {"peak_rate_mm_yr", b.peak_rate_mm_yr},
                        {"taper_m", b.taper_m},
                        {"half_width_px", b.half_width_px},
                        {"deck_scatterers", b.deck_scatterers}};
  }
  j["target_coherence"] = c.target_coherence;
  j["baselines_m"] = c.baselines_m;
  j["wavelength_m"] = c.wavelength_m;
  j["incidence_deg"] = c.incidence_deg;
  j["slant_range_m"] = c.slant_range_m;
  j["rng_seed"] = c.rng_seed;
  json ps = json::array();
  for (const Pixel& p : c.stable_scatterers) ps.push_back(pixel_json(p));
  j["stable_scatterers"] = ps;
  j["scatterer_amplitude"] = c.scatterer_amplitude;
  return j;
}

ScenarioConfig scenario_from_json(const json& j) {
  try {
    ScenarioConfig c;
    const json& g = j.at("grid");
    c.grid = GridMeta{g.at("width").get<int>(),
                      g.at("height").get<int>(),
                      g.at("pixel_spacing_east_m").get<double>(),
                      g.at("pixel_spacing_north_m").get<double>(),
                      g.value("origin_lat_deg", 0.0),
                      g.value("origin_lon_deg", 0.0)};
    for (const auto& e : j.at("epochs")) c.epochs.push_back(Date::parse(e.get<std::string>()));
    const json& d = j.at("deformation");
    const std::string model = d.at("model").get<std::string>();
    if (model == "gaussian_bowl") {
      c.deformation = GaussianBowl{d.at("center_row").get<double>(), d.at("center_col").get<double>(),
                                   d.at("sigma_px").get<double>(),
                                   d.at("peak_rate_mm_yr").get<double>()};
    } else if (model == "linear_ramp") {
      c.deformation = LinearRamp{d.at("rate_east_mm_yr_per_km").get<double>()};
    } else if (model == "bridge_line") {
      BridgeLine b;
      b.line = line_from(d.at("line"));
      b.peak_vertex = d.at("peak_vertex").get<std::size_t>();
      b.peak_rate_mm_yr = d.at("peak_rate_mm_yr").get<double>();
      b.taper_m = d.value("taper_m", 250.0);
      b.half_width_px = d.value("half_width_px", 1);
      b.deck_scatterers = d.value("deck_scatterers", true);
      c.deformation = b;
    } else {
      throw Error(Errc::Schema, "unknown deformation model '" + model + "'");
    }
    c.target_coherence = j.value("target_coherence", 0.8);
    c.baselines_m = j.value("baselines_m", std::vector<double>{});
    c.wavelength_m = j.value("wavelength_m", 0.05546576);
    c.incidence_deg = j.value("incidence_deg", 39.0);
    c.slant_range_m = j.value("slant_range_m", 850000.0);
    c.rng_seed = j.value("rng_seed", std::uint64_t{1});
    if (j.contains("stable_scatterers"))
      for (const auto& p : j["stable_scatterers"]) c.stable_scatterers.push_back(pixel_from(p));
    c.scatterer_amplitude = j.value("scatterer_amplitude", 10.0);
    return c;
  } catch (const json::exception& e) {
    throw Error(Errc::Schema, std::string("scenario config: ") + e.what());
  }
}

}  // namespace insar::synth

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "insar/geometry.hpp"
#include "insar/interferometry.hpp"
#include "insar/phase.hpp"
#include "insar/synth.hpp"
#include "support.hpp"

using namespace insar;
using namespace insar::synth;

namespace {

ScenarioConfig small_config(double gamma, double rate, int epochs = 3, int spacing_days = 12) {
  ScenarioConfig c;
  c.grid = testing::grid(48, 40);
  const Date start = Date::parse("2017-08-08");
  for (int t = 0; t < epochs; ++t) c.epochs.push_back(start.plus_days(spacing_days * t));
  c.deformation = GaussianBowl{20.0, 24.0, 6.0, rate};
  c.target_coherence = gamma;
  c.rng_seed = 99;
  return c;
}

PairSpec pair_of(const ScenarioConfig& c, std::size_t m, std::size_t s) {
  PairSpec p;
  p.master_id = "m";
  p.slave_id = "s";
  p.master_date = c.epochs[m];
  p.slave_date = c.epochs[s];
  p.temporal_baseline_days = c.epochs[m].days_until(c.epochs[s]);
  p.perp_baseline_m = c.baselines_m.empty() ? 0.0 : c.baselines_m[s] - c.baselines_m[m];
  return p;
}

bool same_bits(const ComplexRaster& a, const ComplexRaster& b) {
  return a.meta() == b.meta() &&
         std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(cfloat)) == 0;
}

}  // namespace

TEST_CASE("gamma 1, no deformation, no baseline: interferograms are exactly zero") {
  const ScenarioConfig c = small_config(1.0, 0.0);
  const TruthStack t = generate(c);
  for (std::size_t k = 0; k + 1 < t.slcs.size(); ++k) {
    const Interferogram ifg = form_interferogram(t.slcs[k], t.slcs[k + 1], pair_of(c, k, k + 1));
    for (std::size_t i = 0; i < ifg.phase.size(); ++i) {
      REQUIRE_FALSE(ifg.phase.masked(i));
      CHECK(ifg.phase[i] == 0.0);
    }
  }
}

TEST_CASE("bowl truth follows rate times elapsed years") {
  SUBCASE("exactly four 365.25-day years") {
    ScenarioConfig c = small_config(1.0, 40.0, 2);
    c.epochs = {Date::parse("2016-01-01"), Date::parse("2016-01-01").plus_days(1461)};
    const TruthStack t = generate(c);
    CHECK(t.true_displacement_mm[1](20, 24) == doctest::Approx(160.0).epsilon(1e-12));
  }
  SUBCASE("one calendar year") {
    ScenarioConfig c = small_config(1.0, 40.0, 2);
    c.epochs = {Date::parse("2017-08-08"), Date::parse("2018-08-08")};
    const TruthStack t = generate(c);
    CHECK(t.true_displacement_mm[1](20, 24) == doctest::Approx(40.0 * 365.0 / 365.25).epsilon(1e-12));
    CHECK(std::abs(t.true_displacement_mm[1](20, 24) - 40.0) < 0.03);
  }
}

TEST_CASE("first epoch of the truth is identically zero") {
  const TruthStack t = generate(small_config(0.8, -25.0, 4));
  for (std::size_t i = 0; i < t.true_displacement_mm[0].size(); ++i)
    CHECK(t.true_displacement_mm[0][i] == 0.0);
}

TEST_CASE("generation is deterministic and independent of thread count") {
  ScenarioConfig c = small_config(0.7, 30.0, 5);
  c.baselines_m = {0, 40, -30, 80, 10};
  const TruthStack a = generate(c, 1), b = generate(c, 1), d = generate(c, 4);
  for (std::size_t k = 0; k < a.slcs.size(); ++k) {
    CHECK(same_bits(a.slcs[k], b.slcs[k]));
    CHECK(same_bits(a.slcs[k], d.slcs[k]));
  }
  c.rng_seed = 100;
  const TruthStack e = generate(c, 1);
  CHECK_FALSE(same_bits(a.slcs[1], e.slcs[1]));
}

TEST_CASE("documented stream order: common field reproduced independently") {
  // mt19937_64 seeded with seed ^ salt; each pixel takes two 53-bit uniforms
  // u1 in (0,1], u2 in [0,1) and forms Box-Muller (r cos 2pi u2, r sin 2pi u2)
  // scaled so E|z| = 1. With gamma = 1 the SLC equals that field.
  ScenarioConfig c = small_config(1.0, 0.0, 2);
  const TruthStack t = generate(c);
  std::mt19937_64 gen(c.rng_seed ^ 0x9E3779B97F4A7C15ULL);
  const double scale = (2.0 / std::sqrt(M_PI)) / std::sqrt(2.0);
  for (std::size_t i = 0; i < 50; ++i) {
    const double u1 = (static_cast<double>(gen() >> 11) + 1.0) / 9007199254740992.0;
    const double u2 = static_cast<double>(gen() >> 11) / 9007199254740992.0;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const cfloat expect(static_cast<float>(scale * r * std::cos(2 * M_PI * u2)),
                        static_cast<float>(scale * r * std::sin(2 * M_PI * u2)));
    CHECK(t.slcs[0][i] == expect);
  }
}

TEST_CASE("speckle amplitude is unit-mean Rayleigh") {
  ScenarioConfig c = small_config(0.5, 0.0, 2);
  c.grid = testing::grid(200, 200);
  const TruthStack t = generate(c);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < t.slcs[1].size(); ++i) {
    const double a = std::abs(std::complex<double>(t.slcs[1][i]));
    sum += a;
    sum2 += a * a;
  }
  const double n = static_cast<double>(t.slcs[1].size());
  CHECK(sum / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(sum2 / n == doctest::Approx(4.0 / M_PI).epsilon(0.02));
}

TEST_CASE("Monte-Carlo: 5x5 coherence of a gamma 0.8 pair averages near 0.8") {
  ScenarioConfig c = small_config(0.8, 0.0, 2);
  c.grid = testing::grid(128, 128);
  const TruthStack t = generate(c);
  const RealRaster coh = estimate_coherence(t.slcs[0], t.slcs[1], 5);
  double sum = 0.0;
  std::size_t n = 0;
  for (int r = 2; r < 126; ++r)
    for (int col = 2; col < 126; ++col) sum += coh(r, col), ++n;
  REQUIRE(n >= 10000);
  CHECK(std::abs(sum / n - 0.8) < 0.05);
}

TEST_CASE("noiseless pair: recovered phase equals injected phase") {
  ScenarioConfig c = small_config(1.0, -35.0, 3);
  c.baselines_m = {10.0, 95.0, -60.0};
  RealRaster dem(c.grid, RasterKind::Dem, 0.0);
  for (int r = 0; r < c.grid.height; ++r)
    for (int col = 0; col < c.grid.width; ++col) dem.set(r, col, 3.0 * r + 0.5 * col);
  c.dem = dem;
  const TruthStack t = generate(c);
  const double k = 4.0 * M_PI / c.wavelength_m;
  const double th = c.incidence_deg * M_PI / 180.0;
  for (std::size_t m = 0; m + 1 < c.epochs.size(); ++m) {
    const Interferogram ifg = form_interferogram(t.slcs[m], t.slcs[m + 1], pair_of(c, m, m + 1));
    double worst = 0.0;
    for (int r = 0; r < c.grid.height; ++r)
      for (int col = 0; col < c.grid.width; ++col) {
        const double dd = (t.true_displacement_mm[m + 1](r, col) - t.true_displacement_mm[m](r, col)) * 1e-3;
        const double geom = dem(r, col) / (c.slant_range_m * std::sin(th)) +
                            col * c.grid.pixel_spacing_east / (c.slant_range_m * std::tan(th));
        const double expect = -k * dd + k * (c.baselines_m[m + 1] - c.baselines_m[m]) * geom;
        worst = std::max(worst, std::abs(wrap_phase(ifg.phase(r, col) - expect)));
      }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("stable scatterers keep a near-constant amplitude") {
  ScenarioConfig c = small_config(0.8, 0.0, 12);
  c.stable_scatterers = {{5, 5}, {30, 40}};
  const TruthStack t = generate(c);
  CHECK(t.stable_scatterers.size() == 2);
  for (const Pixel& p : c.stable_scatterers)
    for (const auto& s : t.slcs) {
      const double a = std::abs(std::complex<double>(s(p.row, p.col)));
      CHECK(a > 10.0 - 5.0);
      CHECK(a < 10.0 + 5.0);
    }
}

TEST_CASE("scenario validation") {
  auto bad = [](auto mutate) {
    ScenarioConfig c = small_config(0.8, 1.0);
    mutate(c);
    CHECK_THROWS_AS(c.validate(), Error);
  };
  bad([](ScenarioConfig& c) { c.target_coherence = 0.0; });
  bad([](ScenarioConfig& c) { c.target_coherence = 1.2; });
  bad([](ScenarioConfig& c) { std::swap(c.epochs[0], c.epochs[1]); });
  bad([](ScenarioConfig& c) { c.epochs[1] = c.epochs[0]; });
  bad([](ScenarioConfig& c) { c.deformation = GaussianBowl{1, 1, 2, NAN}; });
  bad([](ScenarioConfig& c) { c.baselines_m = {1.0}; });
  bad([](ScenarioConfig& c) { c.stable_scatterers = {{100, 0}}; });
  bad([](ScenarioConfig& c) { c.incidence_deg = 90.0; });
  CHECK_NOTHROW(small_config(1.0, 1.0).validate());
}

TEST_CASE("linear ramp truth") {
  ScenarioConfig c = small_config(1.0, 0.0, 2);
  c.deformation = LinearRamp{2.0};
  c.epochs = {Date::parse("2016-01-01"), Date::parse("2016-01-01").plus_days(1461)};
  const TruthStack t = generate(c);
  // column 20 lies 100 m east: 0.2 mm/yr over four years
  CHECK(t.true_displacement_mm[1](7, 20) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(t.true_displacement_mm[1](7, 0) == 0.0);
}

TEST_CASE("bridge scenario defaults") {
  const ScenarioConfig c = bridge_scenario_default();
  CHECK(c.grid.width == 256);
  CHECK(c.grid.height == 256);
  CHECK(c.grid.pixel_spacing_east == 5.0);
  CHECK(c.grid.pixel_spacing_north == 5.0);
  CHECK(c.target_coherence == 0.8);
  REQUIRE(c.epochs.size() == 25);
  CHECK(c.epochs.front() == Date::parse("2017-08-08"));
  CHECK(c.epochs[0].days_until(c.epochs[1]) == 12);
  for (std::size_t t = 1; t < c.epochs.size(); ++t) CHECK(c.epochs[t - 1].days_until(c.epochs[t]) == 12);
  CHECK(c.epochs.front().days_until(c.epochs.back()) == 288);
  CHECK(Date::parse("2017-08-01") <= c.epochs.front());
  CHECK(c.epochs.back() <= Date::parse("2018-08-31"));
  const auto& b = std::get<BridgeLine>(c.deformation);
  const RasterizedLine r = rasterize_polyline(b.line, c.grid);
  CHECK(std::abs(r.total_length_m - 1102.0) <= c.grid.pixel_spacing_east);
  CHECK(b.peak_rate_mm_yr == -40.0);
  CHECK(b.line.vertices.size() == 12);  // eleven spans
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("bridge deformation peaks at the named vertex and tapers to zero") {
  const ScenarioConfig c = bridge_scenario_default();
  const auto& b = std::get<BridgeLine>(c.deformation);
  const RealRaster rate = deformation_rate(c);
  const RasterizedLine r = rasterize_polyline(b.line, c.grid);
  const Pixel peak = r.pixels[r.vertex_samples[b.peak_vertex]];
  CHECK(rate.at(peak) == -40.0);
  double min_rate = 0.0;
  for (std::size_t i = 0; i < rate.size(); ++i) min_rate = std::min(min_rate, rate[i]);
  CHECK(min_rate == -40.0);
  CHECK(rate.at(r.pixels.front()) == 0.0);  // > 250 m from the peak
  CHECK(rate(40, 40) == 0.0);
}

TEST_CASE("scenario JSON round-trip") {
  ScenarioConfig c = bridge_scenario_default(3);
  const ScenarioConfig back = scenario_from_json(scenario_to_json(c));
  CHECK(scenario_to_json(back) == scenario_to_json(c));
  CHECK(back.rng_seed == 3);
  CHECK(back.epochs == c.epochs);
  CHECK(back.stable_scatterers == c.stable_scatterers);
}

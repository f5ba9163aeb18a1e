#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "insar/pipeline.hpp"
#include "insar/profile.hpp"
#include "insar/ps.hpp"
#include "insar/synth.hpp"
#include "insar/workflow.hpp"
#include "support.hpp"

using namespace insar;

namespace {

std::vector<ComplexRaster> speckle_stack(const GridMeta& g, int epochs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(0.0f, 1.0f);
  std::vector<ComplexRaster> stack;
  for (int t = 0; t < epochs; ++t) {
    ComplexRaster r(g);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = {n(rng), n(rng)};
    stack.push_back(r);
  }
  return stack;
}

std::vector<ComplexRaster> amplitude_stack(const std::vector<double>& amps) {
  std::vector<ComplexRaster> stack;
  for (double a : amps) {
    ComplexRaster r(testing::grid(1, 1));
    r[0] = std::polar(static_cast<float>(a), 0.3f);
    stack.push_back(r);
  }
  return stack;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Monte-Carlo reference for the median sample dispersion of Rayleigh
// amplitudes, drawn by inverse transform rather than from Gaussian pairs.
double rayleigh_median_oracle(int epochs, int pixels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> da;
  for (int p = 0; p < pixels; ++p) {
    double s = 0.0, s2 = 0.0;
    for (int t = 0; t < epochs; ++t) {
      const double a = std::sqrt(-2.0 * std::log(1.0 - u(rng)));
      s += a;
      s2 += a * a;
    }
    const double mean = s / epochs;
    da.push_back(std::sqrt(std::max(0.0, s2 / epochs - mean * mean)) / mean);
  }
  return median_of(da);
}

}  // namespace

TEST_CASE("dispersion examples") {
  CHECK(ps::amplitude_dispersion(amplitude_stack(std::vector<double>(12, 2.0)))[0] == doctest::Approx(0.0).epsilon(1e-6));
  std::vector<double> a(12, 1.0);
  a[3] = a[7] = a[11] = 3.0;
  const double da = ps::amplitude_dispersion(amplitude_stack(a))[0];
  CHECK(da == doctest::Approx(std::sqrt(3.0) / 3.0).epsilon(1e-6));
  CHECK(da == doctest::Approx(0.577).epsilon(1e-3));
}

TEST_CASE("dispersion preconditions") {
  CHECK_THROWS_AS(ps::amplitude_dispersion(amplitude_stack(std::vector<double>(9, 1.0))), Error);
  bool thrown = false;
  try {
    ps::amplitude_dispersion(amplitude_stack(std::vector<double>(3, 1.0)));
  } catch (const Error& e) {
    thrown = e.code() == Errc::NotEnoughData;
  }
  CHECK(thrown);
  const RealRaster zero = ps::amplitude_dispersion(amplitude_stack(std::vector<double>(10, 0.0)));
  CHECK(zero.masked(0));
  auto mixed = speckle_stack(testing::grid(4, 4), 10, 1);
  mixed[4] = ComplexRaster(testing::grid(5, 4));
  CHECK_THROWS_AS(ps::amplitude_dispersion(mixed), Error);
}

TEST_CASE("Rayleigh speckle dispersion") {
  const auto stack = speckle_stack(testing::grid(128, 128), 25, 2);
  const RealRaster da = ps::amplitude_dispersion(stack);
  std::vector<double> v;
  for (std::size_t i = 0; i < da.size(); ++i) v.push_back(da[i]);
  REQUIRE(v.size() >= 10000);
  const double med = median_of(v);
  const double analytic = std::sqrt(4.0 / M_PI - 1.0);
  CHECK(analytic == doctest::Approx(0.5227).epsilon(1e-4));
  CHECK(std::abs(med - analytic) <= 0.03);
  CHECK(std::abs(med - rayleigh_median_oracle(25, 16384, 99)) <= 0.01);

  const auto selected = ps::select_ps(da, ps::kDefaultThreshold);
  CHECK(static_cast<double>(selected.size()) / da.size() < 0.01);
}

TEST_CASE("selection ordering, threshold and monotonicity") {
  const RealRaster da = ps::amplitude_dispersion(speckle_stack(testing::grid(64, 64), 12, 3));
  CHECK(ps::select_ps(da, 0.0).empty());
  std::size_t previous = 0;
  for (double th : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}) {
    const auto sel = ps::select_ps(da, th);
    CHECK(sel.size() >= previous);
    for (std::size_t k = 0; k < sel.size(); ++k) {
      CHECK(sel[k].selected);
      CHECK(sel[k].amp_dispersion < th);
      CHECK(sel[k].amp_dispersion >= 0.0);
      if (k > 0) CHECK(sel[k].amp_dispersion >= sel[k - 1].amp_dispersion);
    }
    std::set<std::pair<int, int>> lower;
    for (const auto& c : ps::select_ps(da, th - 0.05)) lower.insert({c.pixel.row, c.pixel.col});
    std::set<std::pair<int, int>> here;
    for (const auto& c : sel) here.insert({c.pixel.row, c.pixel.col});
    CHECK(std::includes(here.begin(), here.end(), lower.begin(), lower.end()));
    previous = sel.size();
  }
}

TEST_CASE("dispersion is invariant to global amplitude scaling") {
  auto stack = speckle_stack(testing::grid(16, 16), 10, 4);
  const RealRaster a = ps::amplitude_dispersion(stack);
  for (auto& r : stack)
    for (std::size_t i = 0; i < r.size(); ++i) r[i] *= 7.5f;
  const RealRaster b = ps::amplitude_dispersion(stack);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-5));
}

TEST_CASE("corner reflectors and injected scatterers are recalled") {
  synth::ScenarioConfig c = synth::bridge_scenario_default(7);
  const synth::TruthStack truth = synth::generate(c);
  const RealRaster da = ps::amplitude_dispersion(truth.slcs);
  const auto sel = ps::select_ps(da, ps::kDefaultThreshold);
  std::set<std::size_t> chosen;
  for (const auto& s : sel) chosen.insert(c.grid.index(s.pixel));
  std::size_t hit = 0;
  for (const Pixel& p : truth.stable_scatterers) hit += chosen.count(c.grid.index(p));
  REQUIRE(!truth.stable_scatterers.empty());
  CHECK(static_cast<double>(hit) / truth.stable_scatterers.size() >= 0.95);
  for (const Pixel& p : c.stable_scatterers) CHECK(chosen.count(c.grid.index(p)) == 1);
}

TEST_CASE("comparison: identical series and empty lists") {
  const GridMeta g = testing::grid(8, 8);
  DisplacementSeries s{g, {}, {}, {0, 0}};
  std::vector<RealRaster> truth;
  for (int k = 0; k < 4; ++k) {
    s.dates.push_back(Date::parse("2017-08-08").plus_days(12 * k));
    RealRaster r(g, RasterKind::DisplacementMm, -1.5 * k);
    s.cumulative_mm.push_back(r);
    truth.push_back(r);
  }
  const std::vector<ps::PSCandidate> cands{{{2, 2}, 0.1, 0.9, true}, {{5, 5}, 0.2, 0.9, true}, {{6, 6}, 0.3, 0.9, false}};
  const auto rep = ps::compare_ps_dinsar(s, cands, truth);
  CHECK(rep.ps.size() == 2);
  for (const auto& e : rep.ps) CHECK(e.rmse_mm == 0.0);
  CHECK(rep.non_ps_pixels == 62);

  const auto empty = ps::compare_ps_dinsar(s, {}, truth);
  CHECK(empty.ps.empty());
  CHECK(empty.ps_rmse_median_mm == 0.0);
  CHECK(ps::to_json(empty).at("ps").empty());

  truth[3].set(2, 2, truth[3](2, 2) + 4.0);
  const std::vector<Pixel> only{{2, 2}};
  const auto one = ps::compare_ps_dinsar(s, cands, truth, &only);
  REQUIRE(one.ps.size() == 1);
  CHECK(one.ps[0].rmse_mm == doctest::Approx(2.0));
  CHECK(one.ps[0].max_abs_dev_mm == doctest::Approx(4.0));
  CHECK_THROWS_AS(ps::compare_ps_dinsar(s, cands, {truth[0]}), Error);
}

TEST_CASE("PS pixels track truth better than distributed pixels") {
  const synth::ScenarioConfig c = synth::bridge_scenario_default(7);
  const synth::TruthStack truth = synth::generate(c);
  const auto acq = pipeline::scenario_acquisitions(c);
  const auto& bridge = std::get<synth::BridgeLine>(c.deformation);
  const RasterizedLine line = rasterize_polyline(bridge.line, c.grid);
  pipeline::ReferenceChoice ref;
  ref.excluded = buffer_mask(c.grid, line.pixels, workflow::kReferenceBufferPx);
  const auto stack = pipeline::process_stack(truth.slcs, acq, &*c.dem, pipeline::ProcessingConfig{}, ref);

  std::vector<RealRaster> truth_ref;
  for (const auto& t : truth.true_displacement_mm) {
    RealRaster r = t;
    const double at_ref = t.at(stack.reference);
    for (std::size_t i = 0; i < r.size(); ++i) r.set(i, t[i] - at_ref);
    truth_ref.push_back(r);
  }
  const auto sel = ps::select_ps(ps::amplitude_dispersion(truth.slcs), ps::kDefaultThreshold);
  const auto rep = ps::compare_ps_dinsar(stack.series, sel, truth_ref, &line.pixels);
  REQUIRE(!rep.ps.empty());
  REQUIRE(rep.non_ps_pixels > 1000);
  std::vector<double> rm;
  for (const auto& e : rep.ps) rm.push_back(e.rmse_mm);
  CHECK(rep.ps_rmse_median_mm == doctest::Approx(median_of(rm)));
  for (const auto& e : rep.ps) CHECK(e.rmse_mm <= rep.non_ps_rmse_median_mm);
  MESSAGE("PS median rmse " << rep.ps_rmse_median_mm << " mm, non-PS median " << rep.non_ps_rmse_median_mm << " mm");
}

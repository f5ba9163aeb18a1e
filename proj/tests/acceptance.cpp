#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "insar/catalog.hpp"
#include "insar/displacement.hpp"
#include "insar/fileio.hpp"
#include "insar/interferometry.hpp"
#include "insar/pipeline.hpp"
#include "insar/profile.hpp"
#include "insar/ps.hpp"
#include "insar/synth.hpp"
#include "insar/trend.hpp"
#include "insar/unwrap.hpp"
#include "insar/workflow.hpp"
#include "mcf_oracle.hpp"
#include "unwrap_support.hpp"

#ifndef INSAR_CLI
#define INSAR_CLI "insar"
#endif
#ifndef INSAR_DATA_DIR
#define INSAR_DATA_DIR "data"
#endif

using namespace insar;
namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("'") + INSAR_CLI + "' " + args + " >'" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ComplexRaster noise(const GridMeta& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(0.f, 1.f);
  std::vector<cfloat> d(g.size());
  for (auto& v : d) v = {n(rng), n(rng)};
  return ComplexRaster(g, std::move(d));
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Demo {
  fs::path dir;
  int exit_code = -1;
  double seconds = 0.0;
};

Demo run_demo(const fs::path& dir) {
  Demo d{dir};
  const auto t0 = clock_type::now();
  d.exit_code = run_cli("demo --seed 7 --out '" + dir.string() + "'", dir.string() + ".log");
  d.seconds = seconds_since(t0);
  return d;
}

Pixel peak_pixel(const synth::ScenarioConfig& c) {
  const auto& b = std::get<synth::BridgeLine>(c.deformation);
  const RasterizedLine r = rasterize_polyline(b.line, c.grid);
  return r.pixels[r.vertex_samples[b.peak_vertex]];
}

Outcome millimeter_sensitivity(const Demo& demo) {
  if (demo.exit_code != 0) return {false, fmt("demo exited with %d", demo.exit_code)};
  const DisplacementSeries s = load_series(demo.dir / "series");
  const workflow::TruthData truth = workflow::load_truth(demo.dir / "synth");
  const Pixel peak = peak_pixel(synth::bridge_scenario_default(7));
  const Pixel ref = s.reference_pixel;
  const double recovered = s.cumulative_mm.back().at(peak);
  const double expected = truth.cumulative_mm.back().at(peak) - truth.cumulative_mm.back().at(ref);
  std::vector<std::optional<double>> v;
  for (const auto& e : s.cumulative_mm) v.push_back(e.masked(peak) ? std::nullopt : std::optional<double>(e.at(peak)));
  const trend::TrendFit fit = trend::fit_trend(s.dates, v);
  const double true_rate = synth::deformation_rate(synth::bridge_scenario_default(7)).at(peak);
  const bool ok = std::abs(recovered - expected) <= 3.0 && fit.valid &&
                  std::abs(fit.rate_mm_per_year - true_rate) <= 5.0 && demo.seconds < 60.0;
  return {ok, fmt("peak (%d,%d) %.2f mm vs truth %.2f mm, rate %.2f vs %.2f mm/yr, demo %.1f s",
                  peak.row, peak.col, recovered, expected, fit.rate_mm_per_year, true_rate, demo.seconds)};
}

Outcome noiseless_exactness() {
  const auto t0 = clock_type::now();
  synth::ScenarioConfig c = synth::bridge_scenario_default(7);
  c.target_coherence = 1.0;
  const synth::TruthStack truth = synth::generate(c);
  const auto& b = std::get<synth::BridgeLine>(c.deformation);
  pipeline::ReferenceChoice ref;
  ref.excluded = buffer_mask(c.grid, rasterize_polyline(b.line, c.grid).pixels, workflow::kReferenceBufferPx);
  const auto stack = pipeline::process_stack(truth.slcs, pipeline::scenario_acquisitions(c), &*c.dem,
                                             pipeline::ProcessingConfig{}, ref);
  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::size_t k = 0; k < stack.series.cumulative_mm.size(); ++k) {
    const RealRaster& t = truth.true_displacement_mm[k];
    const double at_ref = t.at(stack.reference);
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (stack.series.cumulative_mm[k].masked(i)) continue;
      worst = std::max(worst, std::abs(stack.series.cumulative_mm[k][i] - (t[i] - at_ref)));
      ++checked;
    }
  }
  const bool ok = worst < 0.01 && checked > 0 && elapsed < 5.0;
  return {ok, fmt("max |error| %.2e mm over %zu samples, %.2f s", worst, checked, elapsed)};
}

Outcome unwrapping_optimality() {
  using namespace insar::unwrap;
  const auto t0 = clock_type::now();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int problems = 0, mismatches = 0;
  for (int h = 1; h <= 4; ++h)
    for (int w = 1; w <= 4; ++w) {
      const int n = w * h;
      const ResidueMap empty = testing::charges_on(w, h, {}, {});
      RealRaster random_coh(empty.meta, RasterKind::Coherence);
      for (std::size_t i = 0; i < random_coh.size(); ++i) random_coh.set(i, u(rng));
      const RealRaster uniform(empty.meta, RasterKind::Coherence, 0.6);
      auto check = [&](const std::vector<std::pair<int, int>>& cells, const std::vector<int>& q) {
        const ResidueMap res = testing::charges_on(w, h, cells, q);
        for (const RealRaster* coh : {&uniform, static_cast<const RealRaster*>(&random_coh)}) {
          const FlowProblem fp = build_flow(res, *coh);
          const auto flows = solve_mcf(fp);
          if (!testing::conserves(fp, flows) || flow_cost(fp, flows) != testing::brute_force_min_cost(fp))
            ++mismatches;
          ++problems;
        }
      };
      auto cell = [&](int i) { return std::pair{i / w, i % w}; };
      for (int a = 0; a < n; ++a) {
        check({cell(a)}, {1});
        check({cell(a)}, {-1});
        for (int b = 0; b < n; ++b) {
          if (b == a) continue;
          check({cell(a), cell(b)}, {1, -1});
          for (int c = 0; c < n; ++c)
            for (int d = c + 1; d < n; ++d) {
              if (c == a || c == b || d == a || d == b || b < a) continue;
              check({cell(a), cell(b), cell(c), cell(d)}, {1, 1, -1, -1});
            }
        }
      }
    }
  const double elapsed = seconds_since(t0);
  return {mismatches == 0 && elapsed < 10.0,
          fmt("%d configurations, %d mismatches, %.2f s", problems, mismatches, elapsed)};
}

Outcome congruence_invariant() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int residual_residues = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const RealRaster p = testing::random_wrapped(16 + trial % 5, 12 + trial % 3, rng);
    RealRaster coh(p.meta(), RasterKind::Coherence);
    for (std::size_t i = 0; i < coh.size(); ++i) coh.set(i, u(rng));
    for (const RealRaster& out : {unwrap::unwrap_mcf(p, coh), unwrap::unwrap_quality_guided(p, coh)}) {
      worst = std::max(worst, testing::congruence_error(out, p));
      residual_residues += testing::residues_of_unwrapped(out);
      residual_residues += static_cast<int>(out.masked_count());
    }
  }
  return {worst < 1e-9 && residual_residues == 0,
          fmt("200 outputs, max congruence error %.2e rad, %d residues left", worst, residual_residues)};
}

Outcome coherence_estimator() {
  const GridMeta small = testing::grid(21, 17);
  const ComplexRaster m = noise(small, 14);
  const RealRaster self = estimate_coherence(m, m, 5);
  bool exact = true;
  for (std::size_t i = 0; i < self.size(); ++i) exact &= self[i] == 1.0;

  std::mt19937 rng(2024);
  std::normal_distribution<double> n(0.0, 1.0);
  double oracle = 0.0;
  const int draws = 40000;
  for (int k = 0; k < draws; ++k) {
    std::complex<double> num = 0;
    double pa = 0, pb = 0;
    for (int j = 0; j < 25; ++j) {
      const std::complex<double> a(n(rng), n(rng)), b(n(rng), n(rng));
      num += a * std::conj(b);
      pa += std::norm(a);
      pb += std::norm(b);
    }
    oracle += std::abs(num) / std::sqrt(pa * pb);
  }
  oracle /= draws;

  const GridMeta g = testing::grid(124, 124);
  const RealRaster coh = estimate_coherence(noise(g, 17), noise(g, 18), 5);
  double sum = 0.0;
  int windows = 0;
  for (int r = 2; r < 122; ++r)
    for (int c = 2; c < 122; ++c) sum += coh(r, c), ++windows;
  const double mean = sum / windows;
  const bool ok = exact && windows >= 10000 && std::abs(mean - oracle) <= 0.03;
  return {ok, fmt("identical inputs %s, independent mean %.4f vs oracle %.4f over %d windows",
                  exact ? "exactly 1" : "not 1", mean, oracle, windows)};
}

Outcome phase_constant() {
  RealRaster phi(testing::grid(1, 1));
  phi.set(0, 2.0 * M_PI);
  const double d = phase_to_los(phi, 0.05546576)[0];
  const double closed = 1000.0 * 0.05546576 / 2.0;
  const bool ok = std::abs(std::abs(d) - closed) < 1e-12 && std::abs(std::abs(d) - 27.733) < 5e-4;
  return {ok, fmt("|d| = %.6f mm (closed form %.6f)", std::abs(d), closed)};
}

Outcome ps_selection(const Demo& demo) {
  std::mt19937_64 rng(2);
  std::normal_distribution<float> n(0.0f, 1.0f);
  const GridMeta g = testing::grid(128, 128);
  std::vector<ComplexRaster> speckle;
  for (int t = 0; t < 25; ++t) {
    ComplexRaster r(g);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = {n(rng), n(rng)};
    speckle.push_back(r);
  }
  const RealRaster da = ps::amplitude_dispersion(speckle);
  std::vector<double> v;
  for (std::size_t i = 0; i < da.size(); ++i) v.push_back(da[i]);
  const double med = median_of(v);
  const double analytic = std::sqrt(4.0 / M_PI - 1.0);

  if (demo.exit_code != 0) return {false, fmt("demo exited with %d", demo.exit_code)};
  const auto stack = workflow::load_stack(demo.dir / "synth" / "catalog.json");
  const workflow::TruthData truth = workflow::load_truth(demo.dir / "synth");
  const auto selected = ps::select_ps(ps::amplitude_dispersion(stack.slcs), ps::kDefaultThreshold);
  const GridMeta& bg = stack.slcs.front().meta();
  std::set<std::size_t> chosen;
  for (const auto& c : selected) chosen.insert(bg.index(c.pixel));
  std::size_t hit = 0;
  for (const Pixel& p : truth.stable_scatterers) hit += chosen.count(bg.index(p));
  const double recall = truth.stable_scatterers.empty() ? 0.0 : static_cast<double>(hit) / truth.stable_scatterers.size();

  const DisplacementSeries series = load_series(demo.dir / "series");
  std::vector<RealRaster> truth_ref;
  for (const auto& t : truth.cumulative_mm) {
    RealRaster r = t;
    const double at_ref = t.at(series.reference_pixel);
    for (std::size_t i = 0; i < r.size(); ++i) r.set(i, t[i] - at_ref);
    truth_ref.push_back(r);
  }
  const auto line = rasterize_polyline(load_geojson_line(demo.dir / "synth" / "bridge.geojson"), bg);
  const auto rep = ps::compare_ps_dinsar(series, selected, truth_ref, &line.pixels);
  double worst_ps = 0.0;
  for (const auto& e : rep.ps) worst_ps = std::max(worst_ps, e.rmse_mm);

  const bool ok = std::abs(med - analytic) <= 0.03 && recall >= 0.95 && !rep.ps.empty() &&
                  worst_ps <= rep.non_ps_rmse_median_mm;
  return {ok, fmt("speckle median D_A %.4f (analytic %.4f), recall %.3f, PS rmse max %.2f / median %.2f mm vs non-PS median %.2f mm",
                  med, analytic, recall, worst_ps, rep.ps_rmse_median_mm, rep.non_ps_rmse_median_mm)};
}

Outcome profile_geometry() {
  const GridMeta g = synth::bridge_scenario_default().grid;
  const RasterizedLine bundled =
      rasterize_polyline(load_geojson_line(fs::path(INSAR_DATA_DIR) / "bridge.geojson"), g);
  const GridMeta small = testing::grid(10, 10);
  const RasterizedLine h = rasterize_polyline(line_from_pixels({{0, 0}, {0, 4}}, small, "h"), small);
  const RasterizedLine d = rasterize_polyline(line_from_pixels({{0, 0}, {3, 3}}, small, "d"), small);
  bool micro = h.pixels.size() == 5 && d.pixels.size() == 4;
  for (std::size_t k = 0; micro && k < 5; ++k)
    micro = h.pixels[k] == Pixel{0, static_cast<int>(k)} && std::abs(h.distances_m[k] - 5.0 * k) < 1e-6;
  for (std::size_t k = 0; micro && k < 4; ++k) micro = d.pixels[k] == Pixel{static_cast<int>(k), static_cast<int>(k)};
  micro = micro && std::abs(d.total_length_m - 15.0 * std::sqrt(2.0)) < 1e-6;
  const bool ok = std::abs(bundled.total_length_m - 1102.0) <= g.pixel_spacing_east && micro;
  return {ok, fmt("bundled line %.2f m (%zu samples), micro cases %s", bundled.total_length_m,
                  bundled.pixels.size(), micro ? "exact" : "wrong")};
}

Outcome monitoring_window(const Demo& demo) {
  if (demo.exit_code != 0) return {false, fmt("demo exited with %d", demo.exit_code)};
  const auto q = read_json(fs::path(INSAR_DATA_DIR) / "query.json");
  const Date window_start = Date::parse(q.at("start").get<std::string>());
  const Date window_end = Date::parse(q.at("end").get<std::string>());
  const Catalog cat = load_catalog(demo.dir / "synth" / "catalog.json");
  if (cat.acquisitions.empty() || cat.pairs.empty()) return {false, "empty catalog"};
  bool inside = true;
  for (const auto& a : cat.acquisitions) inside &= window_start <= a.date && a.date <= window_end;
  bool twelve = true;
  for (const auto& p : cat.pairs) twelve &= p.temporal_baseline_days == 12 && !p.gap;
  const Date first = cat.acquisitions.front().date, last = cat.acquisitions.back().date;
  const PairSpec& p0 = cat.pairs.front();
  const bool ok = window_start.to_string().starts_with("2017-08") && window_end.to_string().starts_with("2018-08") &&
                  inside && first.to_string().starts_with("2017-08") &&
                  p0.master_date == Date::parse("2017-08-08") && p0.slave_date == Date::parse("2017-08-20") && twelve;
  return {ok, fmt("window %s..%s, acquisitions %s..%s inside: %s, first pair %s -> %s, %zu pairs all 12-day: %s",
                  window_start.to_string().c_str(), window_end.to_string().c_str(), first.to_string().c_str(),
                  last.to_string().c_str(), inside ? "yes" : "no", p0.master_date.to_string().c_str(),
                  p0.slave_date.to_string().c_str(), cat.pairs.size(), twelve ? "yes" : "no")};
}

Outcome determinism(const Demo& a, const Demo& b) {
  if (a.exit_code != 0 || b.exit_code != 0) return {false, "demo failed"};
  const std::string ma = slurp(a.dir / "manifest.json"), mb = slurp(b.dir / "manifest.json");
  const bool ok = !ma.empty() && ma == mb;
  return {ok, fmt("manifest %zu bytes, sha256 %s vs %s", ma.size(), workflow::sha256_hex(ma).substr(0, 16).c_str(),
                  workflow::sha256_hex(mb).substr(0, 16).c_str())};
}

Outcome query_builder(const fs::path& scratch) {
  const std::string expected =
      "https://api.daac.asf.alaska.edu/services/search/param?platform=Sentinel-1&processingLevel=SLC"
      "&bbox=8.88,44.42,8.92,44.44&start=2017-08-01&end=2018-08-14&output=json";
  const auto j = read_json(fs::path(INSAR_DATA_DIR) / "query.json");
  const auto b = j.at("bbox").get<std::vector<double>>();
  SearchQuery q{b[0], b[1], b[2], b[3], Date::parse(j.at("start").get<std::string>()),
                Date::parse(j.at("end").get<std::string>())};
  q.platform = j.at("platform").get<std::string>();
  q.processing_level = j.at("processing_level").get<std::string>();
  const std::string url = asf_query_url(q);
  const fs::path log = scratch / "query-url.txt";
  const int code = run_cli("query-url --config '" + (fs::path(INSAR_DATA_DIR) / "query.json").string() + "'", log);
  const bool ok = url == expected && code == 0 && slurp(log) == expected + "\n";
  return {ok, url};
}

}  // namespace

int main() {
  const fs::path scratch = fs::temp_directory_path() / ("insar-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %2d %-28s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  };

  const Demo first = run_demo(scratch / "demo1");
  const Demo second = run_demo(scratch / "demo2");

  report(1, "millimeter sensitivity", [&] { return millimeter_sensitivity(first); });
  report(2, "noiseless exactness", [] { return noiseless_exactness(); });
  report(3, "unwrapping optimality", [] { return unwrapping_optimality(); });
  report(4, "congruence invariant", [] { return congruence_invariant(); });
  report(5, "coherence estimator", [] { return coherence_estimator(); });
  report(6, "phase-to-displacement", [] { return phase_constant(); });
  report(7, "PS selection", [&] { return ps_selection(first); });
  report(8, "profile geometry", [] { return profile_geometry(); });
  report(9, "monitoring window", [&] { return monitoring_window(first); });
  report(10, "determinism", [&] { return determinism(first, second); });
  report(11, "query builder", [&] { return query_builder(scratch); });

  std::printf("%d/11 criteria passed\n", 11 - failures);
  if (failures == 0) fs::remove_all(scratch);
  return failures == 0 ? 0 : 1;
}

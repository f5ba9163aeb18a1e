#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "insar/displacement.hpp"
#include "insar/fileio.hpp"
#include "support.hpp"

using namespace insar;
using testing::TempDir;

namespace {

constexpr double kLambda = 0.05546576;

PairSpec chain_pair(int k) {
  const Date d0 = Date::parse("2017-08-08").plus_days(12 * k);
  return PairSpec{"a" + std::to_string(k), "a" + std::to_string(k + 1), d0, d0.plus_days(12), 0.0, 12, false};
}

DisplacementField constant_field(const GridMeta& g, int k, double off_ref, Pixel ref, double at_ref = 0.0) {
  RealRaster r(g, RasterKind::DisplacementMm, off_ref);
  r.set(ref.row, ref.col, at_ref);
  return {g, r, chain_pair(k)};
}

DisplacementField random_field(const GridMeta& g, int k, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 5.0);
  RealRaster r(g, RasterKind::DisplacementMm);
  for (std::size_t i = 0; i < r.size(); ++i) r.set(i, n(rng));
  return {g, r, chain_pair(k)};
}

Errc error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an insar::Error");
  return Errc::Io;
}

}  // namespace

TEST_CASE("phase_to_los examples") {
  RealRaster phi(testing::grid(3, 1));
  phi.set(0, 2 * M_PI);
  phi.set(1, 0.0);
  phi.set(2, -M_PI);
  const RealRaster d = phase_to_los(phi, kLambda);
  CHECK(d[0] == doctest::Approx(-27.73288).epsilon(1e-12));
  CHECK(std::abs(d[0] - (-kLambda / 2 * 1000)) < 1e-12);
  CHECK(d[1] == 0.0);
  CHECK(d[2] == doctest::Approx(13.86644).epsilon(1e-12));
  CHECK(d.kind() == RasterKind::DisplacementMm);
  CHECK_THROWS_AS(phase_to_los(phi, 0.0), Error);
}

TEST_CASE("phase_to_los keeps masks and is linear") {
  RealRaster phi(testing::grid(4, 4));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-30, 30);
  for (std::size_t i = 0; i < phi.size(); ++i) phi.set(i, u(rng));
  phi.mask(5);
  RealRaster scaled(phi.meta());
  for (std::size_t i = 0; i < phi.size(); ++i) scaled.set(i, 3.0 * phi[i]);
  const RealRaster a = phase_to_los(phi, kLambda), b = phase_to_los(scaled, kLambda);
  CHECK(a.masked(5));
  for (std::size_t i = 0; i < phi.size(); ++i)
    if (!a.masked(i)) CHECK(b[i] == doctest::Approx(3.0 * a[i]).epsilon(1e-12));
}

TEST_CASE("calibrate") {
  const GridMeta g = testing::grid(5, 4);
  const Pixel ref{1, 2};
  SUBCASE("constant field goes to zero") {
    const DisplacementField f = calibrate(constant_field(g, 0, 7.5, ref, 7.5), ref);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(f.los_mm[i] == 0.0);
  }
  SUBCASE("idempotent") {
    std::mt19937_64 rng(2);
    const DisplacementField once = calibrate(random_field(g, 0, rng), ref);
    const DisplacementField twice = calibrate(once, ref);
    CHECK(bit_equal(once.los_mm, twice.los_mm));
    CHECK(once.los_mm.at(ref) == 0.0);
  }
  SUBCASE("masked reference names the epoch") {
    DisplacementField f = constant_field(g, 3, 1.0, ref);
    f.los_mm.mask(g.index(ref));
    try {
      calibrate(f, ref);
      FAIL("expected MaskedReference");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::MaskedReference);
      CHECK(std::string(e.what()).find(chain_pair(3).slave_date.to_string()) != std::string::npos);
    }
  }
  SUBCASE("reference outside grid") { CHECK(error_of([&] { calibrate(constant_field(g, 0, 1, ref), {9, 9}); }) == Errc::OutOfBounds); }
}

TEST_CASE("assemble_series: +2 then +3 mm gives 0, 2, 5") {
  const GridMeta g = testing::grid(4, 4);
  const Pixel ref{0, 0};
  const DisplacementSeries s =
      assemble_series({constant_field(g, 0, 2.0, ref), constant_field(g, 1, 3.0, ref)}, ref);
  REQUIRE(s.dates.size() == 3);
  CHECK(s.dates[0] == Date::parse("2017-08-08"));
  CHECK(s.dates[2] == Date::parse("2017-09-01"));
  CHECK(s.cumulative_mm[0](2, 2) == 0.0);
  CHECK(s.cumulative_mm[1](2, 2) == 2.0);
  CHECK(s.cumulative_mm[2](2, 2) == 5.0);
  for (const auto& e : s.cumulative_mm) CHECK(e.at(ref) == 0.0);
}

TEST_CASE("assemble_series: a single pair gives two epochs") {
  const GridMeta g = testing::grid(3, 3);
  const DisplacementSeries s = assemble_series({constant_field(g, 0, 1.0, {1, 1})}, {1, 1});
  CHECK(s.dates.size() == 2);
  CHECK(s.cumulative_mm.size() == 2);
}

TEST_CASE("assemble_series telescopes to the direct pairwise sum") {
  const GridMeta g = testing::grid(8, 6);
  std::mt19937_64 rng(3);
  const Pixel ref{2, 3};
  std::vector<DisplacementField> fields;
  for (int k = 0; k < 6; ++k) fields.push_back(random_field(g, k, rng));
  const DisplacementSeries s = assemble_series(fields, ref);
  for (std::size_t k = 0; k < fields.size(); ++k)
    for (std::size_t i = 0; i < g.size(); ++i) {
      double direct = 0.0;
      for (std::size_t j = 0; j <= k; ++j) direct += fields[j].los_mm[i] - fields[j].los_mm.at(ref);
      CHECK(s.cumulative_mm[k + 1][i] == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("assemble_series is linear in the inputs") {
  const GridMeta g = testing::grid(7, 7);
  std::mt19937_64 rng(4);
  std::vector<DisplacementField> a, b;
  for (int k = 0; k < 4; ++k) {
    a.push_back(random_field(g, k, rng));
    DisplacementField f = a.back();
    for (std::size_t i = 0; i < g.size(); ++i) f.los_mm.set(i, -2.5 * f.los_mm[i]);
    b.push_back(f);
  }
  const DisplacementSeries sa = assemble_series(a, {3, 3}), sb = assemble_series(b, {3, 3});
  for (std::size_t k = 0; k < sa.cumulative_mm.size(); ++k)
    for (std::size_t i = 0; i < g.size(); ++i)
      CHECK(sb.cumulative_mm[k][i] == doctest::Approx(-2.5 * sa.cumulative_mm[k][i]).epsilon(1e-12));
}

TEST_CASE("assemble_series masks are sticky") {
  const GridMeta g = testing::grid(4, 4);
  std::vector<DisplacementField> fields;
  for (int k = 0; k < 4; ++k) fields.push_back(constant_field(g, k, 1.0, {0, 0}));
  fields[1].los_mm.mask(7);
  const DisplacementSeries s = assemble_series(fields, {0, 0});
  CHECK_FALSE(s.cumulative_mm[0].masked(7));
  CHECK_FALSE(s.cumulative_mm[1].masked(7));
  for (int k = 2; k <= 4; ++k) CHECK(s.cumulative_mm[k].masked(7));
  CHECK(s.cumulative_mm[4].masked_count() == 1);
}

TEST_CASE("assemble_series rejects broken chains") {
  const GridMeta g = testing::grid(3, 3);
  std::vector<DisplacementField> f{constant_field(g, 0, 1, {0, 0}), constant_field(g, 1, 1, {0, 0})};
  SUBCASE("permuted order") {
    std::swap(f[0], f[1]);
    CHECK_THROWS_AS(assemble_series(f, {0, 0}), Error);
  }
  SUBCASE("gap in the chain") {
    f[1] = constant_field(g, 2, 1, {0, 0});
    CHECK_THROWS_AS(assemble_series(f, {0, 0}), Error);
  }
  SUBCASE("empty") { CHECK_THROWS_AS(assemble_series({}, {0, 0}), Error); }
  SUBCASE("grid mismatch") {
    f[1] = constant_field(testing::grid(4, 3), 1, 1, {0, 0});
    CHECK(error_of([&] { assemble_series(f, {0, 0}); }) == Errc::GridMismatch);
  }
}

TEST_CASE("project_vertical") {
  RealRaster los(testing::grid(2, 1), RasterKind::DisplacementMm, -10.0);
  los.mask(1);
  const RealRaster same = project_vertical(los, 0.0);
  CHECK(same[0] == -10.0);
  CHECK(same.masked(1));
  CHECK(project_vertical(los, 60.0)[0] == doctest::Approx(-20.0).epsilon(1e-12));
  CHECK_THROWS_AS(project_vertical(los, 90.0), Error);
  CHECK_THROWS_AS(project_vertical(los, 120.0), Error);
  CHECK_THROWS_AS(project_vertical(los, -1.0), Error);
}

TEST_CASE("reference selection") {
  const GridMeta g = testing::grid(6, 6);
  RealRaster q(g, RasterKind::Coherence, 0.5);
  q.set(1, 1, 0.95);
  q.set(4, 4, 0.9);
  CHECK(select_reference(q, {}) == Pixel{1, 1});
  CHECK(select_reference(q, buffer_mask(g, {{0, 0}}, 1)) == Pixel{4, 4});
  q.mask(4, 4);
  CHECK(select_reference(q, buffer_mask(g, {{0, 0}}, 1)) == Pixel{0, 2});  // first 0.5 outside the buffer
  const auto all = buffer_mask(g, {{3, 3}}, 10);
  CHECK(error_of([&] { select_reference(q, all); }) == Errc::NoSeed);
}

TEST_CASE("mean_raster skips masked samples") {
  const GridMeta g = testing::grid(2, 1);
  RealRaster a(g, RasterKind::Coherence, 0.2), b(g, RasterKind::Coherence, 0.6);
  b.mask(1);
  const RealRaster m = mean_raster({a, b});
  CHECK(m[0] == doctest::Approx(0.4));
  CHECK(m[1] == doctest::Approx(0.2));
  a.mask(1);
  CHECK(mean_raster({a, b}).masked(1));
}

TEST_CASE("series save/load round-trip") {
  TempDir dir("series");
  const GridMeta g = testing::grid(5, 5);
  std::mt19937_64 rng(5);
  std::vector<DisplacementField> f;
  for (int k = 0; k < 3; ++k) f.push_back(random_field(g, k, rng));
  f[1].los_mm.mask(3);
  const DisplacementSeries s = assemble_series(f, {2, 2});
  save_series(dir.path(), s);
  const DisplacementSeries back = load_series(dir.path());
  CHECK(back.dates == s.dates);
  CHECK(back.reference_pixel == s.reference_pixel);
  CHECK(back.meta == s.meta);
  for (std::size_t k = 0; k < s.cumulative_mm.size(); ++k) CHECK(bit_equal(back.cumulative_mm[k], s.cumulative_mm[k]));
  const auto j = read_json(dir / "series.json");
  CHECK(j["epochs"].size() == 4);
  CHECK(j["epochs"][3]["masked_pixels"] == 1);
  CHECK(j["reference_pixel"] == nlohmann::json::array({2, 2}));
}

#include "insar/ps.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace insar::ps {

using nlohmann::json;

RealRaster amplitude_dispersion(const std::vector<ComplexRaster>& stack) {
  if (stack.size() < static_cast<std::size_t>(kMinEpochs))
    throw Error(Errc::NotEnoughData, "amplitude dispersion needs at least " +
                                         std::to_string(kMinEpochs) + " epochs, got " +
                                         std::to_string(stack.size()));
  const GridMeta& g = stack.front().meta();
  for (const auto& s : stack) require_compatible(g, s.meta());
  const double n = static_cast<double>(stack.size());
  RealRaster out(g, RasterKind::Phase, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double sum = 0.0;
    for (const auto& s : stack) sum += std::abs(std::complex<double>(s[i]));
    const double mean = sum / n;
    if (!(mean > 0.0)) {
      out.mask(i);
      continue;
    }
    double var = 0.0;
    for (const auto& s : stack) {
      const double d = std::abs(std::complex<double>(s[i])) - mean;
      var += d * d;
    }
    out.set(i, std::sqrt(var / n) / mean);
  }
  return out;
}

std::vector<PSCandidate> select_ps(const RealRaster& da, double threshold,
                                   const RealRaster* mean_coherence) {
  if (mean_coherence) require_compatible(da.meta(), mean_coherence->meta());
  const GridMeta& g = da.meta();
  std::vector<PSCandidate> out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (da.masked(i) || !(da[i] < threshold)) continue;
    PSCandidate c;
    c.pixel = {static_cast<int>(i / g.width), static_cast<int>(i % g.width)};
    c.amp_dispersion = da[i];
    c.mean_coherence = (mean_coherence && !mean_coherence->masked(i)) ? (*mean_coherence)[i] : 0.0;
    c.selected = true;
    out.push_back(c);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.amp_dispersion < b.amp_dispersion; });
  return out;
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

bool compare_pixel(const DisplacementSeries& series, const std::vector<RealRaster>& reference,
                   Pixel p, PixelComparison& out) {
  double sq = 0.0, worst = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < series.cumulative_mm.size(); ++k) {
    const auto& a = series.cumulative_mm[k];
    const auto& b = reference[k];
    if (a.masked(p) || b.masked(p)) continue;
    const double d = a.at(p) - b.at(p);
    sq += d * d;
    worst = std::max(worst, std::abs(d));
    ++n;
  }
  if (n == 0) return false;
  out = {p, std::sqrt(sq / n), worst, n};
  return true;
}

}  // namespace

ComparisonReport compare_ps_dinsar(const DisplacementSeries& series,
                                   const std::vector<PSCandidate>& candidates,
                                   const std::vector<RealRaster>& reference,
                                   const std::vector<Pixel>* on_profile) {
  if (reference.size() != series.cumulative_mm.size())
    throw Error(Errc::InvalidArgument, "reference series has a different number of epochs");
  const GridMeta& g = series.meta;
  for (const auto& r : reference) require_compatible(g, r.meta());

  std::vector<std::uint8_t> is_ps(g.size(), 0);
  for (const auto& c : candidates)
    if (c.selected && g.contains(c.pixel)) is_ps[g.index(c.pixel)] = 1;
  std::set<std::size_t> profile;
  if (on_profile)
    for (const Pixel& p : *on_profile) profile.insert(g.index(p));

  ComparisonReport report;
  for (const auto& c : candidates) {
    if (!c.selected || !g.contains(c.pixel)) continue;
    if (on_profile && !profile.count(g.index(c.pixel))) continue;
    PixelComparison pc;
    if (compare_pixel(series, reference, c.pixel, pc)) report.ps.push_back(pc);
  }
  std::vector<double> ps_rmse, non_ps_rmse;
  for (const auto& pc : report.ps) {
    ps_rmse.push_back(pc.rmse_mm);
    report.ps_max_dev_mm = std::max(report.ps_max_dev_mm, pc.max_abs_dev_mm);
  }
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c) {
      if (is_ps[g.index({r, c})]) continue;
      PixelComparison pc;
      if (compare_pixel(series, reference, {r, c}, pc)) non_ps_rmse.push_back(pc.rmse_mm);
    }
  report.non_ps_pixels = static_cast<int>(non_ps_rmse.size());
  if (!ps_rmse.empty()) {
    double sum = 0.0;
    for (double v : ps_rmse) sum += v;
    report.ps_rmse_mean_mm = sum / ps_rmse.size();
    report.ps_rmse_median_mm = median(ps_rmse);
  }
  report.non_ps_rmse_median_mm = median(non_ps_rmse);
  return report;
}

json to_json(const std::vector<PSCandidate>& candidates) {
  json arr = json::array();
  for (const auto& c : candidates)
    arr.push_back({{"row", c.pixel.row},
                   {"col", c.pixel.col},
                   {"amp_dispersion", c.amp_dispersion},
                   {"mean_coherence", c.mean_coherence},
                   {"selected", c.selected}});
  return json{{"count", candidates.size()}, {"candidates", arr}};
}

json to_json(const ComparisonReport& report) {
  json entries = json::array();
  for (const auto& e : report.ps)
    entries.push_back({{"row", e.pixel.row},
                       {"col", e.pixel.col},
                       {"rmse_mm", e.rmse_mm},
                       {"max_abs_dev_mm", e.max_abs_dev_mm},
                       {"epochs", e.epochs}});
  return json{{"ps", entries},
              {"aggregate",
               {{"ps_count", report.ps.size()},
                {"ps_rmse_mean_mm", report.ps_rmse_mean_mm},
                {"ps_rmse_median_mm", report.ps_rmse_median_mm},
                {"ps_max_dev_mm", report.ps_max_dev_mm},
                {"non_ps_pixels", report.non_ps_pixels},
                {"non_ps_rmse_median_mm", report.non_ps_rmse_median_mm}}}};
}

}  // namespace insar::ps

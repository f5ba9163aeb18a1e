#include "insar/trend.hpp"

#include <cmath>

namespace insar::trend {

using nlohmann::json;

TrendFit fit_line(const std::vector<double>& t, const std::vector<std::optional<double>>& y) {
  if (t.size() != y.size()) throw Error(Errc::InvalidArgument, "time and value lengths differ");
  TrendFit fit;
  double st = 0.0, sy = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!y[i]) continue;
    st += t[i];
    sy += *y[i];
    ++n;
  }
  fit.n_epochs = n;
  if (n < 3) return fit;
  const double tm = st / n, ym = sy / n;
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!y[i]) continue;
    stt += (t[i] - tm) * (t[i] - tm);
    sty += (t[i] - tm) * (*y[i] - ym);
  }
  if (!(stt > 0.0)) return fit;
  fit.rate_mm_per_year = sty / stt;
  fit.intercept_mm = ym - fit.rate_mm_per_year * tm;
  double ss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!y[i]) continue;
    const double r = *y[i] - (fit.intercept_mm + fit.rate_mm_per_year * t[i]);
    ss += r * r;
  }
  fit.residual_rmse_mm = std::sqrt(ss / n);
  fit.valid = true;
  return fit;
}

TrendFit fit_trend(const std::vector<Date>& dates, const std::vector<std::optional<double>>& values_mm) {
  std::vector<double> t;
  t.reserve(dates.size());
  for (const auto& d : dates)
    t.push_back(dates.empty() ? 0.0 : dates.front().days_until(d) / kDaysPerYear);
  return fit_line(t, values_mm);
}

std::string to_string(Trigger t) {
  switch (t) {
    case Trigger::Rate: return "RATE";
    case Trigger::Rmse: return "RMSE";
    case Trigger::RateAndRmse: return "RATE+RMSE";
  }
  return "RATE";
}

std::vector<Alert> alert_scan(const ProfileSeries& profile, double rate_threshold_mm_yr,
                              double rmse_threshold_mm) {
  profile.validate();
  std::vector<Alert> alerts;
  std::vector<std::optional<double>> column(profile.dates.size());
  for (std::size_t s = 0; s < profile.pixels.size(); ++s) {
    for (std::size_t e = 0; e < profile.dates.size(); ++e) column[e] = profile.values_mm[e][s];
    const TrendFit fit = fit_trend(profile.dates, column);
    if (!fit.valid) continue;
    const bool rate = std::abs(fit.rate_mm_per_year) > rate_threshold_mm_yr;
    const bool rmse = fit.residual_rmse_mm > rmse_threshold_mm;
    if (!rate && !rmse) continue;
    alerts.push_back({s, profile.distances_m[s], profile.pixels[s], fit.rate_mm_per_year,
                      fit.residual_rmse_mm,
                      rate && rmse ? Trigger::RateAndRmse : (rate ? Trigger::Rate : Trigger::Rmse)});
  }
  return alerts;
}

json to_json(const std::vector<Alert>& alerts, double rate_threshold_mm_yr, double rmse_threshold_mm) {
  json arr = json::array();
  for (const auto& a : alerts)
    arr.push_back({{"sample", a.sample},
                   {"distance_m", a.distance_m},
                   {"row", a.pixel.row},
                   {"col", a.pixel.col},
                   {"rate_mm_per_year", a.rate_mm_per_year},
                   {"rmse_mm", a.rmse_mm},
                   {"trigger", to_string(a.trigger)}});
  return json{{"rate_threshold_mm_per_year", rate_threshold_mm_yr},
              {"rmse_threshold_mm", rmse_threshold_mm},
              {"note", "demonstration thresholds, not engineering guidance"},
              {"alerts", arr}};
}

}  // namespace insar::trend

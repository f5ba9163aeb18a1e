#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "insar/date.hpp"
#include "insar/profile.hpp"

namespace insar::trend {

struct TrendFit {
  bool valid = false;  // false: fewer than 3 usable points
  double rate_mm_per_year = 0.0;
  double intercept_mm = 0.0;
  double residual_rmse_mm = 0.0;
  int n_epochs = 0;
};

/// Closed-form ordinary least squares of y on t. Gaps are skipped.
TrendFit fit_line(const std::vector<double>& t, const std::vector<std::optional<double>>& y);

/// fit_line with t in years (365.25 days) since the first date.
TrendFit fit_trend(const std::vector<Date>& dates, const std::vector<std::optional<double>>& values_mm);

enum class Trigger { Rate, Rmse, RateAndRmse };

std::string to_string(Trigger t);

struct Alert {
  std::size_t sample = 0;
  double distance_m = 0.0;
  Pixel pixel;
  double rate_mm_per_year = 0.0;
  double rmse_mm = 0.0;
  Trigger trigger = Trigger::Rate;
};

inline constexpr double kDefaultRateThreshold = 10.0;  // mm/yr, demo value only
inline constexpr double kDefaultRmseThreshold = 5.0;   // mm, demo value only

/// One alert per profile sample whose |rate| exceeds the rate threshold or
/// whose residual RMSE exceeds the RMSE threshold.
std::vector<Alert> alert_scan(const ProfileSeries& profile, double rate_threshold_mm_yr,
                              double rmse_threshold_mm);

nlohmann::json to_json(const std::vector<Alert>& alerts, double rate_threshold_mm_yr,
                       double rmse_threshold_mm);

}  // namespace insar::trend

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "insar/date.hpp"

namespace insar {

struct AcquisitionMeta {
  std::string id;
  Date date;
  double wavelength_m = 0.0;
  double incidence_deg = 0.0;
  double slant_range_m = 0.0;
  std::string slc_path;
  /// Perpendicular orbit offset relative to a common reference track. Pair
  /// baselines are differences of this value.
  double baseline_m = 0.0;

  void validate() const;
  friend bool operator==(const AcquisitionMeta&, const AcquisitionMeta&) = default;
};

struct PairSpec {
  std::string master_id;
  std::string slave_id;
  Date master_date;
  Date slave_date;
  double perp_baseline_m = 0.0;  // slave minus master
  int temporal_baseline_days = 0;
  bool gap = false;  // temporal baseline above the requested maximum

  friend bool operator==(const PairSpec&, const PairSpec&) = default;
};

struct Catalog {
  std::vector<AcquisitionMeta> acquisitions;
  std::vector<PairSpec> pairs;

  const AcquisitionMeta& find(const std::string& id) const;
  friend bool operator==(const Catalog&, const Catalog&) = default;
};

/// Sorts by date and chains consecutive acquisitions into master/slave pairs.
/// Pairs longer than `max_temporal_days` are still emitted, flagged `gap`.
std::vector<PairSpec> build_pairs(std::vector<AcquisitionMeta> acquisitions,
                                  int max_temporal_days);

struct SearchQuery {
  double min_lon = 0.0;
  double min_lat = 0.0;
  double max_lon = 0.0;
  double max_lat = 0.0;
  Date start;
  Date end;
  std::string platform = "Sentinel-1";
  std::string processing_level = "SLC";

  void validate() const;
};

/// ASF search API URL for `q`. Pure: equal queries give identical strings.
std::string asf_query_url(const SearchQuery& q);

/// Decimal rendering with at most six fractional digits, trailing zeros
/// trimmed ("8.880000" -> "8.88", "2.000000" -> "2").
std::string format_trimmed(double v);

nlohmann::json acquisition_to_json(const AcquisitionMeta& a);
nlohmann::json pair_to_json(const PairSpec& p);
/// Throw Errc::Schema on missing keys or wrong types.
AcquisitionMeta acquisition_from_json(const nlohmann::json& j);
PairSpec pair_from_json(const nlohmann::json& j);

void save_catalog(const std::filesystem::path& path, const Catalog& catalog);
Catalog load_catalog(const std::filesystem::path& path);

}  // namespace insar

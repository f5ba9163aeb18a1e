#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "insar/displacement.hpp"
#include "insar/geometry.hpp"

namespace insar {

/// Displacement along a polyline: epochs x samples, gaps as nullopt.
struct ProfileSeries {
  std::vector<double> distances_m;
  std::vector<Pixel> pixels;
  std::vector<Date> dates;
  std::vector<std::vector<std::optional<double>>> values_mm;

  void validate() const;
  friend bool operator==(const ProfileSeries&, const ProfileSeries&) = default;
};

ProfileSeries extract_profile(const DisplacementSeries& series, const ProfileLine& line);

enum class ProfileFormat { Csv, Json };

/// CSV long form `date,distance_m,row,col,displacement_mm`, numbers with six
/// significant digits, gaps as empty fields. JSON keeps full precision.
std::string profile_to_csv(const ProfileSeries& ps);
std::string profile_to_json(const ProfileSeries& ps);
ProfileSeries profile_from_csv(const std::string& text);
ProfileSeries profile_from_json(const std::string& text);

void export_profile(const std::filesystem::path& path, const ProfileSeries& ps, ProfileFormat format);
ProfileSeries import_profile(const std::filesystem::path& path);

/// Reads a GeoJSON LineString (bare geometry, Feature or first feature of a
/// FeatureCollection). Only `coordinates` ([lon, lat] pairs) is honored.
ProfileLine load_geojson_line(const std::filesystem::path& path);
void save_geojson_line(const std::filesystem::path& path, const ProfileLine& line);

}  // namespace insar

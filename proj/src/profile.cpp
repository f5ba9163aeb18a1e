#include "insar/profile.hpp"

#include <cstdio>
#include <sstream>

#include "insar/fileio.hpp"

namespace insar {

namespace fs = std::filesystem;
using nlohmann::json;

void ProfileSeries::validate() const {
  if (pixels.size() != distances_m.size())
    throw Error(Errc::Schema, "profile pixels and distances differ in length");
  if (values_mm.size() != dates.size())
    throw Error(Errc::Schema, "profile value rows do not match dates");
  for (const auto& row : values_mm)
    if (row.size() != pixels.size()) throw Error(Errc::Schema, "profile row has wrong sample count");
  if (!distances_m.empty() && distances_m.front() != 0.0)
    throw Error(Errc::Schema, "profile distances must start at 0");
  for (std::size_t i = 1; i < distances_m.size(); ++i)
    if (distances_m[i] < distances_m[i - 1])
      throw Error(Errc::Schema, "profile distances must be nondecreasing");
}

ProfileSeries extract_profile(const DisplacementSeries& series, const ProfileLine& line) {
  const RasterizedLine r = rasterize_polyline(line, series.meta);
  ProfileSeries ps;
  ps.distances_m = r.distances_m;
  ps.pixels = r.pixels;
  ps.dates = series.dates;
  for (const auto& epoch : series.cumulative_mm) {
    std::vector<std::optional<double>> row;
    row.reserve(r.pixels.size());
    for (const Pixel& p : r.pixels) {
      if (epoch.masked(p))
        row.emplace_back(std::nullopt);
      else
        row.emplace_back(epoch.at(p));
    }
    ps.values_mm.push_back(std::move(row));
  }
  return ps;
}

namespace {

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

constexpr const char* kCsvHeader = "date,distance_m,row,col,displacement_mm";

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::Schema, "profile CSV: bad number '" + s + "'");
  }
}

int parse_int(const std::string& s) {
  const double v = parse_double(s);
  if (v != static_cast<int>(v)) throw Error(Errc::Schema, "profile CSV: bad integer '" + s + "'");
  return static_cast<int>(v);
}

}  // namespace

std::string profile_to_csv(const ProfileSeries& ps) {
  ps.validate();
  std::string out = std::string(kCsvHeader) + "\n";
  for (std::size_t e = 0; e < ps.dates.size(); ++e) {
    const std::string date = ps.dates[e].to_string();
    for (std::size_t s = 0; s < ps.pixels.size(); ++s) {
      out += date + "," + g6(ps.distances_m[s]) + "," + std::to_string(ps.pixels[s].row) + "," +
             std::to_string(ps.pixels[s].col) + ",";
      if (ps.values_mm[e][s]) out += g6(*ps.values_mm[e][s]);
      out += "\n";
    }
  }
  return out;
}

ProfileSeries profile_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || split(line, ',') != split(kCsvHeader, ','))
    throw Error(Errc::Schema, "profile CSV: unexpected header");
  ProfileSeries ps;
  std::size_t sample = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = split(line, ',');
    if (f.size() != 5) throw Error(Errc::Schema, "profile CSV: expected 5 fields: " + line);
    const Date d = Date::parse(f[0]);
    if (ps.dates.empty() || ps.dates.back() != d) {
      if (!ps.dates.empty() && sample != ps.pixels.size())
        throw Error(Errc::Schema, "profile CSV: ragged epoch block");
      ps.dates.push_back(d);
      ps.values_mm.emplace_back();
      sample = 0;
    }
    const double dist = parse_double(f[1]);
    const Pixel p{parse_int(f[2]), parse_int(f[3])};
    if (ps.dates.size() == 1) {
      ps.distances_m.push_back(dist);
      ps.pixels.push_back(p);
    } else if (sample >= ps.pixels.size() || !(ps.pixels[sample] == p)) {
      throw Error(Errc::Schema, "profile CSV: sample layout differs between epochs");
    }
    ps.values_mm.back().push_back(f[4].empty() ? std::nullopt : std::optional<double>(parse_double(f[4])));
    ++sample;
  }
  if (!ps.dates.empty() && sample != ps.pixels.size())
    throw Error(Errc::Schema, "profile CSV: ragged final epoch block");
  ps.validate();
  return ps;
}

std::string profile_to_json(const ProfileSeries& ps) {
  ps.validate();
  json j;
  j["distances_m"] = ps.distances_m;
  json px = json::array();
  for (const Pixel& p : ps.pixels) px.push_back({p.row, p.col});
  j["pixels"] = px;
  json dates = json::array();
  for (const auto& d : ps.dates) dates.push_back(d.to_string());
  j["dates"] = dates;
  json values = json::array();
  for (const auto& row : ps.values_mm) {
    json r = json::array();
    for (const auto& v : row) r.push_back(v ? json(*v) : json(nullptr));
    values.push_back(r);
  }
  j["values_mm"] = values;
  j["units"] = "mm";
  return j.dump(2) + "\n";
}

ProfileSeries profile_from_json(const std::string& text) {
  ProfileSeries ps;
  try {
    const json j = json::parse(text);
    ps.distances_m = j.at("distances_m").get<std::vector<double>>();
    for (const auto& p : j.at("pixels")) ps.pixels.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    for (const auto& d : j.at("dates")) ps.dates.push_back(Date::parse(d.get<std::string>()));
    for (const auto& row : j.at("values_mm")) {
      std::vector<std::optional<double>> r;
      for (const auto& v : row) r.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
      ps.values_mm.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::Schema, std::string("profile JSON: ") + e.what());
  }
  ps.validate();
  return ps;
}

void export_profile(const fs::path& path, const ProfileSeries& ps, ProfileFormat format) {
  write_file_atomic(path, format == ProfileFormat::Csv ? profile_to_csv(ps) : profile_to_json(ps));
}

ProfileSeries import_profile(const fs::path& path) {
  const std::string text = read_file(path);
  return path.extension() == ".json" ? profile_from_json(text) : profile_from_csv(text);
}

ProfileLine load_geojson_line(const fs::path& path) {
  const json j = read_json(path);
  const json* node = &j;
  if (node->contains("features") && (*node)["features"].is_array() && !(*node)["features"].empty())
    node = &(*node)["features"][0];
  if (node->contains("geometry")) node = &(*node)["geometry"];
  if (!node->contains("coordinates"))
    throw Error(Errc::Schema, path.string() + ": no LineString coordinates");
  ProfileLine line;
  line.name = path.stem().string();
  try {
    for (const auto& c : (*node)["coordinates"])
      line.vertices.push_back({c.at(1).get<double>(), c.at(0).get<double>()});
  } catch (const json::exception& e) {
    throw Error(Errc::Schema, path.string() + ": " + e.what());
  }
  line.validate();
  return line;
}

void save_geojson_line(const fs::path& path, const ProfileLine& line) {
  json coords = json::array();
  for (const auto& v : line.vertices) coords.push_back({v.lon, v.lat});
  write_json(path, json{{"type", "Feature"},
                        {"properties", {{"name", line.name}}},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}}});
}

}  // namespace insar

#include "insar/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdio>
#include <set>

#include "insar/error.hpp"
#include "insar/fileio.hpp"

namespace insar {

using nlohmann::json;

void AcquisitionMeta::validate() const {
  if (id.empty()) throw Error(Errc::InvalidArgument, "acquisition id is empty");
  if (!(wavelength_m > 0.0) || !std::isfinite(wavelength_m))
    throw Error(Errc::InvalidArgument, id + ": wavelength must be > 0");
  if (!(incidence_deg > 0.0 && incidence_deg < 90.0))
    throw Error(Errc::InvalidArgument, id + ": incidence must be in (0, 90) degrees");
  if (!(slant_range_m > 0.0) || !std::isfinite(slant_range_m))
    throw Error(Errc::InvalidArgument, id + ": slant range must be > 0");
  if (!std::isfinite(baseline_m))
    throw Error(Errc::InvalidArgument, id + ": baseline must be finite");
}

const AcquisitionMeta& Catalog::find(const std::string& id) const {
  for (const auto& a : acquisitions)
    if (a.id == id) return a;
  throw Error(Errc::InvalidArgument, "no acquisition with id '" + id + "'");
}

std::vector<PairSpec> build_pairs(std::vector<AcquisitionMeta> acquisitions,
                                  int max_temporal_days) {
  if (acquisitions.size() < 2)
    throw Error(Errc::NotEnoughData, "pairing needs at least 2 acquisitions");
  std::sort(acquisitions.begin(), acquisitions.end(),
            [](const auto& a, const auto& b) { return a.date < b.date; });
  std::vector<PairSpec> pairs;
  pairs.reserve(acquisitions.size() - 1);
  for (std::size_t i = 0; i + 1 < acquisitions.size(); ++i) {
    const auto& m = acquisitions[i];
    const auto& s = acquisitions[i + 1];
    if (m.date == s.date)
      throw Error(Errc::DuplicateDate, "two acquisitions on " + m.date.to_string());
    PairSpec p;
    p.master_id = m.id;
    p.slave_id = s.id;
    p.master_date = m.date;
    p.slave_date = s.date;
    p.perp_baseline_m = s.baseline_m - m.baseline_m;
    p.temporal_baseline_days = m.date.days_until(s.date);
    p.gap = p.temporal_baseline_days > max_temporal_days;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

void SearchQuery::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(min_lon) || !finite(min_lat) || !finite(max_lon) || !finite(max_lat))
    throw Error(Errc::InvalidArgument, "bbox must be finite");
  if (!(min_lon < max_lon) || !(min_lat < max_lat))
    throw Error(Errc::InvalidArgument, "bbox min must be below max on both axes");
  if (min_lon < -180.0 || max_lon > 180.0 || min_lat < -90.0 || max_lat > 90.0)
    throw Error(Errc::InvalidArgument, "bbox outside geographic range");
  if (end < start) throw Error(Errc::InvalidDate, "query start is after end");
  if (platform.empty() || processing_level.empty())
    throw Error(Errc::InvalidArgument, "platform and processing level are required");
}

std::string format_trimmed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

namespace {

std::string percent_encode(const std::string& s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out;
}

json acq_json(const AcquisitionMeta& a) {
  return json{{"id", a.id},
              {"date", a.date.to_string()},
              {"wavelength_m", a.wavelength_m},
              {"incidence_deg", a.incidence_deg},
              {"slant_range_m", a.slant_range_m},
              {"slc_path", a.slc_path},
              {"baseline_m", a.baseline_m}};
}

json pair_json(const PairSpec& p) {
  return json{{"master_id", p.master_id},
              {"slave_id", p.slave_id},
              {"master_date", p.master_date.to_string()},
              {"slave_date", p.slave_date.to_string()},
              {"perp_baseline_m", p.perp_baseline_m},
              {"temporal_baseline_days", p.temporal_baseline_days},
              {"gap", p.gap}};
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw Error(Errc::Schema, std::string("catalog: missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::Schema, std::string("catalog: bad type for '") + key + "'");
  }
}

}  // namespace

nlohmann::json acquisition_to_json(const AcquisitionMeta& a) { return acq_json(a); }

nlohmann::json pair_to_json(const PairSpec& p) { return pair_json(p); }

AcquisitionMeta acquisition_from_json(const nlohmann::json& e) {
  AcquisitionMeta a;
  a.id = field<std::string>(e, "id");
  a.date = Date::parse(field<std::string>(e, "date"));
  a.wavelength_m = field<double>(e, "wavelength_m");
  a.incidence_deg = field<double>(e, "incidence_deg");
  a.slant_range_m = field<double>(e, "slant_range_m");
  a.slc_path = field<std::string>(e, "slc_path");
  a.baseline_m = e.contains("baseline_m") ? field<double>(e, "baseline_m") : 0.0;
  return a;
}

PairSpec pair_from_json(const nlohmann::json& e) {
  PairSpec p;
  p.master_id = field<std::string>(e, "master_id");
  p.slave_id = field<std::string>(e, "slave_id");
  p.master_date = Date::parse(field<std::string>(e, "master_date"));
  p.slave_date = Date::parse(field<std::string>(e, "slave_date"));
  p.perp_baseline_m = field<double>(e, "perp_baseline_m");
  p.temporal_baseline_days = field<int>(e, "temporal_baseline_days");
  p.gap = field<bool>(e, "gap");
  return p;
}

std::string asf_query_url(const SearchQuery& q) {
  q.validate();
  return "https://api.daac.asf.alaska.edu/services/search/param?platform=" +
         percent_encode(q.platform) + "&processingLevel=" + percent_encode(q.processing_level) +
         "&bbox=" + format_trimmed(q.min_lon) + "," + format_trimmed(q.min_lat) + "," +
         format_trimmed(q.max_lon) + "," + format_trimmed(q.max_lat) +
         "&start=" + q.start.to_string() + "&end=" + q.end.to_string() + "&output=json";
}

void save_catalog(const std::filesystem::path& path, const Catalog& catalog) {
  json acq = json::array();
  for (const auto& a : catalog.acquisitions) acq.push_back(acq_json(a));
  json pairs = json::array();
  for (const auto& p : catalog.pairs) pairs.push_back(pair_json(p));
  write_json(path, json{{"acquisitions", acq}, {"pairs", pairs}});
}

Catalog load_catalog(const std::filesystem::path& path) {
  const json j = read_json(path);
  if (!j.is_object() || !j.contains("acquisitions") || !j["acquisitions"].is_array())
    throw Error(Errc::Schema, path.string() + ": 'acquisitions' array required");
  Catalog cat;
  std::set<std::string> ids;
  for (const auto& e : j["acquisitions"]) {
    AcquisitionMeta a = acquisition_from_json(e);
    try {
      a.validate();
    } catch (const Error& err) {
      throw Error(Errc::Schema, path.string() + ": " + err.what());
    }
    if (!ids.insert(a.id).second)
      throw Error(Errc::DuplicateId, path.string() + ": duplicate acquisition id '" + a.id + "'");
    cat.acquisitions.push_back(std::move(a));
  }
  if (j.contains("pairs")) {
    if (!j["pairs"].is_array()) throw Error(Errc::Schema, path.string() + ": 'pairs' must be an array");
    for (const auto& e : j["pairs"]) {
      PairSpec p = pair_from_json(e);
      if (!(p.master_date < p.slave_date) ||
          p.master_date.days_until(p.slave_date) != p.temporal_baseline_days)
        throw Error(Errc::Schema, path.string() + ": inconsistent pair dates for " +
                                      p.master_id + "/" + p.slave_id);
      if (!ids.count(p.master_id) || !ids.count(p.slave_id))
        throw Error(Errc::Schema, path.string() + ": pair references unknown acquisition");
      cat.pairs.push_back(std::move(p));
    }
  }
  return cat;
}

}  // namespace insar

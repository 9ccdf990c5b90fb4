#include "bikecast/ingest.hpp"

#include <cstdlib>
#include <istream>
#include <ostream>

#include "bikecast/timeutil.hpp"

namespace bikecast {

bool split_csv_row(const std::string& line, std::vector<std::string>& out) {
  out.clear();
  std::string field;
  bool quoted = false;
  for (std::size_t p = 0; p < line.size(); ++p) {
    char c = line[p];
    if (quoted) {
      if (c == '"') {
        if (p + 1 < line.size() && line[p + 1] == '"') {
          field += '"';
          ++p;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' && p + 1 == line.size()) {
      // ignore trailing CR
    } else {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return !quoted;
}

namespace {

int find_col(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] == name) return int(k);
  return -1;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end && *end == '\0';
}

}  // namespace

void IngestReport::write(std::ostream& os) const {
  os << "rows_total " << rows_total << "\n";
  os << "accepted " << accepted << "\n";
  os << "malformed " << malformed << "\n";
  os << "end_before_start " << end_before_start << "\n";
  os << "out_of_horizon " << out_of_horizon << "\n";
  os << "origin_off_grid " << origin_off_grid << "\n";
  os << "unknown_station " << unknown_station << "\n";
  os << "intracell " << intracell << "\n";
  for (const auto& w : warnings) os << "warning " << w << "\n";
}

std::unordered_map<std::string, GeoPoint> load_station_table(std::istream& is) {
  std::string line;
  std::vector<std::string> fields;
  if (!std::getline(is, line))
    throw DataError("station table: empty file");
  if (!split_csv_row(line, fields))
    throw DataError("station table: malformed header");
  int c_id = find_col(fields, "station_id");
  int c_lon = find_col(fields, "lon");
  int c_lat = find_col(fields, "lat");
  if (c_id < 0 || c_lon < 0 || c_lat < 0)
    throw DataError("station table: header must declare station_id, lon, lat");
  std::unordered_map<std::string, GeoPoint> table;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (!split_csv_row(line, fields) ||
        int(fields.size()) <= std::max(c_id, std::max(c_lon, c_lat)))
      throw DataError("station table: bad row at line " + std::to_string(lineno));
    GeoPoint p;
    if (!parse_double(fields[std::size_t(c_lon)], p.lon) ||
        !parse_double(fields[std::size_t(c_lat)], p.lat))
      throw DataError("station table: bad coordinate at line " +
                      std::to_string(lineno));
    table[fields[std::size_t(c_id)]] = p;
  }
  return table;
}

std::pair<DemandTensor, IngestReport> ingest_trips(std::istream& trips,
                                                   const GridSpec& spec,
                                                   std::int64_t bins) {
  spec.validate();
  if (bins < 1) throw ConfigError("horizon must span at least one bin");

  DemandTensor tensor = DemandTensor::zeros(spec.width_cells, spec.height_cells,
                                            bins, spec.t0, spec.time_bin_s);
  IngestReport report;

  std::string line;
  std::vector<std::string> header;
  if (!std::getline(trips, line) || line.empty() || line == "\r") {
    report.warnings.push_back("empty trip stream; tensor is all zeros");
    return {std::move(tensor), std::move(report)};
  }
  if (!split_csv_row(line, header))
    throw DataError("trip stream: malformed header row");

  const int c_st = find_col(header, "start_time");
  const int c_et = find_col(header, "end_time");
  const int c_slon = find_col(header, "start_lon");
  const int c_slat = find_col(header, "start_lat");
  const int c_elon = find_col(header, "end_lon");
  const int c_elat = find_col(header, "end_lat");
  const int c_sid = find_col(header, "start_station_id");
  const int c_eid = find_col(header, "end_station_id");

  if (c_st < 0 || c_et < 0)
    throw DataError("trip stream: header must declare start_time and end_time");
  const bool by_coords = c_slon >= 0 && c_slat >= 0 && c_elon >= 0 && c_elat >= 0;
  const bool by_station = c_sid >= 0 && c_eid >= 0;
  if (!by_coords && !by_station)
    throw DataError(
        "trip stream: header must declare either start_lon/start_lat/"
        "end_lon/end_lat or start_station_id/end_station_id");
  if (by_station && spec.station_table.empty())
    throw ConfigError("trip stream uses station ids but no station table is loaded");

  const std::int64_t t_end = spec.t0 + bins * spec.time_bin_s;
  std::vector<std::string> f;
  int max_col = std::max(c_st, c_et);
  if (by_coords)
    max_col = std::max(max_col, std::max(std::max(c_slon, c_slat), std::max(c_elon, c_elat)));
  else
    max_col = std::max(max_col, std::max(c_sid, c_eid));

  while (std::getline(trips, line)) {
    if (line.empty() || line == "\r") continue;
    ++report.rows_total;
    if (!split_csv_row(line, f) || int(f.size()) <= max_col) {
      ++report.malformed;
      continue;
    }
    auto start = parse_iso8601(f[std::size_t(c_st)]);
    auto end = parse_iso8601(f[std::size_t(c_et)]);
    if (!start || !end) {
      ++report.malformed;
      continue;
    }
    if (*end < *start) {
      ++report.end_before_start;
      continue;
    }

    GeoPoint origin, dest;
    if (by_coords) {
      if (!parse_double(f[std::size_t(c_slon)], origin.lon) ||
          !parse_double(f[std::size_t(c_slat)], origin.lat) ||
          !parse_double(f[std::size_t(c_elon)], dest.lon) ||
          !parse_double(f[std::size_t(c_elat)], dest.lat)) {
        ++report.malformed;
        continue;
      }
    } else {
      auto so = spec.station_table.find(f[std::size_t(c_sid)]);
      auto sd = spec.station_table.find(f[std::size_t(c_eid)]);
      if (so == spec.station_table.end() || sd == spec.station_table.end()) {
        ++report.unknown_station;
        continue;
      }
      origin = so->second;
      dest = sd->second;
    }

    if (*start < spec.t0 || *start >= t_end) {
      ++report.out_of_horizon;
      continue;
    }
    auto origin_cell = resolve_cell(origin, spec);
    if (!origin_cell) {
      ++report.origin_off_grid;
      continue;
    }
    auto dest_cell = resolve_cell(dest, spec);
    if (dest_cell && *dest_cell == *origin_cell) {
      ++report.intracell;
      continue;
    }

    const std::int64_t k = (*start - spec.t0) / spec.time_bin_s;
    ++tensor.at(k, origin_cell->i, origin_cell->j);
    ++report.accepted;
  }
  if (report.rows_total == 0)
    report.warnings.push_back("empty trip stream; tensor is all zeros");
  return {std::move(tensor), std::move(report)};
}

}  // namespace bikecast

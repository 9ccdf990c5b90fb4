#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bikecast/demand.hpp"
#include "bikecast/geo.hpp"

namespace bikecast {

// Row-level accounting for one ingest run. accepted counts trips that became
// a pick-up; every other bucket is a reason a row contributed nothing.
struct IngestReport {
  std::uint64_t rows_total = 0;
  std::uint64_t accepted = 0;
  std::uint64_t malformed = 0;        // unparseable timestamp or coordinate
  std::uint64_t end_before_start = 0;
  std::uint64_t out_of_horizon = 0;   // start time outside [t0, t0 + bins*bin)
  std::uint64_t origin_off_grid = 0;
  std::uint64_t unknown_station = 0;  // station id missing from the table
  std::uint64_t intracell = 0;        // origin and destination in the same cell
  std::vector<std::string> warnings;

  void write(std::ostream& os) const;
};

// Station id -> location. CSV with header columns station_id, lon, lat.
std::unordered_map<std::string, GeoPoint> load_station_table(std::istream& is);

// Bins a trip CSV into hourly pick-up counts. The header row declares the
// column layout; either start_lon/start_lat/end_lon/end_lat or
// start_station_id/end_station_id (resolved through spec.station_table) must
// be present along with start_time/end_time. A trip counts toward its origin
// cell's bin when the origin resolves on the grid and the destination lies in
// a different cell (or off the grid entirely).
std::pair<DemandTensor, IngestReport> ingest_trips(std::istream& trips,
                                                   const GridSpec& spec,
                                                   std::int64_t bins);

// Splits one CSV record, honoring double quotes. Returns false on a dangling
// quote.
bool split_csv_row(const std::string& line, std::vector<std::string>& out);

}  // namespace bikecast

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>

#include "bikecast/common.hpp"

namespace bikecast {

struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;
};

// Square-cell partition of a city. origin is the southwest corner; cell (i,j)
// covers [ (i-1)*s, i*s ) meters east and [ (j-1)*s, j*s ) meters north of it
// under a local equirectangular projection anchored at the origin, with the
// outer high edges closed so boundary points still land on the grid.
struct GridSpec {
  GeoPoint origin;
  double cell_size_m = 1000.0;
  int width_cells = 0;   // i in [1, width_cells], eastward
  int height_cells = 0;  // j in [1, height_cells], northward
  std::int64_t t0 = 0;   // horizon start, Unix seconds
  std::int64_t time_bin_s = 3600;
  std::unordered_map<std::string, GeoPoint> station_table;  // optional

  void validate() const;  // throws ConfigError
};

// Grid cell containing p, or nullopt when p falls outside.
std::optional<Cell> resolve_cell(const GeoPoint& p, const GridSpec& spec);

}  // namespace bikecast

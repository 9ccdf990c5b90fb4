#include "bikecast/geo.hpp"

#include <cmath>

namespace bikecast {

namespace {
constexpr double kEarthRadiusM = 6371000.0;
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
}  // namespace

void GridSpec::validate() const {
  if (width_cells < 1 || height_cells < 1)
    throw ConfigError("grid dimensions must be positive, got " +
                      std::to_string(width_cells) + "x" +
                      std::to_string(height_cells));
  if (!(cell_size_m > 0.0))
    throw ConfigError("cell_size_m must be positive");
  if (time_bin_s < 1) throw ConfigError("time_bin_s must be positive");
  if (origin.lat < -90.0 || origin.lat > 90.0)
    throw ConfigError("origin latitude out of [-90, 90]");
}

std::optional<Cell> resolve_cell(const GeoPoint& p, const GridSpec& spec) {
  const double east_m = (p.lon - spec.origin.lon) * kDegToRad *
                        std::cos(spec.origin.lat * kDegToRad) * kEarthRadiusM;
  const double north_m = (p.lat - spec.origin.lat) * kDegToRad * kEarthRadiusM;

  const double u = east_m / spec.cell_size_m;
  const double v = north_m / spec.cell_size_m;
  if (u < 0.0 || v < 0.0) return std::nullopt;

  int i = int(std::floor(u)) + 1;
  int j = int(std::floor(v)) + 1;
  // outer high boundary is closed
  if (i == spec.width_cells + 1 && u == double(spec.width_cells)) i = spec.width_cells;
  if (j == spec.height_cells + 1 && v == double(spec.height_cells)) j = spec.height_cells;
  if (i < 1 || i > spec.width_cells || j < 1 || j > spec.height_cells)
    return std::nullopt;
  return Cell{i, j};
}

}  // namespace bikecast

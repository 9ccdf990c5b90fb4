#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bikecast/demand.hpp"

namespace bikecast {

// Desk-scale city with phase groups assigned by column, so members of one
// group sit far apart while adjacent columns alternate groups. Each cell runs
// a daily sinusoid for its group plus noise:
//
//   demand = round(max(0, A_g*(1 + sin(2*pi*(k - phi_g)/24)) + noise))
//   noise  = A_g * (group_noise * s_g(k) + cell_noise * eps)
//
// phi_g = 24*g/groups. s_g is a per-group AR(1) series shared by every member,
// so a cell's next hour is best read from its group mates, not its spatial
// neighbors; eps is per-cell white noise that averaging group mates cancels.
struct SyntheticCitySpec {
  int width = 8;
  int height = 8;
  int groups = 2;
  double amplitude = 20.0;          // used when amplitudes is empty
  std::vector<double> amplitudes;   // optional per-group override
  double group_noise = 0.35;
  double cell_noise = 0.10;
  double ar_coeff = 0.9;
  std::int64_t bins = 1008;
  std::int64_t t0 = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticCity {
  DemandTensor demand;
  std::vector<int> group;  // row-major cell rank -> group id
};

SyntheticCity generate_city(const SyntheticCitySpec& spec);

// "i j group" rows under a small header, for test assertions.
void save_group_map(const SyntheticCity& city, const std::string& path);

}  // namespace bikecast

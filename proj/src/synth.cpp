#include "bikecast/synth.hpp"

#include <cmath>
#include <fstream>

#include "bikecast/common.hpp"

namespace bikecast {

void SyntheticCitySpec::validate() const {
  if (width < 1 || height < 1)
    throw ConfigError("city grid must be at least 1x1");
  if (groups < 1) throw ConfigError("need at least one phase group");
  if (bins < 1) throw ConfigError("horizon must be at least one bin");
  if (amplitude < 0.0) throw ConfigError("amplitude must be >= 0");
  if (!amplitudes.empty() && int(amplitudes.size()) != groups)
    throw ConfigError("amplitudes list must have one entry per group");
  for (double a : amplitudes)
    if (a < 0.0) throw ConfigError("amplitudes must be >= 0");
  if (group_noise < 0.0 || cell_noise < 0.0)
    throw ConfigError("noise levels must be >= 0");
  if (ar_coeff < 0.0 || ar_coeff >= 1.0)
    throw ConfigError("ar_coeff must lie in [0, 1)");
}

SyntheticCity generate_city(const SyntheticCitySpec& spec) {
  spec.validate();
  const int g_count = spec.groups;
  const double two_pi = 6.283185307179586476925287;

  SyntheticCity city;
  city.demand =
      DemandTensor::zeros(spec.width, spec.height, spec.bins, spec.t0, 3600);
  city.group.resize(city.demand.cells());
  for (int i = 1; i <= spec.width; ++i)
    for (int j = 1; j <= spec.height; ++j)
      city.group[city.demand.cell_index(i, j)] = (j - 1) % g_count;

  // Stationary-variance AR(1) per group; one derived stream per group keeps
  // the draw order independent of grid shape.
  std::vector<std::vector<double>> s(static_cast<std::size_t>(g_count));
  const double a = spec.ar_coeff;
  const double blend = std::sqrt(1.0 - a * a);
  for (int g = 0; g < g_count; ++g) {
    Rng rg(derive_seed(spec.seed, 100 + std::uint64_t(g)));
    auto& series = s[std::size_t(g)];
    series.resize(std::size_t(spec.bins));
    double prev = rg.normal();
    series[0] = prev;
    for (std::int64_t k = 1; k < spec.bins; ++k) {
      prev = a * prev + blend * rg.normal();
      series[std::size_t(k)] = prev;
    }
  }

  auto amp = [&](int g) {
    return spec.amplitudes.empty() ? spec.amplitude
                                   : spec.amplitudes[std::size_t(g)];
  };
  auto phase = [&](int g) { return 24.0 * double(g) / double(g_count); };

  Rng cell_rng(derive_seed(spec.seed, 200));
  for (std::int64_t k = 0; k < spec.bins; ++k) {
    for (int i = 1; i <= spec.width; ++i) {
      for (int j = 1; j <= spec.height; ++j) {
        const int g = city.group[city.demand.cell_index(i, j)];
        const double eps = cell_rng.normal();
        const double a_g = amp(g);
        const double base =
            a_g * (1.0 + std::sin(two_pi * (double(k) - phase(g)) / 24.0));
        const double v =
            base + a_g * (spec.group_noise * s[std::size_t(g)][std::size_t(k)] +
                          spec.cell_noise * eps);
        city.demand.at(k, i, j) =
            std::uint32_t(std::lround(std::max(0.0, v)));
      }
    }
  }
  return city;
}

void save_group_map(const SyntheticCity& city, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "bikecast-groups v1\n";
  out << "width " << city.demand.width << "\n";
  out << "height " << city.demand.height << "\n";
  for (int i = 1; i <= city.demand.width; ++i)
    for (int j = 1; j <= city.demand.height; ++j)
      out << i << " " << j << " " << city.group[city.demand.cell_index(i, j)]
          << "\n";
  if (!out) throw DataError("write failed for " + path);
}

}  // namespace bikecast

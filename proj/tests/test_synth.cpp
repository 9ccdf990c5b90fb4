#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"

#include "bikecast/common.hpp"
#include "bikecast/similarity.hpp"
#include "bikecast/synth.hpp"

using namespace bikecast;

TEST_CASE("phase groups alternate by column") {
  SyntheticCitySpec spec;
  spec.width = 4;
  spec.height = 4;
  spec.groups = 2;
  spec.bins = 48;
  const SyntheticCity city = generate_city(spec);

  REQUIRE(city.group.size() == 16);
  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j <= 4; ++j)
      CHECK(city.group[city.demand.cell_index(i, j)] == (j - 1) % 2);
}

TEST_CASE("noise-free groups are coherent and antiphase") {
  SyntheticCitySpec spec;
  spec.width = 4;
  spec.height = 2;
  spec.groups = 2;
  spec.amplitude = 50.0;
  spec.group_noise = 0.0;
  spec.cell_noise = 0.0;
  spec.bins = 24 * 7;
  const SyntheticCity city = generate_city(spec);

  // group mates carry identical series
  const auto a1 = city.demand.cell_series(1, 1);
  const auto a2 = city.demand.cell_series(3, 1);
  CHECK(a1 == a2);

  // the two phase groups sit half a day apart, so their profiles anticorrelate
  const auto b1 = city.demand.cell_series(1, 2);
  auto r = pearson(a1, b1);
  REQUIRE(r.has_value());
  CHECK(*r < -0.95);

  // peak-to-trough swing covers the advertised amplitude: the sinusoid hits
  // its extremes exactly at integral hours 6 and 18
  double lo = a1[0], hi = a1[0];
  for (double v : a1) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo == 0.0);
  CHECK(hi == 100.0);
}

TEST_CASE("zero amplitude yields a dead city") {
  SyntheticCitySpec spec;
  spec.width = 3;
  spec.height = 3;
  spec.groups = 1;
  spec.amplitude = 0.0;
  spec.bins = 24;
  const SyntheticCity city = generate_city(spec);
  for (std::uint32_t v : city.demand.values) CHECK(v == 0u);
  for (std::uint8_t m : city.demand.active_mask()) CHECK(m == 0);
}

TEST_CASE("per-group amplitudes override the shared level") {
  SyntheticCitySpec spec;
  spec.width = 2;
  spec.height = 2;
  spec.groups = 2;
  spec.amplitude = 99.0;        // ignored when the list is present
  spec.amplitudes = {0.0, 30.0};
  spec.group_noise = 0.0;
  spec.cell_noise = 0.0;
  spec.bins = 48;
  const SyntheticCity city = generate_city(spec);
  for (double v : city.demand.cell_series(1, 1)) CHECK(v == 0.0);
  double peak = 0.0;
  for (double v : city.demand.cell_series(1, 2)) peak = std::max(peak, v);
  CHECK(peak == 60.0);
}

TEST_CASE("generation is deterministic in the seed") {
  SyntheticCitySpec spec;
  spec.width = 3;
  spec.height = 3;
  spec.groups = 2;
  spec.bins = 100;
  spec.seed = 42;
  const SyntheticCity a = generate_city(spec);
  const SyntheticCity b = generate_city(spec);
  CHECK(a.demand.values == b.demand.values);

  spec.seed = 43;
  const SyntheticCity c = generate_city(spec);
  CHECK(a.demand.values != c.demand.values);
}

TEST_CASE("spec validation") {
  SyntheticCitySpec spec;
  spec.width = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.width = 2;
  spec.groups = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.groups = 2;
  spec.ar_coeff = 1.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.ar_coeff = 0.9;
  spec.cell_noise = -0.1;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.cell_noise = 0.1;
  spec.amplitudes = {1.0};  // wrong length for two groups
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.amplitudes = {1.0, 2.0};
  CHECK_NOTHROW(spec.validate());
}

TEST_CASE("group map serialization") {
  SyntheticCitySpec spec;
  spec.width = 2;
  spec.height = 2;
  spec.groups = 2;
  spec.bins = 24;
  const SyntheticCity city = generate_city(spec);

  const std::string path = "groups_test.txt";
  save_group_map(city, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "bikecast-groups v1");
  std::getline(in, line);
  CHECK(line == "width 2");
  std::getline(in, line);
  CHECK(line == "height 2");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 4);
  std::remove(path.c_str());
}

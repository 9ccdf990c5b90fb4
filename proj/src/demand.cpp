#include "bikecast/demand.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace bikecast {

std::vector<std::uint8_t> DemandTensor::active_mask() const {
  std::vector<std::uint8_t> mask(cells(), 0);
  for (std::int64_t k = 0; k < bins; ++k) {
    const std::uint32_t* frame = values.data() + std::size_t(k) * cells();
    for (std::size_t c = 0; c < cells(); ++c)
      if (frame[c]) mask[c] = 1;
  }
  return mask;
}

std::vector<double> DemandTensor::cell_series(int i, int j) const {
  std::vector<double> out(static_cast<std::size_t>(bins));
  const std::size_t c = cell_index(i, j);
  for (std::int64_t k = 0; k < bins; ++k)
    out[std::size_t(k)] = double(values[std::size_t(k) * cells() + c]);
  return out;
}

std::uint32_t DemandTensor::max_value() const {
  std::uint32_t m = 0;
  for (std::uint32_t v : values)
    if (v > m) m = v;
  return m;
}

DemandTensor DemandTensor::zeros(int width, int height, std::int64_t bins,
                                 std::int64_t t0, std::int64_t time_bin_s) {
  DemandTensor d;
  d.width = width;
  d.height = height;
  d.bins = bins;
  d.t0 = t0;
  d.time_bin_s = time_bin_s;
  d.values.assign(std::size_t(bins) * d.cells(), 0);
  return d;
}

std::pair<DemandTensor, DemandTensor> split_train_val(const DemandTensor& d,
                                                      double ratio,
                                                      std::int64_t min_train_bins) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw ConfigError("split ratio must lie strictly between 0 and 1, got " +
                      g17(ratio));
  const std::int64_t cut = std::int64_t(std::floor(ratio * double(d.bins)));
  if (cut < 1 || cut >= d.bins)
    throw DataError("split at bin " + std::to_string(cut) +
                    " leaves an empty side (tensor has " +
                    std::to_string(d.bins) + " bins)");
  if (min_train_bins > 0 && cut < min_train_bins)
    throw DataError(
        "training prefix of " + std::to_string(cut) +
        " bins cannot cover the maximum lookback of " +
        std::to_string(min_train_bins) +
        " bins; provide a longer horizon or a shorter lookback");

  DemandTensor train = DemandTensor::zeros(d.width, d.height, cut, d.t0, d.time_bin_s);
  std::copy(d.values.begin(), d.values.begin() + std::ptrdiff_t(cut * std::int64_t(d.cells())),
            train.values.begin());
  DemandTensor val = DemandTensor::zeros(d.width, d.height, d.bins - cut,
                                         d.t0 + cut * d.time_bin_s, d.time_bin_s);
  std::copy(d.values.begin() + std::ptrdiff_t(cut * std::int64_t(d.cells())), d.values.end(),
            val.values.begin());
  return {std::move(train), std::move(val)};
}

ScaledTensor scale(const DemandTensor& d, double train_max) {
  if (!(train_max > 0.0))
    throw DataError("scaling constant must be positive; the training split has no demand");
  ScaledTensor s;
  s.width = d.width;
  s.height = d.height;
  s.t0 = d.t0;
  s.time_bin_s = d.time_bin_s;
  s.bins = d.bins;
  s.scale_max = train_max;
  s.values.resize(d.values.size());
  for (std::size_t n = 0; n < d.values.size(); ++n)
    s.values[n] = 2.0 * double(d.values[n]) / train_max - 1.0;
  return s;
}

std::vector<double> unscale(const ScaledTensor& s) {
  std::vector<double> out(s.values.size());
  for (std::size_t n = 0; n < s.values.size(); ++n) {
    double v = (s.values[n] + 1.0) * 0.5 * s.scale_max;
    out[n] = v < 0.0 ? 0.0 : v;
  }
  return out;
}

namespace {

void put_u32le(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {(unsigned char)(v), (unsigned char)(v >> 8),
                        (unsigned char)(v >> 16), (unsigned char)(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32le(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 |
         std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

}  // namespace

void save_tensor(const DemandTensor& d, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open for writing: " + path);
  os << "bikecast-tensor v1\n";
  os << "width " << d.width << "\n";
  os << "height " << d.height << "\n";
  os << "t0 " << d.t0 << "\n";
  os << "time_bin_s " << d.time_bin_s << "\n";
  os << "bins " << d.bins << "\n";
  os << "scale_max " << g17(d.scale_max) << "\n";
  os << "data\n";
  for (std::uint32_t v : d.values) put_u32le(os, v);
  if (!os) throw DataError("write failed: " + path);
}

DemandTensor load_tensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open: " + path);
  std::string line;
  if (!std::getline(is, line) || line != "bikecast-tensor v1")
    throw DataError(path + ": not a demand tensor file");
  DemandTensor d;
  while (std::getline(is, line)) {
    if (line == "data") break;
    auto sp = line.find(' ');
    if (sp == std::string::npos) throw DataError(path + ": bad header line: " + line);
    std::string key = line.substr(0, sp);
    std::string val = line.substr(sp + 1);
    if (key == "width")
      d.width = std::stoi(val);
    else if (key == "height")
      d.height = std::stoi(val);
    else if (key == "t0")
      d.t0 = std::stoll(val);
    else if (key == "time_bin_s")
      d.time_bin_s = std::stoll(val);
    else if (key == "bins")
      d.bins = std::stoll(val);
    else if (key == "scale_max")
      d.scale_max = std::strtod(val.c_str(), nullptr);
    else
      throw DataError(path + ": unknown header key: " + key);
  }
  if (d.width < 1 || d.height < 1 || d.bins < 0)
    throw DataError(path + ": incomplete header");
  d.values.resize(std::size_t(d.bins) * d.cells());
  for (auto& v : d.values) v = get_u32le(is);
  if (!is) throw DataError(path + ": truncated payload");
  return d;
}

}  // namespace bikecast

#include "bikecast/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "bikecast/common.hpp"

namespace bikecast {

namespace {

void put_f64le(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int k = 0; k < 8; ++k) b[k] = (unsigned char)(bits >> (8 * k));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64le(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) bits |= std::uint64_t(b[k]) << (8 * k);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

const Checkpoint::Entry& Checkpoint::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  throw DataError("checkpoint has no parameter named " + name);
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open for writing: " + path);
  os << "bikecast-checkpoint v1\n";
  os << "model_kind " << ck.model_kind << "\n";
  os << "metric " << ck.metric << "\n";
  os << "seed " << ck.seed << "\n";
  os << "step " << ck.step << "\n";
  os << "epoch " << ck.epoch << "\n";
  os << "scale_max " << g17(ck.scale_max) << "\n";
  os << "params " << ck.entries.size() << "\n";
  for (const auto& e : ck.entries) {
    os << "param " << e.name;
    for (auto d : e.shape) os << " " << d;
    os << "\n";
  }
  os << "data\n";
  for (const auto& e : ck.entries)
    for (double v : e.data) put_f64le(os, v);
  if (!os) throw DataError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open: " + path);
  std::string line;
  if (!std::getline(is, line) || line != "bikecast-checkpoint v1")
    throw DataError(path + ": not a checkpoint file");
  Checkpoint ck;
  std::size_t declared = 0;
  while (std::getline(is, line)) {
    if (line == "data") break;
    std::istringstream row(line);
    std::string key;
    row >> key;
    if (key == "model_kind")
      row >> ck.model_kind;
    else if (key == "metric")
      row >> ck.metric;
    else if (key == "seed")
      row >> ck.seed;
    else if (key == "step")
      row >> ck.step;
    else if (key == "epoch")
      row >> ck.epoch;
    else if (key == "scale_max") {
      std::string v;
      row >> v;
      ck.scale_max = std::strtod(v.c_str(), nullptr);
    } else if (key == "params") {
      row >> declared;
    } else if (key == "param") {
      Checkpoint::Entry e;
      row >> e.name;
      std::int64_t d;
      while (row >> d) e.shape.push_back(d);
      if (e.name.empty() || e.shape.empty())
        throw DataError(path + ": bad param line: " + line);
      ck.entries.push_back(std::move(e));
    } else {
      throw DataError(path + ": unknown header key: " + key);
    }
    if (row.fail() && key != "param")
      throw DataError(path + ": bad header line: " + line);
  }
  if (ck.entries.size() != declared)
    throw DataError(path + ": declared " + std::to_string(declared) +
                    " params, listed " + std::to_string(ck.entries.size()));
  for (auto& e : ck.entries) {
    const std::int64_t n = diff::numel_of(e.shape);
    if (n < 0) throw DataError(path + ": negative extent in " + e.name);
    e.data.resize(std::size_t(n));
    for (auto& v : e.data) v = get_f64le(is);
  }
  if (!is) throw DataError(path + ": truncated payload");
  return ck;
}

}  // namespace bikecast

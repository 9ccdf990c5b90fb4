#include "bikecast/neighbors.hpp"

#include <fstream>
#include <sstream>

namespace bikecast {

void NeighborIndex::validate() const {
  if (width < 1 || height < 1 || kernel_size < 1)
    throw DataError("neighbor index has degenerate shape");
  if (entries.size() != cells() * std::size_t(kernel_size))
    throw DataError("neighbor index entry count does not match its shape");
  for (std::size_t c = 0; c < cells(); ++c) {
    const Cell* run = entries.data() + c * std::size_t(kernel_size);
    const Cell self{int(c / std::size_t(height)) + 1, int(c % std::size_t(height)) + 1};
    if (run[0] != self)
      throw DataError("neighbor list of (" + std::to_string(self.i) + "," +
                      std::to_string(self.j) + ") does not start with the cell itself");
    for (int s = 0; s < kernel_size; ++s) {
      const Cell& t = run[std::size_t(s)];
      if (t.sentinel()) {
        if (t.i != 0 || t.j != 0)
          throw DataError("neighbor index holds a partial sentinel coordinate");
        continue;
      }
      if (t.i < 1 || t.i > width || t.j < 1 || t.j > height)
        throw DataError("neighbor index references off-grid cell (" +
                        std::to_string(t.i) + "," + std::to_string(t.j) + ")");
    }
  }
}

NeighborIndex build_spatial_neighbors(int width, int height) {
  if (width < 1 || height < 1)
    throw ConfigError("grid dimensions must be positive");
  NeighborIndex n;
  n.metric = "spatial";
  n.width = width;
  n.height = height;
  n.kernel_size = 9;
  n.entries.assign(n.cells() * 9, Cell{});
  for (int i = 1; i <= width; ++i) {
    for (int j = 1; j <= height; ++j) {
      Cell* run = n.taps(i, j);
      run[0] = Cell{i, j};
      int s = 1;
      for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          int ni = i + di, nj = j + dj;
          run[s++] = (ni >= 1 && ni <= width && nj >= 1 && nj <= height)
                         ? Cell{ni, nj}
                         : Cell{};
        }
      }
    }
  }
  return n;
}

void save_neighbors(const NeighborIndex& n, const std::string& path) {
  n.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open for writing: " + path);
  os << "bikecast-neighbors v1\n";
  os << "metric " << n.metric << "\n";
  os << "width " << n.width << "\n";
  os << "height " << n.height << "\n";
  os << "kernel_size " << n.kernel_size << "\n";
  os << "band " << n.band << "\n";
  os << "entries\n";
  for (std::size_t c = 0; c < n.cells(); ++c) {
    const Cell* run = n.entries.data() + c * std::size_t(n.kernel_size);
    for (int s = 0; s < n.kernel_size; ++s) {
      if (s) os << ' ';
      os << run[std::size_t(s)].i << ' ' << run[std::size_t(s)].j;
    }
    os << "\n";
  }
  if (!os) throw DataError("write failed: " + path);
}

NeighborIndex load_neighbors(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open: " + path);
  std::string line;
  if (!std::getline(is, line) || line != "bikecast-neighbors v1")
    throw DataError(path + ": not a neighbor index file");
  NeighborIndex n;
  while (std::getline(is, line)) {
    if (line == "entries") break;
    auto sp = line.find(' ');
    if (sp == std::string::npos) throw DataError(path + ": bad header line: " + line);
    std::string key = line.substr(0, sp);
    std::string val = line.substr(sp + 1);
    if (key == "metric")
      n.metric = val;
    else if (key == "width")
      n.width = std::stoi(val);
    else if (key == "height")
      n.height = std::stoi(val);
    else if (key == "kernel_size")
      n.kernel_size = std::stoi(val);
    else if (key == "band")
      n.band = std::stol(val);
    else
      throw DataError(path + ": unknown header key: " + key);
  }
  if (n.width < 1 || n.height < 1 || n.kernel_size < 1)
    throw DataError(path + ": incomplete header");
  n.entries.resize(n.cells() * std::size_t(n.kernel_size));
  for (std::size_t c = 0; c < n.cells(); ++c) {
    if (!std::getline(is, line)) throw DataError(path + ": truncated entries");
    std::istringstream row(line);
    for (int s = 0; s < n.kernel_size; ++s) {
      Cell& t = n.entries[c * std::size_t(n.kernel_size) + std::size_t(s)];
      if (!(row >> t.i >> t.j)) throw DataError(path + ": bad entry row");
    }
  }
  n.validate();
  return n;
}

}  // namespace bikecast

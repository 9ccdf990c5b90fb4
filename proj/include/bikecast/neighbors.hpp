#pragma once

#include <string>
#include <vector>

#include "bikecast/common.hpp"

namespace bikecast {

// Per-cell convolution tap lists. entries holds width*height runs of
// kernel_size cells, row-major by central cell; each run starts with the
// central cell itself, followed by its neighbors (sentinel (0,0) pads slots
// with no real cell; a sentinel tap reads as zero).
struct NeighborIndex {
  std::string metric;  // "pearson", "dtw", "spatial", or "none"
  int width = 0;
  int height = 0;
  int kernel_size = 9;
  long band = -1;  // warp window used at build time, -1 when unbounded

  std::vector<Cell> entries;

  std::size_t cells() const { return std::size_t(width) * std::size_t(height); }
  const Cell* taps(int i, int j) const {
    return entries.data() +
           (std::size_t(i - 1) * std::size_t(height) + std::size_t(j - 1)) *
               std::size_t(kernel_size);
  }
  Cell* taps(int i, int j) {
    return entries.data() +
           (std::size_t(i - 1) * std::size_t(height) + std::size_t(j - 1)) *
               std::size_t(kernel_size);
  }

  void validate() const;  // shape and range checks, throws DataError
};

// Moore neighborhood in fixed offset order: self, then (di,dj) for di in
// {-1,0,1}, dj in {-1,0,1}, skipping (0,0), row-major. Off-grid slots get the
// sentinel, so a corner cell keeps kernel_size taps.
NeighborIndex build_spatial_neighbors(int width, int height);

void save_neighbors(const NeighborIndex& n, const std::string& path);
NeighborIndex load_neighbors(const std::string& path);

}  // namespace bikecast

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bikecast/demand.hpp"
#include "bikecast/neighbors.hpp"

namespace bikecast {

// Pearson correlation of two equal-length sequences. nullopt when either
// sequence has zero variance: the coefficient is undefined there, and callers
// must treat it as "no ranking", never as a number.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

// Dynamic time warping distance, |.| local cost, steps {(1,0),(0,1),(1,1)}.
// band restricts |i-j| (Sakoe-Chiba); -1 means unbounded. Throws on empty
// input or a band too narrow to reach the final corner.
double dtw(std::span<const double> x, std::span<const double> y, long band = -1);

struct SemanticOptions {
  std::string metric = "pearson";  // "pearson" or "dtw"
  int k = 8;                       // neighbors per cell, excluding self
  long band = -1;
  int threads = 1;
};

// Ranks, for every active cell, all other active cells by similarity of
// their full training series and keeps the top k. Ties resolve by row-major
// cell order. Inactive cells get self-only lists padded with sentinels.
NeighborIndex build_semantic_neighbors(const DemandTensor& train,
                                       const SemanticOptions& opts);

struct OverlapRow {
  Cell cell;
  int overlap = 0;       // |semantic taps ∩ spatial taps|, self excluded
  double sem_pearson = 0.0;  // mean over defined pairs; meaningless if n == 0
  int sem_pearson_n = 0;
  double sem_dtw = 0.0;
  int sem_n = 0;
  double spa_pearson = 0.0;
  int spa_pearson_n = 0;
  double spa_dtw = 0.0;
  int spa_n = 0;  // active spatial neighbors
};

struct SimilarityReport {
  std::string semantic_metric;
  long band = -1;
  std::vector<OverlapRow> rows;          // active cells, row-major
  std::vector<std::int64_t> overlap_hist;  // size kernel_size
  double fraction_overlap_le1 = 0.0;
  double mean_overlap = 0.0;

  void write(std::ostream& os) const;
};

// Compares semantic and spatial tap sets cell by cell over the active cells
// of `train`, reporting tap overlap and mean similarity of each set under
// both metrics.
SimilarityReport neighbor_overlap(const DemandTensor& train,
                                  const NeighborIndex& semantic,
                                  const NeighborIndex& spatial, int threads = 1);

void save_similarity_report(const SimilarityReport& r, const std::string& path);

}  // namespace bikecast

#include "bikecast/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>

#include "bikecast/kernels.hpp"

namespace bikecast {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw DataError("pearson: length mismatch, " + std::to_string(x.size()) +
                    " vs " + std::to_string(y.size()));
  if (x.size() < 2)
    throw DataError("pearson: need at least 2 observations");
  const auto& ops = kernels::active();
  const double n = double(x.size());
  const double mx = ops.sum(x.data(), x.size()) / n;
  const double my = ops.sum(y.data(), y.size()) / n;
  double m[3];
  ops.centered_moments(x.data(), y.data(), mx, my, x.size(), m);
  if (m[1] == 0.0 || m[2] == 0.0) return std::nullopt;
  return m[0] / std::sqrt(m[1] * m[2]);
}

double dtw(std::span<const double> x, std::span<const double> y, long band) {
  if (x.empty() || y.empty()) throw DataError("dtw: empty sequence");
  const long diff = x.size() > y.size() ? long(x.size() - y.size())
                                        : long(y.size() - x.size());
  if (band >= 0 && band < diff)
    throw DataError("dtw: band " + std::to_string(band) +
                    " cannot align lengths differing by " + std::to_string(diff));
  std::vector<double> scratch(kernels::dtw_scratch_size(y.size()));
  return kernels::active().dtw_pair(x.data(), x.size(), y.data(), y.size(), band,
                                    kInf, scratch.data());
}

namespace {

struct Scored {
  double score;
  std::size_t rank;  // row-major flat cell index; also the tie-breaker
};

// Keeps the k best entries in sorted order. `better(a, b)` must be a strict
// ordering; candidates arrive in ascending rank, so equal scores resolve to
// the earlier cell automatically.
class TopK {
 public:
  TopK(std::size_t k, bool smaller_is_better)
      : k_(k), smaller_(smaller_is_better) {
    kept_.reserve(k + 1);
  }

  bool better(const Scored& a, const Scored& b) const {
    if (a.score != b.score) return smaller_ ? a.score < b.score : a.score > b.score;
    return a.rank < b.rank;
  }

  // score that a new candidate must beat once the list is full
  double bound() const {
    return kept_.size() == k_ ? kept_.back().score
                              : (smaller_ ? kInf : -kInf);
  }

  void offer(Scored s) {
    if (kept_.size() == k_ && !better(s, kept_.back())) return;
    auto pos = std::lower_bound(
        kept_.begin(), kept_.end(), s,
        [this](const Scored& a, const Scored& b) { return better(a, b); });
    kept_.insert(pos, s);
    if (kept_.size() > k_) kept_.pop_back();
  }

  const std::vector<Scored>& items() const { return kept_; }

 private:
  std::size_t k_;
  bool smaller_;
  std::vector<Scored> kept_;
};

std::vector<std::size_t> active_ranks(const std::vector<std::uint8_t>& mask) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < mask.size(); ++c)
    if (mask[c]) out.push_back(c);
  return out;
}

Cell cell_of_rank(std::size_t rank, int height) {
  return Cell{int(rank / std::size_t(height)) + 1, int(rank % std::size_t(height)) + 1};
}

}  // namespace

NeighborIndex build_semantic_neighbors(const DemandTensor& train,
                                       const SemanticOptions& opts) {
  if (opts.metric != "pearson" && opts.metric != "dtw")
    throw ConfigError("unknown similarity metric: " + opts.metric);
  if (opts.k < 1) throw ConfigError("k must be at least 1");
  if (train.bins < 2)
    throw DataError("semantic neighbors need at least 2 time bins, got " +
                    std::to_string(train.bins));

  const auto mask = train.active_mask();
  const auto actives = active_ranks(mask);
  if (actives.size() < std::size_t(opts.k) + 1)
    throw DataError("need at least " + std::to_string(opts.k + 1) +
                    " active cells, found " + std::to_string(actives.size()));

  const std::size_t n = std::size_t(train.bins);
  const bool by_dtw = opts.metric == "dtw";

  // Series are materialized once: raw values for warping, centered values
  // plus their self moments for correlation (so each pair costs one dot).
  std::vector<std::vector<double>> series(actives.size());
  std::vector<double> sxx(actives.size(), 0.0);
  const auto& ops = kernels::active();
  for (std::size_t a = 0; a < actives.size(); ++a) {
    Cell c = cell_of_rank(actives[a], train.height);
    series[a] = train.cell_series(c.i, c.j);
    if (!by_dtw) {
      double mean = ops.sum(series[a].data(), n) / double(n);
      for (double& v : series[a]) v -= mean;
      sxx[a] = ops.dot(series[a].data(), series[a].data(), n);
    }
  }

  NeighborIndex out;
  out.metric = opts.metric;
  out.width = train.width;
  out.height = train.height;
  out.kernel_size = opts.k + 1;
  out.band = opts.band;
  out.entries.assign(out.cells() * std::size_t(out.kernel_size), Cell{});
  for (std::size_t c = 0; c < out.cells(); ++c)
    out.entries[c * std::size_t(out.kernel_size)] = cell_of_rank(c, train.height);

  std::mutex error_mu;
  std::string first_error;
  std::size_t first_error_rank = std::size_t(-1);
  auto record_error = [&](std::size_t rank, std::string msg) {
    std::lock_guard<std::mutex> lock(error_mu);
    // keep the row-major-first failing cell so reruns report the same cell
    if (first_error.empty() || rank < first_error_rank) {
      first_error = std::move(msg);
      first_error_rank = rank;
    }
  };

  parallel_for(actives.size(), opts.threads, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> scratch(kernels::dtw_batch4_scratch_size(n));
    for (std::size_t a = lo; a < hi; ++a) {
      const std::size_t central_rank = actives[a];
      const double* x = series[a].data();
      TopK top(std::size_t(opts.k), by_dtw);

      if (by_dtw) {
        // candidates in rank order, four warps at a time, pruned against the
        // current kth distance (strictly-greater prune keeps ties exact)
        std::size_t cand[4];
        const double* ys[4];
        std::size_t filled = 0;
        auto flush = [&]() {
          if (filled == 4) {
            double d4[4];
            ops.dtw_batch4(x, n, ys, n, opts.band, top.bound(), d4, scratch.data());
            for (std::size_t l = 0; l < 4; ++l)
              if (d4[l] <= top.bound()) top.offer({d4[l], cand[l]});
          } else {
            for (std::size_t l = 0; l < filled; ++l) {
              double d = ops.dtw_pair(x, n, ys[l], n, opts.band, top.bound(),
                                      scratch.data());
              if (d <= top.bound()) top.offer({d, cand[l]});
            }
          }
          filled = 0;
        };
        for (std::size_t b = 0; b < actives.size(); ++b) {
          if (b == a) continue;
          cand[filled] = actives[b];
          ys[filled] = series[b].data();
          if (++filled == 4) flush();
        }
        flush();
      } else {
        if (sxx[a] == 0.0) {
          Cell c = cell_of_rank(central_rank, train.height);
          record_error(central_rank,
                       "cell (" + std::to_string(c.i) + "," + std::to_string(c.j) +
                           ") has a constant training series; pearson ranks no "
                           "candidates for it");
          continue;
        }
        std::size_t valid = 0;
        for (std::size_t b = 0; b < actives.size(); ++b) {
          if (b == a || sxx[b] == 0.0) continue;
          ++valid;
          double r = ops.dot(x, series[b].data(), n) / std::sqrt(sxx[a] * sxx[b]);
          top.offer({r, actives[b]});
        }
        if (valid < std::size_t(opts.k)) {
          Cell c = cell_of_rank(central_rank, train.height);
          record_error(central_rank,
                       "cell (" + std::to_string(c.i) + "," + std::to_string(c.j) +
                           ") has only " + std::to_string(valid) +
                           " candidates with defined correlation; need " +
                           std::to_string(opts.k));
          continue;
        }
      }

      Cell* run = out.entries.data() +
                  central_rank * std::size_t(out.kernel_size);
      int s = 1;
      for (const Scored& kept : top.items())
        run[s++] = cell_of_rank(kept.rank, train.height);
    }
  });

  if (!first_error.empty()) throw DataError(first_error);
  out.validate();
  return out;
}

namespace {

double mean_or_zero(double sum, int n) { return n ? sum / double(n) : 0.0; }

}  // namespace

SimilarityReport neighbor_overlap(const DemandTensor& train,
                                  const NeighborIndex& semantic,
                                  const NeighborIndex& spatial, int threads) {
  if (semantic.width != train.width || semantic.height != train.height ||
      spatial.width != train.width || spatial.height != train.height)
    throw DataError("neighbor index shape does not match the tensor");
  semantic.validate();
  spatial.validate();

  const auto mask = train.active_mask();
  const auto actives = active_ranks(mask);
  const std::size_t n = std::size_t(train.bins);
  const auto& ops = kernels::active();

  // centered + raw series for every active cell
  std::vector<std::vector<double>> raw(actives.size()), centered(actives.size());
  std::vector<double> sxx(actives.size(), 0.0);
  std::vector<std::ptrdiff_t> slot(train.cells(), -1);
  for (std::size_t a = 0; a < actives.size(); ++a) {
    slot[actives[a]] = std::ptrdiff_t(a);
    Cell c = cell_of_rank(actives[a], train.height);
    raw[a] = train.cell_series(c.i, c.j);
    centered[a] = raw[a];
    double mean = ops.sum(centered[a].data(), n) / double(n);
    for (double& v : centered[a]) v -= mean;
    sxx[a] = ops.dot(centered[a].data(), centered[a].data(), n);
  }

  SimilarityReport rep;
  rep.semantic_metric = semantic.metric;
  rep.band = semantic.band;
  rep.overlap_hist.assign(std::size_t(semantic.kernel_size), 0);
  rep.rows.resize(actives.size());

  parallel_for(actives.size(), threads, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> scratch(kernels::dtw_scratch_size(n));
    for (std::size_t a = lo; a < hi; ++a) {
      OverlapRow& row = rep.rows[a];
      row.cell = cell_of_rank(actives[a], train.height);

      auto members = [&](const NeighborIndex& idx, std::vector<std::size_t>& out_ranks) {
        const Cell* taps = idx.taps(row.cell.i, row.cell.j);
        for (int s = 1; s < idx.kernel_size; ++s) {
          const Cell& t = taps[std::size_t(s)];
          if (t.sentinel()) continue;
          std::size_t r = std::size_t(t.i - 1) * std::size_t(train.height) +
                          std::size_t(t.j - 1);
          out_ranks.push_back(r);
        }
      };
      std::vector<std::size_t> sem, spa;
      members(semantic, sem);
      members(spatial, spa);

      int overlap = 0;
      for (std::size_t r : sem)
        if (std::find(spa.begin(), spa.end(), r) != spa.end()) ++overlap;
      row.overlap = overlap;

      auto accumulate = [&](const std::vector<std::size_t>& ranks, double& p_sum,
                            int& p_n, double& d_sum, int& d_n) {
        for (std::size_t r : ranks) {
          std::ptrdiff_t b = slot[r];
          if (b < 0) continue;  // inactive: constant zero, no similarity signal
          if (sxx[a] != 0.0 && sxx[std::size_t(b)] != 0.0) {
            double rho = ops.dot(centered[a].data(), centered[std::size_t(b)].data(), n) /
                         std::sqrt(sxx[a] * sxx[std::size_t(b)]);
            p_sum += rho;
            ++p_n;
          }
          double d = ops.dtw_pair(raw[a].data(), n, raw[std::size_t(b)].data(), n,
                                  semantic.band, kInf, scratch.data());
          d_sum += d;
          ++d_n;
        }
      };

      double sp = 0, sd = 0, pp = 0, pd = 0;
      accumulate(sem, sp, row.sem_pearson_n, sd, row.sem_n);
      accumulate(spa, pp, row.spa_pearson_n, pd, row.spa_n);
      row.sem_pearson = mean_or_zero(sp, row.sem_pearson_n);
      row.sem_dtw = mean_or_zero(sd, row.sem_n);
      row.spa_pearson = mean_or_zero(pp, row.spa_pearson_n);
      row.spa_dtw = mean_or_zero(pd, row.spa_n);
    }
  });

  std::int64_t le1 = 0;
  double overlap_sum = 0.0;
  for (const OverlapRow& row : rep.rows) {
    rep.overlap_hist[std::size_t(row.overlap)] += 1;
    if (row.overlap <= 1) ++le1;
    overlap_sum += row.overlap;
  }
  if (!rep.rows.empty()) {
    rep.fraction_overlap_le1 = double(le1) / double(rep.rows.size());
    rep.mean_overlap = overlap_sum / double(rep.rows.size());
  }
  return rep;
}

void SimilarityReport::write(std::ostream& os) const {
  os << "bikecast-similarity v1\n";
  os << "semantic_metric " << semantic_metric << "\n";
  os << "band " << band << "\n";
  os << "cells " << rows.size() << "\n";
  os << "mean_overlap " << g17(mean_overlap) << "\n";
  os << "fraction_overlap_le1 " << g17(fraction_overlap_le1) << "\n";
  os << "overlap_hist";
  for (std::size_t k = 0; k < overlap_hist.size(); ++k)
    os << " " << k << ":" << overlap_hist[k];
  os << "\n";
  os << "columns i j overlap sem_pearson sem_pearson_n sem_dtw sem_n "
        "spa_pearson spa_pearson_n spa_dtw spa_n\n";
  for (const OverlapRow& r : rows) {
    os << r.cell.i << " " << r.cell.j << " " << r.overlap << " ";
    if (r.sem_pearson_n)
      os << g17(r.sem_pearson);
    else
      os << "na";
    os << " " << r.sem_pearson_n << " ";
    if (r.sem_n)
      os << g17(r.sem_dtw);
    else
      os << "na";
    os << " " << r.sem_n << " ";
    if (r.spa_pearson_n)
      os << g17(r.spa_pearson);
    else
      os << "na";
    os << " " << r.spa_pearson_n << " ";
    if (r.spa_n)
      os << g17(r.spa_dtw);
    else
      os << "na";
    os << " " << r.spa_n << "\n";
  }
}

void save_similarity_report(const SimilarityReport& r, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open for writing: " + path);
  r.write(os);
  if (!os) throw DataError("write failed: " + path);
}

}  // namespace bikecast

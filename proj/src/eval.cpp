#include "bikecast/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "bikecast/common.hpp"

namespace bikecast {

void MetricRow::add(double actual, double predicted) {
  const double ae = std::abs(predicted - actual);
  sum_abs += ae;
  sum_sq += ae * ae;
  ++n;
  if (actual > 0.0) {
    sum_ape += ae / actual;
    ++n_mape;
  }
}

void MetricRow::finalize() {
  if (n > 0) {
    mae = sum_abs / double(n);
    rmse = std::sqrt(sum_sq / double(n));
  }
  if (n_mape > 0) mape = 100.0 * sum_ape / double(n_mape);
}

const MetricRow& EvalReport::row(const std::string& slice) const {
  for (const MetricRow& r : rows)
    if (r.slice == slice) return r;
  throw DataError("report has no slice '" + slice + "'");
}

std::vector<int> usage_quintiles(const DemandTensor& demand) {
  const std::size_t cells = demand.cells();
  if (demand.bins <= 0) throw DataError("tensor has no bins");

  std::vector<double> mean(cells, 0.0);
  for (std::int64_t k = 0; k < demand.bins; ++k) {
    const std::uint32_t* frame = demand.values.data() + std::size_t(k) * cells;
    for (std::size_t c = 0; c < cells; ++c) mean[c] += double(frame[c]);
  }
  for (double& m : mean) m /= double(demand.bins);

  const std::vector<std::uint8_t> active = demand.active_mask();
  std::vector<double> sorted;
  for (std::size_t c = 0; c < cells; ++c)
    if (active[c]) sorted.push_back(mean[c]);

  std::vector<int> out(cells, -1);
  if (sorted.empty()) return out;
  std::sort(sorted.begin(), sorted.end());

  const std::size_t na = sorted.size();
  double thr[4];
  for (int q = 0; q < 4; ++q) {
    // 20/40/60/80th percentile as the value at rank ceil(p*n)-1; integer
    // ceiling, since 0.2*(q+1)*n in doubles drifts off exact multiples
    const std::size_t rank = ((std::size_t(q) + 1) * na + 4) / 5 - 1;
    thr[q] = sorted[std::min(rank, na - 1)];
  }
  for (std::size_t c = 0; c < cells; ++c) {
    if (!active[c]) continue;
    int q = 4;
    for (int b = 0; b < 4; ++b)
      if (mean[c] <= thr[b]) {
        q = b;
        break;
      }
    out[c] = q;
  }
  return out;
}

namespace {

int clock_hour(const DemandTensor& demand, std::int64_t k) {
  const std::int64_t sec = demand.t0 + k * demand.time_bin_s;
  const std::int64_t sod = ((sec % 86400) + 86400) % 86400;
  return int(sod / 3600);
}

}  // namespace

EvalReport evaluate_model(const ForecastModel& model, const ScaledTensor& scaled,
                          const DemandTensor& demand,
                          std::span<const TrainingSample> samples,
                          const std::string& experiment_id, int threads) {
  if (demand.width != scaled.width || demand.height != scaled.height ||
      demand.bins != scaled.bins)
    throw DataError("demand tensor and scaled tensor shapes disagree");
  if (samples.empty()) throw DataError("no evaluation samples");

  const std::size_t cells = demand.cells();
  const std::vector<std::uint8_t> active = demand.active_mask();
  const std::vector<int> quint = usage_quintiles(demand);
  if (std::all_of(active.begin(), active.end(), [](std::uint8_t a) { return !a; }))
    throw DataError("no active cells to evaluate");

  // prediction per sample, unscaled and clamped, in fixed slots
  std::vector<double> preds(samples.size() * cells);
  const double m = scaled.scale_max;
  parallel_for(samples.size(), threads, [&](std::size_t b, std::size_t e) {
    diff::NoGradGuard forward_only;
    for (std::size_t k = b; k < e; ++k) {
      diff::Tensor p = model.forward(scaled, samples[k]);
      const std::vector<double>& pd = p.data();
      double* row = preds.data() + k * cells;
      for (std::size_t c = 0; c < cells; ++c) {
        double x = (pd[c] + 1.0) * 0.5 * m;
        row[c] = x < 0.0 ? 0.0 : x;
      }
    }
  });

  EvalReport rep;
  rep.experiment_id = experiment_id;
  rep.model_kind = to_string(model.kind());
  rep.metric = model.index().metric;
  rep.target_lo = samples.front().t;
  rep.target_hi = samples.back().t + 1;

  rep.rows.resize(8);
  rep.rows[0].slice = "overall";
  for (int q = 0; q < 5; ++q) rep.rows[1 + q].slice = "q" + std::to_string(q + 1);
  rep.rows[6].slice = "morning";
  rep.rows[7].slice = "evening";

  for (std::size_t k = 0; k < samples.size(); ++k) {
    const std::int64_t t = samples[k].t;
    const int hour = clock_hour(demand, t);
    const bool morning = hour >= 7 && hour < 10;
    const bool evening = hour >= 17 && hour < 20;
    const std::uint32_t* frame = demand.values.data() + std::size_t(t) * cells;
    const double* row = preds.data() + k * cells;
    for (std::size_t c = 0; c < cells; ++c) {
      if (!active[c]) continue;
      const double y = double(frame[c]);
      const double yh = row[c];
      rep.rows[0].add(y, yh);
      rep.rows[1 + std::size_t(quint[c])].add(y, yh);
      if (morning) rep.rows[6].add(y, yh);
      if (evening) rep.rows[7].add(y, yh);
    }
  }
  for (MetricRow& r : rep.rows) r.finalize();
  return rep;
}

namespace {

std::string cell_fmt(const std::optional<double>& v) {
  if (!v) return "na";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

}  // namespace

void EvalReport::write(std::ostream& out) const {
  out << "bikecast-eval v1\n";
  out << "experiment " << experiment_id << "\n";
  out << "model " << model_kind << "\n";
  out << "neighbor_metric " << metric << "\n";
  out << "targets " << target_lo << " " << target_hi << "\n";
  out << "\n";
  char buf[192];
  std::snprintf(buf, sizeof buf, "%-9s %10s %10s %12s %12s %12s\n", "slice", "n",
                "n_mape", "mae", "rmse", "mape_pct");
  out << buf;
  for (const MetricRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%-9s %10lld %10lld %12s %12s %12s\n",
                  r.slice.c_str(), (long long)r.n, (long long)r.n_mape,
                  cell_fmt(r.mae).c_str(), cell_fmt(r.rmse).c_str(),
                  cell_fmt(r.mape).c_str());
    out << buf;
  }
  out << "\n";
  for (const MetricRow& r : rows) {
    if (r.mae)
      out << "row," << experiment_id << ",mae," << r.slice << "," << g17(*r.mae)
          << "," << r.n << "\n";
    if (r.rmse)
      out << "row," << experiment_id << ",rmse," << r.slice << ","
          << g17(*r.rmse) << "," << r.n << "\n";
    if (r.mape)
      out << "row," << experiment_id << ",mape," << r.slice << ","
          << g17(*r.mape) << "," << r.n_mape << "\n";
  }
}

void save_eval_report(const EvalReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  report.write(out);
  if (!out) throw DataError("write failed for " + path);
}

}  // namespace bikecast

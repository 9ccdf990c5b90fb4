#include "bikecast/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "bikecast/common.hpp"

namespace bikecast {

namespace {

diff::Tensor target_frame(const ScaledTensor& scaled, std::int64_t t) {
  const double* f = scaled.frame(t);
  return diff::Tensor::constant({std::int64_t(scaled.cells())},
                                std::vector<double>(f, f + scaled.cells()));
}

double max_abs_param(const ForecastModel& model) {
  double m = 0.0;
  for (const auto& [name, t] : model.named_params())
    for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

double dataset_mse(const ForecastModel& model, const ScaledTensor& scaled,
                   std::span<const TrainingSample> samples, int threads) {
  if (samples.empty()) throw DataError("no samples to evaluate");
  const std::size_t n = scaled.cells();
  std::vector<double> losses(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t b, std::size_t e) {
    diff::NoGradGuard forward_only;
    for (std::size_t k = b; k < e; ++k) {
      diff::Tensor pred = model.forward(scaled, samples[k]);
      const double* tf = scaled.frame(samples[k].t);
      const std::vector<double>& pd = pred.data();
      double acc = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        const double d = pd[c] - tf[c];
        acc += d * d;
      }
      losses[k] = acc / double(n);
    }
  });
  double total = 0.0;
  for (double l : losses) total += l;
  return total / double(samples.size());
}

TrainResult train_model(ForecastModel& model, const ScaledTensor& scaled,
                        std::span<const TrainingSample> train,
                        std::span<const TrainingSample> val,
                        const TrainOptions& opt, std::ostream* log) {
  if (opt.epochs < 1)
    throw ConfigError("epochs must be >= 1, got " + std::to_string(opt.epochs));
  if (opt.batch_size < 1)
    throw ConfigError("batch size must be >= 1, got " +
                      std::to_string(opt.batch_size));
  if (train.empty()) throw DataError("training sample set is empty");
  if (val.empty()) throw DataError("validation sample set is empty");

  RmsProp rmsprop(model.params(), opt.optimizer);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult res;
  res.best_val_mse = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= opt.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(opt.seed, 1000 + std::uint64_t(epoch)));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    std::size_t batch_id = 0;
    for (std::size_t base = 0; base < order.size();
         base += std::size_t(opt.batch_size), ++batch_id) {
      const std::size_t stop =
          std::min(order.size(), base + std::size_t(opt.batch_size));
      const double inv = 1.0 / double(stop - base);
      for (std::size_t k = base; k < stop; ++k) {
        const TrainingSample& smp = train[order[k]];
        diff::Tensor pred = model.forward(scaled, smp);
        diff::Tensor loss = diff::mse(pred, target_frame(scaled, smp.t));
        const double lv = loss.scalar();
        if (!std::isfinite(lv)) {
          char buf[160];
          std::snprintf(buf, sizeof buf,
                        "non-finite loss at epoch %d batch %zu (target bin %lld, "
                        "max |param| %.6g, lr %.6g)",
                        epoch, batch_id, (long long)smp.t, max_abs_param(model),
                        opt.optimizer.lr);
          throw NumericError(buf);
        }
        epoch_loss += lv;
        diff::backward(loss, inv);
      }
      rmsprop.step();
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_mse = epoch_loss / double(order.size());
    stats.val_mse = dataset_mse(model, scaled, val, opt.threads);
    res.history.push_back(stats);
    if (log)
      *log << "epoch " << epoch << " train_mse " << g17(stats.train_mse)
           << " val_mse " << g17(stats.val_mse) << "\n";

    if (stats.val_mse < res.best_val_mse) {
      res.best_val_mse = stats.val_mse;
      res.best_epoch = epoch;
      res.best = model.snapshot();
      res.best.seed = opt.seed;
      res.best.step = rmsprop.steps();
      res.best.epoch = epoch;
      res.best.scale_max = scaled.scale_max;
    }
  }
  return res;
}

void save_loss_history(const std::vector<EpochStats>& history,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "epoch,train_mse,val_mse\n";
  for (const EpochStats& s : history)
    out << s.epoch << "," << g17(s.train_mse) << "," << g17(s.val_mse) << "\n";
  if (!out) throw DataError("write failed for " + path);
}

}  // namespace bikecast

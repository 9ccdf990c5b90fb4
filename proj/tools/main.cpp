#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bikecast/common.hpp"
#include "bikecast/config.hpp"
#include "bikecast/eval.hpp"
#include "bikecast/ingest.hpp"
#include "bikecast/kernels.hpp"
#include "bikecast/similarity.hpp"
#include "bikecast/synth.hpp"
#include "bikecast/timeutil.hpp"

namespace fs = std::filesystem;
using namespace bikecast;

namespace {

void pick_backend(const std::string& simd) {
  if (simd == "auto") {
    kernels::select_auto();
    return;
  }
  kernels::Backend b;
  if (simd == "scalar") b = kernels::Backend::scalar;
  else if (simd == "avx2") b = kernels::Backend::avx2;
  else if (simd == "neon") b = kernels::Backend::neon;
  else throw ConfigError("unknown --simd value '" + simd + "'");
  if (!kernels::select(b))
    throw ConfigError("kernel backend '" + simd + "' is not available on this machine");
}

struct IngestArgs {
  std::string trips, stations, out = ".";
  double origin_lon = 0.0, origin_lat = 0.0, cell_m = 1000.0;
  int width = 0, height = 0;
  std::string start;  // ISO 8601 horizon start
  std::int64_t bins = 0, bin_s = 3600;
};

int cmd_ingest(const IngestArgs& a) {
  GridSpec spec;
  spec.origin = {a.origin_lon, a.origin_lat};
  spec.cell_size_m = a.cell_m;
  spec.width_cells = a.width;
  spec.height_cells = a.height;
  spec.time_bin_s = a.bin_s;
  auto t0 = parse_iso8601(a.start);
  if (!t0) throw ConfigError("cannot parse --start timestamp '" + a.start + "'");
  spec.t0 = *t0;
  if (a.bins < 1) throw ConfigError("--bins must be >= 1");

  if (!a.stations.empty()) {
    std::ifstream st(a.stations, std::ios::binary);
    if (!st) throw DataError("cannot open stations file " + a.stations);
    spec.station_table = load_station_table(st);
  }
  spec.validate();

  std::ifstream trips(a.trips, std::ios::binary);
  if (!trips) throw DataError("cannot open trips file " + a.trips);
  auto [tensor, report] = ingest_trips(trips, spec, a.bins);

  fs::create_directories(a.out);
  save_tensor(tensor, a.out + "/demand.tensor");
  std::ofstream rep(a.out + "/ingest_report.txt", std::ios::binary);
  report.write(rep);
  report.write(std::cout);
  std::cout << "tensor " << a.out << "/demand.tensor (" << tensor.width << "x"
            << tensor.height << ", " << tensor.bins << " bins)\n";
  return 0;
}

struct NeighborsArgs {
  std::string tensor, metric = "dtw", out = ".";
  long band = -1;
  int kernel_size = 9;
  double split_ratio = 0.8;
  int threads = 1;
};

int cmd_neighbors(const NeighborsArgs& a) {
  if (a.kernel_size < 2) throw ConfigError("--kernel-size must be >= 2");
  DemandTensor full = load_tensor(a.tensor);
  DemandTensor train = full;
  if (a.split_ratio < 1.0) {
    auto parts = split_train_val(full, a.split_ratio);
    train = std::move(parts.first);
  }

  SemanticOptions opts;
  opts.metric = a.metric;
  opts.k = a.kernel_size - 1;  // taps minus the self slot
  opts.band = a.band;
  opts.threads = a.threads;
  NeighborIndex semantic = build_semantic_neighbors(train, opts);
  NeighborIndex spatial = build_spatial_neighbors(full.width, full.height);
  SimilarityReport rep = neighbor_overlap(train, semantic, spatial, a.threads);

  fs::create_directories(a.out);
  const std::string idx_path = a.out + "/neighbors." + a.metric;
  save_neighbors(semantic, idx_path);
  save_similarity_report(rep, a.out + "/similarity_report.txt");
  std::cout << "index " << idx_path << "\n";
  std::cout << "overlap<=1 fraction " << g17(rep.fraction_overlap_le1)
            << " mean " << g17(rep.mean_overlap) << "\n";
  return 0;
}

int cmd_train(const std::string& config_path) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  ExperimentResult res = run_experiment(cfg, &std::cout);
  res.report.write(std::cout);
  std::cout << "best_epoch " << res.training.best_epoch << " best_val_mse "
            << g17(res.training.best_val_mse) << "\n";
  std::cout << "checkpoint " << res.checkpoint_path << "\n";
  std::cout << "report " << res.report_path << "\n";
  return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& ck_path) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  Checkpoint ck = load_checkpoint(ck_path);

  DemandTensor demand = load_tensor(cfg.tensor_path);
  ModelConfig mcfg;
  mcfg.width = demand.width;
  mcfg.height = demand.height;
  mcfg.hidden = cfg.hidden;
  mcfg.filters = cfg.filters;
  mcfg.sampling = cfg.sampling;

  const std::int64_t lookback = cfg.sampling.lookback();
  auto [train_part, val_part] = split_train_val(demand, cfg.split_ratio, lookback + 1);
  if (ck.scale_max <= 0.0)
    throw DataError("checkpoint carries no scaling constant");
  ScaledTensor scaled = scale(demand, ck.scale_max);

  const ModelKind kind = model_kind_from(ck.model_kind);
  NeighborIndex index;
  if (kind == ModelKind::irconv_lstm) {
    if (!cfg.neighbor_index_path.empty()) {
      index = load_neighbors(cfg.neighbor_index_path);
    } else {
      SemanticOptions opts;
      opts.metric = ck.metric;
      opts.k = cfg.neighbor_k;
      opts.band = cfg.dtw_band;
      opts.threads = cfg.threads;
      index = build_semantic_neighbors(train_part, opts);
    }
  } else {
    index = build_spatial_neighbors(demand.width, demand.height);
    if (kind == ModelKind::lstm_only) index.metric = "none";
  }

  std::vector<TrainingSample> val_samples =
      make_samples(scaled, cfg.sampling, train_part.bins, scaled.bins);
  ForecastModel model = ForecastModel::restore(ck, mcfg, index);
  EvalReport rep =
      evaluate_model(model, scaled, demand, val_samples, cfg.experiment_id, cfg.threads);

  fs::create_directories(cfg.out_dir);
  const std::string path = cfg.out_dir + "/" + cfg.experiment_id + ".eval.txt";
  save_eval_report(rep, path);
  rep.write(std::cout);
  std::cout << "report " << path << "\n";
  return 0;
}

int cmd_baseline(const std::string& config_path, const std::string& kind) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  if (kind == "cnn_lstm") {
    cfg.model_kind = ModelKind::cnn_lstm;
  } else if (kind == "lstm_only") {
    cfg.model_kind = ModelKind::lstm_only;
  } else if (kind == "irconv_pearson") {
    cfg.model_kind = ModelKind::irconv_lstm;
    cfg.neighbor_metric = "pearson";
    cfg.neighbor_index_path.clear();
  } else if (kind == "irconv_dtw") {
    cfg.model_kind = ModelKind::irconv_lstm;
    cfg.neighbor_metric = "dtw";
    cfg.neighbor_index_path.clear();
  } else {
    throw ConfigError("unknown baseline kind '" + kind + "'");
  }
  cfg.experiment_id += "_" + kind;
  ExperimentResult res = run_experiment(cfg, &std::cout);
  res.report.write(std::cout);
  std::cout << "best_epoch " << res.training.best_epoch << " best_val_mse "
            << g17(res.training.best_val_mse) << "\n";
  std::cout << "checkpoint " << res.checkpoint_path << "\n";
  return 0;
}

struct SynthArgs {
  int width = 8, height = 8, groups = 2;
  double amplitude = 20.0, group_noise = 0.35, cell_noise = 0.10, ar_coeff = 0.9;
  std::int64_t bins = 1008, t0 = 0;
  std::uint64_t seed = 0;
  std::string out = ".";
};

int cmd_synth(const SynthArgs& a) {
  SyntheticCitySpec spec;
  spec.width = a.width;
  spec.height = a.height;
  spec.groups = a.groups;
  spec.amplitude = a.amplitude;
  spec.group_noise = a.group_noise;
  spec.cell_noise = a.cell_noise;
  spec.ar_coeff = a.ar_coeff;
  spec.bins = a.bins;
  spec.t0 = a.t0;
  spec.seed = a.seed;
  SyntheticCity city = generate_city(spec);

  fs::create_directories(a.out);
  save_tensor(city.demand, a.out + "/city.tensor");
  save_group_map(city, a.out + "/groups.txt");
  std::cout << "tensor " << a.out << "/city.tensor (" << spec.width << "x"
            << spec.height << ", " << spec.bins << " bins, " << spec.groups
            << " groups)\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& evals, const std::string& out) {
  std::ostringstream merged;
  merged << "experiment,metric,slice,value,n\n";
  for (const std::string& path : evals) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open eval report " + path);
    std::string line;
    if (!std::getline(in, line) || line != "bikecast-eval v1")
      throw DataError(path + " is not an eval report");
    while (std::getline(in, line))
      if (line.rfind("row,", 0) == 0) merged << line.substr(4) << "\n";
  }
  if (out.empty()) {
    std::cout << merged.str();
  } else {
    std::ofstream o(out, std::ios::binary);
    if (!o) throw DataError("cannot open " + out + " for writing");
    o << merged.str();
    std::cout << "report " << out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grid demand forecasting with semantic-neighbor convolution"};
  app.require_subcommand(1);
  std::string simd = "auto";
  app.add_option("--simd", simd, "kernel backend: auto, scalar, avx2, neon")
      ->capture_default_str();

  IngestArgs ia;
  CLI::App* ingest = app.add_subcommand("ingest", "bin a trip CSV into a demand tensor");
  ingest->add_option("--trips", ia.trips, "trip CSV")->required();
  ingest->add_option("--stations", ia.stations, "station table CSV (for station-id trips)");
  ingest->add_option("--origin-lon", ia.origin_lon, "grid southwest corner longitude")->required();
  ingest->add_option("--origin-lat", ia.origin_lat, "grid southwest corner latitude")->required();
  ingest->add_option("--cell-m", ia.cell_m, "cell edge in meters")->capture_default_str();
  ingest->add_option("--width", ia.width, "cells eastward")->required();
  ingest->add_option("--height", ia.height, "cells northward")->required();
  ingest->add_option("--start", ia.start, "horizon start, ISO 8601")->required();
  ingest->add_option("--bins", ia.bins, "number of time bins")->required();
  ingest->add_option("--bin-s", ia.bin_s, "bin length in seconds")->capture_default_str();
  ingest->add_option("--out", ia.out, "output directory")->capture_default_str();

  NeighborsArgs na;
  CLI::App* neighbors =
      app.add_subcommand("neighbors", "rank semantic neighbors and compare with spatial ones");
  neighbors->add_option("--tensor", na.tensor, "demand tensor file")->required();
  neighbors->add_option("--metric", na.metric, "pearson or dtw")->capture_default_str();
  neighbors->add_option("--band", na.band, "DTW band half-width, -1 = unbounded")
      ->capture_default_str();
  neighbors->add_option("--kernel-size", na.kernel_size, "taps per cell including self")
      ->capture_default_str();
  neighbors->add_option("--split-ratio", na.split_ratio,
                        "training prefix the ranking sees; 1 = whole tensor")
      ->capture_default_str();
  neighbors->add_option("--threads", na.threads, "worker threads")->capture_default_str();
  neighbors->add_option("--out", na.out, "output directory")->capture_default_str();

  std::string train_config;
  CLI::App* train = app.add_subcommand("train", "run one experiment from a config file");
  train->add_option("--config", train_config, "experiment config JSON")->required();

  std::string eval_config, eval_ck;
  CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a saved checkpoint");
  evaluate->add_option("--config", eval_config, "experiment config JSON")->required();
  evaluate->add_option("--checkpoint", eval_ck, "checkpoint file")->required();

  std::string base_config, base_kind;
  CLI::App* baseline = app.add_subcommand("baseline", "run a comparison model on a config");
  baseline->add_option("--config", base_config, "experiment config JSON")->required();
  baseline->add_option("--kind", base_kind,
                       "cnn_lstm, lstm_only, irconv_pearson, or irconv_dtw")
      ->required();

  SynthArgs sa;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic phase-group city");
  synth->add_option("--width", sa.width, "cells eastward")->capture_default_str();
  synth->add_option("--height", sa.height, "cells northward")->capture_default_str();
  synth->add_option("--groups", sa.groups, "phase groups, assigned by column")->capture_default_str();
  synth->add_option("--amplitude", sa.amplitude, "half swing of the daily cycle")->capture_default_str();
  synth->add_option("--group-noise", sa.group_noise,
                    "shared per-group component, relative to amplitude")->capture_default_str();
  synth->add_option("--cell-noise", sa.cell_noise,
                    "independent per-cell noise, relative to amplitude")->capture_default_str();
  synth->add_option("--ar-coeff", sa.ar_coeff, "persistence of the shared group component")
      ->capture_default_str();
  synth->add_option("--bins", sa.bins, "number of hourly bins")->capture_default_str();
  synth->add_option("--t0", sa.t0, "horizon start, Unix seconds")->capture_default_str();
  synth->add_option("--seed", sa.seed, "generator seed")->capture_default_str();
  synth->add_option("--out", sa.out, "output directory")->capture_default_str();

  std::vector<std::string> report_evals;
  std::string report_out;
  CLI::App* report = app.add_subcommand("report", "merge eval reports into one CSV");
  report->add_option("--eval", report_evals, "eval report files")->required()->expected(-1);
  report->add_option("--out", report_out, "write CSV here instead of stdout");

  try {
    app.parse(argc, argv);
    pick_backend(simd);
    if (*ingest) return cmd_ingest(ia);
    if (*neighbors) return cmd_neighbors(na);
    if (*train) return cmd_train(train_config);
    if (*evaluate) return cmd_evaluate(eval_config, eval_ck);
    if (*baseline) return cmd_baseline(base_config, base_kind);
    if (*synth) return cmd_synth(sa);
    if (*report) return cmd_report(report_evals, report_out);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

#include "bikecast/config.hpp"

#include <filesystem>
#include <fstream>
#include <utility>

#include "json.hpp"

#include "bikecast/common.hpp"
#include "bikecast/similarity.hpp"

namespace bikecast {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const char* where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (experiment_id.empty()) throw ConfigError("experiment_id is empty");
  if (tensor_path.empty()) throw ConfigError("dataset.tensor path is missing");
  if (!(split_ratio > 0.0 && split_ratio < 1.0))
    throw ConfigError("split_ratio must lie in (0, 1), got " +
                      std::to_string(split_ratio));
  if (neighbor_metric != "pearson" && neighbor_metric != "dtw")
    throw ConfigError("neighbors.metric must be pearson or dtw, got '" +
                      neighbor_metric + "'");
  if (neighbor_k < 1) throw ConfigError("neighbors.k must be >= 1");
  if (hidden < 1) throw ConfigError("model.hidden must be >= 1");
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (!(optimizer.lr > 0.0)) throw ConfigError("optimizer.lr must be > 0");
  if (!(optimizer.rho >= 0.0 && optimizer.rho < 1.0))
    throw ConfigError("optimizer.rho must lie in [0, 1)");
  if (!(optimizer.eps > 0.0)) throw ConfigError("optimizer.eps must be > 0");
  if (out_dir.empty()) throw ConfigError("out_dir is empty");
  sampling.validate();
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }

  ExperimentConfig cfg;
  try {
    check_keys(j, "config",
               {"experiment_id", "dataset", "split_ratio", "neighbors", "model",
                "sampling", "optimizer", "train", "seed", "threads", "out_dir"});
    cfg.experiment_id = j.value("experiment_id", cfg.experiment_id);
    if (j.contains("dataset")) {
      const json& d = j.at("dataset");
      check_keys(d, "dataset", {"tensor"});
      cfg.tensor_path = d.value("tensor", cfg.tensor_path);
    }
    cfg.split_ratio = j.value("split_ratio", cfg.split_ratio);
    if (j.contains("neighbors")) {
      const json& n = j.at("neighbors");
      check_keys(n, "neighbors", {"metric", "k", "band", "index_path"});
      cfg.neighbor_metric = n.value("metric", cfg.neighbor_metric);
      cfg.neighbor_k = n.value("k", cfg.neighbor_k);
      cfg.dtw_band = n.value("band", cfg.dtw_band);
      cfg.neighbor_index_path = n.value("index_path", cfg.neighbor_index_path);
    }
    if (j.contains("model")) {
      const json& m = j.at("model");
      check_keys(m, "model", {"kind", "hidden", "filters"});
      if (m.contains("kind"))
        cfg.model_kind = model_kind_from(m.at("kind").get<std::string>());
      cfg.hidden = m.value("hidden", cfg.hidden);
      if (m.contains("filters"))
        cfg.filters = m.at("filters").get<std::vector<int>>();
    }
    if (j.contains("sampling")) {
      const json& s = j.at("sampling");
      check_keys(s, "sampling", {"l_c", "l_p", "l_q"});
      cfg.sampling.l_c = s.value("l_c", cfg.sampling.l_c);
      cfg.sampling.l_p = s.value("l_p", cfg.sampling.l_p);
      cfg.sampling.l_q = s.value("l_q", cfg.sampling.l_q);
    }
    if (j.contains("optimizer")) {
      const json& o = j.at("optimizer");
      check_keys(o, "optimizer", {"lr", "rho", "eps"});
      cfg.optimizer.lr = o.value("lr", cfg.optimizer.lr);
      cfg.optimizer.rho = o.value("rho", cfg.optimizer.rho);
      cfg.optimizer.eps = o.value("eps", cfg.optimizer.eps);
    }
    if (j.contains("train")) {
      const json& t = j.at("train");
      check_keys(t, "train", {"epochs", "batch_size"});
      cfg.epochs = t.value("epochs", cfg.epochs);
      cfg.batch_size = t.value("batch_size", cfg.batch_size);
    }
    cfg.seed = j.value("seed", cfg.seed);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
  cfg.validate();
  DemandTensor demand = load_tensor(cfg.tensor_path);

  ModelConfig mcfg;
  mcfg.width = demand.width;
  mcfg.height = demand.height;
  mcfg.hidden = cfg.hidden;
  mcfg.filters = cfg.filters;
  mcfg.sampling = cfg.sampling;
  mcfg.validate();

  const std::int64_t lookback = cfg.sampling.lookback();
  auto [train_part, val_part] = split_train_val(demand, cfg.split_ratio, lookback + 1);
  const std::int64_t cut = train_part.bins;
  const double train_max = double(train_part.max_value());
  if (train_max <= 0.0)
    throw DataError("training split is all zero, nothing to scale by");
  ScaledTensor scaled = scale(demand, train_max);

  NeighborIndex index;
  if (cfg.model_kind == ModelKind::lstm_only) {
    index = build_spatial_neighbors(demand.width, demand.height);
    index.metric = "none";  // convolution is bypassed, taps never read
  } else if (cfg.model_kind == ModelKind::cnn_lstm) {
    index = build_spatial_neighbors(demand.width, demand.height);
  } else if (!cfg.neighbor_index_path.empty()) {
    index = load_neighbors(cfg.neighbor_index_path);
    if (index.width != demand.width || index.height != demand.height)
      throw ConfigError("neighbor index grid does not match the tensor");
    if (index.metric != cfg.neighbor_metric)
      throw ConfigError("neighbor index was built with metric '" + index.metric +
                        "', config asks for '" + cfg.neighbor_metric + "'");
  } else {
    SemanticOptions sopt;
    sopt.metric = cfg.neighbor_metric;
    sopt.k = cfg.neighbor_k;
    sopt.band = cfg.dtw_band;
    sopt.threads = cfg.threads;
    index = build_semantic_neighbors(train_part, sopt);
  }

  std::vector<TrainingSample> train_samples =
      make_samples(scaled, cfg.sampling, lookback, cut);
  std::vector<TrainingSample> val_samples =
      make_samples(scaled, cfg.sampling, cut, scaled.bins);

  ForecastModel model(cfg.model_kind, mcfg, index, cfg.seed);

  TrainOptions topt;
  topt.epochs = cfg.epochs;
  topt.batch_size = cfg.batch_size;
  topt.optimizer = cfg.optimizer;
  topt.seed = cfg.seed;
  topt.threads = cfg.threads;
  TrainResult tr = train_model(model, scaled, train_samples, val_samples, topt, log);

  ForecastModel best = ForecastModel::restore(tr.best, mcfg, index);
  EvalReport rep =
      evaluate_model(best, scaled, demand, val_samples, cfg.experiment_id, cfg.threads);

  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const std::string stem = cfg.out_dir + "/" + cfg.experiment_id;

  ExperimentResult res;
  res.checkpoint_path = stem + ".checkpoint";
  res.history_path = stem + ".loss.csv";
  res.report_path = stem + ".eval.txt";
  res.neighbors_path = stem + ".neighbors";
  save_checkpoint(tr.best, res.checkpoint_path);
  save_loss_history(tr.history, res.history_path);
  save_eval_report(rep, res.report_path);
  save_neighbors(index, res.neighbors_path);
  res.training = std::move(tr);
  res.report = std::move(rep);
  return res;
}

}  // namespace bikecast

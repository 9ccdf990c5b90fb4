// Acceptance gate for the forecasting toolkit. Each numbered criterion prints
// one [PASS]/[FAIL]/[SKIP] line; the process exits nonzero when any gating
// criterion fails. Criteria 9 and 10 drive the installed CLI binary (path in
// BIKECAST_CLI) end to end; everything else runs in process.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bikecast/autodiff.hpp"
#include "bikecast/common.hpp"
#include "bikecast/demand.hpp"
#include "bikecast/eval.hpp"
#include "bikecast/irconv.hpp"
#include "bikecast/lstm.hpp"
#include "bikecast/model.hpp"
#include "bikecast/neighbors.hpp"
#include "bikecast/optim.hpp"
#include "bikecast/sampling.hpp"
#include "bikecast/similarity.hpp"
#include "bikecast/synth.hpp"
#include "bikecast/train.hpp"

#include "../oracles.hpp"

namespace fs = std::filesystem;
using namespace bikecast;
using diff::Tensor;

namespace {

struct Outcome {
  int number = 0;
  bool pass = false;
  bool skipped = false;
  bool gating = true;
  std::string detail;
};

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

std::vector<double> randvec(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

double median5(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// --- criterion 1: finite differences over the full network ----------------

Outcome criterion_gradients() {
  Outcome out;
  out.number = 1;
  const double t0 = now_s();

  // 4x4 city, semantic pearson taps with S=4, hidden 8, windows 3/2/2
  SyntheticCitySpec cspec;
  cspec.width = 4;
  cspec.height = 4;
  cspec.groups = 2;
  cspec.bins = 340;
  cspec.seed = 7;
  const SyntheticCity city = generate_city(cspec);

  SemanticOptions sopt;
  sopt.metric = "pearson";
  sopt.k = 3;
  const NeighborIndex index = build_semantic_neighbors(city.demand, sopt);

  ModelConfig mcfg;
  mcfg.width = 4;
  mcfg.height = 4;
  mcfg.hidden = 8;
  mcfg.filters = {8, 4, 1};
  mcfg.sampling.l_c = 3;
  mcfg.sampling.l_p = 2;
  mcfg.sampling.l_q = 2;

  ForecastModel model(ModelKind::irconv_lstm, mcfg, index, 11);
  const ScaledTensor scaled = scale(city.demand, double(city.demand.max_value()));
  const auto samples =
      make_samples(scaled, mcfg.sampling, mcfg.sampling.lookback(),
                   mcfg.sampling.lookback() + 1);

  const double* frame = scaled.frame(samples[0].t);
  const Tensor target = Tensor::constant(
      {mcfg.cells()}, std::vector<double>(frame, frame + mcfg.cells()));
  auto loss = [&] { return diff::mse(model.forward(scaled, samples[0]), target); };

  double worst = 0.0;
  std::string worst_name = "-";
  std::size_t slots = 0;
  for (const auto& [name, param] : model.named_params()) {
    const auto r = oracles::fd_check(loss, param, 1e-5, 1e-4);
    slots += r.slots;
    if (r.max_rel > worst) {
      worst = r.max_rel;
      worst_name = name;
    }
  }
  const double dt = now_s() - t0;
  out.pass = worst < 1e-4 && dt < 60.0;
  out.detail = fmt("central differences over %zu blocks, %zu slots: "
                   "max rel err %.2e at %s (limit 1e-4), %.1fs",
                   model.named_params().size(), slots, worst,
                   worst_name.c_str(), dt);
  return out;
}

// --- criterion 2: spatial taps equal a dense 3x3 convolution --------------

Outcome criterion_conv_equivalence() {
  Outcome out;
  out.number = 2;
  const double t0 = now_s();
  Rng rng(202);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 2 + int(rng.index(6));
    const int h = 2 + int(rng.index(6));
    const std::int64_t in_c = 1 + std::int64_t(rng.index(3));
    const std::int64_t out_c = 1 + std::int64_t(rng.index(4));
    const std::size_t cells = std::size_t(w) * std::size_t(h);

    const NeighborIndex index = build_spatial_neighbors(w, h);
    const TapPlan plan = make_tap_plan(index, in_c);
    IrConvLayer layer;
    layer.kernel = Tensor::param(
        {out_c, in_c * 9}, randvec(rng, std::size_t(out_c * in_c * 9), -1, 1));
    layer.bias = Tensor::param({out_c, 1}, randvec(rng, std::size_t(out_c), -1, 1));
    const Tensor input = Tensor::constant(
        {in_c, std::int64_t(cells)}, randvec(rng, std::size_t(in_c) * cells, -2, 2));

    const Tensor got = irconv_forward(input, layer, plan);
    const std::vector<double> want = oracles::dense_conv3x3(
        input.data(), int(in_c), w, h, layer.kernel.data(), layer.bias.data(),
        int(out_c));
    for (std::size_t s = 0; s < want.size(); ++s)
      worst = std::max(worst, std::abs(got.data()[s] - want[s]));
  }
  const double dt = now_s() - t0;
  out.pass = worst <= 1e-10 && dt < 10.0;
  out.detail = fmt("100 random grids vs dense zero-padded oracle: "
                   "max abs err %.2e (limit 1e-10), %.1fs", worst, dt);
  return out;
}

// --- criterion 3: dynamic program equals warp-path enumeration ------------

Outcome criterion_dtw_oracle() {
  Outcome out;
  out.number = 3;
  const double t0 = now_s();
  Rng rng(303);
  int mismatches = 0, band_mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.index(8);
    const std::size_t m = 1 + rng.index(8);
    std::vector<double> x(n), y(m);
    for (auto& v : x) v = rng.uniform(-4, 4);
    for (auto& v : y) v = rng.uniform(-4, 4);
    const double exact = oracles::dtw_enumerate(x, y);
    if (dtw(x, y) != exact) ++mismatches;
    if (dtw(x, y, long(std::max(n, m))) != exact) ++band_mismatches;
  }
  const double dt = now_s() - t0;
  out.pass = mismatches == 0 && band_mismatches == 0 && dt < 30.0;
  out.detail = fmt("500 pairs (lengths <= 8): %d unbounded and %d banded "
                   "mismatches vs exhaustive enumeration, %.1fs",
                   mismatches, band_mismatches, dt);
  return out;
}

// --- criterion 4: correlation properties -----------------------------------

Outcome criterion_pearson_properties() {
  Outcome out;
  out.number = 4;
  Rng rng(404);
  double worst_sym = 0.0, worst_aff = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 8 + rng.index(32);
    std::vector<double> x(n), y(n), ax(n);
    const double a = rng.uniform(0.5, 4.0);
    const double b = rng.uniform(-8, 8);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = rng.uniform(-8, 8);
      y[k] = rng.uniform(-8, 8);
      ax[k] = a * x[k] + b;
    }
    const auto r = pearson(x, y);
    const auto rs = pearson(y, x);
    const auto ra = pearson(ax, y);
    if (!r || !rs || !ra) {
      out.detail = "correlation came back undefined on non-degenerate input";
      return out;
    }
    worst_sym = std::max(worst_sym, std::abs(*r - *rs));
    worst_aff = std::max(worst_aff, std::abs(*r - *ra));
  }
  const std::vector<double> flat(16, 3.0);
  const std::vector<double> vary = randvec(rng, 16, -1, 1);
  const bool sentinel_ok = !pearson(flat, vary).has_value() &&
                           !pearson(vary, flat).has_value();
  out.pass = worst_sym <= 1e-12 && worst_aff <= 1e-12 && sentinel_ok;
  out.detail = fmt("1000 pairs: symmetry err %.2e, positive-affine err %.2e "
                   "(limit 1e-12); zero variance -> sentinel %s",
                   worst_sym, worst_aff, sentinel_ok ? "yes" : "NO");
  return out;
}

// --- criterion 5: window construction ---------------------------------------

Outcome criterion_sampling() {
  Outcome out;
  out.number = 5;
  ScaledTensor s;
  s.width = 1;
  s.height = 1;
  s.bins = 2000;
  s.scale_max = 1.0;
  s.values.assign(2000, 0.0);

  Rng rng(505);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    SamplingConfig cfg;
    cfg.l_c = 1 + int(rng.index(36));
    cfg.l_p = 1 + int(rng.index(8));
    cfg.l_q = 1 + int(rng.index(4));
    const std::int64_t lb = cfg.lookback();
    const std::int64_t t = lb + std::int64_t(rng.index(std::uint64_t(2000 - lb)));
    const auto samples = make_samples(s, cfg, t, t + 1);
    const TrainingSample& smp = samples[0];

    bool ok = smp.t == t && smp.closeness.size() == std::size_t(cfg.l_c) &&
              smp.period.size() == std::size_t(cfg.l_p) &&
              smp.trend.size() == std::size_t(cfg.l_q);
    for (int k = 0; ok && k < cfg.l_c; ++k)
      ok = smp.closeness[std::size_t(k)] == t - cfg.l_c + k;
    for (int k = 0; ok && k < cfg.l_p; ++k)
      ok = smp.period[std::size_t(k)] == t - 24 * std::int64_t(cfg.l_p - k);
    for (int k = 0; ok && k < cfg.l_q; ++k)
      ok = smp.trend[std::size_t(k)] == t - 168 * std::int64_t(cfg.l_q - k);
    if (!ok) ++bad;
  }
  out.pass = bad == 0;
  out.detail = fmt("1000 random (t, l_c, l_p, l_q): %d window mismatches", bad);
  return out;
}

// --- criterion 6: LSTM step -------------------------------------------------

Outcome criterion_lstm() {
  Outcome out;
  out.number = 6;
  Rng rng(606);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::int64_t in = 1 + std::int64_t(rng.index(6));
    const std::int64_t hid = 1 + std::int64_t(rng.index(8));
    auto mk = [&](std::int64_t r, std::int64_t c) {
      return Tensor::param({r, c}, randvec(rng, std::size_t(r * c), -1, 1));
    };
    LstmParams p;
    p.w_if = mk(hid, in);  p.w_hf = mk(hid, hid);  p.b_if = mk(hid, 1);  p.b_hf = mk(hid, 1);
    p.w_ii = mk(hid, in);  p.w_hi = mk(hid, hid);  p.b_ii = mk(hid, 1);  p.b_hi = mk(hid, 1);
    p.w_ic = mk(hid, in);  p.w_hc = mk(hid, hid);  p.b_ic = mk(hid, 1);  p.b_hc = mk(hid, 1);
    p.w_io = mk(hid, in);  p.w_ho = mk(hid, hid);  p.b_io = mk(hid, 1);  p.b_ho = mk(hid, 1);

    const std::vector<double> xv = randvec(rng, std::size_t(in), -1, 1);
    const std::vector<double> hv = randvec(rng, std::size_t(hid), -1, 1);
    const std::vector<double> cv = randvec(rng, std::size_t(hid), -1, 1);
    LstmState prev;
    prev.h = Tensor::constant({hid, 1}, hv);
    prev.c = Tensor::constant({hid, 1}, cv);
    const LstmState got = lstm_step(p, Tensor::constant({in, 1}, xv), prev);
    const auto want = oracles::lstm_step_oracle(
        int(in), int(hid), p.w_if.data(), p.w_hf.data(), p.b_if.data(),
        p.b_hf.data(), p.w_ii.data(), p.w_hi.data(), p.b_ii.data(),
        p.b_hi.data(), p.w_ic.data(), p.w_hc.data(), p.b_ic.data(),
        p.b_hc.data(), p.w_io.data(), p.w_ho.data(), p.b_io.data(),
        p.b_ho.data(), xv, hv, cv);
    for (std::int64_t r = 0; r < hid; ++r) {
      worst = std::max(worst, std::abs(got.h.data()[std::size_t(r)] -
                                       want.h[std::size_t(r)]));
      worst = std::max(worst, std::abs(got.c.data()[std::size_t(r)] -
                                       want.c[std::size_t(r)]));
    }
  }

  // zero parameters: every sigmoid gate is exactly 1/2
  bool halves_ok = true;
  {
    auto z = [&](std::int64_t r, std::int64_t c) {
      return Tensor::param({r, c}, std::vector<double>(std::size_t(r * c), 0.0));
    };
    LstmParams p;
    p.w_if = z(2, 1);  p.w_hf = z(2, 2);  p.b_if = z(2, 1);  p.b_hf = z(2, 1);
    p.w_ii = z(2, 1);  p.w_hi = z(2, 2);  p.b_ii = z(2, 1);  p.b_hi = z(2, 1);
    p.w_ic = z(2, 1);  p.w_hc = z(2, 2);  p.b_ic = z(2, 1);  p.b_hc = z(2, 1);
    p.w_io = z(2, 1);  p.w_ho = z(2, 2);  p.b_io = z(2, 1);  p.b_ho = z(2, 1);
    LstmState prev;
    prev.h = Tensor::constant({2, 1}, {0.7, -0.4});
    prev.c = Tensor::constant({2, 1}, {1.5, -3.0});
    const LstmState next = lstm_step(p, Tensor::constant({1, 1}, {9.0}), prev);
    halves_ok = next.c.data()[0] == 0.75 && next.c.data()[1] == -1.5 &&
                next.h.data()[0] == 0.5 * std::tanh(0.75) &&
                next.h.data()[1] == 0.5 * std::tanh(-1.5);
  }

  out.pass = worst <= 1e-12 && halves_ok;
  out.detail = fmt("100 random steps vs gate-equation oracle: max abs err "
                   "%.2e (limit 1e-12); zero-parameter gates exactly 1/2: %s",
                   worst, halves_ok ? "yes" : "NO");
  return out;
}

// --- criterion 7: metric definitions + scan of produced reports -----------

Outcome criterion_metrics(const fs::path& work) {
  Outcome out;
  out.number = 7;

  MetricRow perfect;
  for (double v : {1.0, 5.0, 9.0}) perfect.add(v, v);
  perfect.finalize();
  const bool zeros_ok =
      *perfect.mae == 0.0 && *perfect.rmse == 0.0 && *perfect.mape == 0.0;

  MetricRow hand;
  hand.add(1.0, 2.0);
  hand.add(2.0, 2.0);
  hand.finalize();
  const bool hand_ok = std::abs(*hand.mae - 0.5) < 1e-15 &&
                       std::abs(*hand.rmse - std::sqrt(0.5)) < 1e-15 &&
                       std::abs(*hand.mape - 50.0) < 1e-12;

  // every report written by the later criteria must satisfy MAE <= RMSE
  int reports = 0, violations = 0;
  for (const auto& entry : fs::recursive_directory_iterator(work)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() < 9 || name.substr(name.size() - 9) != ".eval.txt") continue;
    ++reports;
    std::ifstream in(entry.path());
    std::map<std::string, double> mae, rmse;
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("row,", 0) != 0) continue;
      std::vector<std::string> f;
      std::stringstream ss(line);
      std::string tok;
      while (std::getline(ss, tok, ',')) f.push_back(tok);
      if (f.size() < 5) continue;
      const std::string key = f[1] + "/" + f[3];
      if (f[2] == "mae") mae[key] = std::strtod(f[4].c_str(), nullptr);
      if (f[2] == "rmse") rmse[key] = std::strtod(f[4].c_str(), nullptr);
    }
    for (const auto& [key, m] : mae) {
      auto it = rmse.find(key);
      if (it != rmse.end() && m > it->second * (1.0 + 1e-9)) ++violations;
    }
  }

  out.pass = zeros_ok && hand_ok && reports > 0 && violations == 0;
  out.detail = fmt("perfect->zeros %s; [2,2] vs [1,2] -> 0.5/sqrt(.5)/50%% %s; "
                   "MAE<=RMSE on %d generated reports, %d violations",
                   zeros_ok ? "ok" : "BAD", hand_ok ? "ok" : "BAD", reports,
                   violations);
  return out;
}

// --- criterion 8: overfit a constant city ----------------------------------

Outcome criterion_overfit(const fs::path& work) {
  Outcome out;
  out.number = 8;
  const double t0 = now_s();
  const double level = 10.0;

  DemandTensor d = DemandTensor::zeros(4, 4, 500, 0, 3600);
  for (auto& v : d.values) v = std::uint32_t(level);

  auto [train_part, val_part] = split_train_val(d, 0.8, 337);
  const double m = double(train_part.max_value());
  const ScaledTensor scaled = scale(d, m);

  SemanticOptions sopt;
  sopt.metric = "dtw";
  sopt.k = 8;
  const NeighborIndex index = build_semantic_neighbors(train_part, sopt);

  ModelConfig mcfg;
  mcfg.width = 4;
  mcfg.height = 4;
  mcfg.hidden = 16;
  mcfg.filters = {8, 4, 1};

  const std::int64_t lb = mcfg.sampling.lookback();
  const std::int64_t cut = train_part.bins;
  const auto train_samples = make_samples(scaled, mcfg.sampling, lb, cut);
  const auto val_samples = make_samples(scaled, mcfg.sampling, cut, d.bins);

  ForecastModel model(ModelKind::irconv_lstm, mcfg, index, 5);
  TrainOptions topt;
  topt.epochs = 50;
  topt.batch_size = 32;
  topt.optimizer.lr = 1e-2;
  topt.seed = 5;
  const TrainResult tr = train_model(model, scaled, train_samples, val_samples, topt);

  ForecastModel best = ForecastModel::restore(tr.best, mcfg, index);
  const EvalReport rep =
      evaluate_model(best, scaled, d, val_samples, "constant_city", 1);
  fs::create_directories(work / "c8");
  save_eval_report(rep, (work / "c8" / "constant_city.eval.txt").string());

  const double mae = rep.row("overall").mae.value_or(1e9);
  const double dt = now_s() - t0;
  out.pass = mae < 0.05 * level && dt < 120.0;
  out.detail = fmt("constant 4x4 city, level %.0f: best val MAE %.4f after "
                   "epoch %lld of 50 (limit %.2f), %.0fs",
                   level, mae, (long long)tr.best_epoch, 0.05 * level, dt);
  return out;
}

// --- criteria 9 and 10: CLI end-to-end on the two-phase city ---------------

struct CliRunner {
  std::string cli;
  fs::path work;
  std::string last_log;

  bool run(const std::string& args, const std::string& logname) {
    const fs::path log = work / logname;
    const std::string cmd = "\"" + cli + "\" " + args + " > \"" +
                            log.string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    last_log = slurp(log.string());
    return rc == 0;
  }
};

std::string c9_config(const fs::path& dir, const fs::path& tensor,
                      const fs::path& index, int seed, const fs::path& out_dir) {
  std::ostringstream js;
  js << "{\n"
     << "  \"experiment_id\": \"city_s" << seed << "\",\n"
     << "  \"dataset\": {\"tensor\": \"" << tensor.string() << "\"},\n"
     << "  \"split_ratio\": 0.8,\n"
     << "  \"neighbors\": {\"metric\": \"dtw\", \"k\": 8, \"band\": 6, "
        "\"index_path\": \"" << index.string() << "\"},\n"
     << "  \"model\": {\"kind\": \"irconv_lstm\", \"hidden\": 16, "
        "\"filters\": [4, 1]},\n"
     << "  \"sampling\": {\"l_c\": 24, \"l_p\": 7, \"l_q\": 2},\n"
     << "  \"optimizer\": {\"lr\": 0.002, \"rho\": 0.9, \"eps\": 1e-8},\n"
     << "  \"train\": {\"epochs\": 8, \"batch_size\": 32},\n"
     << "  \"seed\": " << seed << ",\n"
     << "  \"threads\": 1,\n"
     << "  \"out_dir\": \"" << out_dir.string() << "\"\n"
     << "}\n";
  const fs::path p = dir / ("city_s" + std::to_string(seed) + ".json");
  std::ofstream(p) << js.str();
  return p.string();
}

std::optional<double> parse_overall_mae(const fs::path& eval_path,
                                        const std::string& experiment_id) {
  std::ifstream in(eval_path);
  const std::string prefix = "row," + experiment_id + ",mae,overall,";
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(prefix, 0) == 0)
      return std::strtod(line.c_str() + prefix.size(), nullptr);
  return std::nullopt;
}

void criterion_city(CliRunner& cli, const fs::path& work, Outcome& c9,
                    Outcome& c10) {
  c9.number = 9;
  c10.number = 10;
  const double t0 = now_s();

  const fs::path dir = work / "c9";
  fs::create_directories(dir);
  const fs::path tensor = dir / "city.tensor";
  const fs::path index = dir / "neighbors.dtw";

  // Strong shared swings, heavy per-cell noise, and a persistent group
  // state: the zero clip then makes clean group-mate pooling pay off in a
  // way local averaging cannot match within the epoch budget.
  if (!cli.run("synth --width 8 --height 8 --groups 2 --amplitude 20 "
               "--group-noise 1.0 --cell-noise 0.5 --ar-coeff 0.98 "
               "--bins 1008 --seed 90210 --out \"" + dir.string() + "\"",
               "c9_synth.log")) {
    c9.detail = "synth failed: " + cli.last_log.substr(0, 200);
    c10.detail = "skipped: city generation failed";
    return;
  }

  if (!cli.run("neighbors --tensor \"" + tensor.string() + "\" --metric dtw "
               "--band 6 --split-ratio 0.8 --out \"" + dir.string() + "\"",
               "c9_neighbors.log")) {
    c9.detail = "neighbor build failed: " + cli.last_log.substr(0, 200);
    c10.detail = "skipped: neighbor build failed";
    return;
  }
  double overlap_frac = -1.0;
  {
    const std::string tag = "overlap<=1 fraction ";
    const auto at = cli.last_log.find(tag);
    if (at != std::string::npos)
      overlap_frac = std::strtod(cli.last_log.c_str() + at + tag.size(), nullptr);
  }

  std::vector<double> mae_ir, mae_cnn;
  for (int seed = 1; seed <= 5; ++seed) {
    const std::string cfg = c9_config(dir, tensor, index, seed, dir / "runs");
    const std::string id = "city_s" + std::to_string(seed);
    if (!cli.run("train --config \"" + cfg + "\"",
                 "c9_train_s" + std::to_string(seed) + ".log")) {
      c9.detail = id + " train failed: " + cli.last_log.substr(0, 200);
      c10.detail = "skipped: training failed";
      return;
    }
    auto mi = parse_overall_mae(dir / "runs" / (id + ".eval.txt"), id);
    if (!cli.run("baseline --config \"" + cfg + "\" --kind cnn_lstm",
                 "c9_cnn_s" + std::to_string(seed) + ".log")) {
      c9.detail = id + " baseline failed: " + cli.last_log.substr(0, 200);
      c10.detail = "skipped: baseline failed";
      return;
    }
    auto mc = parse_overall_mae(dir / "runs" / (id + "_cnn_lstm.eval.txt"),
                                id + "_cnn_lstm");
    if (!mi || !mc) {
      c9.detail = id + ": missing overall MAE row in an eval report";
      c10.detail = "skipped: missing eval rows";
      return;
    }
    mae_ir.push_back(*mi);
    mae_cnn.push_back(*mc);
  }

  const double med_ir = median5(mae_ir);
  const double med_cnn = median5(mae_cnn);
  const double dt = now_s() - t0;
  c9.pass = overlap_frac >= 0.70 && med_ir < med_cnn && dt < 900.0;
  c9.detail = fmt("8x8 two-phase city, 5 seeds: median val MAE semantic %.4f "
                  "vs spatial %.4f; overlap<=1 fraction %.3f (need >= 0.70), "
                  "%.0fs",
                  med_ir, med_cnn, overlap_frac, dt);

  // criterion 10: replay seed 1 into a fresh directory, byte-compare artifacts
  const double t10 = now_s();
  const fs::path dir10 = work / "c10";
  fs::create_directories(dir10);
  const std::string cfg10 = c9_config(dir10, tensor, index, 1, dir10 / "runs");
  if (!cli.run("train --config \"" + cfg10 + "\"", "c10_train.log")) {
    c10.detail = "replay failed: " + cli.last_log.substr(0, 200);
    return;
  }
  bool all_equal = true;
  std::string diffs;
  for (const char* suffix : {".checkpoint", ".eval.txt", ".loss.csv"}) {
    const std::string a = slurp((dir / "runs" / ("city_s1" + std::string(suffix))).string());
    const std::string b = slurp((dir10 / "runs" / ("city_s1" + std::string(suffix))).string());
    if (a.empty() || a != b) {
      all_equal = false;
      diffs += std::string(suffix) + " ";
    }
  }
  c10.pass = all_equal;
  c10.detail = all_equal
                   ? fmt("repeated seed-1 run: checkpoint, eval report and loss "
                         "history byte-identical, %.0fs", now_s() - t10)
                   : "artifacts differ between identical runs: " + diffs;
}

// --- criterion 11: optional public-data directional check ------------------

Outcome criterion_public_data(CliRunner& cli, const fs::path& work) {
  Outcome out;
  out.number = 11;
  out.gating = false;

  const char* trips = std::getenv("BIKECAST_PUBLIC_TRIPS");
  if (!trips || !*trips) {
    out.skipped = true;
    out.detail = "no public trip data wired in; set BIKECAST_PUBLIC_TRIPS, "
                 "BIKECAST_PUBLIC_ORIGIN (lon,lat) and BIKECAST_PUBLIC_START "
                 "to run the directional check";
    return out;
  }
  const char* origin = std::getenv("BIKECAST_PUBLIC_ORIGIN");
  const char* start = std::getenv("BIKECAST_PUBLIC_START");
  if (!origin || !start) {
    out.skipped = true;
    out.detail = "BIKECAST_PUBLIC_TRIPS is set but BIKECAST_PUBLIC_ORIGIN or "
                 "BIKECAST_PUBLIC_START is missing";
    return out;
  }
  double lon = 0, lat = 0;
  if (std::sscanf(origin, "%lf,%lf", &lon, &lat) != 2) {
    out.skipped = true;
    out.detail = "BIKECAST_PUBLIC_ORIGIN must be \"lon,lat\"";
    return out;
  }
  const char* bins_env = std::getenv("BIKECAST_PUBLIC_BINS");
  const int bins = bins_env ? std::atoi(bins_env) : 720;
  const char* stations = std::getenv("BIKECAST_PUBLIC_STATIONS");

  const fs::path dir = work / "c11";
  fs::create_directories(dir);
  std::string ingest_args =
      "ingest --trips \"" + std::string(trips) + "\" --origin-lon " +
      std::to_string(lon) + " --origin-lat " + std::to_string(lat) +
      " --width 10 --height 10 --start " + std::string(start) + " --bins " +
      std::to_string(bins) + " --out \"" + dir.string() + "\"";
  if (stations && *stations)
    ingest_args += " --stations \"" + std::string(stations) + "\"";
  if (!cli.run(ingest_args, "c11_ingest.log")) {
    out.detail = "ingest failed: " + cli.last_log.substr(0, 200);
    return out;
  }

  const std::string cfg =
      c9_config(dir, dir / "demand.tensor", dir / "unused.index", 1, dir / "runs");
  // the real-data run builds its own index: strip the prebuilt path
  {
    std::string text = slurp(cfg);
    const std::string key = ", \"index_path\": \"";
    const auto at = text.find(key);
    if (at != std::string::npos) {
      const auto end = text.find('"', at + key.size());
      text.erase(at, end + 1 - at);
      std::ofstream(cfg) << text;
    }
  }
  if (!cli.run("train --config \"" + cfg + "\"", "c11_train.log")) {
    out.detail = "train failed: " + cli.last_log.substr(0, 200);
    return out;
  }
  if (!cli.run("baseline --config \"" + cfg + "\" --kind cnn_lstm",
               "c11_cnn.log")) {
    out.detail = "baseline failed: " + cli.last_log.substr(0, 200);
    return out;
  }

  auto mape_of = [&](const std::string& id) -> std::optional<double> {
    std::ifstream in(dir / "runs" / (id + ".eval.txt"));
    const std::string prefix = "row," + id + ",mape,overall,";
    std::string line;
    while (std::getline(in, line))
      if (line.rfind(prefix, 0) == 0)
        return std::strtod(line.c_str() + prefix.size(), nullptr);
    return std::nullopt;
  };
  const auto mi = mape_of("city_s1");
  const auto mc = mape_of("city_s1_cnn_lstm");
  if (!mi || !mc) {
    out.detail = "missing overall MAPE rows in the public-data reports";
    return out;
  }
  out.pass = *mi <= *mc;
  out.detail = fmt("public data: semantic MAPE %.2f%% vs spatial %.2f%% "
                   "(directional, not gating)", *mi, *mc);
  return out;
}

}  // namespace

int main() {
  const fs::path work = "acceptance_work";
  std::error_code ec;
  fs::remove_all(work, ec);
  fs::create_directories(work);

  CliRunner cli;
  cli.work = work;
  if (const char* env = std::getenv("BIKECAST_CLI"); env && *env) {
    cli.cli = env;
  } else if (fs::exists("tools/bikecast")) {
    cli.cli = "tools/bikecast";
  }

  std::vector<Outcome> results;
  auto guard = [&](int number, Outcome (*fn)()) {
    try {
      results.push_back(fn());
    } catch (const std::exception& e) {
      Outcome o;
      o.number = number;
      o.detail = std::string("exception: ") + e.what();
      results.push_back(o);
    }
  };

  guard(1, criterion_gradients);
  guard(2, criterion_conv_equivalence);
  guard(3, criterion_dtw_oracle);
  guard(4, criterion_pearson_properties);
  guard(5, criterion_sampling);
  guard(6, criterion_lstm);

  try {
    results.push_back(criterion_overfit(work));
  } catch (const std::exception& e) {
    Outcome o;
    o.number = 8;
    o.detail = std::string("exception: ") + e.what();
    results.push_back(o);
  }

  Outcome c9, c10;
  if (cli.cli.empty()) {
    c9.number = 9;
    c9.detail = "CLI binary not found; set BIKECAST_CLI";
    c10.number = 10;
    c10.detail = "CLI binary not found; set BIKECAST_CLI";
  } else {
    try {
      criterion_city(cli, work, c9, c10);
    } catch (const std::exception& e) {
      c9.number = 9;
      c10.number = 10;
      if (c9.detail.empty()) c9.detail = std::string("exception: ") + e.what();
      if (c10.detail.empty()) c10.detail = std::string("exception: ") + e.what();
    }
  }
  results.push_back(c9);
  results.push_back(c10);

  try {
    results.push_back(criterion_public_data(cli, work));
  } catch (const std::exception& e) {
    Outcome o;
    o.number = 11;
    o.gating = false;
    o.detail = std::string("exception: ") + e.what();
    results.push_back(o);
  }

  // criterion 7 scans the reports the runs above wrote
  try {
    results.push_back(criterion_metrics(work));
  } catch (const std::exception& e) {
    Outcome o;
    o.number = 7;
    o.detail = std::string("exception: ") + e.what();
    results.push_back(o);
  }

  std::sort(results.begin(), results.end(),
            [](const Outcome& a, const Outcome& b) { return a.number < b.number; });

  int failed_gating = 0;
  for (const Outcome& r : results) {
    const char* tag = r.skipped ? "[SKIP]" : (r.pass ? "[PASS]" : "[FAIL]");
    std::printf("%s criterion %2d: %s\n", tag, r.number, r.detail.c_str());
    if (!r.pass && !r.skipped && r.gating) ++failed_gating;
  }
  std::printf("%d of %zu gating criteria failed\n", failed_gating,
              results.size() - 1);  // criterion 11 never gates
  return failed_gating == 0 ? 0 : 1;
}

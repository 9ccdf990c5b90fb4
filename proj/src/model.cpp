#include "bikecast/model.hpp"

#include <cmath>
#include <utility>

#include "bikecast/common.hpp"

namespace bikecast {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::irconv_lstm: return "irconv_lstm";
    case ModelKind::cnn_lstm: return "cnn_lstm";
    case ModelKind::lstm_only: return "lstm_only";
  }
  throw ConfigError("unhandled model kind");
}

ModelKind model_kind_from(const std::string& name) {
  if (name == "irconv_lstm") return ModelKind::irconv_lstm;
  if (name == "cnn_lstm") return ModelKind::cnn_lstm;
  if (name == "lstm_only") return ModelKind::lstm_only;
  throw ConfigError("unknown model kind '" + name + "'");
}

void ModelConfig::validate() const {
  if (width < 1 || height < 1)
    throw ConfigError("model grid must be at least 1x1, got " +
                      std::to_string(width) + "x" + std::to_string(height));
  if (hidden < 1)
    throw ConfigError("hidden size must be >= 1, got " + std::to_string(hidden));
  if (filters.empty()) throw ConfigError("filter list is empty");
  for (int f : filters)
    if (f < 1)
      throw ConfigError("filter counts must be >= 1, got " + std::to_string(f));
  if (filters.back() != 1)
    throw ConfigError("last conv layer must emit 1 channel, got " +
                      std::to_string(filters.back()));
  sampling.validate();
}

namespace {

diff::Tensor zero_param(diff::Shape shape) {
  std::vector<double> data(std::size_t(diff::numel_of(shape)), 0.0);
  return diff::Tensor::param(std::move(shape), std::move(data));
}

}  // namespace

ForecastModel::ForecastModel(ModelKind kind, const ModelConfig& cfg,
                             NeighborIndex index)
    : kind_(kind), cfg_(cfg), index_(std::move(index)) {
  cfg_.validate();
  index_.validate();
  if (index_.width != cfg_.width || index_.height != cfg_.height)
    throw ConfigError("neighbor index grid " + std::to_string(index_.width) +
                      "x" + std::to_string(index_.height) +
                      " does not match model grid " + std::to_string(cfg_.width) +
                      "x" + std::to_string(cfg_.height));

  const std::int64_t n = cfg_.cells();
  const std::int64_t dh = cfg_.hidden;
  const std::int64_t s = index_.kernel_size;
  const bool with_conv = kind_ != ModelKind::lstm_only;

  branch_names_ = with_conv
                      ? std::vector<std::string>{"trend", "period", "closeness"}
                      : std::vector<std::string>{"closeness"};

  if (with_conv) {
    std::int64_t c = 1;
    for (int f : cfg_.filters) {
      plans_.push_back(make_tap_plan(index_, c));
      c = f;
    }
  }

  for (std::size_t bi = 0; bi < branch_names_.size(); ++bi) {
    Branch b;
    if (with_conv) {
      std::int64_t c = 1;
      for (int f : cfg_.filters) {
        IrConvLayer layer;
        layer.kernel = zero_param({f, c * s});
        layer.bias = zero_param({f, 1});
        b.conv.push_back(std::move(layer));
        c = f;
      }
    }
    b.lstm.w_if = zero_param({dh, n});
    b.lstm.w_hf = zero_param({dh, dh});
    b.lstm.b_if = zero_param({dh, 1});
    b.lstm.b_hf = zero_param({dh, 1});
    b.lstm.w_ii = zero_param({dh, n});
    b.lstm.w_hi = zero_param({dh, dh});
    b.lstm.b_ii = zero_param({dh, 1});
    b.lstm.b_hi = zero_param({dh, 1});
    b.lstm.w_ic = zero_param({dh, n});
    b.lstm.w_hc = zero_param({dh, dh});
    b.lstm.b_ic = zero_param({dh, 1});
    b.lstm.b_hc = zero_param({dh, 1});
    b.lstm.w_io = zero_param({dh, n});
    b.lstm.w_ho = zero_param({dh, dh});
    b.lstm.b_io = zero_param({dh, 1});
    b.lstm.b_ho = zero_param({dh, 1});
    b.head_w = zero_param({n, dh});
    b.head_b = zero_param({n, 1});
    branches_.push_back(std::move(b));
  }
  for (std::size_t bi = 0; bi < branch_names_.size(); ++bi)
    fusion_.push_back(zero_param({n, 1}));

  register_params();
}

ForecastModel::ForecastModel(ModelKind kind, const ModelConfig& cfg,
                             NeighborIndex index, std::uint64_t seed)
    : ForecastModel(kind, cfg, std::move(index)) {
  init_params(seed);
}

void ForecastModel::register_params() {
  named_.clear();
  fans_.clear();
  const std::int64_t n = cfg_.cells();
  const std::int64_t dh = cfg_.hidden;
  const std::int64_t s = index_.kernel_size;

  auto reg = [&](std::string name, const diff::Tensor& t, std::int64_t fan) {
    named_.emplace_back(std::move(name), t);
    fans_.push_back(fan);
  };

  for (std::size_t bi = 0; bi < branches_.size(); ++bi) {
    const std::string& bn = branch_names_[bi];
    const Branch& b = branches_[bi];
    std::int64_t c = 1;
    for (std::size_t l = 0; l < b.conv.size(); ++l) {
      const std::string base = bn + ".conv" + std::to_string(l + 1);
      reg(base + ".kernel", b.conv[l].kernel, c * s);
      reg(base + ".bias", b.conv[l].bias, c * s);
      c = cfg_.filters[l];
    }
    reg(bn + ".lstm.w_if", b.lstm.w_if, n);
    reg(bn + ".lstm.w_hf", b.lstm.w_hf, dh);
    reg(bn + ".lstm.b_if", b.lstm.b_if, n);
    reg(bn + ".lstm.b_hf", b.lstm.b_hf, dh);
    reg(bn + ".lstm.w_ii", b.lstm.w_ii, n);
    reg(bn + ".lstm.w_hi", b.lstm.w_hi, dh);
    reg(bn + ".lstm.b_ii", b.lstm.b_ii, n);
    reg(bn + ".lstm.b_hi", b.lstm.b_hi, dh);
    reg(bn + ".lstm.w_ic", b.lstm.w_ic, n);
    reg(bn + ".lstm.w_hc", b.lstm.w_hc, dh);
    reg(bn + ".lstm.b_ic", b.lstm.b_ic, n);
    reg(bn + ".lstm.b_hc", b.lstm.b_hc, dh);
    reg(bn + ".lstm.w_io", b.lstm.w_io, n);
    reg(bn + ".lstm.w_ho", b.lstm.w_ho, dh);
    reg(bn + ".lstm.b_io", b.lstm.b_io, n);
    reg(bn + ".lstm.b_ho", b.lstm.b_ho, dh);
    reg(bn + ".head.weight", b.head_w, dh);
    reg(bn + ".head.bias", b.head_b, dh);
  }
  for (std::size_t bi = 0; bi < branch_names_.size(); ++bi)
    reg("fusion." + branch_names_[bi], fusion_[bi], 1);
}

void ForecastModel::init_params(std::uint64_t seed) {
  // One stream in registration order keeps init reproducible from the seed
  // alone; stream 0 is reserved for it, training draws use other streams.
  Rng rng(derive_seed(seed, 0));
  for (std::size_t i = 0; i < named_.size(); ++i) {
    const double bound = 1.0 / std::sqrt(double(fans_[i]));
    for (double& v : named_[i].second.data())
      v = (rng.uniform() * 2.0 - 1.0) * bound;
  }
}

ForecastModel ForecastModel::restore(const Checkpoint& ck, const ModelConfig& cfg,
                                     NeighborIndex index) {
  ForecastModel m(model_kind_from(ck.model_kind), cfg, std::move(index));
  if (ck.entries.size() != m.named_.size())
    throw DataError("checkpoint holds " + std::to_string(ck.entries.size()) +
                    " parameters, model needs " + std::to_string(m.named_.size()));
  for (std::size_t i = 0; i < m.named_.size(); ++i) {
    const Checkpoint::Entry& e = ck.entries[i];
    auto& [name, t] = m.named_[i];
    if (e.name != name)
      throw DataError("checkpoint parameter " + std::to_string(i) + " is '" +
                      e.name + "', expected '" + name + "'");
    if (e.shape != t.shape())
      throw DataError("checkpoint parameter '" + name + "' has shape " +
                      diff::shape_str(e.shape) + ", expected " +
                      diff::shape_str(t.shape()));
    t.data() = e.data;
  }
  return m;
}

std::vector<diff::Tensor> ForecastModel::params() const {
  std::vector<diff::Tensor> out;
  out.reserve(named_.size());
  for (const auto& [name, t] : named_) out.push_back(t);
  return out;
}

Checkpoint ForecastModel::snapshot() const {
  Checkpoint ck;
  ck.model_kind = to_string(kind_);
  ck.metric = index_.metric;
  ck.entries.reserve(named_.size());
  for (const auto& [name, t] : named_)
    ck.entries.push_back({name, t.shape(), t.data()});
  return ck;
}

diff::Tensor ForecastModel::branch_feature(
    const Branch& b, const ScaledTensor& scaled,
    const std::vector<std::int64_t>& frames) const {
  const std::int64_t n = cfg_.cells();
  if (frames.empty()) throw DataError("branch got an empty frame window");

  std::vector<diff::Tensor> xs;
  xs.reserve(frames.size());
  for (std::int64_t k : frames) {
    if (k < 0 || k >= scaled.bins)
      throw DataError("frame bin " + std::to_string(k) +
                      " outside tensor horizon of " + std::to_string(scaled.bins));
    const double* f = scaled.frame(k);
    std::vector<double> vals(f, f + n);
    if (!b.conv.empty()) {
      diff::Tensor img = diff::Tensor::constant({1, n}, std::move(vals));
      diff::Tensor out = irconv_stack(img, b.conv, plans_);
      xs.push_back(diff::reshape(out, {n, 1}));
    } else {
      xs.push_back(diff::Tensor::constant({n, 1}, std::move(vals)));
    }
  }
  LstmState st = lstm_over_sequence(b.lstm, xs);
  return diff::add(diff::matmul(b.head_w, st.h), b.head_b);
}

diff::Tensor ForecastModel::forward(const ScaledTensor& scaled,
                                    const TrainingSample& sample) const {
  if (scaled.width != cfg_.width || scaled.height != cfg_.height)
    throw ConfigError("tensor grid " + std::to_string(scaled.width) + "x" +
                      std::to_string(scaled.height) + " does not match model grid " +
                      std::to_string(cfg_.width) + "x" + std::to_string(cfg_.height));

  diff::Tensor z;
  for (std::size_t bi = 0; bi < branches_.size(); ++bi) {
    const std::vector<std::int64_t>* frames = nullptr;
    if (kind_ == ModelKind::lstm_only) {
      frames = &sample.closeness;
    } else {
      frames = bi == 0 ? &sample.trend : bi == 1 ? &sample.period : &sample.closeness;
    }
    diff::Tensor f = branch_feature(branches_[bi], scaled, *frames);
    diff::Tensor term = diff::mul(fusion_[bi], f);
    z = z.defined() ? diff::add(z, term) : term;
  }
  return diff::reshape(diff::tanh(z), {cfg_.cells()});
}

}  // namespace bikecast

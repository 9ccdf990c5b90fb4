#include "bikecast/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "bikecast/kernels.hpp"

namespace bikecast::diff {

std::int64_t numel_of(const Shape& s) {
  std::int64_t n = 1;
  for (std::int64_t d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k) out += ",";
    out += std::to_string(s[k]);
  }
  return out + "]";
}

namespace {

thread_local int g_no_grad_depth = 0;

void check_shape(const Shape& s, std::size_t data_size, const char* who) {
  std::int64_t n = numel_of(s);
  if (n < 0 || std::size_t(n) != data_size)
    throw std::invalid_argument(std::string(who) + ": shape " + shape_str(s) +
                                " does not hold " + std::to_string(data_size) +
                                " values");
}

std::shared_ptr<Node> make_node(Shape shape, std::vector<double> data) {
  auto n = std::make_shared<Node>();
  check_shape(shape, data.size(), "tensor");
  n->shape = std::move(shape);
  n->data = std::move(data);
  return n;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* who) {
  if (a.shape() != b.shape())
    throw std::invalid_argument(std::string(who) + ": shape mismatch " +
                                shape_str(a.shape()) + " vs " +
                                shape_str(b.shape()));
}

// Wires parents and the backprop closure onto a fresh output node, honoring
// the no-grad mode.
Tensor finish(std::shared_ptr<Node> out, std::vector<Tensor> inputs,
              std::function<void(Node&)> backprop) {
  if (g_no_grad_depth == 0) {
    bool needs = false;
    for (const Tensor& t : inputs) needs = needs || t.requires_grad();
    if (needs) {
      out->requires_grad = true;
      out->parents.reserve(inputs.size());
      for (const Tensor& t : inputs) out->parents.push_back(t.handle());
      out->backprop = std::move(backprop);
    }
  }
  return Tensor::wrap(std::move(out));
}

}  // namespace

NoGradGuard::NoGradGuard() { ++g_no_grad_depth; }
NoGradGuard::~NoGradGuard() { --g_no_grad_depth; }
bool grad_enabled() { return g_no_grad_depth == 0; }

Tensor Tensor::constant(Shape shape, std::vector<double> data) {
  return wrap(make_node(std::move(shape), std::move(data)));
}

Tensor Tensor::full(Shape shape, double fill) {
  std::int64_t n = numel_of(shape);
  if (n < 0) throw std::invalid_argument("tensor: negative extent");
  return wrap(make_node(std::move(shape), std::vector<double>(std::size_t(n), fill)));
}

Tensor Tensor::param(Shape shape, std::vector<double> data) {
  auto n = make_node(std::move(shape), std::move(data));
  n->requires_grad = true;
  n->ensure_grad();
  return wrap(std::move(n));
}

Tensor Tensor::wrap(std::shared_ptr<Node> n) {
  Tensor t;
  t.node_ = std::move(n);
  return t;
}

const Shape& Tensor::shape() const {
  if (!node_) throw std::logic_error("empty tensor");
  return node_->shape;
}

std::int64_t Tensor::numel() const { return numel_of(shape()); }

std::vector<double>& Tensor::data() {
  if (!node_) throw std::logic_error("empty tensor");
  return node_->data;
}

const std::vector<double>& Tensor::data() const {
  if (!node_) throw std::logic_error("empty tensor");
  return node_->data;
}

const std::vector<double>& Tensor::grad() const {
  if (!node_) throw std::logic_error("empty tensor");
  if (!node_->requires_grad)
    throw std::logic_error("tensor does not require gradients");
  const_cast<Node*>(node_.get())->ensure_grad();
  return node_->grad;
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::zero_grad() {
  if (!node_) return;
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

double Tensor::scalar() const {
  if (numel() != 1) throw std::logic_error("scalar() on tensor of shape " + shape_str(shape()));
  return data()[0];
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  auto out = make_node(a.shape(), std::vector<double>(a.data().size()));
  kernels::active().add(out->data.data(), a.data().data(), b.data().data(),
                        out->data.size());
  return finish(std::move(out), {a, b}, [](Node& self) {
    const auto& g = self.grad;
    for (int p = 0; p < 2; ++p) {
      Node& parent = *self.parents[std::size_t(p)];
      if (!parent.requires_grad) continue;
      parent.ensure_grad();
      kernels::active().axpy(parent.grad.data(), 1.0, g.data(), g.size());
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  auto out = make_node(a.shape(), std::vector<double>(a.data().size()));
  kernels::active().mul(out->data.data(), a.data().data(), b.data().data(),
                        out->data.size());
  return finish(std::move(out), {a, b}, [](Node& self) {
    const auto& g = self.grad;
    Node& a_n = *self.parents[0];
    Node& b_n = *self.parents[1];
    if (a_n.requires_grad) {
      a_n.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i)
        a_n.grad[i] += g[i] * b_n.data[i];
    }
    if (b_n.requires_grad) {
      b_n.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i)
        b_n.grad[i] += g[i] * a_n.data[i];
    }
  });
}

namespace {

void expect_matrix(const Tensor& t, const char* who) {
  if (t.shape().size() != 2)
    throw std::invalid_argument(std::string(who) + ": expected a matrix, got " +
                                shape_str(t.shape()));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  expect_matrix(a, "matmul");
  expect_matrix(b, "matmul");
  const std::int64_t m = a.shape()[0], k = a.shape()[1];
  if (b.shape()[0] != k)
    throw std::invalid_argument("matmul: inner extents differ, " +
                                shape_str(a.shape()) + " x " + shape_str(b.shape()));
  const std::int64_t n = b.shape()[1];
  const auto& ops = kernels::active();

  // transpose the right factor so each product is one contiguous dot
  std::vector<double> bt(std::size_t(n) * std::size_t(k));
  for (std::int64_t q = 0; q < k; ++q)
    for (std::int64_t j = 0; j < n; ++j)
      bt[std::size_t(j) * std::size_t(k) + std::size_t(q)] =
          b.data()[std::size_t(q) * std::size_t(n) + std::size_t(j)];

  auto out = make_node({m, n}, std::vector<double>(std::size_t(m) * std::size_t(n)));
  for (std::int64_t i = 0; i < m; ++i)
    for (std::int64_t j = 0; j < n; ++j)
      out->data[std::size_t(i) * std::size_t(n) + std::size_t(j)] =
          ops.dot(a.data().data() + std::size_t(i) * std::size_t(k),
                  bt.data() + std::size_t(j) * std::size_t(k), std::size_t(k));

  return finish(std::move(out), {a, b}, [m, n, k](Node& self) {
    const auto& ops2 = kernels::active();
    Node& a_n = *self.parents[0];
    Node& b_n = *self.parents[1];
    const auto& g = self.grad;
    if (a_n.requires_grad) {
      a_n.ensure_grad();
      // dA[i,:] += sum_j g[i,j] * B[:,j]^T, via the transposed copy
      std::vector<double> bt(std::size_t(n) * std::size_t(k));
      for (std::int64_t q = 0; q < k; ++q)
        for (std::int64_t j = 0; j < n; ++j)
          bt[std::size_t(j) * std::size_t(k) + std::size_t(q)] =
              b_n.data[std::size_t(q) * std::size_t(n) + std::size_t(j)];
      for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < n; ++j)
          ops2.axpy(a_n.grad.data() + std::size_t(i) * std::size_t(k),
                    g[std::size_t(i) * std::size_t(n) + std::size_t(j)],
                    bt.data() + std::size_t(j) * std::size_t(k), std::size_t(k));
    }
    if (b_n.requires_grad) {
      b_n.ensure_grad();
      // dB[q,:] += sum_i A[i,q] * g[i,:]
      for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t q = 0; q < k; ++q)
          ops2.axpy(b_n.grad.data() + std::size_t(q) * std::size_t(n),
                    a_n.data[std::size_t(i) * std::size_t(k) + std::size_t(q)],
                    g.data() + std::size_t(i) * std::size_t(n), std::size_t(n));
    }
  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  expect_matrix(a, "matmul_nt");
  expect_matrix(b, "matmul_nt");
  const std::int64_t m = a.shape()[0], k = a.shape()[1];
  if (b.shape()[1] != k)
    throw std::invalid_argument("matmul_nt: inner extents differ, " +
                                shape_str(a.shape()) + " x " + shape_str(b.shape()) +
                                "^T");
  const std::int64_t n = b.shape()[0];
  const auto& ops = kernels::active();

  auto out = make_node({m, n}, std::vector<double>(std::size_t(m) * std::size_t(n)));
  for (std::int64_t i = 0; i < m; ++i)
    for (std::int64_t j = 0; j < n; ++j)
      out->data[std::size_t(i) * std::size_t(n) + std::size_t(j)] =
          ops.dot(a.data().data() + std::size_t(i) * std::size_t(k),
                  b.data().data() + std::size_t(j) * std::size_t(k), std::size_t(k));

  return finish(std::move(out), {a, b}, [m, n, k](Node& self) {
    const auto& ops2 = kernels::active();
    Node& a_n = *self.parents[0];
    Node& b_n = *self.parents[1];
    const auto& g = self.grad;
    if (a_n.requires_grad) {
      a_n.ensure_grad();
      for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < n; ++j)
          ops2.axpy(a_n.grad.data() + std::size_t(i) * std::size_t(k),
                    g[std::size_t(i) * std::size_t(n) + std::size_t(j)],
                    b_n.data.data() + std::size_t(j) * std::size_t(k),
                    std::size_t(k));
    }
    if (b_n.requires_grad) {
      b_n.ensure_grad();
      for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < n; ++j)
          ops2.axpy(b_n.grad.data() + std::size_t(j) * std::size_t(k),
                    g[std::size_t(i) * std::size_t(n) + std::size_t(j)],
                    a_n.data.data() + std::size_t(i) * std::size_t(k),
                    std::size_t(k));
    }
  });
}

Tensor gather(const Tensor& src, std::vector<std::int64_t> idx, Shape out_shape) {
  const std::int64_t want = numel_of(out_shape);
  if (want < 0 || std::size_t(want) != idx.size())
    throw std::invalid_argument("gather: " + std::to_string(idx.size()) +
                                " indices cannot fill shape " + shape_str(out_shape));
  const std::int64_t limit = src.numel();
  std::vector<double> data(idx.size());
  const auto& s = src.data();
  for (std::size_t g = 0; g < idx.size(); ++g) {
    std::int64_t ix = idx[g];
    if (ix >= limit || ix < -1)
      throw std::invalid_argument("gather: index " + std::to_string(ix) +
                                  " out of range for " + std::to_string(limit) +
                                  " source slots");
    data[g] = ix < 0 ? 0.0 : s[std::size_t(ix)];
  }
  auto out = make_node(std::move(out_shape), std::move(data));
  return finish(std::move(out), {src}, [idx = std::move(idx)](Node& self) {
    Node& src_n = *self.parents[0];
    if (!src_n.requires_grad) return;
    src_n.ensure_grad();
    for (std::size_t g = 0; g < idx.size(); ++g)
      if (idx[g] >= 0) src_n.grad[std::size_t(idx[g])] += self.grad[g];
  });
}

Tensor sigmoid(const Tensor& t) {
  std::vector<double> data(t.data().size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    double x = t.data()[i];
    if (x >= 0.0) {
      data[i] = 1.0 / (1.0 + std::exp(-x));
    } else {
      double e = std::exp(x);
      data[i] = e / (1.0 + e);
    }
  }
  auto out = make_node(t.shape(), std::move(data));
  return finish(std::move(out), {t}, [](Node& self) {
    Node& in = *self.parents[0];
    if (!in.requires_grad) return;
    in.ensure_grad();
    for (std::size_t i = 0; i < self.data.size(); ++i) {
      double y = self.data[i];
      in.grad[i] += self.grad[i] * y * (1.0 - y);
    }
  });
}

Tensor tanh(const Tensor& t) {
  std::vector<double> data(t.data().size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = std::tanh(t.data()[i]);
  auto out = make_node(t.shape(), std::move(data));
  return finish(std::move(out), {t}, [](Node& self) {
    Node& in = *self.parents[0];
    if (!in.requires_grad) return;
    in.ensure_grad();
    for (std::size_t i = 0; i < self.data.size(); ++i) {
      double y = self.data[i];
      in.grad[i] += self.grad[i] * (1.0 - y * y);
    }
  });
}

Tensor relu(const Tensor& t) {
  std::vector<double> data(t.data().size());
  for (std::size_t i = 0; i < data.size(); ++i)
    data[i] = t.data()[i] > 0.0 ? t.data()[i] : 0.0;
  auto out = make_node(t.shape(), std::move(data));
  return finish(std::move(out), {t}, [](Node& self) {
    Node& in = *self.parents[0];
    if (!in.requires_grad) return;
    in.ensure_grad();
    for (std::size_t i = 0; i < self.data.size(); ++i)
      if (in.data[i] > 0.0) in.grad[i] += self.grad[i];
  });
}

Tensor reshape(const Tensor& t, Shape shape) {
  if (numel_of(shape) != t.numel())
    throw std::invalid_argument("reshape: " + shape_str(t.shape()) +
                                " cannot become " + shape_str(shape));
  auto out = make_node(std::move(shape), t.data());
  return finish(std::move(out), {t}, [](Node& self) {
    Node& in = *self.parents[0];
    if (!in.requires_grad) return;
    in.ensure_grad();
    kernels::active().axpy(in.grad.data(), 1.0, self.grad.data(), self.grad.size());
  });
}

Tensor concat(const Tensor& a, const Tensor& b) {
  std::vector<double> data;
  data.reserve(a.data().size() + b.data().size());
  data.insert(data.end(), a.data().begin(), a.data().end());
  data.insert(data.end(), b.data().begin(), b.data().end());
  // size must be read before the move; argument order is unspecified
  const std::int64_t n = std::int64_t(data.size());
  auto out = make_node({n}, std::move(data));
  return finish(std::move(out), {a, b}, [](Node& self) {
    Node& a_n = *self.parents[0];
    Node& b_n = *self.parents[1];
    std::size_t na = a_n.data.size();
    if (a_n.requires_grad) {
      a_n.ensure_grad();
      kernels::active().axpy(a_n.grad.data(), 1.0, self.grad.data(), na);
    }
    if (b_n.requires_grad) {
      b_n.ensure_grad();
      kernels::active().axpy(b_n.grad.data(), 1.0, self.grad.data() + na,
                             self.grad.size() - na);
    }
  });
}

Tensor bias_add_rows(const Tensor& x, const Tensor& b) {
  expect_matrix(x, "bias_add_rows");
  const std::int64_t r = x.shape()[0], c = x.shape()[1];
  if (b.numel() != r)
    throw std::invalid_argument("bias_add_rows: bias " + shape_str(b.shape()) +
                                " does not match " + std::to_string(r) + " rows");
  std::vector<double> data(x.data().size());
  for (std::int64_t i = 0; i < r; ++i) {
    const double bv = b.data()[std::size_t(i)];
    const double* src = x.data().data() + std::size_t(i) * std::size_t(c);
    double* dst = data.data() + std::size_t(i) * std::size_t(c);
    for (std::int64_t j = 0; j < c; ++j) dst[std::size_t(j)] = src[std::size_t(j)] + bv;
  }
  auto out = make_node(x.shape(), std::move(data));
  return finish(std::move(out), {x, b}, [r, c](Node& self) {
    const auto& ops = kernels::active();
    Node& x_n = *self.parents[0];
    Node& b_n = *self.parents[1];
    if (x_n.requires_grad) {
      x_n.ensure_grad();
      ops.axpy(x_n.grad.data(), 1.0, self.grad.data(), self.grad.size());
    }
    if (b_n.requires_grad) {
      b_n.ensure_grad();
      for (std::int64_t i = 0; i < r; ++i)
        b_n.grad[std::size_t(i)] +=
            ops.sum(self.grad.data() + std::size_t(i) * std::size_t(c), std::size_t(c));
    }
  });
}

Tensor mse(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "mse");
  const std::size_t n = pred.data().size();
  if (n == 0) throw std::invalid_argument("mse: empty tensors");
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = pred.data()[i] - target.data()[i];
  const double sq = kernels::active().dot(diff.data(), diff.data(), n);
  auto out = make_node({1}, {sq / double(n)});
  return finish(std::move(out), {pred, target}, [n](Node& self) {
    const double g0 = self.grad[0] * 2.0 / double(n);
    Node& p = *self.parents[0];
    Node& t = *self.parents[1];
    if (p.requires_grad) {
      p.ensure_grad();
      for (std::size_t i = 0; i < n; ++i)
        p.grad[i] += g0 * (p.data[i] - t.data[i]);
    }
    if (t.requires_grad) {
      t.ensure_grad();
      for (std::size_t i = 0; i < n; ++i)
        t.grad[i] -= g0 * (p.data[i] - t.data[i]);
    }
  });
}

void backward(const Tensor& loss, double seed) {
  if (!loss.defined()) throw std::logic_error("backward on empty tensor");
  Node* root = loss.node();
  if (loss.numel() != 1)
    throw std::invalid_argument("backward: loss must be scalar, got " +
                                shape_str(loss.shape()));
  if (root->backward_ran)
    throw std::logic_error(
        "backward already ran on this graph; rebuild the forward pass first");
  root->backward_ran = true;
  if (!root->requires_grad) return;  // nothing reachable wants gradients

  // iterative post-order: children before parents in `order`
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next].get();
      ++next;
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->grad[0] += seed;
  // order is post-order (parents after children), so walking it back to
  // front visits every node before any of its inputs
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backprop) {
      node->ensure_grad();
      node->backprop(*node);
    }
  }
}

}  // namespace bikecast::diff

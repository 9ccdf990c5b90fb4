#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

// Tape-based reverse-mode differentiation over dense double tensors. Each op
// allocates a node holding its output and a closure that routes the output
// gradient to the inputs; backward() walks the graph once in reverse
// topological order. Graphs are built per forward pass and freed when the
// last Tensor handle drops.

namespace bikecast::diff {

using Shape = std::vector<std::int64_t>;

std::int64_t numel_of(const Shape& s);
std::string shape_str(const Shape& s);

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until gradient first arrives
  bool requires_grad = false;
  bool backward_ran = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;

  void ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), 0.0);
  }
};

class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Shape shape, std::vector<double> data);
  static Tensor full(Shape shape, double fill);
  // Leaf with requires_grad set; its grad survives until zero_grad().
  static Tensor param(Shape shape, std::vector<double> data);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::int64_t numel() const;
  std::vector<double>& data();
  const std::vector<double>& data() const;
  // Gradient of a leaf; zeros if backward has not reached it yet.
  const std::vector<double>& grad() const;
  bool requires_grad() const;
  void zero_grad();
  double scalar() const;

  Node* node() const { return node_.get(); }
  std::shared_ptr<Node> handle() const { return node_; }
  static Tensor wrap(std::shared_ptr<Node> n);

 private:
  std::shared_ptr<Node> node_;
};

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// a: [m,k] x b: [k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);
// a: [m,k] x b: [n,k] -> [m,n]; b is read row-wise (as a transposed factor),
// which keeps every inner product contiguous.
Tensor matmul_nt(const Tensor& a, const Tensor& b);
// out[g] = src[idx[g]], with idx == -1 producing 0 and routing no gradient.
Tensor gather(const Tensor& src, std::vector<std::int64_t> idx, Shape out_shape);
Tensor sigmoid(const Tensor& t);
Tensor tanh(const Tensor& t);
Tensor relu(const Tensor& t);
Tensor reshape(const Tensor& t, Shape shape);
Tensor concat(const Tensor& a, const Tensor& b);  // flat join
// x: [r,c] plus per-row bias b: [r] or [r,1]
Tensor bias_add_rows(const Tensor& x, const Tensor& b);
// mean squared error over all slots -> scalar [1]
Tensor mse(const Tensor& pred, const Tensor& target);

// Accumulates seed * dLoss/dLeaf into every reachable leaf. loss must be
// scalar. A second call on the same loss node throws: the graph holds no
// state to replay.
void backward(const Tensor& loss, double seed = 1.0);

// While alive, new ops record no graph and outputs never require gradients.
struct NoGradGuard {
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};
bool grad_enabled();

}  // namespace bikecast::diff

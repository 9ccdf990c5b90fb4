#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "bikecast/autodiff.hpp"
#include "bikecast/common.hpp"
#include "bikecast/irconv.hpp"
#include "bikecast/neighbors.hpp"

using namespace bikecast;
using diff::Tensor;

namespace {

std::vector<double> randvec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1, 1);
  return v;
}

IrConvLayer rand_layer(Rng& rng, std::int64_t out_c, std::int64_t in_c,
                       std::int64_t kernel) {
  IrConvLayer l;
  l.kernel = Tensor::param({out_c, in_c * kernel},
                           randvec(rng, std::size_t(out_c * in_c * kernel)));
  l.bias = Tensor::param({out_c, 1}, randvec(rng, std::size_t(out_c)));
  return l;
}

}  // namespace

TEST_CASE("spatial tap list reproduces a dense 3x3 convolution") {
  // on the Moore index the irregular convolution must agree with a classic
  // zero-padded convolution slot for slot
  Rng rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 2 + int(rng.index(5));
    const int h = 2 + int(rng.index(5));
    const std::int64_t in_c = 1 + std::int64_t(rng.index(3));
    const std::int64_t out_c = 1 + std::int64_t(rng.index(4));
    const std::size_t cells = std::size_t(w) * std::size_t(h);

    const NeighborIndex index = build_spatial_neighbors(w, h);
    const TapPlan plan = make_tap_plan(index, in_c);
    const IrConvLayer layer = rand_layer(rng, out_c, in_c, 9);
    Tensor input = Tensor::constant({in_c, std::int64_t(cells)},
                                    randvec(rng, std::size_t(in_c) * cells));

    Tensor got = irconv_forward(input, layer, plan);
    REQUIRE(got.shape() == diff::Shape{out_c, std::int64_t(cells)});

    const std::vector<double> want = oracles::dense_conv3x3(
        input.data(), int(in_c), w, h, layer.kernel.data(), layer.bias.data(),
        int(out_c));
    for (std::size_t s = 0; s < want.size(); ++s)
      CHECK(got.data()[s] == doctest::Approx(want[s]).epsilon(1e-10));
  }
}

TEST_CASE("hand-checked single tap sums") {
  // 1x2 grid: each cell has one real neighbor (the other cell), 7 sentinels
  const NeighborIndex index = build_spatial_neighbors(2, 1);
  const TapPlan plan = make_tap_plan(index, 1);
  IrConvLayer layer;
  // weight 1 on the self slot, 10 on the east-neighbor slot, everything
  // else on sentinel slots
  std::vector<double> kw(9, 100.0);  // sentinel slots must contribute nothing
  kw[0] = 1.0;   // self
  kw[2] = 10.0;  // (di,dj)=(-1,0), west
  kw[7] = 10.0;  // (di,dj)=(1,0), east
  layer.kernel = Tensor::param({1, 9}, kw);
  layer.bias = Tensor::param({1, 1}, {0.5});
  Tensor input = Tensor::constant({1, 2}, {2.0, 3.0});

  Tensor out = irconv_forward(input, layer, plan);
  // cell (1,1): self 2 plus east neighbor 3; its west slot is off grid
  CHECK(out.data()[0] == doctest::Approx(2.0 + 10.0 * 3.0 + 0.5));
  // cell (2,1): self 3 plus west neighbor 2; its east slot is off grid
  CHECK(out.data()[1] == doctest::Approx(3.0 + 10.0 * 2.0 + 0.5));
}

TEST_CASE("semantic taps read distant cells") {
  // a hand-built index sending cell 1's only tap to the far corner
  NeighborIndex index;
  index.metric = "dtw";
  index.width = 2;
  index.height = 2;
  index.kernel_size = 2;
  index.entries = {{1, 1}, {2, 2},    // (1,1): self + far corner
                   {1, 2}, {0, 0},    // (1,2): self only
                   {2, 1}, {0, 0},
                   {2, 2}, {1, 1}};
  index.validate();

  const TapPlan plan = make_tap_plan(index, 1);
  IrConvLayer layer;
  layer.kernel = Tensor::param({1, 2}, {1.0, 1.0});
  layer.bias = Tensor::param({1, 1}, {0.0});
  // frame in row-major cell order: (1,1)=1, (1,2)=2, (2,1)=3, (2,2)=4
  Tensor input = Tensor::constant({1, 4}, {1, 2, 3, 4});
  Tensor out = irconv_forward(input, layer, plan);
  CHECK(out.data()[0] == 5.0);  // 1 + 4
  CHECK(out.data()[1] == 2.0);  // sentinel adds zero
  CHECK(out.data()[2] == 3.0);
  CHECK(out.data()[3] == 5.0);  // 4 + 1
}

TEST_CASE("stack applies the rectifier between layers only") {
  const NeighborIndex index = build_spatial_neighbors(1, 1);
  const TapPlan p1 = make_tap_plan(index, 1);
  const TapPlan p2 = make_tap_plan(index, 1);

  IrConvLayer l1, l2;
  l1.kernel = Tensor::param({1, 9}, std::vector<double>(9, 0.0));
  l1.kernel.data()[0] = 1.0;
  l1.bias = Tensor::param({1, 1}, {0.0});
  l2 = l1;
  l2.kernel = Tensor::param({1, 9}, std::vector<double>(9, 0.0));
  l2.kernel.data()[0] = 1.0;
  l2.bias = Tensor::param({1, 1}, {0.0});

  const std::vector<IrConvLayer> layers = {l1, l2};
  const std::vector<TapPlan> plans = {p1, p2};

  Tensor neg = Tensor::constant({1, 1}, {-2.0});
  Tensor out = irconv_stack(neg, layers, plans);
  // relu after layer 1 clips -2 to 0; the identity tail leaves 0 alone
  CHECK(out.data()[0] == 0.0);

  // a single layer never rectifies, so the sign survives
  const std::vector<IrConvLayer> single = {l1};
  const std::vector<TapPlan> one_plan = {p1};
  Tensor out1 = irconv_stack(neg, single, one_plan);
  CHECK(out1.data()[0] == -2.0);
}

TEST_CASE("layer gradients pass finite differences") {
  Rng rng(53);
  const NeighborIndex index = build_spatial_neighbors(3, 2);
  const TapPlan plan = make_tap_plan(index, 2);
  IrConvLayer layer = rand_layer(rng, 3, 2, 9);
  Tensor input = Tensor::param({2, 6}, randvec(rng, 12));
  Tensor target = Tensor::constant({3, 6}, randvec(rng, 18));

  auto loss = [&] {
    return diff::mse(irconv_forward(input, layer, plan), target);
  };
  CHECK(oracles::fd_check(loss, layer.kernel).max_rel < 1e-4);
  CHECK(oracles::fd_check(loss, layer.bias).max_rel < 1e-4);
  CHECK(oracles::fd_check(loss, input).max_rel < 1e-4);
}

TEST_CASE("channel mismatch is rejected") {
  const NeighborIndex index = build_spatial_neighbors(2, 2);
  const TapPlan plan = make_tap_plan(index, 2);  // expects 2 input channels
  Rng rng(54);
  const IrConvLayer layer = rand_layer(rng, 1, 2, 9);
  Tensor input = Tensor::constant({1, 4}, randvec(rng, 4));  // only 1 channel
  CHECK_THROWS_AS(irconv_forward(input, layer, plan), std::logic_error);
}

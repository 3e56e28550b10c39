#include "fae/tensor.hpp"

#include <cmath>

#include "doctest.h"
#include "fae/errors.hpp"
#include "fae/rng.hpp"
#include "oracles.hpp"

using namespace fae;

namespace {

Tensor2 random_tensor(std::size_t c, std::size_t t, Rng& rng) {
  Tensor2 out(c, t);
  for (double& v : out.data) v = rng.uniform(-1.0, 1.0);
  return out;
}

ConvParams random_params(std::size_t out_c, std::size_t in_c, std::size_t f,
                         std::size_t d, Rng& rng) {
  ConvParams p(out_c, in_c, f, d);
  for (double& w : p.weights) w = rng.uniform(-1.0, 1.0);
  return p;
}

}  // namespace

TEST_CASE("conv forward: 1x1 identity maps input to output") {
  ConvParams p(2, 2, 1, 1);
  p.w(0, 0, 0) = 1.0;
  p.w(1, 1, 0) = 1.0;
  Rng rng(7);
  const Tensor2 x = random_tensor(2, 5, rng);
  const Tensor2 y = conv_forward(x, p);
  CHECK(y.data == x.data);
}

TEST_CASE("conv forward: older-tap kernel is a pure delay with zero padding") {
  ConvParams p(1, 1, 2, 3);
  p.w(0, 0, 0) = 1.0;  // oldest tap only
  p.w(0, 0, 1) = 0.0;
  Tensor2 x(1, 6);
  x.data = {1, 2, 3, 4, 5, 6};
  const Tensor2 y = conv_forward(x, p);
  const std::vector<double> expected = {0, 0, 0, 1, 2, 3};
  CHECK(y.data == expected);
}

TEST_CASE("conv forward matches the brute-force oracle") {
  Rng rng(11);
  SUBCASE("the spec's random case") {
    const ConvParams p = random_params(3, 2, 2, 2, rng);
    const Tensor2 x = random_tensor(2, 7, rng);
    const Tensor2 got = conv_forward(x, p);
    const Tensor2 want = oracle::conv_brute(x, p);
    REQUIRE(got.data.size() == want.data.size());
    for (std::size_t i = 0; i < got.data.size(); ++i) {
      CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
    }
  }
  SUBCASE("assorted shapes") {
    const std::size_t shapes[][4] = {
        {1, 1, 1, 1}, {1, 1, 3, 2}, {4, 3, 2, 4}, {2, 5, 2, 1}, {3, 2, 4, 8}};
    for (const auto& s : shapes) {
      const ConvParams p = random_params(s[0], s[1], s[2], s[3], rng);
      const Tensor2 x = random_tensor(s[1], 12, rng);
      const Tensor2 got = conv_forward(x, p);
      const Tensor2 want = oracle::conv_brute(x, p);
      for (std::size_t i = 0; i < got.data.size(); ++i) {
        CHECK(std::abs(got.data[i] - want.data[i]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("conv forward shape errors") {
  ConvParams p(1, 2, 2, 1);
  CHECK_THROWS_AS(conv_forward(Tensor2(1, 4), p), ShapeError);
  CHECK_THROWS_AS(conv_forward(Tensor2(2, 0), p), ShapeError);
}

TEST_CASE("conv backward: zero grad gives zero gradients") {
  Rng rng(3);
  const ConvParams p = random_params(2, 2, 2, 2, rng);
  const Tensor2 x = random_tensor(2, 6, rng);
  const ConvGrads g = conv_backward(Tensor2(2, 6), x, p);
  for (const double v : g.input.data) CHECK(v == 0.0);
  for (const double v : g.weights) CHECK(v == 0.0);
}

TEST_CASE("conv backward: identity kernel passes grad through") {
  ConvParams p(1, 1, 1, 1);
  p.w(0, 0, 0) = 1.0;
  Rng rng(5);
  const Tensor2 x = random_tensor(1, 6, rng);
  const Tensor2 g = random_tensor(1, 6, rng);
  const ConvGrads grads = conv_backward(g, x, p);
  CHECK(grads.input.data == g.data);
}

TEST_CASE("conv backward matches finite differences of a quadratic loss") {
  // loss = sum(forward(x)^2) / 2, so dL/d(out) = out.
  Rng rng(13);
  const ConvParams p = random_params(2, 2, 2, 2, rng);
  const Tensor2 x = random_tensor(2, 6, rng);

  const Tensor2 out = conv_forward(x, p);
  const ConvGrads analytic = conv_backward(out, x, p);

  const auto loss_of_input = [&](const std::vector<double>& flat) {
    Tensor2 xi = x;
    xi.data = flat;
    const Tensor2 o = conv_forward(xi, p);
    double acc = 0.0;
    for (const double v : o.data) acc += v * v;
    return acc / 2.0;
  };
  const std::vector<double> fd_in = oracle::fd_gradient(loss_of_input, x.data);
  for (std::size_t i = 0; i < fd_in.size(); ++i) {
    const double denom = std::max(std::abs(fd_in[i]), 1e-8);
    CHECK(std::abs(analytic.input.data[i] - fd_in[i]) / denom <= 1e-6);
  }

  const auto loss_of_weights = [&](const std::vector<double>& flat) {
    ConvParams pw = p;
    pw.weights = flat;
    const Tensor2 o = conv_forward(x, pw);
    double acc = 0.0;
    for (const double v : o.data) acc += v * v;
    return acc / 2.0;
  };
  const std::vector<double> fd_w =
      oracle::fd_gradient(loss_of_weights, p.weights);
  for (std::size_t i = 0; i < fd_w.size(); ++i) {
    const double denom = std::max(std::abs(fd_w[i]), 1e-8);
    CHECK(std::abs(analytic.weights[i] - fd_w[i]) / denom <= 1e-6);
  }
}

TEST_CASE("conv backward shape errors") {
  Rng rng(1);
  const ConvParams p = random_params(2, 2, 2, 1, rng);
  const Tensor2 x = random_tensor(2, 6, rng);
  CHECK_THROWS_AS(conv_backward(Tensor2(3, 6), x, p), ShapeError);
  CHECK_THROWS_AS(conv_backward(Tensor2(2, 5), x, p), ShapeError);
}

TEST_CASE("relu forward and backward") {
  Tensor2 x(1, 3);
  x.data = {-1, 0, 2};
  const Tensor2 y = relu_forward(x);
  CHECK(y.data == std::vector<double>{0, 0, 2});

  Tensor2 g(1, 3);
  g.data = {5, 5, 5};
  const Tensor2 gx = relu_backward(g, x);
  CHECK(gx.data == std::vector<double>{0, 0, 5});  // subgradient 0 at 0

  CHECK_THROWS_AS(relu_backward(Tensor2(1, 2), x), ShapeError);
}

TEST_CASE("conv+relu composite gradient matches finite differences") {
  Rng rng(17);
  const ConvParams p = random_params(2, 1, 2, 2, rng);
  Tensor2 x = random_tensor(1, 8, rng);

  // Keep pre-activations away from the rectifier kink.
  const Tensor2 pre = conv_forward(x, p);
  for (const double v : pre.data) REQUIRE(std::abs(v) > 1e-4);

  const auto loss = [&](const std::vector<double>& flat) {
    Tensor2 xi = x;
    xi.data = flat;
    const Tensor2 act = relu_forward(conv_forward(xi, p));
    double acc = 0.0;
    for (const double v : act.data) acc += v * v;
    return acc / 2.0;
  };
  const Tensor2 act = relu_forward(pre);
  const Tensor2 g_pre = relu_backward(act, pre);
  const ConvGrads analytic = conv_backward(g_pre, x, p);

  const std::vector<double> fd = oracle::fd_gradient(loss, x.data);
  for (std::size_t i = 0; i < fd.size(); ++i) {
    const double denom = std::max(std::abs(fd[i]), 1e-8);
    CHECK(std::abs(analytic.input.data[i] - fd[i]) / denom <= 1e-6);
  }
}

TEST_CASE("causality: future perturbations never reach past outputs") {
  Rng rng(23);
  const ConvParams p = random_params(3, 2, 2, 4, rng);
  const Tensor2 x = random_tensor(2, 16, rng);
  const Tensor2 base = conv_forward(x, p);
  for (std::size_t tp = 0; tp < 16; ++tp) {
    Tensor2 perturbed = x;
    perturbed.at(1, tp) += 0.5;
    const Tensor2 out = conv_forward(perturbed, p);
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t t = 0; t < tp; ++t) {
        CHECK(out.at(c, t) == base.at(c, t));  // bit-identical
      }
    }
  }
}

TEST_CASE("linearity of the convolution") {
  Rng rng(29);
  const ConvParams p = random_params(2, 2, 3, 2, rng);
  const Tensor2 x = random_tensor(2, 10, rng);
  const Tensor2 y = random_tensor(2, 10, rng);
  const double a = 1.7, b = -0.3;
  Tensor2 combo(2, 10);
  for (std::size_t i = 0; i < combo.data.size(); ++i) {
    combo.data[i] = a * x.data[i] + b * y.data[i];
  }
  const Tensor2 lhs = conv_forward(combo, p);
  const Tensor2 fx = conv_forward(x, p);
  const Tensor2 fy = conv_forward(y, p);
  for (std::size_t i = 0; i < lhs.data.size(); ++i) {
    CHECK(std::abs(lhs.data[i] - (a * fx.data[i] + b * fy.data[i])) <= 1e-12);
  }
}

TEST_CASE("adjoint identity <G, forward(X)> == <backward_input(G), X>") {
  Rng rng(31);
  for (int rep = 0; rep < 5; ++rep) {
    const ConvParams p = random_params(3, 2, 2, 2, rng);
    const Tensor2 x = random_tensor(2, 9, rng);
    const Tensor2 g = random_tensor(3, 9, rng);
    const double lhs = oracle::dot_all(g, conv_forward(x, p));
    const double rhs = oracle::dot_all(conv_backward(g, x, p).input, x);
    CHECK(std::abs(lhs - rhs) <= 1e-10);
  }
}

TEST_CASE("determinism: repeated calls are bit-identical") {
  Rng rng(37);
  const ConvParams p = random_params(2, 2, 2, 2, rng);
  const Tensor2 x = random_tensor(2, 12, rng);
  const Tensor2 a = conv_forward(x, p);
  const Tensor2 b = conv_forward(x, p);
  CHECK(a.data == b.data);
  const ConvGrads ga = conv_backward(a, x, p);
  const ConvGrads gb = conv_backward(a, x, p);
  CHECK(ga.input.data == gb.input.data);
  CHECK(ga.weights == gb.weights);
}

#include "fae/tensor.hpp"

#include <string>

#include "fae/errors.hpp"

namespace fae {

namespace {

void check_conv_shapes(const Tensor2& input, const ConvParams& params) {
  if (input.length == 0) {
    throw ShapeError("conv: zero-length input");
  }
  if (params.in_channels != input.channels) {
    throw ShapeError("conv: input has " + std::to_string(input.channels) +
                     " channels, params expect " +
                     std::to_string(params.in_channels));
  }
  if (params.weights.size() !=
      params.out_channels * params.in_channels * params.kernel) {
    throw ShapeError("conv: weight array size does not match declared shape");
  }
}

}  // namespace

Tensor2 conv_forward(const Tensor2& input, const ConvParams& params) {
  check_conv_shapes(input, params);
  const std::size_t T = input.length;
  const std::size_t F = params.kernel;
  const std::size_t d = params.dilation;
  Tensor2 out(params.out_channels, T);
  for (std::size_t o = 0; o < params.out_channels; ++o) {
    double* out_row = &out.data[o * T];
    for (std::size_t i = 0; i < params.in_channels; ++i) {
      const double* in_row = &input.data[i * T];
      for (std::size_t k = 0; k < F; ++k) {
        const double wk = params.w(o, i, k);
        if (wk == 0.0) continue;
        const std::size_t shift = (F - 1 - k) * d;  // taps only reach backwards
        for (std::size_t t = shift; t < T; ++t) {
          out_row[t] += wk * in_row[t - shift];
        }
      }
    }
  }
  return out;
}

ConvGrads conv_backward(const Tensor2& grad_output, const Tensor2& cached_input,
                        const ConvParams& params) {
  check_conv_shapes(cached_input, params);
  if (grad_output.channels != params.out_channels ||
      grad_output.length != cached_input.length) {
    throw ShapeError("conv backward: grad_output shape mismatch");
  }
  const std::size_t T = cached_input.length;
  const std::size_t F = params.kernel;
  const std::size_t d = params.dilation;

  ConvGrads grads;
  grads.input = Tensor2(params.in_channels, T);
  grads.weights.assign(params.weights.size(), 0.0);

  for (std::size_t o = 0; o < params.out_channels; ++o) {
    const double* go_row = &grad_output.data[o * T];
    for (std::size_t i = 0; i < params.in_channels; ++i) {
      const double* in_row = &cached_input.data[i * T];
      double* gi_row = &grads.input.data[i * T];
      for (std::size_t k = 0; k < F; ++k) {
        const std::size_t shift = (F - 1 - k) * d;
        const double wk = params.w(o, i, k);
        double gw = 0.0;
        for (std::size_t t = shift; t < T; ++t) {
          const double g = go_row[t];
          gw += g * in_row[t - shift];
          gi_row[t - shift] += wk * g;
        }
        grads.weights[(o * params.in_channels + i) * F + k] += gw;
      }
    }
  }
  return grads;
}

Tensor2 relu_forward(const Tensor2& input) {
  Tensor2 out(input.channels, input.length);
  for (std::size_t n = 0; n < input.data.size(); ++n) {
    out.data[n] = input.data[n] > 0.0 ? input.data[n] : 0.0;
  }
  return out;
}

Tensor2 relu_backward(const Tensor2& grad, const Tensor2& cached_input) {
  if (grad.channels != cached_input.channels ||
      grad.length != cached_input.length) {
    throw ShapeError("relu backward: grad and cached input shapes differ");
  }
  Tensor2 out(grad.channels, grad.length);
  for (std::size_t n = 0; n < grad.data.size(); ++n) {
    out.data[n] = cached_input.data[n] > 0.0 ? grad.data[n] : 0.0;
  }
  return out;
}

}  // namespace fae

#pragma once

#include <cstddef>
#include <vector>

namespace fae {

// Dense channels x time array of doubles, row-major: data[c * length + t].
struct Tensor2 {
  std::size_t channels = 0;
  std::size_t length = 0;
  std::vector<double> data;

  Tensor2() = default;
  Tensor2(std::size_t c, std::size_t t, double fill = 0.0)
      : channels(c), length(t), data(c * t, fill) {}

  double& at(std::size_t c, std::size_t t) { return data[c * length + t]; }
  double at(std::size_t c, std::size_t t) const { return data[c * length + t]; }
  std::size_t size() const { return data.size(); }
};

// Bias-free 1-D convolution parameters.
// weights laid out [out_channels][in_channels][kernel], row-major; tap k = F-1
// reads the current sample, tap k = 0 the oldest one ((F-1)*d steps back).
struct ConvParams {
  std::size_t out_channels = 0;
  std::size_t in_channels = 0;
  std::size_t kernel = 1;
  std::size_t dilation = 1;
  std::vector<double> weights;

  ConvParams() = default;
  ConvParams(std::size_t out_c, std::size_t in_c, std::size_t f, std::size_t d)
      : out_channels(out_c),
        in_channels(in_c),
        kernel(f),
        dilation(d),
        weights(out_c * in_c * f, 0.0) {}

  double& w(std::size_t o, std::size_t i, std::size_t k) {
    return weights[(o * in_channels + i) * kernel + k];
  }
  double w(std::size_t o, std::size_t i, std::size_t k) const {
    return weights[(o * in_channels + i) * kernel + k];
  }
};

struct ConvGrads {
  Tensor2 input;                 // same shape as the cached forward input
  std::vector<double> weights;   // same layout as ConvParams::weights
};

// Causal dilated convolution with implicit left zero-padding of (F-1)*d
// positions; output length equals input length.
Tensor2 conv_forward(const Tensor2& input, const ConvParams& params);

// Exact adjoints of conv_forward with respect to input and weights.
ConvGrads conv_backward(const Tensor2& grad_output, const Tensor2& cached_input,
                        const ConvParams& params);

Tensor2 relu_forward(const Tensor2& input);

// Gradient of relu: passes grad where the cached pre-activation is > 0.
Tensor2 relu_backward(const Tensor2& grad, const Tensor2& cached_input);

}  // namespace fae

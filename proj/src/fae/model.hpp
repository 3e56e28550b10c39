#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fae/series_stats.hpp"
#include "fae/tensor.hpp"

namespace fae {

// Smallest N >= 1 with T <= 2 * F^(N-1). Requires F >= 2.
std::size_t derive_depth(std::size_t T, std::size_t F);

// log-sigma clamp applied before exponentiation on every sigma head.
constexpr double kLogSigmaMin = -6.0;
constexpr double kLogSigmaMax = 6.0;
double clamp_logsigma(double v);

struct FaeHyperparams {
  std::size_t T = 256;  // window length
  std::size_t J = 48;   // latent dimension
  std::size_t U = 128;  // filters per hidden layer
  std::size_t F = 2;    // filter length
  double gamma = 6e-5;  // learning rate
  std::size_t m = 32;   // mini-batch size
  double beta = 1.0;    // KL weight
  int alpha_default = 3;

  std::size_t depth() const { return derive_depth(T, F); }
  void validate() const;  // throws ConfigError on violated invariants
};

// Full parameter set. Encoder dilations ascend F^0..F^(N-1); decoder dilations
// mirror them. All four heads are 1x1 and dilation 1.
struct FaeModel {
  FaeHyperparams hyper;
  std::vector<ConvParams> encoder_layers;
  ConvParams enc_mu_head;
  ConvParams enc_logsigma_head;
  std::vector<ConvParams> decoder_layers;
  ConvParams dec_mu_head;
  ConvParams dec_logsigma_head;
  std::map<std::string, SeriesStats> normalizers;

  // Fixed layout order: encoder 0..N-1, enc_mu, enc_logsigma,
  // decoder 0..N-1, dec_mu, dec_logsigma. Persistence, gradients and
  // optimizer state all follow this order.
  std::vector<const ConvParams*> parameter_blocks() const;
  std::vector<ConvParams*> parameter_blocks();
};

FaeModel build_model(const FaeHyperparams& hyper, std::uint64_t seed);

std::size_t param_count(const FaeModel& model);
std::size_t param_count(const FaeHyperparams& hyper);

struct Encoding {
  std::vector<double> mu_z;
  std::vector<double> logsigma_z;  // raw head output, before the clamp
};

Encoding encode(const FaeModel& model, const Tensor2& x);

struct LatentSample {
  std::vector<double> mu_z;
  std::vector<double> logsigma_z;
  std::vector<double> epsilon;
  std::vector<double> z;
};

LatentSample reparameterize(const std::vector<double>& mu_z,
                            const std::vector<double>& logsigma_z,
                            const std::vector<double>& epsilon);

struct Decoding {
  Tensor2 mu_x;     // 1 x T
  Tensor2 sigma_x;  // 1 x T, strictly positive
};

Decoding decode(const FaeModel& model, const std::vector<double>& z);

struct ElboTerms {
  double nll = 0.0;
  double kl = 0.0;
  double loss = 0.0;
};

ElboTerms elbo_terms(const Tensor2& x, const Tensor2& mu_x,
                     const Tensor2& sigma_x, const std::vector<double>& mu_z,
                     const std::vector<double>& logsigma_z, double beta = 1.0);

// One weight-gradient array per parameter block, in layout order.
using GradBlocks = std::vector<std::vector<double>>;

GradBlocks zero_grads(const FaeModel& model);
void accumulate_grads(GradBlocks& into, const GradBlocks& from, double scale);

struct ForwardBackwardResult {
  ElboTerms terms;
  GradBlocks grads;
};

// Full encode -> reparameterize -> decode -> ELBO pass with epsilon held
// fixed (pathwise derivative). Deterministic given (model, x, epsilon).
ForwardBackwardResult forward_backward(const FaeModel& model, const Tensor2& x,
                                       const std::vector<double>& epsilon);

// Loss only, same pipeline, no gradient work.
ElboTerms forward_loss(const FaeModel& model, const Tensor2& x,
                       const std::vector<double>& epsilon);

void save_model(const FaeModel& model, const std::string& path);
FaeModel load_model(const std::string& path);

}  // namespace fae

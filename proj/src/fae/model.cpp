#include "fae/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "fae/errors.hpp"
#include "fae/ioutil.hpp"
#include "fae/rng.hpp"

namespace fae {

static_assert(std::endian::native == std::endian::little,
              "model files store weights little-endian");

std::size_t derive_depth(std::size_t T, std::size_t F) {
  if (F < 2) throw ConfigError("derive_depth: filter length F must be >= 2");
  if (T < 1) throw ConfigError("derive_depth: window length T must be >= 1");
  std::size_t n = 1;
  std::size_t pow = 1;  // F^(n-1)
  while (2 * pow < T) {
    pow *= F;
    ++n;
  }
  return n;
}

double clamp_logsigma(double v) {
  return std::min(kLogSigmaMax, std::max(kLogSigmaMin, v));
}

void FaeHyperparams::validate() const {
  if (T < 1 || J < 1 || U < 1 || m < 1) {
    throw ConfigError("hyperparameters T, J, U, m must be >= 1");
  }
  if (F < 2) throw ConfigError("filter length F must be >= 2");
  if (J >= T) throw ConfigError("latent dimension J must be < T");
  if (gamma <= 0.0) throw ConfigError("learning rate gamma must be > 0");
}

std::vector<const ConvParams*> FaeModel::parameter_blocks() const {
  std::vector<const ConvParams*> blocks;
  blocks.reserve(encoder_layers.size() + decoder_layers.size() + 4);
  for (const auto& l : encoder_layers) blocks.push_back(&l);
  blocks.push_back(&enc_mu_head);
  blocks.push_back(&enc_logsigma_head);
  for (const auto& l : decoder_layers) blocks.push_back(&l);
  blocks.push_back(&dec_mu_head);
  blocks.push_back(&dec_logsigma_head);
  return blocks;
}

std::vector<ConvParams*> FaeModel::parameter_blocks() {
  std::vector<ConvParams*> blocks;
  blocks.reserve(encoder_layers.size() + decoder_layers.size() + 4);
  for (auto& l : encoder_layers) blocks.push_back(&l);
  blocks.push_back(&enc_mu_head);
  blocks.push_back(&enc_logsigma_head);
  for (auto& l : decoder_layers) blocks.push_back(&l);
  blocks.push_back(&dec_mu_head);
  blocks.push_back(&dec_logsigma_head);
  return blocks;
}

static std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  while (exp--) r *= base;
  return r;
}

FaeModel build_model(const FaeHyperparams& hyper, std::uint64_t seed) {
  hyper.validate();
  const std::size_t N = hyper.depth();
  const std::size_t U = hyper.U;
  const std::size_t J = hyper.J;
  const std::size_t F = hyper.F;

  FaeModel model;
  model.hyper = hyper;
  model.encoder_layers.reserve(N);
  for (std::size_t h = 0; h < N; ++h) {
    model.encoder_layers.emplace_back(U, h == 0 ? 1 : U, F, ipow(F, h));
  }
  model.enc_mu_head = ConvParams(J, U, 1, 1);
  model.enc_logsigma_head = ConvParams(J, U, 1, 1);
  model.decoder_layers.reserve(N);
  for (std::size_t h = 0; h < N; ++h) {
    model.decoder_layers.emplace_back(U, h == 0 ? J : U, F, ipow(F, N - 1 - h));
  }
  model.dec_mu_head = ConvParams(1, U, 1, 1);
  model.dec_logsigma_head = ConvParams(1, U, 1, 1);

  Rng rng(seed);
  for (ConvParams* block : model.parameter_blocks()) {
    const double bound =
        std::sqrt(6.0 / static_cast<double>(block->in_channels * block->kernel));
    for (double& w : block->weights) w = rng.uniform(-bound, bound);
  }
  // The log-sigma heads start at zero so both sigmas begin at exp(0) = 1.
  // Random head weights put starting sigmas at the clamp extremes, and the
  // resulting r^2/sigma^2 gradient spikes stall Adam for thousands of steps.
  for (double& w : model.enc_logsigma_head.weights) w = 0.0;
  for (double& w : model.dec_logsigma_head.weights) w = 0.0;
  return model;
}

std::size_t param_count(const FaeModel& model) {
  std::size_t n = 0;
  for (const ConvParams* block : model.parameter_blocks()) {
    n += block->weights.size();
  }
  return n;
}

std::size_t param_count(const FaeHyperparams& hyper) {
  hyper.validate();
  const std::size_t N = hyper.depth();
  const std::size_t U = hyper.U, J = hyper.J, F = hyper.F;
  std::size_t n = 0;
  n += U * 1 * F + (N - 1) * U * U * F;  // encoder stack
  n += 2 * J * U;                        // latent heads
  n += U * J * F + (N - 1) * U * U * F;  // decoder stack
  n += 2 * U;                            // output heads
  return n;
}

namespace {

struct StackCache {
  std::vector<Tensor2> inputs;  // inputs[h] feeds layer h; inputs[N] = final activation
  std::vector<Tensor2> pre;     // conv outputs before the rectifier
};

Tensor2 stack_forward(const std::vector<ConvParams>& layers, const Tensor2& x,
                      StackCache* cache) {
  Tensor2 act = x;
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  for (const ConvParams& layer : layers) {
    Tensor2 pre = conv_forward(act, layer);
    Tensor2 next = relu_forward(pre);
    if (cache) {
      cache->inputs.push_back(std::move(act));
      cache->pre.push_back(std::move(pre));
    }
    act = std::move(next);
  }
  if (cache) cache->inputs.push_back(act);
  return act;
}

// Backward through conv->relu stack; weight gradients land in wgrads
// (one entry per layer), returns the gradient at the stack input.
Tensor2 stack_backward(const std::vector<ConvParams>& layers,
                       const StackCache& cache, Tensor2 grad,
                       std::vector<std::vector<double>*> wgrads) {
  for (std::size_t h = layers.size(); h-- > 0;) {
    grad = relu_backward(grad, cache.pre[h]);
    ConvGrads g = conv_backward(grad, cache.inputs[h], layers[h]);
    *wgrads[h] = std::move(g.weights);
    grad = std::move(g.input);
  }
  return grad;
}

void check_window(const FaeModel& model, const Tensor2& x) {
  if (x.channels != 1 || x.length != model.hyper.T) {
    throw ShapeError("expected a 1x" + std::to_string(model.hyper.T) +
                     " window, got " + std::to_string(x.channels) + "x" +
                     std::to_string(x.length));
  }
}

std::vector<double> column(const Tensor2& t, std::size_t col) {
  std::vector<double> v(t.channels);
  for (std::size_t c = 0; c < t.channels; ++c) v[c] = t.at(c, col);
  return v;
}

Tensor2 repeat_columns(const std::vector<double>& z, std::size_t T) {
  Tensor2 out(z.size(), T);
  for (std::size_t j = 0; j < z.size(); ++j) {
    for (std::size_t t = 0; t < T; ++t) out.at(j, t) = z[j];
  }
  return out;
}

}  // namespace

Encoding encode(const FaeModel& model, const Tensor2& x) {
  check_window(model, x);
  const Tensor2 hidden = stack_forward(model.encoder_layers, x, nullptr);
  const Tensor2 mu_full = conv_forward(hidden, model.enc_mu_head);
  const Tensor2 ls_full = conv_forward(hidden, model.enc_logsigma_head);
  const std::size_t last = model.hyper.T - 1;
  return Encoding{column(mu_full, last), column(ls_full, last)};
}

LatentSample reparameterize(const std::vector<double>& mu_z,
                            const std::vector<double>& logsigma_z,
                            const std::vector<double>& epsilon) {
  if (mu_z.size() != logsigma_z.size() || mu_z.size() != epsilon.size()) {
    throw ShapeError("reparameterize: mu, logsigma and epsilon lengths differ");
  }
  LatentSample s;
  s.mu_z = mu_z;
  s.logsigma_z = logsigma_z;
  s.epsilon = epsilon;
  s.z.resize(mu_z.size());
  for (std::size_t j = 0; j < mu_z.size(); ++j) {
    s.z[j] = mu_z[j] + std::exp(logsigma_z[j]) * epsilon[j];
  }
  return s;
}

Decoding decode(const FaeModel& model, const std::vector<double>& z) {
  if (z.size() != model.hyper.J) {
    throw ShapeError("decode: z has length " + std::to_string(z.size()) +
                     ", expected J=" + std::to_string(model.hyper.J));
  }
  const Tensor2 input = repeat_columns(z, model.hyper.T);
  const Tensor2 hidden = stack_forward(model.decoder_layers, input, nullptr);
  Decoding out;
  out.mu_x = conv_forward(hidden, model.dec_mu_head);
  out.sigma_x = conv_forward(hidden, model.dec_logsigma_head);
  for (double& v : out.sigma_x.data) v = std::exp(clamp_logsigma(v));
  return out;
}

ElboTerms elbo_terms(const Tensor2& x, const Tensor2& mu_x,
                     const Tensor2& sigma_x, const std::vector<double>& mu_z,
                     const std::vector<double>& logsigma_z, double beta) {
  if (x.channels != mu_x.channels || x.length != mu_x.length ||
      x.channels != sigma_x.channels || x.length != sigma_x.length) {
    throw ShapeError("elbo_terms: x, mu_x, sigma_x shapes differ");
  }
  if (mu_z.size() != logsigma_z.size()) {
    throw ShapeError("elbo_terms: mu_z and logsigma_z lengths differ");
  }
  ElboTerms terms;
  for (std::size_t n = 0; n < x.data.size(); ++n) {
    const double sigma = sigma_x.data[n];
    if (!(sigma > 0.0)) throw NumericError("elbo_terms: nonpositive sigma_x");
    const double r = x.data[n] - mu_x.data[n];
    terms.nll += 0.5 * std::log(2.0 * M_PI * sigma * sigma) +
                 r * r / (2.0 * sigma * sigma);
  }
  for (std::size_t j = 0; j < mu_z.size(); ++j) {
    const double ls = logsigma_z[j];
    terms.kl +=
        0.5 * (mu_z[j] * mu_z[j] + std::exp(2.0 * ls) - 1.0 - 2.0 * ls);
  }
  terms.loss = terms.nll + beta * terms.kl;
  return terms;
}

GradBlocks zero_grads(const FaeModel& model) {
  GradBlocks grads;
  for (const ConvParams* block : model.parameter_blocks()) {
    grads.emplace_back(block->weights.size(), 0.0);
  }
  return grads;
}

void accumulate_grads(GradBlocks& into, const GradBlocks& from, double scale) {
  if (into.size() != from.size()) {
    throw ShapeError("accumulate_grads: block count mismatch");
  }
  for (std::size_t b = 0; b < into.size(); ++b) {
    if (into[b].size() != from[b].size()) {
      throw ShapeError("accumulate_grads: block size mismatch");
    }
    for (std::size_t i = 0; i < into[b].size(); ++i) {
      into[b][i] += scale * from[b][i];
    }
  }
}

namespace {

struct PipelineState {
  StackCache enc_cache;
  Tensor2 enc_hidden;
  Tensor2 enc_mu_full, enc_ls_full;
  std::vector<double> mu_z, lsz_raw, lsz, sigma_z, z;
  StackCache dec_cache;
  Tensor2 dec_input;
  Tensor2 dec_hidden;
  Tensor2 mu_x, lsx_raw;
  Tensor2 sigma_x;
  ElboTerms terms;
};

PipelineState run_pipeline(const FaeModel& model, const Tensor2& x,
                           const std::vector<double>& epsilon,
                           bool need_cache) {
  check_window(model, x);
  if (epsilon.size() != model.hyper.J) {
    throw ShapeError("epsilon has length " + std::to_string(epsilon.size()) +
                     ", expected J=" + std::to_string(model.hyper.J));
  }
  const std::size_t T = model.hyper.T;
  const std::size_t J = model.hyper.J;
  PipelineState s;

  s.enc_hidden =
      stack_forward(model.encoder_layers, x, need_cache ? &s.enc_cache : nullptr);
  s.enc_mu_full = conv_forward(s.enc_hidden, model.enc_mu_head);
  s.enc_ls_full = conv_forward(s.enc_hidden, model.enc_logsigma_head);
  s.mu_z = column(s.enc_mu_full, T - 1);
  s.lsz_raw = column(s.enc_ls_full, T - 1);
  s.lsz.resize(J);
  s.sigma_z.resize(J);
  s.z.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    s.lsz[j] = clamp_logsigma(s.lsz_raw[j]);
    s.sigma_z[j] = std::exp(s.lsz[j]);
    s.z[j] = s.mu_z[j] + s.sigma_z[j] * epsilon[j];
  }

  s.dec_input = repeat_columns(s.z, T);
  s.dec_hidden = stack_forward(model.decoder_layers, s.dec_input,
                               need_cache ? &s.dec_cache : nullptr);
  s.mu_x = conv_forward(s.dec_hidden, model.dec_mu_head);
  s.lsx_raw = conv_forward(s.dec_hidden, model.dec_logsigma_head);
  s.sigma_x = Tensor2(1, T);
  for (std::size_t t = 0; t < T; ++t) {
    s.sigma_x.at(0, t) = std::exp(clamp_logsigma(s.lsx_raw.at(0, t)));
  }
  s.terms = elbo_terms(x, s.mu_x, s.sigma_x, s.mu_z, s.lsz, model.hyper.beta);
  return s;
}

bool clamp_interior(double raw) {
  return raw > kLogSigmaMin && raw < kLogSigmaMax;
}

}  // namespace

ElboTerms forward_loss(const FaeModel& model, const Tensor2& x,
                       const std::vector<double>& epsilon) {
  return run_pipeline(model, x, epsilon, false).terms;
}

ForwardBackwardResult forward_backward(const FaeModel& model, const Tensor2& x,
                                       const std::vector<double>& epsilon) {
  PipelineState s = run_pipeline(model, x, epsilon, true);
  const std::size_t T = model.hyper.T;
  const std::size_t J = model.hyper.J;
  const std::size_t N = model.encoder_layers.size();
  const double beta = model.hyper.beta;

  ForwardBackwardResult result;
  result.terms = s.terms;
  result.grads = zero_grads(model);
  // Layout: [0..N-1] encoder, [N] enc_mu, [N+1] enc_logsigma,
  //         [N+2..2N+1] decoder, [2N+2] dec_mu, [2N+3] dec_logsigma.
  GradBlocks& g = result.grads;

  // d nll / d mu_x and d nll / d (raw log sigma_x)
  Tensor2 g_mu_x(1, T);
  Tensor2 g_lsx(1, T);
  for (std::size_t t = 0; t < T; ++t) {
    const double sigma = s.sigma_x.at(0, t);
    const double r = x.at(0, t) - s.mu_x.at(0, t);
    const double inv_var = 1.0 / (sigma * sigma);
    g_mu_x.at(0, t) = -r * inv_var;
    g_lsx.at(0, t) =
        clamp_interior(s.lsx_raw.at(0, t)) ? 1.0 - r * r * inv_var : 0.0;
  }

  // Output heads.
  ConvGrads mu_head_g = conv_backward(g_mu_x, s.dec_hidden, model.dec_mu_head);
  ConvGrads ls_head_g =
      conv_backward(g_lsx, s.dec_hidden, model.dec_logsigma_head);
  g[2 * N + 2] = std::move(mu_head_g.weights);
  g[2 * N + 3] = std::move(ls_head_g.weights);
  Tensor2 g_dec_hidden = std::move(mu_head_g.input);
  for (std::size_t n = 0; n < g_dec_hidden.data.size(); ++n) {
    g_dec_hidden.data[n] += ls_head_g.input.data[n];
  }

  // Decoder stack.
  std::vector<std::vector<double>*> dec_wgrads;
  for (std::size_t h = 0; h < N; ++h) dec_wgrads.push_back(&g[N + 2 + h]);
  Tensor2 g_dec_input = stack_backward(model.decoder_layers, s.dec_cache,
                                       std::move(g_dec_hidden), dec_wgrads);

  // Adjoint of column repetition: sum over time.
  std::vector<double> g_z(J, 0.0);
  for (std::size_t j = 0; j < J; ++j) {
    double sum = 0.0;
    for (std::size_t t = 0; t < T; ++t) sum += g_dec_input.at(j, t);
    g_z[j] = sum;
  }

  // Reparameterization (epsilon fixed) plus the KL term.
  std::vector<double> g_mu_z(J), g_lsz_raw(J);
  for (std::size_t j = 0; j < J; ++j) {
    g_mu_z[j] = g_z[j] + beta * s.mu_z[j];
    const double g_lsz = g_z[j] * s.sigma_z[j] * epsilon[j] +
                         beta * (std::exp(2.0 * s.lsz[j]) - 1.0);
    g_lsz_raw[j] = clamp_interior(s.lsz_raw[j]) ? g_lsz : 0.0;
  }

  // Latent heads only contribute through column T-1.
  Tensor2 g_mu_full(J, T);
  Tensor2 g_ls_full(J, T);
  for (std::size_t j = 0; j < J; ++j) {
    g_mu_full.at(j, T - 1) = g_mu_z[j];
    g_ls_full.at(j, T - 1) = g_lsz_raw[j];
  }
  ConvGrads enc_mu_g = conv_backward(g_mu_full, s.enc_hidden, model.enc_mu_head);
  ConvGrads enc_ls_g =
      conv_backward(g_ls_full, s.enc_hidden, model.enc_logsigma_head);
  g[N] = std::move(enc_mu_g.weights);
  g[N + 1] = std::move(enc_ls_g.weights);
  Tensor2 g_enc_hidden = std::move(enc_mu_g.input);
  for (std::size_t n = 0; n < g_enc_hidden.data.size(); ++n) {
    g_enc_hidden.data[n] += enc_ls_g.input.data[n];
  }

  // Encoder stack; the gradient at the input window is discarded.
  std::vector<std::vector<double>*> enc_wgrads;
  for (std::size_t h = 0; h < N; ++h) enc_wgrads.push_back(&g[h]);
  stack_backward(model.encoder_layers, s.enc_cache, std::move(g_enc_hidden),
                 enc_wgrads);

  return result;
}

// ---------------------------------------------------------------------------
// Persistence. "FAE1" magic, text header (key=value, blank-line terminated),
// then all weight arrays as little-endian doubles in layout order.

static constexpr char kMagic[] = "FAE1\n";

void save_model(const FaeModel& model, const std::string& path) {
  std::ostringstream out;
  out << kMagic;
  out << "T=" << model.hyper.T << "\n";
  out << "J=" << model.hyper.J << "\n";
  out << "U=" << model.hyper.U << "\n";
  out << "F=" << model.hyper.F << "\n";
  out << "N=" << model.encoder_layers.size() << "\n";
  out << "beta=" << format_double(model.hyper.beta) << "\n";
  for (const auto& [id, stats] : model.normalizers) {
    out << "norm." << id << "=" << format_double(stats.mean) << ","
        << format_double(stats.std) << "\n";
  }
  out << "\n";
  for (const ConvParams* block : model.parameter_blocks()) {
    out.write(reinterpret_cast<const char*>(block->weights.data()),
              static_cast<std::streamsize>(block->weights.size() * sizeof(double)));
  }
  atomic_write_file(path, out.str());
}

FaeModel load_model(const std::string& path) {
  const std::string contents = read_file(path);
  const std::size_t magic_len = sizeof(kMagic) - 1;
  if (contents.size() < magic_len ||
      contents.compare(0, magic_len, kMagic) != 0) {
    throw FormatError("not a FAE1 model file: " + path);
  }

  std::map<std::string, std::string> header;
  std::map<std::string, SeriesStats> normalizers;
  std::size_t pos = magic_len;
  while (true) {
    const std::size_t eol = contents.find('\n', pos);
    if (eol == std::string::npos) {
      throw FormatError("model header not terminated by blank line: " + path);
    }
    const std::string line = contents.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) break;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError("malformed model header line '" + line + "'");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key.rfind("norm.", 0) == 0) {
      const std::string id = key.substr(5);
      const std::size_t comma = value.find(',');
      if (id.empty() || comma == std::string::npos) {
        throw FormatError("malformed normalizer line '" + line + "'");
      }
      SeriesStats stats;
      try {
        stats.mean = parse_double(value.substr(0, comma));
        stats.std = parse_double(value.substr(comma + 1));
      } catch (const DataError& e) {
        throw FormatError(std::string("malformed normalizer value: ") + e.what());
      }
      normalizers[id] = stats;
    } else if (key == "T" || key == "J" || key == "U" || key == "F" ||
               key == "N" || key == "beta") {
      header[key] = value;
    } else {
      throw FormatError("unknown model header key '" + key + "'");
    }
  }
  for (const char* key : {"T", "J", "U", "F", "N", "beta"}) {
    if (!header.count(key)) {
      throw FormatError(std::string("model header missing key '") + key + "'");
    }
  }

  FaeHyperparams hyper;
  try {
    hyper.T = static_cast<std::size_t>(parse_int(header["T"]));
    hyper.J = static_cast<std::size_t>(parse_int(header["J"]));
    hyper.U = static_cast<std::size_t>(parse_int(header["U"]));
    hyper.F = static_cast<std::size_t>(parse_int(header["F"]));
    hyper.beta = parse_double(header["beta"]);
    const std::size_t n = static_cast<std::size_t>(parse_int(header["N"]));
    if (n != derive_depth(hyper.T, hyper.F)) {
      throw FormatError("model header N inconsistent with T and F");
    }
  } catch (const DataError& e) {
    throw FormatError(std::string("malformed model header value: ") + e.what());
  }

  FaeModel model = build_model(hyper, 0);
  model.normalizers = std::move(normalizers);

  const std::size_t expected = param_count(model) * sizeof(double);
  const std::size_t available = contents.size() - pos;
  if (available != expected) {
    throw FormatError("model payload is " + std::to_string(available) +
                      " bytes, header implies " + std::to_string(expected) +
                      ": corrupt file " + path);
  }
  const char* cursor = contents.data() + pos;
  for (ConvParams* block : model.parameter_blocks()) {
    const std::size_t bytes = block->weights.size() * sizeof(double);
    std::memcpy(block->weights.data(), cursor, bytes);
    cursor += bytes;
  }
  return model;
}

}  // namespace fae

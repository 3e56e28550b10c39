#include "fae/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fae/errors.hpp"
#include "fae/rng.hpp"

namespace fae {

void TrainConfig::validate() const {
  if (!(gamma > 0.0)) throw ConfigError("train: gamma must be > 0");
  if (m < 1) throw ConfigError("train: mini-batch size m must be >= 1");
  if (patience < 1) throw ConfigError("train: patience must be >= 1");
  if (max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");
  if (stride_train < 1) throw ConfigError("train: stride must be >= 1");
}

OptimizerState make_optimizer_state(const FaeModel& model) {
  OptimizerState state;
  state.m = zero_grads(model);
  state.v = zero_grads(model);
  return state;
}

namespace {
constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;
}  // namespace

void adam_step_array(std::vector<double>& weights,
                     const std::vector<double>& grads, std::vector<double>& m,
                     std::vector<double>& v, std::size_t step, double gamma) {
  if (weights.size() != grads.size() || weights.size() != m.size() ||
      weights.size() != v.size()) {
    throw ShapeError("adam: weight, gradient and moment sizes differ");
  }
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double g = grads[i];
    m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g;
    v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g * g;
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    weights[i] -= gamma * m_hat / (std::sqrt(v_hat) + kEps);
  }
}

void adam_step(FaeModel& model, const GradBlocks& grads, OptimizerState& state,
               double gamma) {
  std::vector<ConvParams*> blocks = model.parameter_blocks();
  if (grads.size() != blocks.size()) {
    throw ShapeError("adam: gradient block count mismatch");
  }
  ++state.step;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    adam_step_array(blocks[b]->weights, grads[b], state.m[b], state.v[b],
                    state.step, gamma);
  }
}

namespace {

struct TrainingWindows {
  std::vector<Tensor2> train;  // one 1xT tensor per window
  std::vector<std::string> train_series;  // parallel, for diagnostics
  std::vector<Tensor2> val;
};

Tensor2 to_window_tensor(const std::vector<double>& window) {
  Tensor2 x(1, window.size());
  x.data = window;
  return x;
}

TrainingWindows collect_windows(const FaeModel& model,
                                const std::vector<SeriesRecord>& dataset,
                                std::size_t stride) {
  const std::size_t T = model.hyper.T;
  TrainingWindows out;
  for (const SeriesRecord& record : dataset) {
    const SeriesStats& stats = model.normalizers.at(record.id);
    const std::vector<double> normalized = apply_stats(stats, record.values);
    const IndexRange train = train_range(record);
    WindowSet train_set = make_windows_in_range(record.id, normalized, T,
                                                stride, 0, train.end);
    if (train_set.windows.empty()) {
      throw ConfigError("series '" + record.id +
                        "' yields no training windows (train partition of " +
                        std::to_string(train.size()) + " samples, T=" +
                        std::to_string(T) + ")");
    }
    for (WindowSample& w : train_set.windows) {
      out.train.push_back(to_window_tensor(w.window));
      out.train_series.push_back(record.id);
    }
    const IndexRange val = val_range(record);
    WindowSet val_set = make_windows_in_range(record.id, normalized, T, stride,
                                              val.begin, val.end);
    for (WindowSample& w : val_set.windows) {
      out.val.push_back(to_window_tensor(w.window));
    }
  }
  return out;
}

double validation_loss(const FaeModel& model, const std::vector<Tensor2>& val) {
  const std::vector<double> zero_eps(model.hyper.J, 0.0);
  double sum = 0.0;
  for (const Tensor2& x : val) sum += forward_loss(model, x, zero_eps).loss;
  return sum / static_cast<double>(val.size());
}

void copy_weights(const FaeModel& from, GradBlocks& into) {
  const std::vector<const ConvParams*> blocks = from.parameter_blocks();
  into.resize(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) into[b] = blocks[b]->weights;
}

void restore_weights(FaeModel& model, const GradBlocks& saved) {
  std::vector<ConvParams*> blocks = model.parameter_blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    blocks[b]->weights = saved[b];
  }
}

}  // namespace

TrainHistory train(FaeModel& model, const std::vector<SeriesRecord>& dataset,
                   const TrainConfig& config) {
  config.validate();
  if (dataset.empty()) throw ConfigError("train: empty dataset");
  model.hyper.gamma = config.gamma;
  model.hyper.m = config.m;
  model.hyper.beta = config.beta;
  model.normalizers = fit_normalizer(dataset);

  TrainingWindows windows =
      collect_windows(model, dataset, config.stride_train);
  if (windows.val.empty()) {
    throw ConfigError("train: no validation windows (check split boundaries)");
  }

  Rng rng(config.seed);
  OptimizerState opt = make_optimizer_state(model);
  const std::size_t J = model.hyper.J;
  const std::size_t n_windows = windows.train.size();

  std::vector<std::size_t> order(n_windows);
  for (std::size_t i = 0; i < n_windows; ++i) order[i] = i;

  TrainHistory history;
  history.best_val_loss = std::numeric_limits<double>::infinity();
  GradBlocks best_weights;
  copy_weights(model, best_weights);
  std::size_t stall = 0;

  std::vector<double> epsilon(J);
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n_windows; start += config.m) {
      const std::size_t batch_end = std::min(start + config.m, n_windows);
      const auto batch_size = static_cast<double>(batch_end - start);
      GradBlocks batch_grads = zero_grads(model);
      for (std::size_t i = start; i < batch_end; ++i) {
        const std::size_t w = order[i];
        for (std::size_t j = 0; j < J; ++j) epsilon[j] = rng.gaussian();
        ForwardBackwardResult r =
            forward_backward(model, windows.train[w], epsilon);
        if (!std::isfinite(r.terms.loss)) {
          throw NumericError(
              "train: non-finite loss at epoch " + std::to_string(epoch) +
              ", batch " + std::to_string(start / config.m) + ", series '" +
              windows.train_series[w] + "'");
        }
        epoch_loss += r.terms.loss;
        accumulate_grads(batch_grads, r.grads, 1.0 / batch_size);
      }
      adam_step(model, batch_grads, opt, config.gamma);
    }
    EpochStats stats;
    stats.train_loss = epoch_loss / static_cast<double>(n_windows);
    stats.val_loss = validation_loss(model, windows.val);
    history.epochs.push_back(stats);

    if (stats.val_loss < history.best_val_loss) {
      history.best_val_loss = stats.val_loss;
      history.best_epoch = history.epochs.size() - 1;
      copy_weights(model, best_weights);
      stall = 0;
    } else if (++stall >= config.patience) {
      break;
    }
  }

  restore_weights(model, best_weights);
  return history;
}

// ---------------------------------------------------------------------------
// Hyperparameter search

namespace {

std::size_t sample_step_range(Rng& rng, std::size_t lo, std::size_t hi,
                              std::size_t step) {
  const std::size_t count = (hi - lo) / step + 1;
  return lo + step * rng.uniform_below(count);
}

}  // namespace

FaeHyperparams sample_search_point(const SearchSpace& space, Rng& rng) {
  if (space.T_min > space.T_max || space.T_step == 0 || space.J_step == 0 ||
      space.m_step == 0 || space.U_step == 0 ||
      space.J_min > space.T_max / 4) {
    throw ConfigError("search: infeasible hyperparameter grid");
  }
  FaeHyperparams hyper;
  // Resample T until it admits at least one J; the grid was checked feasible.
  do {
    hyper.T = sample_step_range(rng, space.T_min, space.T_max, space.T_step);
  } while (space.J_min > hyper.T / 4);
  hyper.J = sample_step_range(rng, space.J_min, hyper.T / 4, space.J_step);
  hyper.gamma = rng.uniform(space.gamma_min, space.gamma_max);
  hyper.m = sample_step_range(rng, space.m_min, space.m_max, space.m_step);
  hyper.U = sample_step_range(rng, space.U_min, space.U_max, space.U_step);
  return hyper;
}

std::vector<TrialResult> hyperparameter_search(
    const std::vector<SeriesRecord>& dataset, const SearchConfig& config) {
  if (config.budget < 1) throw ConfigError("search: budget must be >= 1");

  Rng rng(config.seed);
  std::vector<FaeHyperparams> trials;
  trials.reserve(config.budget);
  for (std::size_t i = 0; i < config.budget; ++i) {
    trials.push_back(sample_search_point(config.space, rng));
  }

  std::vector<TrialResult> results;
  results.reserve(config.budget);
  for (std::size_t i = 0; i < trials.size(); ++i) {
    TrialResult result;
    result.hyper = trials[i];
    result.params = param_count(trials[i]);
    TrainConfig tc;
    tc.gamma = trials[i].gamma;
    tc.m = trials[i].m;
    tc.max_epochs = config.trial_epochs;
    tc.patience = config.patience;
    tc.stride_train = config.stride_train;
    tc.beta = config.beta;
    tc.seed = config.seed + 1 + i;
    try {
      FaeModel model = build_model(trials[i], tc.seed);
      TrainHistory history = train(model, dataset, tc);
      result.val_loss = history.best_val_loss;
    } catch (const Error&) {
      // Infeasible or diverged trial: keep it on the leaderboard, ranked last.
      result.val_loss = std::numeric_limits<double>::infinity();
    }
    results.push_back(result);
  }

  std::stable_sort(results.begin(), results.end(),
                   [](const TrialResult& a, const TrialResult& b) {
                     return a.val_loss < b.val_loss;
                   });
  return results;
}

}  // namespace fae

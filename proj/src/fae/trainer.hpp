#pragma once

#include <cstdint>
#include <vector>

#include "fae/data.hpp"
#include "fae/model.hpp"

namespace fae {

struct TrainConfig {
  double gamma = 6e-5;
  std::size_t m = 32;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  std::uint64_t seed = 1;
  double beta = 1.0;
  std::size_t stride_train = 1;

  void validate() const;
};

// Adam accumulators, same block layout as the model weights.
struct OptimizerState {
  GradBlocks m;
  GradBlocks v;
  std::size_t step = 0;
};

OptimizerState make_optimizer_state(const FaeModel& model);

// Single flat-array Adam update; step is the 1-based count after this call.
void adam_step_array(std::vector<double>& weights,
                     const std::vector<double>& grads, std::vector<double>& m,
                     std::vector<double>& v, std::size_t step, double gamma);

void adam_step(FaeModel& model, const GradBlocks& grads, OptimizerState& state,
               double gamma);

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;  // 0-based index into epochs
  double best_val_loss = 0.0;
};

// Mini-batch ELBO optimization pooling windows from all series. Validation
// uses epsilon = 0; the best-validation weights are retained. Dataset records
// must carry splits; normalizer statistics are fit here and stored on the
// model.
TrainHistory train(FaeModel& model, const std::vector<SeriesRecord>& dataset,
                   const TrainConfig& config);

// Table-1 grid; J's upper bound is tied to T/4.
struct SearchSpace {
  std::size_t T_min = 128, T_max = 512, T_step = 32;
  std::size_t J_min = 16, J_step = 16;
  double gamma_min = 1e-5, gamma_max = 5e-4;
  std::size_t m_min = 16, m_max = 96, m_step = 16;
  std::size_t U_min = 16, U_max = 128, U_step = 16;
};

struct SearchConfig {
  SearchSpace space;
  std::size_t budget = 50;
  std::size_t trial_epochs = 10;
  std::size_t patience = 3;
  std::size_t stride_train = 1;
  double beta = 1.0;
  std::uint64_t seed = 1;
};

struct TrialResult {
  FaeHyperparams hyper;
  double val_loss = 0.0;
  std::size_t params = 0;
};

class Rng;

// Draw one grid point (T, J, gamma, m, U) respecting steps and J <= T/4.
FaeHyperparams sample_search_point(const SearchSpace& space, Rng& rng);

// Seeded random search over the grid; leaderboard sorted best-first. Trials
// that fail to train rank last with an infinite loss.
std::vector<TrialResult> hyperparameter_search(
    const std::vector<SeriesRecord>& dataset, const SearchConfig& config);

}  // namespace fae

#pragma once

namespace fae {

// Per-series z-score statistics, fit on the training partition.
struct SeriesStats {
  double mean = 0.0;
  double std = 1.0;
  bool floored = false;  // std hit the 1e-8 floor (constant training data)
};

}  // namespace fae

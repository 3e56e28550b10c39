#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fae/data.hpp"
#include "fae/model.hpp"

namespace fae {

struct LatentRowMeta {
  std::string series_id;
  std::size_t end_index = 0;
  std::int64_t timestamp = 0;
  bool implicit_time = true;  // timestamp is just the sample index
};

// One mu_z row per encoded window.
struct LatentMatrix {
  std::size_t dim = 0;
  std::vector<std::vector<double>> rows;
  std::vector<LatentRowMeta> meta;

  std::size_t size() const { return rows.size(); }
};

// Rows are epsilon-free encodings (mu_z); windows must already be normalized.
LatentMatrix encode_windows(const FaeModel& model,
                            const std::vector<WindowSample>& windows);

// Normalizes each series with the model's statistics (or the series' own
// train-partition fallback), windows it at the given stride, encodes.
LatentMatrix encode_dataset(const FaeModel& model,
                            const std::vector<SeriesRecord>& dataset,
                            std::size_t stride);

struct PcaResult {
  std::vector<double> mean;
  std::vector<std::vector<double>> components;  // k orthonormal rows, length J
  std::vector<double> explained_variance;      // descending, nonnegative
};

struct PcaProjection {
  PcaResult pca;
  std::vector<std::vector<double>> projections;  // n x k
};

// Centered population-covariance PCA via cyclic Jacobi. Sign convention:
// each component's largest-magnitude entry is positive.
PcaProjection pca_project(const LatentMatrix& matrix, std::size_t k);

// Symmetric eigendecomposition helper (descending eigenvalues, rows of
// eigenvectors). Exposed for reuse; matrix is dense row-major n x n.
void jacobi_eigh(const std::vector<double>& matrix, std::size_t n,
                 std::vector<double>& eigenvalues,
                 std::vector<std::vector<double>>& eigenvectors);

struct Clock {
  std::size_t samples_per_day = 288;  // 5-minute sampling
  std::size_t days_per_week = 7;
};

struct AnnotatedRow {
  std::string series_id;
  std::size_t t = 0;
  std::int64_t timestamp = 0;
  double pc1 = 0.0, pc2 = 0.0, pc3 = 0.0;
  int hour_bucket = 0;  // 3-hour bins, 0..7
  int weekend = 0;
  int day = 0;  // day of month, or 1-based day index for implicit time
  double radius = 0.0;
};

// Epoch timestamps use the UTC calendar; implicit indices use the clock.
std::vector<AnnotatedRow> annotate_projections(const PcaProjection& projection,
                                               const LatentMatrix& matrix,
                                               const Clock& clock);

}  // namespace fae

#include "fae/latent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fae/errors.hpp"

namespace fae {

LatentMatrix encode_windows(const FaeModel& model,
                            const std::vector<WindowSample>& windows) {
  LatentMatrix matrix;
  matrix.dim = model.hyper.J;
  Tensor2 x(1, model.hyper.T);
  for (const WindowSample& w : windows) {
    if (w.window.size() != model.hyper.T) {
      throw ShapeError("encode_windows: window length mismatch");
    }
    x.data = w.window;
    matrix.rows.push_back(encode(model, x).mu_z);
    LatentRowMeta meta;
    meta.series_id = w.series_id;
    meta.end_index = w.end_index;
    meta.timestamp = static_cast<std::int64_t>(w.end_index);
    matrix.meta.push_back(std::move(meta));
  }
  return matrix;
}

LatentMatrix encode_dataset(const FaeModel& model,
                            const std::vector<SeriesRecord>& dataset,
                            std::size_t stride) {
  LatentMatrix matrix;
  matrix.dim = model.hyper.J;
  Tensor2 x(1, model.hyper.T);
  for (const SeriesRecord& record : dataset) {
    SeriesStats stats;
    const auto it = model.normalizers.find(record.id);
    if (it != model.normalizers.end()) {
      stats = it->second;
    } else if (record.split && record.split->train_end > 0) {
      stats = fit_stats(record.values, 0, record.split->train_end);
    } else {
      stats = fit_stats(record.values, 0, record.length());
    }
    const std::vector<double> normalized = apply_stats(stats, record.values);
    const WindowSet set =
        make_windows(record.id, normalized, model.hyper.T, stride);
    for (const WindowSample& w : set.windows) {
      x.data = w.window;
      matrix.rows.push_back(encode(model, x).mu_z);
      LatentRowMeta meta;
      meta.series_id = record.id;
      meta.end_index = w.end_index;
      meta.timestamp = record.time_at(w.end_index);
      meta.implicit_time = record.timestamps.empty();
      matrix.meta.push_back(std::move(meta));
    }
  }
  return matrix;
}

void jacobi_eigh(const std::vector<double>& matrix, std::size_t n,
                 std::vector<double>& eigenvalues,
                 std::vector<std::vector<double>>& eigenvectors) {
  if (matrix.size() != n * n) throw ShapeError("jacobi_eigh: not an n x n matrix");
  std::vector<double> a = matrix;
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  double base = 0.0;
  for (const double x : a) base += x * x;
  const double tol = 1e-12 * std::max(1.0, std::sqrt(base));

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        off += 2.0 * a[p * n + q] * a[p * n + q];
      }
    }
    if (std::sqrt(off) <= tol) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double sign = theta >= 0.0 ? 1.0 : -1.0;
        const double t =
            sign / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a[i * n + i] > a[j * n + j];
  });
  eigenvalues.resize(n);
  eigenvectors.assign(n, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    eigenvalues[r] = a[order[r] * n + order[r]];
    for (std::size_t k = 0; k < n; ++k) {
      eigenvectors[r][k] = v[k * n + order[r]];
    }
  }
}

PcaProjection pca_project(const LatentMatrix& matrix, std::size_t k) {
  const std::size_t n = matrix.size();
  const std::size_t dim = matrix.dim;
  if (n < 2) throw ConfigError("pca: need at least 2 rows");
  if (k < 1 || k > dim) {
    throw ConfigError("pca: k must lie in [1, J=" + std::to_string(dim) + "]");
  }

  PcaProjection out;
  out.pca.mean.assign(dim, 0.0);
  for (const auto& row : matrix.rows) {
    if (row.size() != dim) throw ShapeError("pca: ragged latent matrix");
    for (std::size_t j = 0; j < dim; ++j) out.pca.mean[j] += row[j];
  }
  for (double& m : out.pca.mean) m /= static_cast<double>(n);

  std::vector<double> cov(dim * dim, 0.0);
  std::vector<double> centered(dim);
  for (const auto& row : matrix.rows) {
    for (std::size_t j = 0; j < dim; ++j) centered[j] = row[j] - out.pca.mean[j];
    for (std::size_t p = 0; p < dim; ++p) {
      for (std::size_t q = p; q < dim; ++q) {
        cov[p * dim + q] += centered[p] * centered[q];
      }
    }
  }
  for (std::size_t p = 0; p < dim; ++p) {
    for (std::size_t q = p; q < dim; ++q) {
      cov[p * dim + q] /= static_cast<double>(n);
      cov[q * dim + p] = cov[p * dim + q];
    }
  }

  std::vector<double> eigenvalues;
  std::vector<std::vector<double>> eigenvectors;
  jacobi_eigh(cov, dim, eigenvalues, eigenvectors);

  out.pca.components.resize(k);
  out.pca.explained_variance.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double>& comp = eigenvectors[c];
    std::size_t argmax = 0;
    for (std::size_t j = 1; j < dim; ++j) {
      if (std::abs(comp[j]) > std::abs(comp[argmax])) argmax = j;
    }
    if (comp[argmax] < 0.0) {
      for (double& x : comp) x = -x;
    }
    out.pca.components[c] = std::move(comp);
    out.pca.explained_variance[c] = std::max(eigenvalues[c], 0.0);
  }

  out.projections.assign(n, std::vector<double>(k, 0.0));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      double dot = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        dot += (matrix.rows[r][j] - out.pca.mean[j]) * out.pca.components[c][j];
      }
      out.projections[r][c] = dot;
    }
  }
  return out;
}

namespace {

// Days-to-civil conversion (proleptic Gregorian, UTC).
void civil_from_days(std::int64_t days, int& year, int& month, int& day) {
  days += 719468;
  const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
  const auto doe = static_cast<std::uint64_t>(days - era * 146097);
  const std::uint64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const std::uint64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const std::uint64_t mp = (5 * doy + 2) / 153;
  day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  month = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  year = static_cast<int>(y + (month <= 2 ? 1 : 0));
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

std::vector<AnnotatedRow> annotate_projections(const PcaProjection& projection,
                                               const LatentMatrix& matrix,
                                               const Clock& clock) {
  if (projection.projections.size() != matrix.size()) {
    throw ShapeError("annotate: projection and metadata row counts differ");
  }
  std::vector<AnnotatedRow> rows;
  rows.reserve(matrix.size());
  for (std::size_t r = 0; r < matrix.size(); ++r) {
    const LatentRowMeta& meta = matrix.meta[r];
    AnnotatedRow row;
    row.series_id = meta.series_id;
    row.t = meta.end_index;
    row.timestamp = meta.timestamp;
    const auto& proj = projection.projections[r];
    if (!proj.empty()) row.pc1 = proj[0];
    if (proj.size() > 1) row.pc2 = proj[1];
    if (proj.size() > 2) row.pc3 = proj[2];
    row.radius =
        std::sqrt(row.pc1 * row.pc1 + row.pc2 * row.pc2 + row.pc3 * row.pc3);

    if (meta.implicit_time) {
      if (clock.samples_per_day == 0 || clock.days_per_week == 0) {
        throw ConfigError("annotate: index-only data needs a sample clock");
      }
      const std::size_t t = meta.end_index;
      const std::size_t day_index = t / clock.samples_per_day;
      row.hour_bucket = static_cast<int>(
          (t % clock.samples_per_day) * 8 / clock.samples_per_day);
      row.weekend = day_index % clock.days_per_week >= 5 ? 1 : 0;
      row.day = static_cast<int>(day_index) + 1;
    } else {
      const std::int64_t days = floor_div(meta.timestamp, 86400);
      const std::int64_t sec_of_day = meta.timestamp - days * 86400;
      row.hour_bucket = static_cast<int>(sec_of_day * 8 / 86400);
      // 1970-01-01 was a Thursday; Monday = 0.
      row.weekend = ((days + 3) % 7 + 7) % 7 >= 5 ? 1 : 0;
      int year = 0, month = 0, day = 0;
      civil_from_days(days, year, month, day);
      row.day = day;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fae

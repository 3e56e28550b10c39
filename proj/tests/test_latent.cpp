#include "fae/latent.hpp"

#include <cmath>

#include "doctest.h"
#include "fae/errors.hpp"
#include "fae/rng.hpp"
#include "oracles.hpp"

using namespace fae;

namespace {

LatentMatrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  LatentMatrix m;
  m.dim = rows.empty() ? 0 : rows[0].size();
  m.rows = rows;
  m.meta.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    m.meta[i].series_id = "s";
    m.meta[i].end_index = i;
    m.meta[i].timestamp = static_cast<std::int64_t>(i);
  }
  return m;
}

}  // namespace

TEST_CASE("encode_windows: zero model, row counts, duplicates") {
  FaeHyperparams h;
  h.T = 8;
  h.J = 3;
  h.U = 2;
  FaeModel m = build_model(h, 2);

  std::vector<WindowSample> windows;
  for (int i = 0; i < 5; ++i) {
    WindowSample w;
    w.series_id = "w";
    w.end_index = 7 + i;
    w.window.assign(8, 0.25 * i);
    windows.push_back(w);
  }

  SUBCASE("zero weights give an all-zero matrix") {
    for (ConvParams* block : m.parameter_blocks()) {
      for (double& w : block->weights) w = 0.0;
    }
    const LatentMatrix matrix = encode_windows(m, windows);
    REQUIRE(matrix.size() == 5);
    for (const auto& row : matrix.rows) {
      for (const double v : row) CHECK(v == 0.0);
    }
  }

  SUBCASE("n windows in, n rows out, order preserved") {
    const LatentMatrix matrix = encode_windows(m, windows);
    REQUIRE(matrix.size() == windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
      CHECK(matrix.meta[i].end_index == windows[i].end_index);
    }
  }

  SUBCASE("duplicate windows give bit-equal rows") {
    windows[3] = windows[1];
    const LatentMatrix matrix = encode_windows(m, windows);
    CHECK(matrix.rows[3] == matrix.rows[1]);
  }
}

TEST_CASE("pca: data on a line captures all variance in one component") {
  std::vector<std::vector<double>> rows;
  const std::vector<double> direction = {2.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0};
  for (int i = -3; i <= 3; ++i) {
    rows.push_back({direction[0] * i, direction[1] * i, direction[2] * i});
  }
  const PcaProjection p = pca_project(matrix_from_rows(rows), 1);
  double total = 0.0;
  for (int i = -3; i <= 3; ++i) total += static_cast<double>(i * i);
  total /= 7.0;
  CHECK(p.pca.explained_variance[0] == doctest::Approx(total).epsilon(1e-8));
  // Projections are signed distances along the (unit) direction.
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double expected = static_cast<double>(static_cast<int>(r) - 3);
    CHECK(p.projections[r][0] == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("pca: axis-aligned variances come out in order") {
  // Var 4 on axis 0, 1 on axis 1, 0 on axis 2.
  std::vector<std::vector<double>> rows = {
      {2, 1, 5}, {-2, -1, 5}, {2, -1, 5}, {-2, 1, 5}};
  const PcaProjection p = pca_project(matrix_from_rows(rows), 2);
  CHECK(p.pca.explained_variance[0] == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(p.pca.explained_variance[1] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(p.pca.components[0][0]) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(p.pca.components[1][1]) == doctest::Approx(1.0).epsilon(1e-8));
  // Sign convention: the dominant entry is positive.
  CHECK(p.pca.components[0][0] > 0.0);
  CHECK(p.pca.components[1][1] > 0.0);
}

TEST_CASE("pca matches the brute-force eigendecomposition oracle") {
  Rng rng(71);
  const std::size_t n = 50, dim = 8, k = 3;
  std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
  for (auto& row : rows) {
    for (double& v : row) v = rng.uniform(-2.0, 2.0);
  }
  const LatentMatrix matrix = matrix_from_rows(rows);
  const PcaProjection p = pca_project(matrix, k);

  // Oracle: center, covariance, full eigensolve (classical Jacobi).
  std::vector<double> mean(dim, 0.0);
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < dim; ++j) mean[j] += row[j];
  }
  for (double& v : mean) v /= static_cast<double>(n);
  std::vector<double> cov(dim * dim, 0.0);
  for (const auto& row : rows) {
    for (std::size_t a = 0; a < dim; ++a) {
      for (std::size_t b = 0; b < dim; ++b) {
        cov[a * dim + b] += (row[a] - mean[a]) * (row[b] - mean[b]);
      }
    }
  }
  for (double& v : cov) v /= static_cast<double>(n);
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
  oracle::eig_sym_brute(cov, dim, values, vectors);

  for (std::size_t c = 0; c < k; ++c) {
    CHECK(p.pca.explained_variance[c] ==
          doctest::Approx(values[c]).epsilon(1e-8));
    // Components agree up to sign.
    double dot = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      dot += p.pca.components[c][j] * vectors[c][j];
    }
    CHECK(std::abs(std::abs(dot) - 1.0) <= 1e-8);
  }
  // Projections agree up to the same sign flip.
  for (std::size_t c = 0; c < k; ++c) {
    double dot = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      dot += p.pca.components[c][j] * vectors[c][j];
    }
    const double sign = dot >= 0.0 ? 1.0 : -1.0;
    for (std::size_t r = 0; r < n; ++r) {
      double want = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        want += (rows[r][j] - mean[j]) * vectors[c][j];
      }
      CHECK(p.projections[r][c] == doctest::Approx(sign * want).epsilon(1e-8));
    }
  }
}

TEST_CASE("pca invariants: orthonormality, ordering, variance accounting") {
  Rng rng(73);
  const std::size_t n = 40, dim = 6;
  std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
  for (auto& row : rows) {
    for (std::size_t j = 0; j < dim; ++j) {
      row[j] = rng.uniform(-1.0, 1.0) * static_cast<double>(dim - j);
    }
  }
  const LatentMatrix matrix = matrix_from_rows(rows);
  const PcaProjection p = pca_project(matrix, dim);

  SUBCASE("components are orthonormal") {
    for (std::size_t a = 0; a < dim; ++a) {
      for (std::size_t b = 0; b < dim; ++b) {
        double dot = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
          dot += p.pca.components[a][j] * p.pca.components[b][j];
        }
        CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) <= 1e-8);
      }
    }
  }

  SUBCASE("variances descend and projections reproduce them") {
    for (std::size_t c = 1; c < dim; ++c) {
      CHECK(p.pca.explained_variance[c - 1] >=
            p.pca.explained_variance[c] - 1e-12);
    }
    for (std::size_t c = 0; c < dim; ++c) {
      double mean = 0.0;
      for (std::size_t r = 0; r < n; ++r) mean += p.projections[r][c];
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        var += (p.projections[r][c] - mean) * (p.projections[r][c] - mean);
      }
      var /= static_cast<double>(n);
      CHECK(std::abs(var - p.pca.explained_variance[c]) <= 1e-8);
    }
  }

  SUBCASE("explained variance sums to the total at k = J") {
    double total = 0.0;
    std::vector<double> mean(dim, 0.0);
    for (const auto& row : rows) {
      for (std::size_t j = 0; j < dim; ++j) mean[j] += row[j];
    }
    for (double& v : mean) v /= static_cast<double>(n);
    for (const auto& row : rows) {
      for (std::size_t j = 0; j < dim; ++j) {
        total += (row[j] - mean[j]) * (row[j] - mean[j]);
      }
    }
    total /= static_cast<double>(n);
    double sum = 0.0;
    for (const double v : p.pca.explained_variance) sum += v;
    CHECK(std::abs(sum - total) <= 1e-8);

    const PcaProjection partial = pca_project(matrix, 2);
    double partial_sum = 0.0;
    for (const double v : partial.pca.explained_variance) partial_sum += v;
    CHECK(partial_sum <= total + 1e-8);
  }

  SUBCASE("repeat runs are identical (sign convention pins the answer)") {
    const PcaProjection q = pca_project(matrix, dim);
    CHECK(q.projections == p.projections);
    CHECK(q.pca.components == p.pca.components);
  }
}

TEST_CASE("pca edge cases") {
  SUBCASE("k out of range") {
    const LatentMatrix m = matrix_from_rows({{1, 2}, {3, 4}});
    CHECK_THROWS_AS(pca_project(m, 3), ConfigError);
    CHECK_THROWS_AS(pca_project(m, 0), ConfigError);
  }
  SUBCASE("fewer than two rows") {
    const LatentMatrix m = matrix_from_rows({{1, 2}});
    CHECK_THROWS_AS(pca_project(m, 1), ConfigError);
  }
  SUBCASE("zero variance data keeps valid components, zero variances") {
    const LatentMatrix m = matrix_from_rows({{1, 1}, {1, 1}, {1, 1}});
    const PcaProjection p = pca_project(m, 2);
    CHECK(p.pca.explained_variance[0] == 0.0);
    CHECK(p.pca.explained_variance[1] == 0.0);
    double norm = 0.0;
    for (const double v : p.pca.components[0]) norm += v * v;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("annotate: index clock arithmetic") {
  // Three known positions in a 288-samples/day clock.
  std::vector<std::vector<double>> rows = {{3, 4}, {1, 0}, {0, 2}};
  LatentMatrix matrix = matrix_from_rows(rows);
  matrix.meta[0].end_index = 0;    // day 0, bucket 0
  matrix.meta[1].end_index = 144;  // noon, bucket 4
  matrix.meta[2].end_index = 5 * 288 + 10;  // day 5 = weekend
  for (auto& meta : matrix.meta) meta.implicit_time = true;

  const PcaProjection p = pca_project(matrix, 2);
  const Clock clock{288, 7};
  const auto annotated = annotate_projections(p, matrix, clock);
  REQUIRE(annotated.size() == 3);
  CHECK(annotated[0].hour_bucket == 0);
  CHECK(annotated[0].weekend == 0);
  CHECK(annotated[0].day == 1);
  CHECK(annotated[1].hour_bucket == 4);
  CHECK(annotated[2].weekend == 1);
  CHECK(annotated[2].day == 6);
  for (const auto& row : annotated) {
    const double want = std::sqrt(row.pc1 * row.pc1 + row.pc2 * row.pc2 +
                                  row.pc3 * row.pc3);
    CHECK(row.radius == doctest::Approx(want));
  }

  SUBCASE("day index cycles with the data length") {
    std::vector<std::vector<double>> month_rows;
    LatentMatrix month;
    month.dim = 1;
    for (std::size_t t = 0; t < 288 * 3; t += 100) {
      month.rows.push_back({static_cast<double>(t)});
      LatentRowMeta meta;
      meta.series_id = "m";
      meta.end_index = t;
      meta.timestamp = static_cast<std::int64_t>(t);
      month.meta.push_back(meta);
    }
    const PcaProjection mp = pca_project(month, 1);
    const auto ann = annotate_projections(mp, month, clock);
    for (std::size_t i = 0; i < month.meta.size(); ++i) {
      CHECK(ann[i].day ==
            static_cast<int>(month.meta[i].end_index / 288) + 1);
    }
  }

  SUBCASE("missing clock with index-only data is a config error") {
    CHECK_THROWS_AS(annotate_projections(p, matrix, Clock{0, 7}), ConfigError);
  }
}

TEST_CASE("annotate: epoch timestamps use the UTC calendar") {
  std::vector<std::vector<double>> rows = {{1, 0}, {0, 1}, {1, 1}};
  LatentMatrix matrix = matrix_from_rows(rows);
  // 2021-03-01 (Monday) 00:00 UTC, 2021-03-06 (Saturday) 12:00 UTC,
  // 2021-03-31 (Wednesday) 23:00 UTC.
  matrix.meta[0].timestamp = 1614556800;
  matrix.meta[1].timestamp = 1614988800 + 12 * 3600;
  matrix.meta[2].timestamp = 1617148800 + 23 * 3600;
  for (auto& meta : matrix.meta) meta.implicit_time = false;

  const PcaProjection p = pca_project(matrix, 2);
  const auto annotated = annotate_projections(p, matrix, Clock{});
  CHECK(annotated[0].weekend == 0);
  CHECK(annotated[0].day == 1);
  CHECK(annotated[0].hour_bucket == 0);
  CHECK(annotated[1].weekend == 1);
  CHECK(annotated[1].day == 6);
  CHECK(annotated[1].hour_bucket == 4);
  CHECK(annotated[2].weekend == 0);
  CHECK(annotated[2].day == 31);
  CHECK(annotated[2].hour_bucket == 7);
}

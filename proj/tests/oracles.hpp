#pragma once

// Reference implementations used as independent oracles. These are written
// from the operation definitions, not from the library code paths they check,
// and must stay that way.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "fae/tensor.hpp"

namespace oracle {

// out[c,t] = sum_{c',k} w[c,c',k] * x[c', t-(F-1-k)*d], zero outside.
inline fae::Tensor2 conv_brute(const fae::Tensor2& input,
                               const fae::ConvParams& p) {
  fae::Tensor2 out(p.out_channels, input.length);
  for (std::size_t c = 0; c < p.out_channels; ++c) {
    for (std::size_t t = 0; t < input.length; ++t) {
      double acc = 0.0;
      for (std::size_t ci = 0; ci < p.in_channels; ++ci) {
        for (std::size_t k = 0; k < p.kernel; ++k) {
          const auto src = static_cast<long long>(t) -
                           static_cast<long long>(p.kernel - 1 - k) *
                               static_cast<long long>(p.dilation);
          if (src >= 0) {
            acc += p.w(c, ci, k) * input.at(ci, static_cast<std::size_t>(src));
          }
        }
      }
      out.at(c, t) = acc;
    }
  }
  return out;
}

// Central differences of a scalar function of a flat vector.
inline std::vector<double> fd_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double fp = f(x);
    x[i] = keep - h;
    const double fm = f(x);
    x[i] = keep;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Classical Jacobi eigensolver: rotate out the largest off-diagonal entry
// until none exceeds 1e-12 relative scale. Eigenvalues descending;
// eigenvectors returned as rows, no sign convention applied.
inline void eig_sym_brute(const std::vector<double>& matrix, std::size_t n,
                          std::vector<double>& values,
                          std::vector<std::vector<double>>& vectors) {
  std::vector<double> a = matrix;
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  double scale = 0.0;
  for (const double x : a) scale = std::max(scale, std::abs(x));
  const double tol = 1e-12 * std::max(1.0, scale);

  for (std::size_t iter = 0; iter < 100 * n * n; ++iter) {
    std::size_t p = 0, q = 1;
    double biggest = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (std::abs(a[i * n + j]) > biggest) {
          biggest = std::abs(a[i * n + j]);
          p = i;
          q = j;
        }
      }
    }
    if (n < 2 || biggest <= tol) break;

    const double apq = a[p * n + q];
    const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
    const double sign = theta >= 0.0 ? 1.0 : -1.0;
    const double t = sign / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
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

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (a[order[j] * n + order[j]] > a[order[i] * n + order[i]]) {
        std::swap(order[i], order[j]);
      }
    }
  }
  values.resize(n);
  vectors.assign(n, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    values[r] = a[order[r] * n + order[r]];
    for (std::size_t k = 0; k < n; ++k) vectors[r][k] = v[k * n + order[r]];
  }
}

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline Confusion confusion_brute(const std::vector<std::uint8_t>& flags,
                                 const std::vector<std::uint8_t>& labels) {
  Confusion c;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    c.tp += flags[i] == 1 && labels[i] == 1;
    c.fp += flags[i] == 1 && labels[i] == 0;
    c.fn += flags[i] == 0 && labels[i] == 1;
    c.tn += flags[i] == 0 && labels[i] == 0;
  }
  return c;
}

// Two-pass population mean/std.
inline void mean_std_brute(const std::vector<double>& values, double& mean,
                           double& std_out) {
  double sum = 0.0;
  for (const double v : values) sum += v;
  mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  std_out = std::sqrt(ss / static_cast<double>(values.size()));
}

inline double dot_all(const fae::Tensor2& a, const fae::Tensor2& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) acc += a.data[i] * b.data[i];
  return acc;
}

}  // namespace oracle

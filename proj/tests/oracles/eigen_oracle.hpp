#pragma once

// Independent symmetric eigenvalue oracle for checking the Jacobi-based SVD:
// Householder tridiagonalization followed by Sturm-sequence bisection.
// Shares no code path with xdeval::svd_topk.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "xdeval/scl.hpp"

namespace oracle {

struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;  // off[i] = T(i, i+1)
};

// Householder reduction of a symmetric matrix to tridiagonal form.
inline Tridiagonal householder_tridiagonalize(xdeval::Matrix a) {
  const std::size_t n = a.rows;
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double norm_sq = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) norm_sq += a.at(i, k) * a.at(i, k);
    const double norm = std::sqrt(norm_sq);
    if (norm == 0.0) continue;
    const double alpha = a.at(k + 1, k) >= 0.0 ? -norm : norm;

    std::vector<double> v(n, 0.0);
    v[k + 1] = a.at(k + 1, k) - alpha;
    for (std::size_t i = k + 2; i < n; ++i) v[i] = a.at(i, k);
    double vtv = 0.0;
    for (double x : v) vtv += x * x;
    if (vtv == 0.0) continue;
    const double beta = 2.0 / vtv;

    // A <- (I - beta v v^T) A (I - beta v v^T) = A - q v^T - v q^T
    std::vector<double> p(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) sum += a.at(i, j) * v[j];
      p[i] = beta * sum;
    }
    double vtp = 0.0;
    for (std::size_t i = 0; i < n; ++i) vtp += v[i] * p[i];
    std::vector<double> q(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) q[i] = p[i] - 0.5 * beta * vtp * v[i];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        a.at(i, j) -= q[i] * v[j] + v[i] * q[j];
      }
    }
  }

  Tridiagonal t;
  t.diag.resize(n);
  t.off.resize(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) t.diag[i] = a.at(i, i);
  for (std::size_t i = 0; i + 1 < n; ++i) t.off[i] = a.at(i, i + 1);
  return t;
}

// Number of eigenvalues of the tridiagonal matrix strictly below x.
inline std::size_t sturm_count(const Tridiagonal& t, double x) {
  std::size_t count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < t.diag.size(); ++i) {
    const double off_sq = i == 0 ? 0.0 : t.off[i - 1] * t.off[i - 1];
    q = t.diag[i] - x - off_sq / q;
    if (q == 0.0) q = std::numeric_limits<double>::min();
    if (q < 0.0) ++count;
  }
  return count;
}

// All eigenvalues of a symmetric matrix, descending.
inline std::vector<double> symmetric_eigenvalues(const xdeval::Matrix& a) {
  const std::size_t n = a.rows;
  const Tridiagonal t = householder_tridiagonalize(a);

  double lo = std::numeric_limits<double>::max();
  double hi = std::numeric_limits<double>::lowest();
  for (std::size_t i = 0; i < n; ++i) {
    const double radius = (i > 0 ? std::abs(t.off[i - 1]) : 0.0) +
                          (i + 1 < n ? std::abs(t.off[i]) : 0.0);
    lo = std::min(lo, t.diag[i] - radius);
    hi = std::max(hi, t.diag[i] + radius);
  }
  lo -= 1.0;
  hi += 1.0;

  std::vector<double> eigenvalues(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k-th smallest via bisection on the Sturm count.
    double a_lo = lo, a_hi = hi;
    for (int iter = 0; iter < 200; ++iter) {
      const double mid = 0.5 * (a_lo + a_hi);
      if (sturm_count(t, mid) > k) {
        a_hi = mid;
      } else {
        a_lo = mid;
      }
      if (a_hi - a_lo <= 1e-14 * std::max(1.0, std::abs(a_lo))) break;
    }
    eigenvalues[k] = 0.5 * (a_lo + a_hi);
  }
  std::reverse(eigenvalues.begin(), eigenvalues.end());
  return eigenvalues;
}

// Singular values of a rectangular matrix, descending, via the Gram matrix.
inline std::vector<double> singular_values(const xdeval::Matrix& a) {
  xdeval::Matrix gram(a.cols, a.cols);
  for (std::size_t i = 0; i < a.cols; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) {
      double sum = 0.0;
      for (std::size_t r = 0; r < a.rows; ++r) sum += a.at(r, i) * a.at(r, j);
      gram.at(i, j) = sum;
    }
  }
  std::vector<double> sigma = symmetric_eigenvalues(gram);
  for (double& s : sigma) s = std::sqrt(std::max(0.0, s));
  return sigma;
}

}  // namespace oracle

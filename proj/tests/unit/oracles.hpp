#pragma once

// Reference computations the tests compare the library against. They share
// no code with the library and favour clarity over speed.

#include <cmath>
#include <cstddef>
#include <algorithm>
#include <utility>
#include <vector>

namespace airfed::oracle {

/// erfc in long double: the all-positive series 2/sqrt(pi) e^{-x^2} sum
/// 2^n x^{2n+1} / (2n+1)!! below 2.5, a backward-evaluated continued
/// fraction above.
inline long double erfc(long double x) {
  const long double pi = 3.141592653589793238462643383279502884L;
  if (x < 0) return 2.0L - erfc(-x);
  if (x < 2.5L) {
    long double term = x, sum = x;
    for (int n = 1; n < 200; ++n) {
      term *= 2.0L * x * x / (2.0L * n + 1.0L);
      sum += term;
      if (term < 1e-22L * sum) break;
    }
    return 1.0L - 2.0L / std::sqrt(pi) * std::exp(-x * x) * sum;
  }
  long double f = x;
  for (int k = 400; k >= 1; --k) f = x + (k / 2.0L) / f;
  return std::exp(-x * x) / std::sqrt(pi) / f;
}

inline long double phi(long double x) { return 0.5L * erfc(-x / std::sqrt(2.0L)); }

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
inline std::vector<double> symmetric_eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// Smallest objective of min c^T x, A x = b, x >= 0 over all basic feasible
/// solutions, by enumerating column subsets; A must have full row rank.
/// Returns {false, 0} when no basic solution is feasible.
inline std::pair<bool, double> brute_force_lp(const std::vector<std::vector<double>>& a,
                                              const std::vector<double>& b,
                                              const std::vector<double>& c) {
  const std::size_t m = a.size(), n = c.size();
  bool found = false;
  double best = 0.0;
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  while (true) {
    std::vector<std::vector<double>> t(m, std::vector<double>(m + 1));
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t k = 0; k < m; ++k) t[r][k] = a[r][idx[k]];
      t[r][m] = b[r];
    }
    bool singular = false;
    for (std::size_t col = 0; col < m && !singular; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < m; ++r)
        if (std::fabs(t[r][col]) > std::fabs(t[piv][col])) piv = r;
      if (std::fabs(t[piv][col]) < 1e-10) {
        singular = true;
        break;
      }
      std::swap(t[col], t[piv]);
      for (std::size_t r = 0; r < m; ++r) {
        if (r == col) continue;
        const double f = t[r][col] / t[col][col];
        for (std::size_t k = col; k <= m; ++k) t[r][k] -= f * t[col][k];
      }
    }
    if (!singular) {
      bool feasible = true;
      double obj = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double x = t[k][m] / t[k][k];
        if (x < -1e-12) feasible = false;
        obj += c[idx[k]] * x;
      }
      if (feasible && (!found || obj < best)) {
        found = true;
        best = obj;
      }
    }
    // Next m-subset of {0..n-1} in lexicographic order.
    std::size_t i = m;
    while (i > 0 && idx[i - 1] == n - m + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t k = i; k < m; ++k) idx[k] = idx[k - 1] + 1;
  }
  return {found, best};
}

}  // namespace airfed::oracle

#pragma once

// Test-only reference computations. They use plain nested vectors and
// textbook elimination so they share no code path with the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sybilreg/model.hpp"

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat from_eigen(const Eigen::MatrixXd& m) {
  Mat out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

/// Gauss-Jordan inversion with partial pivoting.
inline Mat invert(Mat a) {
  const std::size_t n = a.size();
  Mat inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-300) throw std::runtime_error("singular");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const double d = a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0.0) continue;
      const double f = a[r][col];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

/// Analytic inverse of [[a, b], [c, d]].
inline std::array<double, 4> invert2(double a, double b, double c, double d) {
  const double det = a * d - b * c;
  return {d / det, -b / det, -c / det, a / det};
}

/// beta = (X'WX)^-1 X'Wy by explicit sums over rows.
inline std::vector<double> gls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Mat& W) {
  const std::size_t n = static_cast<std::size_t>(X.rows());
  const std::size_t p = static_cast<std::size_t>(X.cols());
  Mat xtwx(p, std::vector<double>(p, 0.0));
  std::vector<double> xtwy(p, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (W[i][j] == 0.0) continue;
      for (std::size_t a = 0; a < p; ++a) {
        xtwy[a] += X(i, a) * W[i][j] * y(j);
        for (std::size_t b = 0; b < p; ++b) xtwx[a][b] += X(i, a) * W[i][j] * X(j, b);
      }
    }
  const Mat inv = invert(xtwx);
  std::vector<double> beta(p, 0.0);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) beta[a] += inv[a][b] * xtwy[b];
  return beta;
}

inline Mat identity(std::size_t n) {
  Mat m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

/// Random disjoint spec: up to `max_networks` networks of size [2, max_size]
/// over n rows with pi drawn from {0.01, ..., 0.99}.
inline sybilreg::DisjointNetworkSpec random_spec(std::mt19937_64& rng, sybilreg::Index n,
                                                 int max_networks, sybilreg::Index max_size) {
  std::vector<sybilreg::Index> perm(static_cast<std::size_t>(n));
  for (sybilreg::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  sybilreg::DisjointNetworkSpec spec;
  spec.n_total = n;
  std::uniform_int_distribution<int> count(0, max_networks);
  std::uniform_int_distribution<int> pct(1, 99);
  const int k = count(rng);
  std::size_t next = 0;
  for (int s = 0; s < k; ++s) {
    const auto left = static_cast<sybilreg::Index>(perm.size() - next);
    if (left < 2) break;
    std::uniform_int_distribution<sybilreg::Index> size(2, std::min(max_size, left));
    const auto m = size(rng);
    sybilreg::CandidateNetwork net;
    net.pi = pct(rng) / 100.0;
    for (sybilreg::Index j = 0; j < m; ++j) net.members.push_back(perm[next++]);
    std::sort(net.members.begin(), net.members.end());
    spec.networks.push_back(std::move(net));
  }
  return spec;
}

inline sybilreg::Dataset random_dataset(std::mt19937_64& rng, sybilreg::Index n, sybilreg::Index p) {
  std::normal_distribution<double> z(0.0, 1.0);
  sybilreg::Dataset ds;
  ds.X.resize(n, p);
  ds.y.resize(n);
  for (sybilreg::Index i = 0; i < n; ++i) {
    ds.X(i, 0) = 1.0;
    for (sybilreg::Index j = 1; j < p; ++j) ds.X(i, j) = z(rng);
    ds.y(i) = z(rng);
  }
  return ds;
}

}  // namespace oracle

#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "modnav/ad/core.hpp"

namespace modnav::ad {

// Orthogonal init via modified Gram-Schmidt on a Gaussian draw, scaled by
// `gain`. For m x n the smaller side is orthonormalized.
template <class T>
void init_orthogonal(Param<T>& p, double gain, std::mt19937_64& rng) {
  if (p.shape.size() != 2) throw shape_error("init_orthogonal: rank-2 only");
  const int m = p.shape[0], n = p.shape[1];
  const bool wide = n >= m;  // orthonormalize rows if wide, else columns
  const int vecs = wide ? m : n;
  const int len = wide ? n : m;

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> q(vecs, std::vector<double>(len));
  for (auto& v : q)
    for (double& x : v) x = gauss(rng);
  for (int i = 0; i < vecs; ++i) {
    for (int j = 0; j < i; ++j) {
      double dot = 0.0;
      for (int k = 0; k < len; ++k) dot += q[i][k] * q[j][k];
      for (int k = 0; k < len; ++k) q[i][k] -= dot * q[j][k];
    }
    double norm = 0.0;
    for (double x : q[i]) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-8) norm = 1.0;  // astronomically unlikely degenerate draw
    for (double& x : q[i]) x /= norm;
  }
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) {
      const double v = wide ? q[r][c] : q[c][r];
      p.value[int64_t(r) * n + c] = static_cast<T>(gain * v);
    }
}

template <class T>
void init_constant(Param<T>& p, double v) {
  std::fill(p.value.begin(), p.value.end(), static_cast<T>(v));
}

// Circulant cosine kernel over a ring of units: K[i][j] = amp*cos(2pi(i-j)/n).
template <class T>
void init_ring_kernel(Param<T>& p, double amplitude) {
  if (p.shape.size() != 2 || p.shape[0] != p.shape[1])
    throw shape_error("init_ring_kernel: square matrix required");
  const int n = p.shape[0];
  constexpr double kTwoPi = 6.28318530717958647692;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      p.value[int64_t(i) * n + j] =
          static_cast<T>(amplitude * std::cos(kTwoPi * double(i - j) / n));
}

template <class T>
void init_identity(Param<T>& p) {
  if (p.shape.size() != 2 || p.shape[0] != p.shape[1])
    throw shape_error("init_identity: square matrix required");
  const int n = p.shape[0];
  std::fill(p.value.begin(), p.value.end(), T(0));
  for (int i = 0; i < n; ++i) p.value[int64_t(i) * n + i] = T(1);
}

}  // namespace modnav::ad

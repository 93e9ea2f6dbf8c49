// Copyright 2026 The cpmts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Shared helpers for the test binaries: seeded random matrices and exact
// (noiseless) CP instances built from known U, V.

#ifndef CPMTS_TESTS_SUPPORT_HPP
#define CPMTS_TESTS_SUPPORT_HPP

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cpmts/linalg.hpp"
#include "cpmts/series.hpp"

namespace testing {

using cpmts::Index;
using cpmts::Matrix;
using cpmts::Vector;

inline Matrix normal_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

inline Matrix unit_columns(Matrix m) {
  for (Index j = 0; j < m.cols(); ++j) m.col(j).normalize();
  return m;
}

inline Matrix random_orthogonal(Index d, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(normal_matrix(d, d, rng));
  return qr.householderQ() * Matrix::Identity(d, d);
}

// m x k with orthonormal columns.
inline Matrix random_orthogonal_cols(Index m, Index k, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(normal_matrix(m, k, rng));
  return qr.householderQ() * Matrix::Identity(m, k);
}

inline double condition_number(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  return s(0) / s(s.size() - 1);
}

// Noiseless reduced model: C = (V (.) U) has columns vec(u_l v_l'), W is an
// orthonormal basis of its span and theta = W'C, so C = W theta.
struct ExactInstance {
  Matrix U;
  Matrix V;
  Matrix C;
  Matrix W;
  Matrix theta;
};

inline ExactInstance exact_instance(Index d1, Index d2, Index d, std::mt19937_64& rng) {
  ExactInstance e;
  e.U = unit_columns(normal_matrix(d1, d, rng));
  e.V = unit_columns(normal_matrix(d2, d, rng));
  e.C.resize(d1 * d2, d);
  for (Index l = 0; l < d; ++l) {
    const Matrix outer = e.U.col(l) * e.V.col(l).transpose();
    e.C.col(l) = outer.reshaped();
  }
  Eigen::HouseholderQR<Matrix> qr(e.C);
  e.W = qr.householderQ() * Matrix::Identity(d1 * d2, d);
  e.theta = e.W.transpose() * e.C;
  return e;
}

// Y_t = A diag(x_t) B' with an AR(1) per factor, no noise.
inline cpmts::MatrixSeries noiseless_series(const Matrix& A, const Matrix& B, Index n,
                                            std::mt19937_64& rng, Vector* ar = nullptr,
                                            Matrix* factors = nullptr) {
  const Index d = A.cols();
  std::normal_distribution<double> dist(0.0, 1.0);
  std::uniform_real_distribution<double> coef(0.5, 0.9);
  Vector phi(d);
  for (Index j = 0; j < d; ++j) phi(j) = (j % 2 ? -1.0 : 1.0) * coef(rng);
  Matrix x(n, d);
  for (Index j = 0; j < d; ++j) {
    double s = 0.0;
    for (Index t = 0; t < n + 100; ++t) {
      s = phi(j) * s + dist(rng);
      if (t >= 100) x(t - 100, j) = s;
    }
  }
  Matrix vecs(A.rows() * B.rows(), n);
  for (Index t = 0; t < n; ++t) {
    const Matrix y = A * x.row(t).transpose().asDiagonal() * B.transpose();
    vecs.col(t) = y.reshaped();
  }
  if (ar) *ar = phi;
  if (factors) *factors = x;
  return cpmts::MatrixSeries(A.rows(), B.rows(), std::move(vecs));
}

// Signed-permutation distance between column sets: for every reference
// column, the best |sign * est_j - ref_l|.
inline double column_match_error(const Matrix& est, const Matrix& ref) {
  double worst = 0.0;
  for (Index l = 0; l < ref.cols(); ++l) {
    double best = INFINITY;
    for (Index j = 0; j < est.cols(); ++j) {
      best = std::min({best, (est.col(j) - ref.col(l)).norm(), (est.col(j) + ref.col(l)).norm()});
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace testing

#endif  // CPMTS_TESTS_SUPPORT_HPP

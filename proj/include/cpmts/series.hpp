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

// Matrix time series container and the lagged covariance estimators.
//
// Vectorization convention (used everywhere in the library): vec() of an
// m1 x m2 matrix stacks columns, so entry (i, j) lands at i + j*m1 (0-based).
// This is Eigen's default column-major storage, so a p x q observation maps
// onto its pq-vector without copying. 4-way tensors are vectorized with the
// last index fastest, see PsiTensor.

#ifndef CPMTS_SERIES_HPP
#define CPMTS_SERIES_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cpmts {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// n observations of a p x q matrix. Stored as a pq x n matrix whose column t
/// is vec(Y_t).
class MatrixSeries {
 public:
  /// `vecs` is pq x n. Throws InvalidArgument on bad shapes or non-finite data.
  MatrixSeries(Index p, Index q, Matrix vecs);

  static MatrixSeries from_matrices(const std::vector<Matrix>& ys);

  Index n() const { return vecs_.cols(); }
  Index p() const { return p_; }
  Index q() const { return q_; }

  const Matrix& vecs() const { return vecs_; }
  auto vec(Index t) const { return vecs_.col(t); }
  Eigen::Map<const Matrix> at(Index t) const {
    return Eigen::Map<const Matrix>(vecs_.col(t).data(), p_, q_);
  }

  /// Contiguous sub-series [first, first + count).
  MatrixSeries window(Index first, Index count) const;

  const std::vector<std::string>& labels() const { return labels_; }
  void set_labels(std::vector<std::string> labels);

 private:
  Index p_;
  Index q_;
  Matrix vecs_;
  std::vector<std::string> labels_;
};

/// The scalar series xi_t = w' vec(Y_t) used as the cross-covariance anchor.
struct ProjectionSeries {
  Vector xi;
  Vector weights;
  /// Number of principal directions averaged into `weights`.
  Index components = 0;
};

/// Averages the leading principal directions of the column-centered n x pq
/// data matrix, taking as many as needed to reach 99% of the total squared
/// singular value mass. Throws NumericalError("zero variance") for a
/// constant series.
ProjectionSeries build_xi(const MatrixSeries& series);

/// Hard thresholding: entries with |s_ij| < delta become zero.
Matrix threshold(const Matrix& s, double delta);

/// (n-k)^-1 sum_{t>k} (Y_t - Ybar)(xi_{t-k} - xibar), a p x q matrix.
Matrix lagcov_y_xi(const MatrixSeries& series, const ProjectionSeries& xi, Index k);

/// (n-k)^-1 sum_{t>k} (vecY_t - mean)(vecY_{t-k} - mean)', a pq x pq matrix.
Matrix lagcov_vec_y(const MatrixSeries& series, Index k);

/// sigma0 = sqrt(||Y||_F^2 / (npq)) over the raw observations.
double noise_scale_estimate(const MatrixSeries& series);

/// Default threshold: sigma0 * sqrt(log(pq)/n) when pq >= n, otherwise 0.
double default_threshold(const MatrixSeries& series);

/// Default eigenvalue-ratio ridge: sigma0 / n.
double default_ridge(const MatrixSeries& series);

/// Column-centered copy of the pq x n storage (full-sample mean removed).
Matrix centered(const MatrixSeries& series);

}  // namespace cpmts

#endif  // CPMTS_SERIES_HPP

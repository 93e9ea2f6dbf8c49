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

#include "cpmts/series.hpp"

#include <cmath>

#include "cpmts/error.hpp"
#include "cpmts/linalg.hpp"

namespace cpmts {

MatrixSeries::MatrixSeries(Index p, Index q, Matrix vecs)
    : p_(p), q_(q), vecs_(std::move(vecs)) {
  CPMTS_REQUIRE(p >= 1 && q >= 1, "series: p and q must be positive");
  CPMTS_REQUIRE(vecs_.rows() == p * q, "series: row count must equal p*q");
  CPMTS_REQUIRE(vecs_.cols() >= 2, "series: need at least two time points");
  CPMTS_REQUIRE(vecs_.allFinite(), "series: non-finite entry (missing values are not imputed)");
}

MatrixSeries MatrixSeries::from_matrices(const std::vector<Matrix>& ys) {
  CPMTS_REQUIRE(!ys.empty(), "series: no observations");
  const Index p = ys.front().rows();
  const Index q = ys.front().cols();
  Matrix vecs(p * q, static_cast<Index>(ys.size()));
  for (std::size_t t = 0; t < ys.size(); ++t) {
    CPMTS_REQUIRE(ys[t].rows() == p && ys[t].cols() == q, "series: inconsistent matrix shapes");
    vecs.col(static_cast<Index>(t)) = ys[t].reshaped();
  }
  return MatrixSeries(p, q, std::move(vecs));
}

MatrixSeries MatrixSeries::window(Index first, Index count) const {
  CPMTS_REQUIRE(first >= 0 && count >= 2 && first + count <= n(), "series: window out of range");
  MatrixSeries out(p_, q_, vecs_.middleCols(first, count));
  if (!labels_.empty()) {
    out.labels_.assign(labels_.begin() + first, labels_.begin() + first + count);
  }
  return out;
}

void MatrixSeries::set_labels(std::vector<std::string> labels) {
  CPMTS_REQUIRE(labels.empty() || static_cast<Index>(labels.size()) == n(),
                "series: label count must equal n");
  labels_ = std::move(labels);
}

Matrix centered(const MatrixSeries& series) {
  const Vector mean = series.vecs().rowwise().mean();
  return series.vecs().colwise() - mean;
}

ProjectionSeries build_xi(const MatrixSeries& series) {
  const Index n = series.n();
  const Index dim = series.p() * series.q();
  const Matrix yc = centered(series);  // dim x n

  const double raw = series.vecs().squaredNorm();
  const double total_centered = yc.squaredNorm();
  if (!(total_centered > 1e-24 * raw) || total_centered == 0.0) {
    throw NumericalError("zero variance");
  }

  // Principal directions of the n x dim matrix yc'. Eigen-decompose whichever
  // Gram matrix is smaller; both give the same right singular vectors.
  Matrix dirs;     // dim x r, columns are right singular vectors
  Vector sq_sing;  // descending squared singular values
  if (dim <= n) {
    Matrix cov = yc * yc.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    dirs = es.eigenvectors().rowwise().reverse();
    sq_sing = es.eigenvalues().reverse().cwiseMax(0.0);
  } else {
    Matrix gram = yc.transpose() * yc;
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    sq_sing = es.eigenvalues().reverse().cwiseMax(0.0);
    const Matrix left = es.eigenvectors().rowwise().reverse();
    const double floor = 1e-14 * sq_sing(0);
    Index usable = 0;
    while (usable < sq_sing.size() && sq_sing(usable) > floor) ++usable;
    dirs.resize(dim, usable);
    for (Index j = 0; j < usable; ++j) {
      dirs.col(j) = yc * left.col(j) / std::sqrt(sq_sing(j));
    }
    sq_sing.conservativeResize(usable);
  }

  const double total = sq_sing.sum();
  Index m = 0;
  double acc = 0.0;
  while (m < sq_sing.size()) {
    acc += sq_sing(m);
    ++m;
    if (acc >= 0.99 * total) break;
  }

  Matrix lead = dirs.leftCols(m);
  fix_column_signs(lead);

  ProjectionSeries out;
  out.components = m;
  out.weights = lead.rowwise().mean();
  out.xi = series.vecs().transpose() * out.weights;
  return out;
}

Matrix threshold(const Matrix& s, double delta) {
  CPMTS_REQUIRE(delta >= 0.0, "threshold: delta must be nonnegative");
  if (delta == 0.0) return s;
  return s.unaryExpr([delta](double v) { return std::abs(v) >= delta ? v : 0.0; });
}

Matrix lagcov_y_xi(const MatrixSeries& series, const ProjectionSeries& xi, Index k) {
  const Index n = series.n();
  CPMTS_REQUIRE(xi.xi.size() == n, "lagcov_y_xi: xi length must equal n");
  if (k < 1 || k > n - 2) throw InvalidArgument("insufficient lag support");
  const Matrix yc = centered(series);
  const Vector xc = xi.xi.array() - xi.xi.mean();
  const Vector s = yc.rightCols(n - k) * xc.head(n - k) / static_cast<double>(n - k);
  return s.reshaped(series.p(), series.q());
}

Matrix lagcov_vec_y(const MatrixSeries& series, Index k) {
  const Index n = series.n();
  if (k < 1 || k > n - 2) throw InvalidArgument("insufficient lag support");
  const Matrix yc = centered(series);
  return yc.rightCols(n - k) * yc.leftCols(n - k).transpose() / static_cast<double>(n - k);
}

double noise_scale_estimate(const MatrixSeries& series) {
  const double count = static_cast<double>(series.n() * series.p() * series.q());
  return std::sqrt(series.vecs().squaredNorm() / count);
}

double default_threshold(const MatrixSeries& series) {
  const Index pq = series.p() * series.q();
  if (pq < series.n()) return 0.0;
  return noise_scale_estimate(series) *
         std::sqrt(std::log(static_cast<double>(pq)) / static_cast<double>(series.n()));
}

double default_ridge(const MatrixSeries& series) {
  return noise_scale_estimate(series) / static_cast<double>(series.n());
}

}  // namespace cpmts

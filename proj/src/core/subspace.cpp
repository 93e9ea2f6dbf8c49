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

#include "cpmts/subspace.hpp"

#include "cpmts/error.hpp"
#include "cpmts/linalg.hpp"

namespace cpmts {

namespace {

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

std::pair<Matrix, Matrix> build_m1_m2(const MatrixSeries& series, const ProjectionSeries& xi,
                                      Index K, double delta1) {
  const Index n = series.n();
  CPMTS_REQUIRE(K >= 1 && K <= n - 2, "build_m1_m2: K out of range");
  CPMTS_REQUIRE(delta1 >= 0.0, "build_m1_m2: delta1 must be nonnegative");
  CPMTS_REQUIRE(xi.xi.size() == n, "build_m1_m2: xi length must equal n");

  const Matrix yc = centered(series);
  const Vector xc = xi.xi.array() - xi.xi.mean();
  Matrix m1 = Matrix::Zero(series.p(), series.p());
  Matrix m2 = Matrix::Zero(series.q(), series.q());
  for (Index k = 1; k <= K; ++k) {
    const Vector s = yc.rightCols(n - k) * xc.head(n - k) / static_cast<double>(n - k);
    const Matrix t = threshold(s.reshaped(series.p(), series.q()), delta1);
    m1.noalias() += t * t.transpose();
    m2.noalias() += t.transpose() * t;
  }
  return {symmetrized(m1), symmetrized(m2)};
}

Matrix build_m(const MatrixSeries& series, const Matrix& P, const Matrix& Q, Index Ktilde,
               double delta2) {
  const Index n = series.n();
  CPMTS_REQUIRE(P.rows() == series.p() && Q.rows() == series.q(),
                "build_m: P/Q do not match the series shape");
  CPMTS_REQUIRE(Ktilde >= 1 && Ktilde <= n - 2, "build_m: Ktilde out of range");
  CPMTS_REQUIRE(delta2 >= 0.0, "build_m: delta2 must be nonnegative");

  const Matrix proj = kron(Q, P);  // pq x d1d2
  const Matrix yc = centered(series);
  const Index r = proj.cols();
  Matrix m = Matrix::Zero(r, r);
  if (delta2 == 0.0) {
    // Without thresholding the projection commutes with the lag sum.
    const Matrix zc = proj.transpose() * yc;
    for (Index k = 1; k <= Ktilde; ++k) {
      const Matrix sz =
          zc.rightCols(n - k) * zc.leftCols(n - k).transpose() / static_cast<double>(n - k);
      m.noalias() += sz * sz.transpose();
    }
  } else {
    Matrix s(yc.rows(), yc.rows());
    for (Index k = 1; k <= Ktilde; ++k) {
      s.noalias() = yc.rightCols(n - k) * yc.leftCols(n - k).transpose();
      s /= static_cast<double>(n - k);
      const Matrix sz = proj.transpose() * threshold(s, delta2) * proj;
      m.noalias() += sz * sz.transpose();
    }
  }
  return symmetrized(m);
}

MatrixSeries reduce(const MatrixSeries& series, const Matrix& P, const Matrix& Q) {
  CPMTS_REQUIRE(P.rows() == series.p() && Q.rows() == series.q(),
                "reduce: P/Q do not match the series shape");
  Matrix out(P.cols() * Q.cols(), series.n());
  for (Index t = 0; t < series.n(); ++t) {
    out.col(t) = (P.transpose() * series.at(t) * Q).reshaped();
  }
  return MatrixSeries(P.cols(), Q.cols(), std::move(out));
}

}  // namespace cpmts

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

#ifndef CPMTS_SUBSPACE_HPP
#define CPMTS_SUBSPACE_HPP

#include <utility>

#include "cpmts/series.hpp"

namespace cpmts {

/// Row space (P), column space (Q) and reduced-factor space (W) bases.
struct SubspaceSet {
  Matrix P;  // p x d1, orthonormal columns
  Matrix Q;  // q x d2
  Matrix W;  // (d1 d2) x d
  Vector eigvals1;
  Vector eigvals2;
  Vector eigvalsM;
};

/// M1 = sum_k T(S_k) T(S_k)', M2 = sum_k T(S_k)' T(S_k) with
/// S_k = lagcov_y_xi(k), k = 1..K, T the hard threshold at delta1.
/// Both outputs are exactly symmetric.
std::pair<Matrix, Matrix> build_m1_m2(const MatrixSeries& series, const ProjectionSeries& xi,
                                      Index K, double delta1);

/// M = sum_{k<=Ktilde} S_k S_k' with S_k = (Q (x) P)' T(lagcov_vec_y(k)) (Q (x) P).
/// Thresholding happens in the pq x pq domain, before projection.
Matrix build_m(const MatrixSeries& series, const Matrix& P, const Matrix& Q, Index Ktilde,
               double delta2);

/// Z_t = P' Y_t Q.
MatrixSeries reduce(const MatrixSeries& series, const Matrix& P, const Matrix& Q);

}  // namespace cpmts

#endif  // CPMTS_SUBSPACE_HPP

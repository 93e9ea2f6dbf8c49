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

// Rank-one characterization tensor, the kernel system built from it, and the
// basis conditioning that prepares the joint-diagonalization inputs.
//
// Symmetric d x d matrices are paired with vectors of length d(d+1)/2 in the
// order (1,1),(1,2),...,(1,d),(2,2),...,(d,d). Diagonal entries map directly;
// off-diagonal entries carry half the vector value.

#ifndef CPMTS_PSI_OMEGA_HPP
#define CPMTS_PSI_OMEGA_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "cpmts/series.hpp"

namespace cpmts {

/// 4-way tensor Psi(D, F) of two m1 x m2 matrices:
///   psi(i,j,k,l) = d_ik f_jl + d_jl f_ik - d_il f_jk - d_jk f_il,
/// i, j < m1 and k, l < m2. vec() places (i,j,k,l) at ((i*m1 + j)*m2 + k)*m2 + l.
/// Psi(D, D) vanishes exactly when rank(D) <= 1.
class PsiTensor {
 public:
  PsiTensor(Index m1, Index m2);

  Index m1() const { return m1_; }
  Index m2() const { return m2_; }

  double operator()(Index i, Index j, Index k, Index l) const { return values_(offset(i, j, k, l)); }
  double& operator()(Index i, Index j, Index k, Index l) { return values_(offset(i, j, k, l)); }

  const Vector& vec() const { return values_; }

 private:
  Index offset(Index i, Index j, Index k, Index l) const { return ((i * m1_ + j) * m2_ + k) * m2_ + l; }

  Index m1_;
  Index m2_;
  Vector values_;
};

PsiTensor psi(const Matrix& d, const Matrix& f);

/// Number of unordered index pairs, d(d+1)/2.
inline Index pair_count(Index d) { return d * (d + 1) / 2; }

/// Reshapes each column of `w` ((m1 m2) x d) into an m1 x m2 matrix.
std::vector<Matrix> unvec_columns(const Matrix& w, Index m1, Index m2);

/// Columns vec Psi(W_i, W_j) over pairs i <= j in the order (1,1),(1,2),...,(d,d).
/// Requires at least two slices of one shape.
Matrix build_omega(const std::vector<Matrix>& slices);

/// Upper bound on rank(Omega) implied by the slice shape alone:
/// min(d(d-1)/2, C(m1,2) C(m2,2)). Identification needs it to reach d(d-1)/2.
Index omega_rank_bound(Index d, Index m1, Index m2);

struct KernelBasis {
  Matrix vectors;         // d(d+1)/2 x d, columns h_1..h_d
  Vector singular_values; // the d smallest singular values of Omega, ascending
  bool rotated = false;
  Matrix rotation;        // Pi when rotated, identity otherwise
  bool degenerate = false;  // Omega was identically zero
};

/// Right-singular vectors of the d smallest singular values, ascending, with the
/// column sign rule. For a zero Omega the canonical coordinate vectors are used.
KernelBasis kernel_basis(const Matrix& omega, Index d);

/// Symmetric matrix of a pair-ordered vector (off-diagonals halved).
Matrix h_matrix(const Vector& h);
/// Inverse of h_matrix.
Vector h_vector(const Matrix& H);
std::vector<Matrix> build_h(const Matrix& basis);

/// Combination weights phi making sum phi_i H_i invertible. Picks the member with
/// the largest smallest singular value (lowest index on ties); if every member
/// is singular, draws random unit vectors from `rng`, up to `max_retries` times.
Vector select_phi(const std::vector<Matrix>& hs, std::mt19937_64& rng, int max_retries = 64);

/// Smallest singular value below this fraction of the largest counts as singular.
inline constexpr double kInvertibleTol = 1e-10;

/// Conditioning rotation Pi = {2 (Y0'Y2) (Y1'Y2 + Y2'Y1)^-1 (Y2'Y0)}^{-1/2} with
/// Y0 = (vec H_i), Y1 = (vec H^-1 H_i), Y2 = (vec H_i H^-1), H = sum phi_i H_i.
/// Returns the basis multiplied by Pi. Throws NumericalError
/// ("rotation ill-conditioned") when the argument of the inverse root is not
/// positive definite.
KernelBasis rotate_basis(const KernelBasis& basis, const std::vector<Matrix>& hs,
                         const Vector& phi);

}  // namespace cpmts

#endif  // CPMTS_PSI_OMEGA_HPP

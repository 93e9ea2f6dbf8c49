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

// Dense helpers shared by the estimation stages. Eigen does the heavy lifting;
// this file pins down the conventions (ordering, signs, tolerances).

#ifndef CPMTS_LINALG_HPP
#define CPMTS_LINALG_HPP

#include "cpmts/series.hpp"

namespace cpmts {

struct EigenPairs {
  Matrix vectors;  // columns, orthonormal
  Vector values;   // descending
};

/// Max |S - S'| relative to ||S||_F (0 for the zero matrix).
double asymmetry(const Matrix& s);

/// Throws InvalidArgument when `s` is not square or asymmetry(s) > rel_tol.
void require_symmetric(const Matrix& s, const char* what, double rel_tol = 1e-10);

/// Flips each column so that its largest-magnitude entry is positive (the
/// first such entry on ties). Returns the applied signs.
Vector fix_column_signs(Matrix& m);

/// Full spectrum of a symmetric matrix, descending.
Vector descending_eigenvalues(const Matrix& s);

/// Eigenvectors of the k largest eigenvalues with the column sign rule.
EigenPairs top_eigvecs(const Matrix& s, Index k);

/// S^{-1/2} for symmetric positive definite S. The argument is symmetrized
/// first; every eigenvalue must exceed rel_floor * lambda_max, otherwise
/// NumericalError is thrown.
Matrix inverse_sqrt_spd(const Matrix& s, double rel_floor = 1e-10);

/// Kronecker product a (x) b.
Matrix kron(const Matrix& a, const Matrix& b);

/// Khatri-Rao product: column l is b_l (x) a_l. Matches vec(a_l b_l').
Matrix khatri_rao(const Matrix& b, const Matrix& a);

/// Singular values, descending.
Vector singular_values(const Matrix& m);

/// Scales every column to unit Euclidean norm. Zero columns are left alone.
void normalize_columns(Matrix& m);

}  // namespace cpmts

#endif  // CPMTS_LINALG_HPP

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

// Non-orthogonal joint diagonalization by multiplicative updates
// V <- (I + U) V (fast Frobenius diagonalization).

#ifndef CPMTS_JOINTDIAG_HPP
#define CPMTS_JOINTDIAG_HPP

#include <vector>

#include "cpmts/series.hpp"

namespace cpmts {

struct JointDiagInstance {
  std::vector<Matrix> mats;  // d symmetric d x d
  int max_iter = 200;
  double tol = 1e-12;        // relative objective decrease that stops the loop
  double max_step = 0.5;     // ||U||_F cap
};

struct JointDiagResult {
  Matrix diagonalizer;  // V
  Matrix theta;         // V^-1, unit columns, sign-fixed
  bool converged = false;
  /// The identity start stalled and the eigenvector start was kept.
  bool restarted = false;
  int iterations = 0;
  double objective = 0.0;
  /// Objective before the first step and after every accepted step.
  std::vector<double> trace;
};

/// sum_m sum_{i != j} [(V H_m V')_ij]^2.
double off_diagonal_energy(const std::vector<Matrix>& mats, const Matrix& v);

/// Throws InvalidArgument for bad input and NumericalError
/// ("diagonalizer degenerate") when V becomes numerically singular.
JointDiagResult ffdiag(const JointDiagInstance& instance);

struct Alignment {
  /// permutation[l]: estimate column matched to reference column l.
  std::vector<Index> permutation;
  Vector signs;   // per reference column
  Vector errors;  // ||sign * est_perm(l) - ref_l||
  double max_error = 0.0;
};

/// Greedy matching on |<est_i, ref_l>|, largest first.
Alignment align_signed_permutation(const Matrix& estimate, const Matrix& reference);

}  // namespace cpmts

#endif  // CPMTS_JOINTDIAG_HPP

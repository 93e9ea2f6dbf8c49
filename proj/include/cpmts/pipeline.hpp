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

// End-to-end CP-factor estimation: ranks, subspaces, the rotation Theta and
// the loadings A, B.

#ifndef CPMTS_PIPELINE_HPP
#define CPMTS_PIPELINE_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpmts/rank_select.hpp"
#include "cpmts/series.hpp"
#include "cpmts/subspace.hpp"

namespace cpmts {

struct EstimatorConfig {
  Index K = 20;
  Index Ktilde = 10;
  // Unset means the data-driven default.
  std::optional<double> delta1;
  std::optional<double> delta2;
  std::optional<double> c1;
  std::optional<double> c2;
  std::optional<double> c3;
  std::uint64_t seed = 0;
  /// (d1, d2, d). Ratio paths are still computed and reported.
  std::optional<std::array<Index, 3>> pinned_ranks;
  int jd_max_iter = 200;
  double jd_tol = 1e-12;
  /// Optional d x d orthogonal matrix applied to the kernel basis before the
  /// conditioning rotation (basis re-parameterization).
  std::optional<Matrix> basis_rotation;
  /// Called with the name of each stage as it starts.
  std::function<void(std::string_view)> trace;
};

struct Diagnostics {
  Index K = 0;
  Index Ktilde = 0;
  Index xi_components = 0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  RatioPath path1;
  RatioPath path2;
  RatioPath pathM;
  bool ranks_pinned = false;
  /// "trivial" (d1 = d2 = d = 1), "rank_one" (d = 1 < d1 d2) or
  /// "joint_diagonalization".
  std::string identification_path;
  Vector omega_singular_values;
  Index omega_rank_bound = 0;
  bool identifiable = true;
  Vector kernel_singular_values;
  bool kernel_degenerate = false;
  Vector phi;
  bool rotated = false;
  Matrix rotation;
  bool jd_converged = true;
  bool jd_restarted = false;
  int jd_iterations = 0;
  double jd_objective = 0.0;
  std::vector<double> jd_trace;
  /// sigma_2 / sigma_1 of every C_l.
  Vector sigma_ratios;
  std::vector<std::string> warnings;
};

struct CPEstimate {
  Index d1 = 0;
  Index d2 = 0;
  Index d = 0;
  SubspaceSet sub;
  Matrix theta;            // d x d
  std::vector<Matrix> C;   // d1 x d2 each
  Matrix U;                // d1 x d
  Matrix V;                // d2 x d
  Matrix A;                // p x d
  Matrix B;                // q x d
  Diagnostics diag;
};

CPEstimate estimate(const MatrixSeries& series, const EstimatorConfig& config = {});

struct RankOne {
  Vector u;
  Vector v;
  double sigma_ratio = 0.0;
};

/// Leading singular pair of C with u's largest-magnitude entry positive and v
/// signed so that u v' keeps the sign of C's rank-one part.
RankOne rank1_extract(const Matrix& C);

/// max over columns a_l of A of min over columns a^_j of 1 - (a^_j' a_l)^2.
/// Both arguments need unit columns (1e-8).
double varpi(const Matrix& A, const Matrix& Ahat);

}  // namespace cpmts

#endif  // CPMTS_PIPELINE_HPP

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

// Ridged eigenvalue-ratio rank estimation.

#ifndef CPMTS_RANK_SELECT_HPP
#define CPMTS_RANK_SELECT_HPP

#include <utility>

#include "cpmts/series.hpp"

namespace cpmts {

struct RatioPath {
  Vector eigenvalues;  // descending, tiny negatives clipped to 0
  double ridge = 0.0;
  /// ratios(j) = (lambda_{j+2} + c) / (lambda_{j+1} + c) in 1-based terms,
  /// with lambda beyond the spectrum taken as 0.
  Vector ratios;
  /// 1-based argmin of `ratios`; smallest index on ties.
  Index rank = 0;
};

/// argmin_{j <= search_max} (lambda_{j+1} + c) / (lambda_j + c). Negative
/// eigenvalues down to -1e-8 * lambda_1 are clipped to zero; anything more
/// negative is treated as a PSD violation.
RatioPath ratio_rank(const Vector& eigenvalues, double ridge, Index search_max);

/// Ranks of M1 (p x p) and M2 (q x q). Searches j <= p - 1 and j <= q - 1
/// (j <= 1 for a 1 x 1 input).
std::pair<RatioPath, RatioPath> estimate_d12(const Matrix& m1, const Matrix& m2, double c1,
                                             double c2);

/// Rank of M (d1*d2 square), searching j <= d1*d2 - 1. Returns 1 without
/// looking at M when d1*d2 == 1.
RatioPath estimate_d(const Matrix& m, double c3, Index d1, Index d2);

}  // namespace cpmts

#endif  // CPMTS_RANK_SELECT_HPP

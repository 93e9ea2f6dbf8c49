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

#include "cpmts/rank_select.hpp"

#include <algorithm>
#include <cmath>

#include "cpmts/error.hpp"
#include "cpmts/linalg.hpp"

namespace cpmts {

namespace {

constexpr double kNegativeClip = 1e-8;
constexpr double kSymmetryTol = 1e-10;

// The final candidate j = m compares lambda_m against the zero appended past
// the spectrum; on noisy data that ratio is c / lambda_m and always wins, so
// the estimators search j <= m - 1.
Index estimator_range(Index m) { return std::max<Index>(1, m - 1); }

}  // namespace

RatioPath ratio_rank(const Vector& eigenvalues, double ridge, Index search_max) {
  if (eigenvalues.size() == 0) throw InvalidArgument("ratio_rank: empty spectrum");
  CPMTS_REQUIRE(search_max >= 1 && search_max <= eigenvalues.size(),
                "ratio_rank: search range out of bounds");
  CPMTS_REQUIRE(ridge > 0.0 && std::isfinite(ridge), "ratio_rank: ridge must be positive");
  CPMTS_REQUIRE(eigenvalues.allFinite(), "ratio_rank: non-finite eigenvalue");
  for (Index j = 1; j < eigenvalues.size(); ++j) {
    CPMTS_REQUIRE(eigenvalues(j) <= eigenvalues(j - 1), "ratio_rank: eigenvalues must be descending");
  }

  RatioPath path;
  path.ridge = ridge;
  path.eigenvalues = eigenvalues;
  const double top = std::max(eigenvalues(0), 0.0);
  for (Index j = 0; j < path.eigenvalues.size(); ++j) {
    double& v = path.eigenvalues(j);
    if (v < 0.0) {
      if (v < -kNegativeClip * top) throw NumericalError("ratio_rank: spectrum is not PSD");
      v = 0.0;
    }
  }

  path.ratios.resize(search_max);
  Index best = 0;
  for (Index j = 0; j < search_max; ++j) {
    const double next = (j + 1 < path.eigenvalues.size()) ? path.eigenvalues(j + 1) : 0.0;
    path.ratios(j) = (next + ridge) / (path.eigenvalues(j) + ridge);
    if (path.ratios(j) < path.ratios(best)) best = j;
  }
  path.rank = best + 1;
  return path;
}

std::pair<RatioPath, RatioPath> estimate_d12(const Matrix& m1, const Matrix& m2, double c1,
                                             double c2) {
  require_symmetric(m1, "estimate_d12 (M1)", kSymmetryTol);
  require_symmetric(m2, "estimate_d12 (M2)", kSymmetryTol);
  const Vector l1 = descending_eigenvalues(m1);
  const Vector l2 = descending_eigenvalues(m2);
  return {ratio_rank(l1, c1, estimator_range(l1.size())),
          ratio_rank(l2, c2, estimator_range(l2.size()))};
}

RatioPath estimate_d(const Matrix& m, double c3, Index d1, Index d2) {
  CPMTS_REQUIRE(d1 >= 1 && d2 >= 1, "estimate_d: ranks must be positive");
  CPMTS_REQUIRE(m.rows() == d1 * d2 && m.cols() == d1 * d2, "estimate_d: dimension mismatch");
  if (d1 * d2 == 1) {
    RatioPath path;
    path.eigenvalues = m.reshaped();
    path.ridge = c3;
    path.rank = 1;
    return path;
  }
  require_symmetric(m, "estimate_d", kSymmetryTol);
  const Vector l = descending_eigenvalues(m);
  return ratio_rank(l, c3, estimator_range(l.size()));
}

}  // namespace cpmts

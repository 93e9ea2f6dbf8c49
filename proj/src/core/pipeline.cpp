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

#include "cpmts/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cpmts/error.hpp"
#include "cpmts/jointdiag.hpp"
#include "cpmts/linalg.hpp"
#include "cpmts/psi_omega.hpp"

namespace cpmts {

namespace {

constexpr double kIdentifiableRatio = 1e-8;

double resolve(const std::optional<double>& v, double fallback, const char* what) {
  if (!v) return fallback;
  CPMTS_REQUIRE(std::isfinite(*v) && *v >= 0.0, std::string(what) + " must be nonnegative");
  return *v;
}

void stage(const EstimatorConfig& config, std::string_view name) {
  if (config.trace) config.trace(name);
}

}  // namespace

RankOne rank1_extract(const Matrix& C) {
  CPMTS_REQUIRE(C.size() > 0, "rank1_extract: empty matrix");
  Eigen::JacobiSVD<Matrix> svd(C, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  if (!(s(0) > 0.0)) throw NumericalError("rank1_extract: zero matrix");
  RankOne out;
  Matrix u = svd.matrixU().col(0);
  const Vector signs = fix_column_signs(u);
  out.u = u.col(0);
  out.v = signs(0) * svd.matrixV().col(0);
  out.sigma_ratio = s.size() > 1 ? s(1) / s(0) : 0.0;
  return out;
}

double varpi(const Matrix& A, const Matrix& Ahat) {
  CPMTS_REQUIRE(A.rows() == Ahat.rows(), "varpi: row counts differ");
  CPMTS_REQUIRE(A.cols() >= 1 && Ahat.cols() >= 1, "varpi: empty loadings");
  for (Index j = 0; j < A.cols(); ++j) {
    CPMTS_REQUIRE(std::abs(A.col(j).norm() - 1.0) <= 1e-8, "varpi: columns of A must be unit");
  }
  for (Index j = 0; j < Ahat.cols(); ++j) {
    CPMTS_REQUIRE(std::abs(Ahat.col(j).norm() - 1.0) <= 1e-8,
                  "varpi: columns of Ahat must be unit");
  }
  const Matrix g = Ahat.transpose() * A;  // g(j, l) = <ahat_j, a_l>
  double worst = 0.0;
  for (Index l = 0; l < A.cols(); ++l) {
    double best = 1.0;
    for (Index j = 0; j < Ahat.cols(); ++j) best = std::min(best, 1.0 - g(j, l) * g(j, l));
    worst = std::max(worst, best);
  }
  return std::clamp(worst, 0.0, 1.0);
}

CPEstimate estimate(const MatrixSeries& series, const EstimatorConfig& config) {
  const Index n = series.n();
  CPMTS_REQUIRE(config.K >= 1 && config.Ktilde >= 1, "estimate: K and Ktilde must be positive");
  CPMTS_REQUIRE(n > std::max(config.K, config.Ktilde) + 1,
                "estimate: n must exceed max(K, Ktilde) + 1");
  CPEstimate est;
  Diagnostics& diag = est.diag;
  if (4 * std::max(config.K, config.Ktilde) > n) {
    diag.warnings.push_back("K or Ktilde exceeds n/4");
  }

  // Stage 1: row and column spaces.
  stage(config, "subspace");
  const ProjectionSeries xi = build_xi(series);
  diag.xi_components = xi.components;
  diag.K = config.K;
  diag.Ktilde = config.Ktilde;
  const double delta_auto = default_threshold(series);
  const double ridge_auto = default_ridge(series);
  diag.delta1 = resolve(config.delta1, delta_auto, "delta1");
  diag.delta2 = resolve(config.delta2, delta_auto, "delta2");
  diag.c1 = resolve(config.c1, ridge_auto, "c1");
  diag.c2 = resolve(config.c2, ridge_auto, "c2");
  diag.c3 = resolve(config.c3, ridge_auto, "c3");

  auto [m1, m2] = build_m1_m2(series, xi, config.K, diag.delta1);
  auto [path1, path2] = estimate_d12(m1, m2, diag.c1, diag.c2);
  diag.path1 = path1;
  diag.path2 = path2;
  est.d1 = path1.rank;
  est.d2 = path2.rank;
  if (config.pinned_ranks) {
    diag.ranks_pinned = true;
    est.d1 = (*config.pinned_ranks)[0];
    est.d2 = (*config.pinned_ranks)[1];
    CPMTS_REQUIRE(est.d1 >= 1 && est.d1 <= series.p() && est.d2 >= 1 && est.d2 <= series.q(),
                  "estimate: pinned d1/d2 out of range");
  }
  SubspaceSet& sub = est.sub;
  const EigenPairs e1 = top_eigvecs(m1, est.d1);
  const EigenPairs e2 = top_eigvecs(m2, est.d2);
  sub.P = e1.vectors;
  sub.Q = e2.vectors;
  sub.eigvals1 = path1.eigenvalues;
  sub.eigvals2 = path2.eigenvalues;

  // Stage 2: reduced factor space.
  const Matrix m = build_m(series, sub.P, sub.Q, config.Ktilde, diag.delta2);
  diag.pathM = estimate_d(m, diag.c3, est.d1, est.d2);
  est.d = diag.pathM.rank;
  if (config.pinned_ranks) {
    est.d = (*config.pinned_ranks)[2];
    CPMTS_REQUIRE(est.d >= 1 && est.d <= est.d1 * est.d2, "estimate: pinned d must lie in [1, d1*d2]");
  }
  sub.eigvalsM = diag.pathM.eigenvalues;
  sub.W = top_eigvecs(m, est.d).vectors;

  const Index d = est.d;
  if (d == 1) {
    est.theta = Matrix::Identity(1, 1);
    if (est.d1 == 1 && est.d2 == 1) {
      diag.identification_path = "trivial";
      est.U = Matrix::Ones(1, 1);
      est.V = Matrix::Ones(1, 1);
      est.C = {sub.W};
      est.A = sub.P;
      est.B = sub.Q;
      diag.sigma_ratios = Vector::Zero(1);
      return est;
    }
    diag.identification_path = "rank_one";
  } else {
    // Stage 3: identify Theta through the kernel of Omega.
    diag.identification_path = "joint_diagonalization";
    stage(config, "psi_omega");
    const Matrix omega = build_omega(unvec_columns(sub.W, est.d1, est.d2));
    diag.omega_singular_values = singular_values(omega);
    diag.omega_rank_bound = omega_rank_bound(d, est.d1, est.d2);
    const Index pairs = d * (d - 1) / 2;
    const Vector& sv = diag.omega_singular_values;
    const bool numeric_rank = sv.size() >= pairs && sv(0) > 0.0 &&
                              sv(pairs - 1) > kIdentifiableRatio * sv(0);
    diag.identifiable = diag.omega_rank_bound >= pairs && numeric_rank;
    if (!diag.identifiable) {
      diag.warnings.push_back("rank of Omega below d(d-1)/2: loadings not identifiable");
    }

    KernelBasis basis = kernel_basis(omega, d);
    diag.kernel_singular_values = basis.singular_values;
    diag.kernel_degenerate = basis.degenerate;
    if (basis.degenerate) diag.warnings.push_back("Omega is zero; kernel basis is arbitrary");
    if (config.basis_rotation) {
      const Matrix& r = *config.basis_rotation;
      CPMTS_REQUIRE(r.rows() == d && r.cols() == d, "estimate: basis_rotation must be d x d");
      basis.vectors = basis.vectors * r;
    }
    std::vector<Matrix> hs = build_h(basis.vectors);
    diag.rotation = Matrix::Identity(d, d);
    try {
      std::mt19937_64 rng(config.seed);
      diag.phi = select_phi(hs, rng);
      basis = rotate_basis(basis, hs, diag.phi);
      hs = build_h(basis.vectors);
      diag.rotated = true;
      diag.rotation = basis.rotation;
    } catch (const NumericalError& e) {
      diag.warnings.push_back(std::string(e.what()) + "; proceeding with the unrotated basis");
    }

    stage(config, "jointdiag");
    JointDiagInstance jd;
    jd.mats = std::move(hs);
    jd.max_iter = config.jd_max_iter;
    jd.tol = config.jd_tol;
    const JointDiagResult r = ffdiag(jd);
    diag.jd_converged = r.converged;
    diag.jd_restarted = r.restarted;
    diag.jd_iterations = r.iterations;
    diag.jd_objective = r.objective;
    diag.jd_trace = r.trace;
    if (!r.converged) diag.warnings.push_back("joint diagonalization did not converge");
    est.theta = r.theta;
  }

  // Stage 4: rank-one factors of C = W Theta.
  stage(config, "rank_one");
  const Matrix c = sub.W * est.theta;
  est.U.resize(est.d1, d);
  est.V.resize(est.d2, d);
  diag.sigma_ratios.resize(d);
  est.C.clear();
  for (Index l = 0; l < d; ++l) {
    est.C.push_back(c.col(l).reshaped(est.d1, est.d2));
    const RankOne r1 = rank1_extract(est.C.back());
    est.U.col(l) = r1.u;
    est.V.col(l) = r1.v;
    diag.sigma_ratios(l) = r1.sigma_ratio;
  }

  // Stage 5: loadings.
  est.A = sub.P * est.U;
  est.B = sub.Q * est.V;
  return est;
}

}  // namespace cpmts

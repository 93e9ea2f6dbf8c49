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

#include "cpmts/jointdiag.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "cpmts/error.hpp"
#include "cpmts/linalg.hpp"

namespace cpmts {

namespace {

constexpr int kMaxHalvings = 30;
constexpr double kSingularRatio = 1e-13;
constexpr double kExactShare = 1e-24;

bool nearly_singular(const Matrix& v) {
  const Vector s = singular_values(v);
  return !(s(s.size() - 1) > kSingularRatio * s(0));
}

// The linearized update: for each pair i < j solve the 2x2 system in
// (U_ij, U_ji) built from the diagonals and off-diagonals of every C_m.
Matrix update_direction(const std::vector<Matrix>& cs) {
  const Index d = cs[0].rows();
  Matrix u = Matrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = i + 1; j < d; ++j) {
      double zii = 0.0, zjj = 0.0, zij = 0.0, yij = 0.0, yji = 0.0;
      for (const Matrix& c : cs) {
        const double di = c(i, i);
        const double dj = c(j, j);
        const double e = c(i, j);
        zii += di * di;
        zjj += dj * dj;
        zij += di * dj;
        yij += dj * e;
        yji += di * e;
      }
      const double det = zii * zjj - zij * zij;
      if (!(std::abs(det) > 0.0)) continue;
      u(i, j) = (zij * yji - zii * yij) / det;
      u(j, i) = (zij * yij - zjj * yji) / det;
    }
  }
  return u;
}

// Off-diagonal part of the objective gradient with respect to U at U = 0.
Matrix gradient_direction(const std::vector<Matrix>& cs) {
  const Index d = cs[0].rows();
  Matrix g = Matrix::Zero(d, d);
  for (const Matrix& c : cs) {
    Matrix off = c;
    off.diagonal().setZero();
    g.noalias() += off * c;
  }
  g.diagonal().setZero();
  return -g;
}

std::vector<Matrix> transformed(const std::vector<Matrix>& mats, const Matrix& v) {
  std::vector<Matrix> out;
  out.reserve(mats.size());
  for (const Matrix& h : mats) out.push_back(v * h * v.transpose());
  return out;
}

}  // namespace

double off_diagonal_energy(const std::vector<Matrix>& mats, const Matrix& v) {
  double total = 0.0;
  for (const Matrix& h : mats) {
    const Matrix c = v * h * v.transpose();
    total += c.squaredNorm() - c.diagonal().squaredNorm();
  }
  return total;
}

namespace {

// Off-diagonal energy share after scaling V to unit rows; comparable across
// diagonalizers of different scale.
double normalized_energy(const std::vector<Matrix>& mats, const Matrix& v) {
  Matrix vn = v;
  for (Index i = 0; i < vn.rows(); ++i) vn.row(i) /= vn.row(i).norm();
  double off = 0.0, total = 0.0;
  for (const Matrix& h : mats) {
    const Matrix c = vn * h * vn.transpose();
    total += c.squaredNorm();
    off += c.squaredNorm() - c.diagonal().squaredNorm();
  }
  return total > 0.0 ? off / total : 0.0;
}

// Rows of V from the eigenvectors of H_a^-1 H_b, where H_a is the best
// conditioned member and H_b a fixed generic combination. Exact for exactly
// diagonalizable sets. Returns an empty matrix when unusable.
Matrix eigen_start(const std::vector<Matrix>& mats) {
  const Index d = mats[0].rows();
  Index a = 0;
  double best = -1.0;
  for (Index m = 0; m < static_cast<Index>(mats.size()); ++m) {
    const Vector s = singular_values(mats[m]);
    const double r = s(0) > 0.0 ? s(d - 1) / s(0) : 0.0;
    if (r > best) {
      best = r;
      a = m;
    }
  }
  if (!(best > 1e-12)) return {};
  Matrix hb = Matrix::Zero(d, d);
  for (Index m = 0; m < static_cast<Index>(mats.size()); ++m) {
    hb += (1.0 + 0.618033988749895 * static_cast<double>(m + 1)) * mats[m];
  }
  Eigen::EigenSolver<Matrix> es(mats[a].partialPivLu().solve(hb));
  if (es.info() != Eigen::Success) return {};
  Matrix v = es.eigenvectors().real().transpose();
  for (Index i = 0; i < d; ++i) {
    const double nrm = v.row(i).norm();
    if (!(nrm > 0.0)) return {};
    v.row(i) /= nrm;
  }
  if (!v.allFinite() || nearly_singular(v)) return {};
  return v;
}

JointDiagResult descend(const JointDiagInstance& instance, Matrix v, double floor) {
  const auto& mats = instance.mats;
  const Index d = v.rows();
  JointDiagResult res;
  double obj = off_diagonal_energy(mats, v);
  res.trace.push_back(obj);
  if (obj <= floor) res.converged = true;

  while (!res.converged && res.iterations < instance.max_iter) {
    const std::vector<Matrix> cs = transformed(mats, v);
    // Backtrack so accepted steps never raise the objective. When the
    // linearized step gives no descent, fall back to steepest descent.
    bool accepted = false;
    Matrix candidate;
    double cand_obj = obj;
    for (int pass = 0; pass < 2 && !accepted; ++pass) {
      Matrix u = pass == 0 ? update_direction(cs) : gradient_direction(cs);
      const double nrm = u.norm();
      if (!(nrm > 0.0)) continue;
      if (pass == 1 || nrm > instance.max_step) u *= instance.max_step / nrm;
      for (int h = 0; h <= kMaxHalvings; ++h) {
        candidate = (Matrix::Identity(d, d) + u) * v;
        cand_obj = off_diagonal_energy(mats, candidate);
        if (cand_obj < obj || (cand_obj == obj && pass == 0)) {
          accepted = true;
          break;
        }
        u *= 0.5;
      }
    }
    ++res.iterations;
    if (!accepted) {
      res.converged = true;  // stationary
      break;
    }
    if (nearly_singular(candidate)) throw NumericalError("diagonalizer degenerate");
    const double decrease = obj - cand_obj;
    v = candidate;
    obj = cand_obj;
    res.trace.push_back(obj);
    if (obj <= floor || decrease <= instance.tol * (obj + decrease)) res.converged = true;
  }
  res.diagonalizer = v;
  res.objective = obj;
  return res;
}

}  // namespace

JointDiagResult ffdiag(const JointDiagInstance& instance) {
  const auto& mats = instance.mats;
  CPMTS_REQUIRE(!mats.empty(), "ffdiag: empty instance");
  const Index d = mats[0].rows();
  CPMTS_REQUIRE(d >= 2, "ffdiag: need d >= 2");
  for (const Matrix& h : mats) {
    CPMTS_REQUIRE(h.rows() == d && h.cols() == d, "ffdiag: inconsistent matrix shapes");
    CPMTS_REQUIRE(h.allFinite(), "ffdiag: non-finite input");
    require_symmetric(h, "ffdiag", 1e-8);
  }
  CPMTS_REQUIRE(instance.max_iter >= 0 && instance.tol >= 0.0 && instance.max_step > 0.0,
                "ffdiag: invalid solver settings");

  double energy = 0.0;
  for (const Matrix& h : mats) energy += h.squaredNorm();
  const double floor = 1e-30 * energy;

  JointDiagResult res = descend(instance, Matrix::Identity(d, d), floor);
  if (normalized_energy(mats, res.diagonalizer) > kExactShare) {
    // The identity start can stall in a local minimum; retry from the
    // eigenvector start and keep whichever ends lower.
    const Matrix v0 = eigen_start(mats);
    if (v0.size() > 0) {
      JointDiagResult alt = descend(instance, v0, floor);
      if (normalized_energy(mats, alt.diagonalizer) < normalized_energy(mats, res.diagonalizer)) {
        alt.restarted = true;
        res = std::move(alt);
      }
    }
  }

  if (nearly_singular(res.diagonalizer)) throw NumericalError("diagonalizer degenerate");
  res.theta = res.diagonalizer.inverse();
  normalize_columns(res.theta);
  fix_column_signs(res.theta);
  return res;
}

Alignment align_signed_permutation(const Matrix& estimate, const Matrix& reference) {
  CPMTS_REQUIRE(estimate.rows() == reference.rows() && estimate.cols() == reference.cols(),
                "align_signed_permutation: shape mismatch");
  const Index d = reference.cols();
  const Matrix g = reference.transpose() * estimate;  // g(l, i) = <ref_l, est_i>
  std::vector<bool> ref_used(d, false), est_used(d, false);
  Alignment out;
  out.permutation.assign(d, 0);
  out.signs = Vector::Ones(d);
  out.errors = Vector::Zero(d);
  for (Index step = 0; step < d; ++step) {
    Index bl = -1, bi = -1;
    double best = -1.0;
    for (Index l = 0; l < d; ++l) {
      if (ref_used[l]) continue;
      for (Index i = 0; i < d; ++i) {
        if (est_used[i]) continue;
        if (std::abs(g(l, i)) > best) {
          best = std::abs(g(l, i));
          bl = l;
          bi = i;
        }
      }
    }
    ref_used[bl] = est_used[bi] = true;
    out.permutation[bl] = bi;
    out.signs(bl) = g(bl, bi) < 0.0 ? -1.0 : 1.0;
  }
  for (Index l = 0; l < d; ++l) {
    out.errors(l) = (out.signs(l) * estimate.col(out.permutation[l]) - reference.col(l)).norm();
  }
  out.max_error = d > 0 ? out.errors.maxCoeff() : 0.0;
  return out;
}

}  // namespace cpmts

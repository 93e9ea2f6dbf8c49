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

#include "cpmts/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cpmts/error.hpp"

namespace cpmts {

double asymmetry(const Matrix& s) {
  if (s.rows() != s.cols()) return std::numeric_limits<double>::infinity();
  const double norm = s.norm();
  if (norm == 0.0) return 0.0;
  return (s - s.transpose()).cwiseAbs().maxCoeff() / norm;
}

void require_symmetric(const Matrix& s, const char* what, double rel_tol) {
  if (s.rows() != s.cols()) {
    throw InvalidArgument(std::string(what) + ": matrix is not square");
  }
  if (asymmetry(s) > rel_tol) {
    throw InvalidArgument(std::string(what) + ": matrix is not symmetric");
  }
}

Vector fix_column_signs(Matrix& m) {
  Vector signs = Vector::Ones(m.cols());
  for (Index j = 0; j < m.cols(); ++j) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < m.rows(); ++i) {
      const double a = std::abs(m(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (m.rows() > 0 && m(arg, j) < 0.0) {
      m.col(j) = -m.col(j);
      signs(j) = -1.0;
    }
  }
  return signs;
}

Vector descending_eigenvalues(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  return es.eigenvalues().reverse();
}

EigenPairs top_eigvecs(const Matrix& s, Index k) {
  require_symmetric(s, "top_eigvecs");
  CPMTS_REQUIRE(k >= 1 && k <= s.rows(), "top_eigvecs: k out of range");
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  EigenPairs out;
  // Eigen orders ascending.
  out.vectors = es.eigenvectors().rightCols(k).rowwise().reverse();
  out.values = es.eigenvalues().tail(k).reverse();
  fix_column_signs(out.vectors);
  return out;
}

Matrix inverse_sqrt_spd(const Matrix& s, double rel_floor) {
  CPMTS_REQUIRE(s.rows() == s.cols(), "inverse_sqrt_spd: matrix is not square");
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const Vector& lam = es.eigenvalues();
  const double top = lam.maxCoeff();
  if (!(top > 0.0) || lam.minCoeff() <= rel_floor * top) {
    throw NumericalError("matrix is not positive definite");
  }
  const Vector inv_root = lam.array().rsqrt();
  return es.eigenvectors() * inv_root.asDiagonal() * es.eigenvectors().transpose();
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix khatri_rao(const Matrix& b, const Matrix& a) {
  CPMTS_REQUIRE(a.cols() == b.cols(), "khatri_rao: column counts differ");
  Matrix out(a.rows() * b.rows(), a.cols());
  for (Index l = 0; l < a.cols(); ++l) {
    for (Index j = 0; j < b.rows(); ++j) {
      out.col(l).segment(j * a.rows(), a.rows()) = b(j, l) * a.col(l);
    }
  }
  return out;
}

Vector singular_values(const Matrix& m) {
  if (m.size() == 0) return Vector();
  if (m.rows() < 64 && m.cols() < 64) {
    return Eigen::JacobiSVD<Matrix>(m).singularValues();
  }
  return Eigen::BDCSVD<Matrix>(m).singularValues();
}

void normalize_columns(Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    const double nrm = m.col(j).norm();
    if (nrm > 0.0) m.col(j) /= nrm;
  }
}

}  // namespace cpmts

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

#include "cpmts/psi_omega.hpp"

#include <algorithm>
#include <cmath>

#include "cpmts/error.hpp"
#include "cpmts/linalg.hpp"

namespace cpmts {

PsiTensor::PsiTensor(Index m1, Index m2)
    : m1_(m1), m2_(m2), values_(Vector::Zero(m1 * m1 * m2 * m2)) {
  CPMTS_REQUIRE(m1 >= 1 && m2 >= 1, "PsiTensor: dimensions must be positive");
}

namespace {

// Writes vec Psi(D, F) into `out` (length m1^2 m2^2).
template <class Out>
void psi_into(const Matrix& d, const Matrix& f, Out&& out) {
  const Index m1 = d.rows();
  const Index m2 = d.cols();
  Index pos = 0;
  for (Index i = 0; i < m1; ++i) {
    for (Index j = 0; j < m1; ++j) {
      for (Index k = 0; k < m2; ++k) {
        for (Index l = 0; l < m2; ++l) {
          // Grouped so index swaps and D <-> F only reorder commutative sums.
          const double plus = d(i, k) * f(j, l) + d(j, l) * f(i, k);
          const double minus = d(i, l) * f(j, k) + d(j, k) * f(i, l);
          out(pos++) = plus - minus;
        }
      }
    }
  }
}

double smallest_singular_value(const Matrix& m) {
  const Vector s = singular_values(m);
  return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

double largest_singular_value(const Matrix& m) {
  const Vector s = singular_values(m);
  return s.size() == 0 ? 0.0 : s(0);
}

}  // namespace

PsiTensor psi(const Matrix& d, const Matrix& f) {
  CPMTS_REQUIRE(d.rows() == f.rows() && d.cols() == f.cols(), "psi: shape mismatch");
  PsiTensor out(d.rows(), d.cols());
  Vector v(out.vec().size());
  psi_into(d, f, v);
  for (Index i = 0; i < v.size(); ++i) {
    out(i / (d.rows() * d.cols() * d.cols()), (i / (d.cols() * d.cols())) % d.rows(),
        (i / d.cols()) % d.cols(), i % d.cols()) = v(i);
  }
  return out;
}

std::vector<Matrix> unvec_columns(const Matrix& w, Index m1, Index m2) {
  CPMTS_REQUIRE(w.rows() == m1 * m2, "unvec_columns: row count must equal m1*m2");
  std::vector<Matrix> out;
  out.reserve(w.cols());
  for (Index c = 0; c < w.cols(); ++c) out.push_back(w.col(c).reshaped(m1, m2));
  return out;
}

Matrix build_omega(const std::vector<Matrix>& slices) {
  CPMTS_REQUIRE(slices.size() >= 2, "build_omega: need at least two slices");
  const Index m1 = slices[0].rows();
  const Index m2 = slices[0].cols();
  for (const Matrix& s : slices) {
    CPMTS_REQUIRE(s.rows() == m1 && s.cols() == m2, "build_omega: inconsistent slice shapes");
  }
  const Index d = static_cast<Index>(slices.size());
  Matrix omega(m1 * m1 * m2 * m2, pair_count(d));
  Index col = 0;
  for (Index i = 0; i < d; ++i) {
    for (Index j = i; j < d; ++j) psi_into(slices[i], slices[j], omega.col(col++));
  }
  return omega;
}

Index omega_rank_bound(Index d, Index m1, Index m2) {
  const Index pairs = d * (d - 1) / 2;
  const Index space = (m1 * (m1 - 1) / 2) * (m2 * (m2 - 1) / 2);
  return std::min(pairs, space);
}

KernelBasis kernel_basis(const Matrix& omega, Index d) {
  CPMTS_REQUIRE(d >= 1 && d <= omega.cols(), "kernel_basis: d exceeds the column count");
  const Index cols = omega.cols();
  KernelBasis out;
  out.rotation = Matrix::Identity(d, d);
  if (omega.cwiseAbs().maxCoeff() == 0.0) {
    // Any orthonormal set spans a kernel of the zero map; take the positions of
    // the diagonal pairs (1,1), (2,2), ...
    out.degenerate = true;
    out.vectors = Matrix::Zero(cols, d);
    out.singular_values = Vector::Zero(d);
    Index pos = 0;
    for (Index i = 0; i < d; ++i) {
      out.vectors(pos, i) = 1.0;
      pos += d - i;
    }
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(omega, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  Vector all = Vector::Zero(cols);  // descending, zero-padded for wide inputs
  all.head(s.size()) = s;
  out.vectors = svd.matrixV().rightCols(d).rowwise().reverse();
  out.singular_values = all.tail(d).reverse();
  fix_column_signs(out.vectors);
  return out;
}

Matrix h_matrix(const Vector& h) {
  const Index d = static_cast<Index>(std::llround((std::sqrt(8.0 * h.size() + 1.0) - 1.0) / 2.0));
  CPMTS_REQUIRE(d >= 1 && pair_count(d) == h.size(), "h_matrix: length is not d(d+1)/2");
  Matrix H(d, d);
  Index pos = 0;
  for (Index i = 0; i < d; ++i) {
    H(i, i) = h(pos++);
    for (Index j = i + 1; j < d; ++j) {
      H(i, j) = H(j, i) = 0.5 * h(pos++);
    }
  }
  return H;
}

Vector h_vector(const Matrix& H) {
  CPMTS_REQUIRE(H.rows() == H.cols(), "h_vector: matrix is not square");
  const Index d = H.rows();
  Vector h(pair_count(d));
  Index pos = 0;
  for (Index i = 0; i < d; ++i) {
    h(pos++) = H(i, i);
    for (Index j = i + 1; j < d; ++j) h(pos++) = H(i, j) + H(j, i);
  }
  return h;
}

std::vector<Matrix> build_h(const Matrix& basis) {
  std::vector<Matrix> out;
  out.reserve(basis.cols());
  for (Index c = 0; c < basis.cols(); ++c) out.push_back(h_matrix(basis.col(c)));
  return out;
}

Vector select_phi(const std::vector<Matrix>& hs, std::mt19937_64& rng, int max_retries) {
  CPMTS_REQUIRE(!hs.empty(), "select_phi: empty set");
  const Index m = static_cast<Index>(hs.size());
  double scale = 0.0;
  for (const Matrix& h : hs) scale = std::max(scale, largest_singular_value(h));
  if (scale == 0.0) throw NumericalError("no invertible combination found");
  const double tol = kInvertibleTol * scale;

  Index best = -1;
  double best_sigma = tol;
  for (Index i = 0; i < m; ++i) {
    const double s = smallest_singular_value(hs[i]);
    if (s > best_sigma) {
      best_sigma = s;
      best = i;
    }
  }
  Vector phi = Vector::Zero(m);
  if (best >= 0) {
    phi(best) = 1.0;
    return phi;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    for (Index i = 0; i < m; ++i) phi(i) = normal(rng);
    const double nrm = phi.norm();
    if (nrm == 0.0) continue;
    phi /= nrm;
    Matrix combo = Matrix::Zero(hs[0].rows(), hs[0].cols());
    for (Index i = 0; i < m; ++i) combo += phi(i) * hs[i];
    if (smallest_singular_value(combo) > tol) return phi;
  }
  throw NumericalError("no invertible combination found");
}

KernelBasis rotate_basis(const KernelBasis& basis, const std::vector<Matrix>& hs,
                         const Vector& phi) {
  const Index m = static_cast<Index>(hs.size());
  CPMTS_REQUIRE(m >= 1 && phi.size() == m && basis.vectors.cols() == m,
                "rotate_basis: basis, H-set and phi sizes differ");
  const Index d = hs[0].rows();
  Matrix combo = Matrix::Zero(d, d);
  for (Index i = 0; i < m; ++i) combo += phi(i) * hs[i];
  Eigen::FullPivLU<Matrix> lu(combo);
  if (!lu.isInvertible()) throw NumericalError("rotation ill-conditioned");
  const Matrix inv = lu.inverse();

  Matrix y0(d * d, m), y1(d * d, m), y2(d * d, m);
  for (Index i = 0; i < m; ++i) {
    y0.col(i) = hs[i].reshaped();
    y1.col(i) = (inv * hs[i]).reshaped();
    y2.col(i) = (hs[i] * inv).reshaped();
  }
  const Matrix middle = y1.transpose() * y2 + y2.transpose() * y1;
  Eigen::FullPivLU<Matrix> mid_lu(middle);
  if (!mid_lu.isInvertible()) throw NumericalError("rotation ill-conditioned");
  const Matrix cross = y0.transpose() * y2;
  const Matrix arg = 2.0 * cross * mid_lu.solve(cross.transpose());

  KernelBasis out = basis;
  try {
    out.rotation = inverse_sqrt_spd(arg);
  } catch (const NumericalError&) {
    throw NumericalError("rotation ill-conditioned");
  }
  out.vectors = basis.vectors * out.rotation;
  out.rotated = true;
  return out;
}

}  // namespace cpmts

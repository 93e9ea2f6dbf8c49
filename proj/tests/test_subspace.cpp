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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cpmts/error.hpp"
#include "cpmts/linalg.hpp"
#include "cpmts/simbench.hpp"
#include "cpmts/subspace.hpp"
#include "support.hpp"

using namespace cpmts;
using testing::normal_matrix;

namespace {

// (n-k)^-1 sum_t (y_i,t - mean_i)(y_j,t-k - mean_j) by plain loops.
double loop_lagcov(const Matrix& v, Index i, Index j, Index k) {
  const Index n = v.cols();
  const double mi = v.row(i).mean(), mj = v.row(j).mean();
  double s = 0.0;
  for (Index t = k; t < n; ++t) s += (v(i, t) - mi) * (v(j, t - k) - mj);
  return s / static_cast<double>(n - k);
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

void check_psd(const Matrix& m) {
  CHECK(asymmetry(m) <= 1e-12 * std::max(1.0, m.norm()));
  const Vector ev = descending_eigenvalues(m);
  CHECK(ev(ev.size() - 1) >= -1e-10 * std::max(ev(0), 1e-300));
}

}  // namespace

TEST_CASE("build_m1_m2 on a rank-one model matches the closed form") {
  std::mt19937_64 rng(12);
  const Matrix a = testing::unit_columns(normal_matrix(5, 1, rng));
  const Matrix b = testing::unit_columns(normal_matrix(4, 1, rng));
  Matrix x;
  const MatrixSeries s = testing::noiseless_series(a, b, 200, rng, nullptr, &x);
  const ProjectionSeries xi = build_xi(s);
  const Index K = 10;
  const auto [m1, m2] = build_m1_m2(s, xi, K, 0.0);

  // Sigma_{Y,xi}(k) = c_k a b' with c_k the scalar lagged covariance of x and xi.
  Matrix xx(2, 200);
  xx.row(0) = x.col(0).transpose();
  xx.row(1) = xi.xi.transpose();
  double sum = 0.0;
  for (Index k = 1; k <= K; ++k) {
    const double ck = loop_lagcov(xx, 0, 1, k);
    sum += ck * ck;
  }
  const Matrix want1 = sum * a * a.transpose();
  const Matrix want2 = sum * b * b.transpose();
  CHECK(max_abs(m1 - want1) <= 1e-10 * max_abs(want1));
  CHECK(max_abs(m2 - want2) <= 1e-10 * max_abs(want2));
  const Vector ev = descending_eigenvalues(m1);
  CHECK(ev(1) <= 1e-8 * ev(0));
}

TEST_CASE("build_m1_m2 edge cases") {
  std::mt19937_64 rng(2);
  const MatrixSeries noise(3, 4, normal_matrix(12, 80, rng));
  const ProjectionSeries xi = build_xi(noise);
  const auto [z1, z2] = build_m1_m2(noise, xi, 5, 1e6);
  CHECK(max_abs(z1) == 0.0);
  CHECK(max_abs(z2) == 0.0);
  CHECK_THROWS_AS(build_m1_m2(noise, xi, 0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(build_m1_m2(noise, xi, 79, 0.0), InvalidArgument);
  const auto [m1, m2] = build_m1_m2(noise, xi, 20, 0.0);
  check_psd(m1);
  check_psd(m2);

  // p = q = 1: both reduce to sum_k Sigma(k)^2
  const MatrixSeries scalar(1, 1, normal_matrix(1, 60, rng));
  const ProjectionSeries sx = build_xi(scalar);
  Matrix both(2, 60);
  both.row(0) = scalar.vecs().row(0);
  both.row(1) = sx.xi.transpose();
  double want = 0.0;
  for (Index k = 1; k <= 7; ++k) want += std::pow(loop_lagcov(both, 0, 1, k), 2);
  const auto [s1, s2] = build_m1_m2(scalar, sx, 7, 0.0);
  CHECK(s1(0, 0) == doctest::Approx(want).epsilon(1e-12));
  CHECK(s2(0, 0) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("top_eigvecs") {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 3, 1, 0;
  const EigenPairs e = top_eigvecs(d, 2);
  CHECK(max_abs(e.vectors - Matrix::Identity(3, 2)) < 1e-15);
  CHECK(e.values(0) == doctest::Approx(3));
  CHECK(e.values(1) == doctest::Approx(1));

  Vector a(4);
  a << 0.2, -0.7, 0.1, 0.4;
  a.normalize();
  const EigenPairs r1 = top_eigvecs(a * a.transpose(), 1);
  CHECK(max_abs(r1.vectors.col(0) + a) < 1e-12);  // largest entry -0.7 flipped positive

  std::mt19937_64 rng(4);
  const Matrix g = normal_matrix(6, 6, rng);
  const Matrix s = g + g.transpose();
  const EigenPairs full = top_eigvecs(s, 6);
  CHECK(max_abs(full.vectors * full.values.asDiagonal() * full.vectors.transpose() - s) < 1e-10);
  for (Index j = 1; j < 6; ++j) CHECK(full.values(j) <= full.values(j - 1));
  Matrix bad = s;
  bad(0, 5) += 1.0;
  CHECK_THROWS_AS(top_eigvecs(bad, 2), InvalidArgument);
  CHECK_THROWS_AS(top_eigvecs(s, 0), InvalidArgument);
}

TEST_CASE("build_m equals a quadruple-loop evaluation") {
  std::mt19937_64 rng(31);
  const Index p = 3, q = 3, n = 40, Kt = 4;
  const MatrixSeries s(p, q, normal_matrix(p * q, n, rng));
  const Matrix P = top_eigvecs([&] { Matrix g = normal_matrix(p, p, rng); return Matrix(g * g.transpose()); }(), 2).vectors;
  const Matrix Q = top_eigvecs([&] { Matrix g = normal_matrix(q, q, rng); return Matrix(g * g.transpose()); }(), 2).vectors;
  for (double delta : {0.0, 0.05}) {
    const Matrix got = build_m(s, P, Q, Kt, delta);
    Matrix want = Matrix::Zero(4, 4);
    for (Index k = 1; k <= Kt; ++k) {
      Matrix S(p * q, p * q);
      for (Index r = 0; r < p * q; ++r)
        for (Index c = 0; c < p * q; ++c) {
          const double v = loop_lagcov(s.vecs(), r, c, k);
          S(r, c) = std::abs(v) >= delta ? v : 0.0;
        }
      Matrix z = Matrix::Zero(4, 4);
      for (Index a = 0; a < 2; ++a)
        for (Index b = 0; b < 2; ++b)
          for (Index c = 0; c < 2; ++c)
            for (Index e = 0; e < 2; ++e) {
              double acc = 0.0;
              for (Index i = 0; i < p; ++i)
                for (Index j = 0; j < q; ++j)
                  for (Index i2 = 0; i2 < p; ++i2)
                    for (Index j2 = 0; j2 < q; ++j2)
                      acc += P(i, a) * Q(j, b) * S(i + j * p, i2 + j2 * p) * P(i2, c) * Q(j2, e);
              z(a + 2 * b, c + 2 * e) = acc;
            }
      want += z * z.transpose();
    }
    CHECK(max_abs(got - want) <= 1e-12 * std::max(1.0, max_abs(want)));
    check_psd(got);
  }
}

TEST_CASE("build_m scalar reduction and edge cases") {
  std::mt19937_64 rng(32);
  const MatrixSeries s(3, 2, normal_matrix(6, 50, rng));
  const Matrix P = testing::unit_columns(normal_matrix(3, 1, rng));
  const Matrix Q = testing::unit_columns(normal_matrix(2, 1, rng));
  // z_t = p' Y_t q as a scalar series
  Matrix z(1, 50);
  for (Index t = 0; t < 50; ++t) z(0, t) = (P.transpose() * s.at(t) * Q)(0, 0);
  double want = 0.0;
  for (Index k = 1; k <= 6; ++k) want += std::pow(loop_lagcov(z, 0, 0, k), 2);
  CHECK(build_m(s, P, Q, 6, 0.0)(0, 0) == doctest::Approx(want).epsilon(1e-12));

  CHECK(max_abs(build_m(s, P, Q, 6, 1e9)) == 0.0);
  CHECK_THROWS_AS(build_m(s, Matrix::Identity(4, 1), Q, 6, 0.0), InvalidArgument);
  CHECK_THROWS_AS(build_m(s, P, Q, 0, 0.0), InvalidArgument);
}

TEST_CASE("reduce") {
  std::mt19937_64 rng(41);
  const MatrixSeries s(4, 3, normal_matrix(12, 9, rng));
  const MatrixSeries same = reduce(s, Matrix::Identity(4, 4), Matrix::Identity(3, 3));
  CHECK(same.vecs() == s.vecs());

  const Matrix P = testing::random_orthogonal_cols(4, 2, rng);
  const Matrix Q = testing::random_orthogonal_cols(3, 2, rng);
  std::vector<Matrix> ys, zs;
  for (int t = 0; t < 5; ++t) {
    zs.push_back(normal_matrix(2, 2, rng));
    ys.push_back(P * zs.back() * Q.transpose());
  }
  const MatrixSeries back = reduce(MatrixSeries::from_matrices(ys), P, Q);
  for (int t = 0; t < 5; ++t) CHECK(max_abs(back.at(t) - zs[t]) < 1e-12);

  const MatrixSeries r = reduce(s, P, Q);
  const Matrix kq = kron(Q, P);
  CHECK(max_abs(r.vecs() - kq.transpose() * s.vecs()) < 1e-12);
  CHECK_THROWS_AS(reduce(s, Q, P), InvalidArgument);
}

TEST_CASE("noiseless R1: M1 has rank d1") {
  ScenarioConfig c;
  c.n = 1000;
  c.p = 10;
  c.q = 8;
  c.d = 3;
  c.noise_scale = 0.0;
  c.seed = 5;
  const MatrixSeries s = generate(c).series;
  const auto [m1, m2] = build_m1_m2(s, build_xi(s), 20, 0.0);
  const Vector e1 = descending_eigenvalues(m1);
  const Vector e2 = descending_eigenvalues(m2);
  CHECK(e1(3) / e1(2) < 1e-6);
  CHECK(e2(3) / e2(2) < 1e-6);
  check_psd(m1);
  check_psd(m2);
}

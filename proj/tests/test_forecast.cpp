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
#include "cpmts/forecast.hpp"
#include "cpmts/jointdiag.hpp"
#include "cpmts/linalg.hpp"
#include "cpmts/simbench.hpp"
#include "support.hpp"

using namespace cpmts;
using testing::normal_matrix;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Rank-one noiseless series Y_t = x_t a b' with x_t = phi x_{t-1}, x_0 = 1.
MatrixSeries rank_one_series(const Vector& a, const Vector& b, double phi, Index n) {
  Matrix vecs(a.size() * b.size(), n);
  double x = 1.0;
  for (Index t = 0; t < n; ++t) {
    vecs.col(t) = (x * a * b.transpose()).reshaped();
    x *= phi;
  }
  return MatrixSeries(a.size(), b.size(), std::move(vecs));
}

}  // namespace

TEST_CASE("fit_var: exact scalar recursion") {
  Matrix x(40, 1);
  x(0, 0) = 1.0;
  for (Index t = 1; t < 40; ++t) x(t, 0) = 0.5 * x(t - 1, 0);
  const VARModel m = fit_var(x, 5);
  CHECK(m.degenerate);
  CHECK(m.order == 1);
  CHECK(m.coefs.size() == 1);
  CHECK(std::abs(m.coefs[0](0, 0) - 0.5) <= 1e-14);
  CHECK(std::abs(m.intercept(0)) <= 1e-14);
  CHECK(m.aic.size() == 1);
}

TEST_CASE("fit_var: white noise has small coefficients") {
  std::mt19937_64 rng(1);
  const Matrix x = normal_matrix(500, 2, rng);
  const VARModel m = fit_var(x, 5);
  CHECK_FALSE(m.degenerate);
  CHECK(m.aic.size() == 5);
  for (const Matrix& c : m.coefs) CHECK(max_abs(c) < 0.2);
  // The chosen order minimizes AIC, smallest order on ties.
  Index best = 0;
  for (Index r = 1; r < 5; ++r)
    if (m.aic[r] < m.aic[best]) best = r;
  CHECK(m.order == best + 1);
}

TEST_CASE("fit_var: VAR(2) order is selected") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> eps(0.0, 0.1);
  Matrix a1(2, 2), a2(2, 2);
  a1 << 0.5, 0.1, -0.2, 0.4;
  a2 << -0.4, 0.0, 0.1, -0.3;
  Matrix x = Matrix::Zero(2100, 2);
  for (Index t = 2; t < 2100; ++t) {
    Vector e(2);
    e << eps(rng), eps(rng);
    x.row(t) = (a1 * x.row(t - 1).transpose() + a2 * x.row(t - 2).transpose() + e).transpose();
  }
  const VARModel m = fit_var(x.bottomRows(2000), 5);
  CHECK(m.order == 2);
  CHECK(max_abs(m.coefs[0] - a1) < 0.05);
  CHECK(max_abs(m.coefs[1] - a2) < 0.05);
}

TEST_CASE("fit_var: noiseless VAR(1) coefficients") {
  Matrix a1(2, 2);
  const double r = 0.99, w = 0.3;
  a1 << r * std::cos(w), -r * std::sin(w), r * std::sin(w), r * std::cos(w);
  Matrix x(200, 2);
  x.row(0) << 1.0, 0.5;
  for (Index t = 1; t < 200; ++t) x.row(t) = (a1 * x.row(t - 1).transpose()).transpose();
  const VARModel m = fit_var(x, 3);
  CHECK(m.degenerate);
  CHECK(m.order == 1);
  CHECK(max_abs(m.coefs[0] - a1) <= 1e-8);
}

TEST_CASE("fit_var: bad input") {
  CHECK_THROWS_AS(fit_var(Matrix::Zero(5, 2), 2), InvalidArgument);
  CHECK_THROWS_AS(fit_var(Matrix::Zero(50, 2), 0), InvalidArgument);
}

TEST_CASE("forecast_var examples") {
  VARModel ar;
  ar.dim = 1;
  ar.order = 1;
  ar.intercept = Vector::Constant(1, 0.3);
  ar.coefs = {Matrix::Constant(1, 1, 0.7)};
  Matrix hist(3, 1);
  hist << 9.0, 9.0, 2.0;
  CHECK(forecast_var(ar, hist, 1)(0, 0) == doctest::Approx(0.3 + 0.7 * 2.0));

  VARModel zero;
  zero.dim = 2;
  zero.order = 2;
  zero.intercept = Vector(2);
  zero.intercept << 1.5, -2.0;
  zero.coefs = {Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
  const Matrix f = forecast_var(zero, Matrix::Ones(4, 2), 5);
  for (Index j = 0; j < 5; ++j) CHECK(f.row(j) == zero.intercept.transpose());

  VARModel v1;
  v1.dim = 2;
  v1.order = 1;
  v1.intercept = Vector(2);
  v1.intercept << 0.1, -0.2;
  Matrix a(2, 2);
  a << 0.5, 0.2, -0.3, 0.8;
  v1.coefs = {a};
  Vector x(2);
  x << 1.0, 2.0;
  const Matrix g = forecast_var(v1, x.transpose(), 2);
  const Vector step1 = v1.intercept + a * x;
  const Vector step2 = v1.intercept + a * step1;
  CHECK(max_abs(g.row(0).transpose() - step1) <= 1e-15);
  CHECK(max_abs(g.row(1).transpose() - step2) <= 1e-15);

  CHECK_THROWS_AS(forecast_var(zero, Matrix::Ones(1, 2), 1), InvalidArgument);
  CHECK_THROWS_AS(forecast_var(v1, x.transpose(), 0), InvalidArgument);
}

TEST_CASE("unified forecast: rank-one closed form") {
  std::mt19937_64 rng(3);
  const Vector a = normal_matrix(5, 1, rng).col(0).normalized();
  const Vector b = normal_matrix(4, 1, rng).col(0).normalized();
  const double phi = 0.8;
  const MatrixSeries y = rank_one_series(a, b, phi, 50);
  SubspaceSet sub;
  sub.P = a;
  sub.Q = -b;
  sub.W = Matrix::Constant(1, 1, -1.0);
  const ForecastOutput out = predict_unified(y, sub, 2, 5);
  CHECK(out.model.degenerate);
  CHECK(out.model.coefs[0](0, 0) == doctest::Approx(phi).epsilon(1e-10));
  const double xn = std::pow(phi, 49);
  CHECK(max_abs(out.predictions[0] - phi * xn * a * b.transpose()) <= 1e-10 * xn);
  CHECK(max_abs(out.predictions[1] - phi * phi * xn * a * b.transpose()) <= 1e-10 * xn);
  CHECK_THROWS_AS(predict_unified(y, sub, 0, 5), InvalidArgument);
}

TEST_CASE("unified forecast is invariant to orthonormal indeterminacy") {
  ScenarioConfig cfg;
  cfg.scenario = Scenario::R3;
  cfg.n = 200;
  cfg.p = 8;
  cfg.q = 6;
  cfg.d = 3;
  cfg.seed = 4;
  const GroundTruth truth = generate(cfg);
  EstimatorConfig ec;
  ec.pinned_ranks = std::array<Index, 3>{2, 2, 3};
  const CPEstimate est = estimate(truth.series, ec);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix e1 = testing::random_orthogonal(2, rng);
    const Matrix e2 = testing::random_orthogonal(2, rng);
    const Matrix e3 = testing::random_orthogonal(3, rng);
    SubspaceSet sub = est.sub;
    sub.P = est.sub.P * e1;
    sub.Q = est.sub.Q * e2;
    sub.W = kron(e2, e1).transpose() * est.sub.W * e3;
    const ForecastOutput a = predict_unified(truth.series, est.sub, 2);
    const ForecastOutput b = predict_unified(truth.series, sub, 2);
    CHECK(a.model.order == b.model.order);
    for (Index j = 0; j < 2; ++j) CHECK(max_abs(a.predictions[j] - b.predictions[j]) <= 1e-8);
  }
}

TEST_CASE("latent forecast recovers the factors on noiseless data") {
  ScenarioConfig cfg;
  cfg.n = 500;
  cfg.p = 10;
  cfg.q = 10;
  cfg.d = 3;
  cfg.seed = 6;
  cfg.noise_scale = 0.0;
  const GroundTruth truth = generate(cfg);
  const CPEstimate est = estimate(truth.series);
  REQUIRE(est.d == 3);
  const Alignment al = align_signed_permutation(est.A, truth.A);
  REQUIRE(al.max_error <= 1e-6);

  // Oracle: least squares on the estimated loadings.
  const Matrix L = khatri_rao(est.B, est.A);
  const Matrix xhat = L.colPivHouseholderQr().solve(truth.series.vecs()).transpose();
  Matrix xaligned(truth.x.rows(), 3);
  for (Index l = 0; l < 3; ++l) xaligned.col(l) = al.signs(l) * xhat.col(al.permutation[l]);
  // A-column signs and B-column signs multiply, so compare up to one sign per factor.
  for (Index l = 0; l < 3; ++l) {
    const double s = xaligned.col(l).dot(truth.x.col(l)) < 0 ? -1.0 : 1.0;
    CHECK((s * xaligned.col(l) - truth.x.col(l)).cwiseAbs().maxCoeff() <=
          1e-6 * truth.x.col(l).cwiseAbs().maxCoeff());
  }

  const ForecastOutput lat = predict_latent(truth.series, est, 1);
  CHECK(lat.method == ForecastMethod::Latent);
  const VARModel m = fit_var(truth.x, 5);
  const Vector xf = forecast_var(m, truth.x, 1).row(0).transpose();
  const Matrix want = truth.A * xf.asDiagonal() * truth.B.transpose();
  CHECK(max_abs(lat.predictions[0] - want) <= 1e-6 * max_abs(want));
}

TEST_CASE("latent forecast with d = 1 is a scalar AR") {
  std::mt19937_64 rng(7);
  const Matrix a = testing::unit_columns(normal_matrix(6, 1, rng));
  const Matrix b = testing::unit_columns(normal_matrix(5, 1, rng));
  const MatrixSeries y = testing::noiseless_series(a, b, 300, rng);
  const CPEstimate est = estimate(y);
  REQUIRE(est.d == 1);
  const ForecastOutput out = predict_latent(y, est, 3);
  CHECK(out.model.dim == 1);
  CHECK(out.latent_forecasts.cols() == 1);
  const ForecastOutput uni = predict_unified(y, est.sub, 3);
  for (Index j = 0; j < 3; ++j) CHECK(max_abs(out.predictions[j] - uni.predictions[j]) <= 1e-8);
}

TEST_CASE("latent forecast refuses unidentified loadings") {
  ScenarioConfig cfg;
  cfg.scenario = Scenario::R3;
  cfg.n = 300;
  cfg.p = 10;
  cfg.q = 10;
  cfg.d = 3;
  cfg.seed = 8;
  const GroundTruth truth = generate(cfg);
  EstimatorConfig ec;
  ec.pinned_ranks = std::array<Index, 3>{2, 2, 3};
  const CPEstimate est = estimate(truth.series, ec);
  CHECK_FALSE(est.diag.identifiable);
  CHECK_THROWS_AS(predict(truth.series, est, ForecastMethod::Latent, 1), NotIdentifiable);
  CHECK_THROWS_WITH(predict(truth.series, est, ForecastMethod::Latent, 1),
                    "loadings not identifiable; use unified prediction");
  const ForecastOutput sub = predict(truth.series, est, ForecastMethod::LatentSubstitute, 1);
  CHECK(sub.method == ForecastMethod::LatentSubstitute);
  CHECK(predict(truth.series, est, ForecastMethod::Unified, 1).predictions.size() == 1);

  CPEstimate collapsed = est;
  collapsed.diag.identifiable = true;
  collapsed.A.col(2) = collapsed.A.col(1);
  collapsed.B.col(2) = collapsed.B.col(1);
  CHECK_THROWS_AS(predict_latent(truth.series, collapsed, 1), NotIdentifiable);
}

TEST_CASE("method names") {
  for (ForecastMethod m :
       {ForecastMethod::Unified, ForecastMethod::Latent, ForecastMethod::LatentSubstitute})
    CHECK(parse_method(method_name(m)) == m);
  CHECK_THROWS_AS(parse_method("oracle"), InvalidArgument);
}

TEST_CASE("rrmse and rmae") {
  std::mt19937_64 rng(9);
  const Matrix y = normal_matrix(4, 3, rng);
  CHECK(rrmse(y, y) == 0.0);
  CHECK(rmae(y, y) == 0.0);
  for (double c : {0.5, -2.0}) {
    const Matrix yhat = (y.array() + c).matrix();
    CHECK(rrmse(yhat, y) == doctest::Approx(std::abs(c)).epsilon(1e-12));
    CHECK(rmae(yhat, y) == doctest::Approx(std::abs(c)).epsilon(1e-12));
  }
  const Matrix z = normal_matrix(4, 3, rng);
  CHECK(rrmse(z, y) > 0.0);
  CHECK(rmae(z, y) > 0.0);
  CHECK(rmae(z, y) <= rrmse(z, y) + 1e-15);
  CHECK_THROWS_AS(rrmse(z, Matrix::Zero(3, 4)), InvalidArgument);
}

TEST_CASE("rolling_eval") {
  std::mt19937_64 rng(10);
  const Vector a = normal_matrix(4, 1, rng).col(0).normalized();
  const Vector b = normal_matrix(3, 1, rng).col(0).normalized();
  const MatrixSeries y = rank_one_series(a, b, 0.97, 80);
  EstimatorConfig ec;
  ec.K = 3;
  ec.Ktilde = 3;
  const RollingResult r = rolling_eval(y, ForecastMethod::Unified, 60, {1, 2}, ec);
  const Index origins = 80 - 60 - 2 + 1;
  CHECK(r.steps.size() == static_cast<std::size_t>(2 * origins));
  for (const RollingStep& s : r.steps) {
    CHECK(s.target == s.origin + 60 + s.horizon - 1);
    CHECK(s.rrmse <= 1e-10);
    CHECK(s.rmae <= 1e-10);
  }
  CHECK(r.rmse.size() == 2);
  for (double v : r.rmse) CHECK(v <= 1e-10);

  CHECK_THROWS_AS(rolling_eval(y, ForecastMethod::Unified, 79, {2}, ec), InvalidArgument);
  CHECK_THROWS_AS(rolling_eval(y, ForecastMethod::Unified, 1, {1}, ec), InvalidArgument);
}

TEST_CASE("rolling_eval RMSE aggregates the per-step errors") {
  ScenarioConfig cfg;
  cfg.n = 140;
  cfg.p = 5;
  cfg.q = 4;
  cfg.d = 2;
  cfg.seed = 11;
  const GroundTruth truth = generate(cfg);
  EstimatorConfig ec;
  ec.pinned_ranks = std::array<Index, 3>{2, 2, 2};
  const RollingResult r = rolling_eval(truth.series, ForecastMethod::Unified, 120, {1}, ec);
  double sum = 0.0;
  for (const RollingStep& s : r.steps) sum += s.rrmse;  // rRMSE = ||.||_F / sqrt(pq)
  CHECK(r.rmse[0] == doctest::Approx(sum / static_cast<double>(r.steps.size())).epsilon(1e-12));
}

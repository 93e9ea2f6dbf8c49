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

#include "cpmts/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cpmts/error.hpp"
#include "cpmts/linalg.hpp"

namespace cpmts {

namespace {

constexpr double kDetFloor = 1e-300;
constexpr double kResidualShare = 1e-20;
constexpr double kLoadingRank = 1e-8;
constexpr const char* kNotIdentified = "loadings not identifiable; use unified prediction";

// Design matrix [1, x_{t-1}', ..., x_{t-r}'] for t = r..T-1 (0-based).
Matrix design(const Matrix& x, Index r) {
  const Index T = x.rows();
  const Index m = x.cols();
  Matrix z(T - r, 1 + r * m);
  z.col(0).setOnes();
  for (Index lag = 1; lag <= r; ++lag) {
    z.middleCols(1 + (lag - 1) * m, m) = x.middleRows(r - lag, T - r);
  }
  return z;
}

ForecastOutput assemble(const VARModel& model, const Matrix& latent, Index h) {
  ForecastOutput out;
  out.horizon = h;
  out.model = model;
  out.latent_forecasts = forecast_var(model, latent, h);
  return out;
}

}  // namespace

VARModel fit_var(const Matrix& latent, Index max_order) {
  const Index T = latent.rows();
  const Index m = latent.cols();
  CPMTS_REQUIRE(m >= 1 && max_order >= 1, "fit_var: need dim >= 1 and max_order >= 1");
  CPMTS_REQUIRE(latent.allFinite(), "fit_var: non-finite input");
  CPMTS_REQUIRE(T > m * max_order + m + 1, "fit_var: series too short for max_order");

  const Matrix centered = latent.rowwise() - latent.colwise().mean();
  const double scale = centered.squaredNorm() / static_cast<double>(T);

  VARModel best;
  double best_aic = std::numeric_limits<double>::infinity();
  std::vector<double> aics;
  for (Index r = 1; r <= max_order; ++r) {
    const Matrix z = design(latent, r);
    const Matrix y = latent.bottomRows(T - r);
    const Matrix coef = z.colPivHouseholderQr().solve(y);  // (1 + rm) x m
    const Matrix resid = y - z * coef;
    const double neff = static_cast<double>(T - r);
    const Matrix sigma = resid.transpose() * resid / neff;
    const double det = sigma.determinant();
    const bool degenerate = det <= kDetFloor || sigma.trace() <= kResidualShare * scale;
    const double aic = degenerate ? -std::numeric_limits<double>::infinity()
                                  : std::log(det) + 2.0 * r * m * m / neff;
    aics.push_back(aic);
    if (degenerate || aic < best_aic) {
      best_aic = aic;
      best.dim = m;
      best.order = r;
      best.intercept = coef.row(0).transpose();
      best.coefs.clear();
      for (Index lag = 1; lag <= r; ++lag) {
        best.coefs.push_back(coef.middleRows(1 + (lag - 1) * m, m).transpose());
      }
      best.sigma = sigma;
      best.degenerate = degenerate;
    }
    if (degenerate) break;
  }
  best.aic = std::move(aics);
  return best;
}

Matrix forecast_var(const VARModel& model, const Matrix& history, Index h) {
  CPMTS_REQUIRE(h >= 1, "forecast_var: horizon must be at least 1");
  CPMTS_REQUIRE(history.cols() == model.dim, "forecast_var: dimension mismatch");
  CPMTS_REQUIRE(history.rows() >= model.order, "forecast_var: history shorter than the order");
  const Index m = model.dim;
  const Index r = model.order;
  Matrix path(r + h, m);
  path.topRows(r) = history.bottomRows(r);
  for (Index j = 0; j < h; ++j) {
    Vector next = model.intercept;
    for (Index lag = 1; lag <= r; ++lag) {
      next.noalias() += model.coefs[lag - 1] * path.row(r + j - lag).transpose();
    }
    path.row(r + j) = next.transpose();
  }
  return path.bottomRows(h);
}

const char* method_name(ForecastMethod m) {
  switch (m) {
    case ForecastMethod::Unified:
      return "unified";
    case ForecastMethod::Latent:
      return "latent";
    case ForecastMethod::LatentSubstitute:
      return "latent-substitute";
  }
  return "unknown";
}

ForecastMethod parse_method(const std::string& name) {
  if (name == "unified") return ForecastMethod::Unified;
  if (name == "latent") return ForecastMethod::Latent;
  if (name == "latent-substitute") return ForecastMethod::LatentSubstitute;
  throw InvalidArgument("unknown forecast method: " + name);
}

ForecastOutput predict_unified(const MatrixSeries& series, const SubspaceSet& sub, Index h,
                               Index max_order) {
  CPMTS_REQUIRE(h >= 1, "predict_unified: horizon must be at least 1");
  CPMTS_REQUIRE(sub.P.rows() == series.p() && sub.Q.rows() == series.q(),
                "predict_unified: subspaces do not match the series shape");
  CPMTS_REQUIRE(sub.W.rows() == sub.P.cols() * sub.Q.cols(),
                "predict_unified: W does not match P and Q");
  const Matrix proj = kron(sub.Q, sub.P) * sub.W;  // pq x d
  const Matrix latent = (proj.transpose() * series.vecs()).transpose();
  ForecastOutput out = assemble(fit_var(latent, max_order), latent, h);
  out.method = ForecastMethod::Unified;
  for (Index j = 0; j < h; ++j) {
    const Vector z = sub.W * out.latent_forecasts.row(j).transpose();
    out.predictions.push_back(sub.P * z.reshaped(sub.P.cols(), sub.Q.cols()) *
                              sub.Q.transpose());
  }
  return out;
}

ForecastOutput predict_latent(const MatrixSeries& series, const CPEstimate& est, Index h,
                              Index max_order, bool allow_unidentified) {
  CPMTS_REQUIRE(h >= 1, "predict_latent: horizon must be at least 1");
  CPMTS_REQUIRE(est.A.rows() == series.p() && est.B.rows() == series.q(),
                "predict_latent: loadings do not match the series shape");
  if (!est.diag.identifiable && !allow_unidentified) throw NotIdentifiable(kNotIdentified);
  const Matrix L = khatri_rao(est.B, est.A);
  Eigen::JacobiSVD<Matrix> svd(L, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  if (!(s(s.size() - 1) > kLoadingRank)) throw NotIdentifiable(kNotIdentified);
  const Matrix pinv =
      svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();  // d x pq
  const Matrix latent = (pinv * series.vecs()).transpose();
  ForecastOutput out = assemble(fit_var(latent, max_order), latent, h);
  out.method = allow_unidentified ? ForecastMethod::LatentSubstitute : ForecastMethod::Latent;
  for (Index j = 0; j < h; ++j) {
    out.predictions.push_back(est.A * out.latent_forecasts.row(j).transpose().asDiagonal() *
                              est.B.transpose());
  }
  return out;
}

ForecastOutput predict(const MatrixSeries& series, const CPEstimate& est, ForecastMethod method,
                       Index h, Index max_order) {
  switch (method) {
    case ForecastMethod::Unified:
      return predict_unified(series, est.sub, h, max_order);
    case ForecastMethod::Latent:
      return predict_latent(series, est, h, max_order, false);
    case ForecastMethod::LatentSubstitute:
      return predict_latent(series, est, h, max_order, true);
  }
  throw InvalidArgument("unknown forecast method");
}

double rrmse(const Matrix& yhat, const Matrix& y) {
  CPMTS_REQUIRE(yhat.rows() == y.rows() && yhat.cols() == y.cols() && y.size() > 0,
                "rrmse: shape mismatch");
  return std::sqrt((yhat - y).squaredNorm() / static_cast<double>(y.size()));
}

double rmae(const Matrix& yhat, const Matrix& y) {
  CPMTS_REQUIRE(yhat.rows() == y.rows() && yhat.cols() == y.cols() && y.size() > 0,
                "rmae: shape mismatch");
  return (yhat - y).cwiseAbs().sum() / static_cast<double>(y.size());
}

RollingResult rolling_eval(const MatrixSeries& series, ForecastMethod method, Index window,
                           const std::vector<Index>& horizons, const EstimatorConfig& config,
                           Index max_order) {
  CPMTS_REQUIRE(!horizons.empty(), "rolling_eval: no horizons");
  for (Index h : horizons) CPMTS_REQUIRE(h >= 1, "rolling_eval: horizons must be positive");
  const Index hmax = *std::max_element(horizons.begin(), horizons.end());
  CPMTS_REQUIRE(window >= 2 && window + hmax <= series.n(), "rolling_eval: window too small or too long");
  RollingResult res;
  res.horizons = horizons;
  res.rmse.assign(horizons.size(), 0.0);
  const Index origins = series.n() - window - hmax + 1;
  for (Index s = 0; s < origins; ++s) {
    const MatrixSeries fit = series.window(s, window);
    const CPEstimate est = estimate(fit, config);
    const ForecastOutput out = predict(fit, est, method, hmax, max_order);
    for (std::size_t k = 0; k < horizons.size(); ++k) {
      const Index h = horizons[k];
      const Index target = s + window + h - 1;
      const Matrix truth = series.at(target);
      const Matrix& yhat = out.predictions[h - 1];
      res.steps.push_back({s, h, target, rrmse(yhat, truth), rmae(yhat, truth)});
      res.rmse[k] += (yhat - truth).norm();
    }
  }
  const double denom = static_cast<double>(origins) * std::sqrt(static_cast<double>(series.p() * series.q()));
  for (double& v : res.rmse) v /= denom;
  return res;
}

}  // namespace cpmts

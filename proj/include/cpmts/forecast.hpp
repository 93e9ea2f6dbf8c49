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

// VAR fitting with AIC order selection, and the two matrix forecasting
// procedures: through the (P, Q, W) subspaces, or through recovered factors.

#ifndef CPMTS_FORECAST_HPP
#define CPMTS_FORECAST_HPP

#include <string>
#include <vector>

#include "cpmts/pipeline.hpp"
#include "cpmts/series.hpp"
#include "cpmts/subspace.hpp"

namespace cpmts {

struct VARModel {
  Index dim = 0;
  Index order = 0;
  std::vector<Matrix> coefs;  // A_1..A_order, dim x dim
  Vector intercept;
  Matrix sigma;               // residual covariance (divisor n - order)
  std::vector<double> aic;    // per candidate order 1..max_order tried
  /// Residual covariance was numerically singular (an exact fit).
  bool degenerate = false;
};

/// `latent` is T x m (one row per time point). Least squares with an intercept
/// for every order r in [1, max_order]; AIC(r) = log det Sigma_r + 2 r m^2 / (T - r).
/// The first order with a singular residual covariance is selected outright
/// and flagged degenerate.
VARModel fit_var(const Matrix& latent, Index max_order = 5);

/// Iterated forecasts; `history` is T x m with T >= order. Returns h x m.
Matrix forecast_var(const VARModel& model, const Matrix& history, Index h);

enum class ForecastMethod { Unified, Latent, LatentSubstitute };

const char* method_name(ForecastMethod m);
ForecastMethod parse_method(const std::string& name);

struct ForecastOutput {
  Index horizon = 0;
  std::vector<Matrix> predictions;  // p x q, steps 1..h
  ForecastMethod method = ForecastMethod::Unified;
  Matrix latent_forecasts;          // h x d
  VARModel model;
};

/// x*_t = W' vec(P' Y_t Q); VAR on x*; Y^ = P unvec(W x^) Q'.
ForecastOutput predict_unified(const MatrixSeries& series, const SubspaceSet& sub, Index h,
                               Index max_order = 5);

/// x_t = L^+ vec(Y_t) with L = B (.) A; VAR on x; Y^ = A diag(x^) B'.
/// Throws NotIdentifiable ("loadings not identifiable; use unified prediction")
/// when the estimate is flagged unidentifiable (unless `allow_unidentified`)
/// or when sigma_min(L) <= 1e-8.
ForecastOutput predict_latent(const MatrixSeries& series, const CPEstimate& est, Index h,
                              Index max_order = 5, bool allow_unidentified = false);

/// Dispatch on `method`; LatentSubstitute is predict_latent with
/// allow_unidentified.
ForecastOutput predict(const MatrixSeries& series, const CPEstimate& est, ForecastMethod method,
                       Index h, Index max_order = 5);

/// {(pq)^-1 sum |yhat - y|^2}^{1/2}
double rrmse(const Matrix& yhat, const Matrix& y);
/// (pq)^-1 sum |yhat - y|
double rmae(const Matrix& yhat, const Matrix& y);

struct RollingStep {
  Index origin = 0;   // first index of the fitting window
  Index horizon = 0;
  Index target = 0;   // index of the forecast observation
  double rrmse = 0.0;
  double rmae = 0.0;
};

struct RollingResult {
  std::vector<RollingStep> steps;
  std::vector<Index> horizons;
  /// Per horizon: (m sqrt(pq))^-1 sum_s ||Y^ - Y||_F over the m origins.
  std::vector<double> rmse;
};

/// Refits the estimator on each window [s, s + window) and forecasts from it,
/// for every s with s + window + max(horizons) <= n. Longer horizons iterate
/// the VAR fitted on that window.
RollingResult rolling_eval(const MatrixSeries& series, ForecastMethod method, Index window,
                           const std::vector<Index>& horizons, const EstimatorConfig& config = {},
                           Index max_order = 5);

}  // namespace cpmts

#endif  // CPMTS_FORECAST_HPP

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

#include "cpmts/simbench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <thread>

#include "cpmts/error.hpp"
#include "cpmts/linalg.hpp"

namespace cpmts {

namespace {

constexpr int kRedrawBudget = 64;
constexpr double kRankTol = 1e-8;
constexpr Index kBurnIn = 200;

bool full_column_rank(const Matrix& m) {
  const Vector s = singular_values(m);
  return s(0) > 0.0 && s(s.size() - 1) > kRankTol * s(0);
}

Matrix uniform_matrix(Index rows, Index cols, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  }
  return m;
}

Matrix top_left_singular(const Matrix& m, Index k) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  Matrix u = svd.matrixU().leftCols(k);
  fix_column_signs(u);
  return u;
}

// Runs fn(r) for r in [0, count) on `jobs` threads.
template <class Fn>
void parallel_for(Index count, int jobs, Fn&& fn) {
  const int workers = static_cast<int>(std::clamp<Index>(jobs, 1, std::max<Index>(count, 1)));
  if (workers <= 1) {
    for (Index r = 0; r < count; ++r) fn(r);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (Index r = next++; r < count; r = next++) fn(r);
    });
  }
  for (auto& t : pool) t.join();
}

void mean_sd(const std::vector<double>& v, double& mean, double& sd, Index& count) {
  mean = 0.0;
  sd = 0.0;
  count = 0;
  for (double x : v) {
    if (std::isnan(x)) continue;
    mean += x;
    ++count;
  }
  if (count == 0) {
    mean = sd = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  mean /= static_cast<double>(count);
  for (double x : v) {
    if (!std::isnan(x)) sd += (x - mean) * (x - mean);
  }
  sd = count > 1 ? std::sqrt(sd / static_cast<double>(count - 1)) : 0.0;
}

}  // namespace

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::R1:
      return "R1";
    case Scenario::R2:
      return "R2";
    case Scenario::R3:
      return "R3";
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& name) {
  if (name == "R1" || name == "r1") return Scenario::R1;
  if (name == "R2" || name == "r2") return Scenario::R2;
  if (name == "R3" || name == "r3") return Scenario::R3;
  throw InvalidArgument("unknown scenario: " + name);
}

Index ScenarioConfig::d1() const { return scenario == Scenario::R1 ? d : d - 1; }
Index ScenarioConfig::d2() const { return scenario == Scenario::R3 ? d - 1 : d; }

void ScenarioConfig::validate() const {
  CPMTS_REQUIRE(d >= 1, "scenario: d must be positive");
  CPMTS_REQUIRE(scenario == Scenario::R1 || d >= 2, "scenario: R2/R3 need d >= 2");
  // rank(B (.) A) = d needs d <= d1 d2 = (d - 1)^2
  CPMTS_REQUIRE(scenario != Scenario::R3 || d >= 3, "scenario: R3 needs d >= 3");
  CPMTS_REQUIRE(d < std::min(p, q), "scenario: d must be below min(p, q)");
  CPMTS_REQUIRE(n >= 2, "scenario: n must be at least 2");
  CPMTS_REQUIRE(std::isfinite(noise_scale) && noise_scale >= 0.0,
                "scenario: noise scale must be nonnegative");
  CPMTS_REQUIRE(replications >= 1, "scenario: replications must be positive");
}

GroundTruth generate(const ScenarioConfig& config) {
  config.validate();
  const Index n = config.n, p = config.p, q = config.q, d = config.d;
  const Index d1 = config.d1(), d2 = config.d2();
  std::mt19937_64 rng(config.seed);

  Matrix P, Q, U, V, ustar, vstar;
  bool ok = false;
  for (int attempt = 0; attempt < kRedrawBudget && !ok; ++attempt) {
    const Matrix adag = uniform_matrix(p, d, -3.0, 3.0, rng);
    const Matrix bdag = uniform_matrix(q, d, -3.0, 3.0, rng);
    if (!full_column_rank(adag) || !full_column_rank(bdag)) continue;
    P = top_left_singular(adag, d1);
    Q = top_left_singular(bdag, d2);
    ustar = P.transpose() * adag;
    vstar = Q.transpose() * bdag;
    U = ustar;
    V = vstar;
    normalize_columns(U);
    normalize_columns(V);
    const Matrix A = P * U, B = Q * V;
    ok = full_column_rank(khatri_rao(B, A)) && singular_values(A)(d1 - 1) > kRankTol &&
         singular_values(B)(d2 - 1) > kRankTol;
  }
  if (!ok) throw NumericalError("rank conditions not met after 64 redraws");

  const Matrix A = P * U;
  const Matrix B = Q * V;

  std::uniform_real_distribution<double> mag(0.6, 0.95);
  std::bernoulli_distribution flip(0.5);
  Vector ar(d);
  for (Index j = 0; j < d; ++j) {
    const double a = mag(rng);
    ar(j) = flip(rng) ? -a : a;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(n, d);
  for (Index j = 0; j < d; ++j) {
    const double scale = ustar.col(j).norm() * vstar.col(j).norm();
    double state = 0.0;
    for (Index t = 0; t < kBurnIn + n; ++t) {
      state = ar(j) * state + normal(rng);
      if (t >= kBurnIn) x(t - kBurnIn, j) = state * scale;
    }
  }
  const Matrix L = khatri_rao(B, A);
  Matrix signal = L * x.transpose();  // pq x n
  Matrix data = signal;
  if (config.noise_scale > 0.0) {
    for (Index t = 0; t < n; ++t) {
      for (Index i = 0; i < p * q; ++i) data(i, t) += config.noise_scale * normal(rng);
    }
  }
  return GroundTruth{A, B, P, Q, U, V, ar, x, std::move(signal), MatrixSeries(p, q, std::move(data))};
}

ReplicationSummary run_replications(const ScenarioConfig& config,
                                    const EstimatorConfig& estimator, int jobs) {
  config.validate();
  ReplicationSummary sum;
  sum.records.resize(config.replications);
  parallel_for(config.replications, jobs, [&](Index r) {
    ReplicationRecord& rec = sum.records[r];
    rec.replication = r;
    rec.seed = config.seed + static_cast<std::uint64_t>(r);
    const auto start = std::chrono::steady_clock::now();
    try {
      ScenarioConfig c = config;
      c.seed = rec.seed;
      const GroundTruth truth = generate(c);
      EstimatorConfig ec = estimator;
      ec.seed = rec.seed;
      const CPEstimate est = estimate(truth.series, ec);
      rec.d1hat = est.d1;
      rec.d2hat = est.d2;
      rec.dhat = est.d;
      rec.varpi_a = varpi(truth.A, est.A);
      rec.varpi_b = varpi(truth.B, est.B);
      rec.jd_converged = est.diag.jd_converged;
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
    rec.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  Index hits = 0, hits_d = 0;
  std::vector<double> va, vb;
  for (const auto& rec : sum.records) {
    if (!rec.ok) {
      ++sum.failures;
      continue;
    }
    ++sum.completed;
    if (!rec.jd_converged) ++sum.nonconverged;
    if (rec.dhat == config.d) ++hits_d;
    if (rec.dhat == config.d && rec.d1hat == config.d1() && rec.d2hat == config.d2()) ++hits;
    va.push_back(100.0 * rec.varpi_a);
    vb.push_back(100.0 * rec.varpi_b);
  }
  const double total = static_cast<double>(config.replications);
  sum.freq_all = 100.0 * static_cast<double>(hits) / total;
  sum.freq_d = 100.0 * static_cast<double>(hits_d) / total;
  Index cnt = 0;
  mean_sd(va, sum.mean_varpi_a, sum.sd_varpi_a, cnt);
  mean_sd(vb, sum.mean_varpi_b, sum.sd_varpi_b, cnt);
  return sum;
}

const char* bench_method_name(BenchMethod m) {
  switch (m) {
    case BenchMethod::Unified:
      return "unified";
    case BenchMethod::Latent:
      return "latent";
    case BenchMethod::LatentSubstitute:
      return "latent-substitute";
    case BenchMethod::Oracle:
      return "oracle";
  }
  return "unknown";
}

BenchMethod parse_bench_method(const std::string& name) {
  if (name == "oracle") return BenchMethod::Oracle;
  switch (parse_method(name)) {
    case ForecastMethod::Unified:
      return BenchMethod::Unified;
    case ForecastMethod::Latent:
      return BenchMethod::Latent;
    case ForecastMethod::LatentSubstitute:
      return BenchMethod::LatentSubstitute;
  }
  throw InvalidArgument("unknown method: " + name);
}

std::vector<ForecastBenchRow> forecast_bench(const ScenarioConfig& config,
                                             const std::vector<BenchMethod>& methods, Index m,
                                             Index h, const EstimatorConfig& estimator, int jobs,
                                             Index max_order) {
  config.validate();
  CPMTS_REQUIRE(m >= 0, "forecast_bench: m must be nonnegative");
  CPMTS_REQUIRE(h >= 1, "forecast_bench: horizon must be at least 1");
  std::vector<ForecastBenchRow> rows;
  if (m == 0) return rows;
  const Index reps = config.replications;
  const Index nm = static_cast<Index>(methods.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  // rmse[r * nm + k]
  std::vector<double> rmse(reps * nm, nan);
  const double root_pq = std::sqrt(static_cast<double>(config.p * config.q));

  parallel_for(reps, jobs, [&](Index r) {
    ScenarioConfig c = config;
    c.seed = config.seed + static_cast<std::uint64_t>(r);
    c.n = config.n + m + 1;
    const GroundTruth truth = generate(c);
    EstimatorConfig ec = estimator;
    ec.seed = c.seed;
    std::vector<double> acc(nm, 0.0);
    std::vector<bool> failed(nm, false);
    for (Index s = 0; s < m; ++s) {
      const MatrixSeries window = truth.series.window(s, config.n);
      const Index target = s + config.n + h - 1;
      const Matrix y = truth.series.at(target);
      std::optional<CPEstimate> est;
      bool est_failed = false;
      for (Index k = 0; k < nm; ++k) {
        if (failed[k]) continue;
        try {
          Matrix yhat;
          if (methods[k] == BenchMethod::Oracle) {
            yhat = truth.signal.col(target).reshaped(config.p, config.q);
          } else {
            if (!est && !est_failed) {
              try {
                est = estimate(window, ec);
              } catch (const std::exception&) {
                est_failed = true;
              }
            }
            if (est_failed) throw NumericalError("estimate failed");
            const ForecastMethod fm = methods[k] == BenchMethod::Unified ? ForecastMethod::Unified
                                      : methods[k] == BenchMethod::Latent
                                          ? ForecastMethod::Latent
                                          : ForecastMethod::LatentSubstitute;
            yhat = predict(window, *est, fm, h, max_order).predictions[h - 1];
          }
          acc[k] += (yhat - y).norm();
        } catch (const std::exception&) {
          failed[k] = true;
        }
      }
    }
    for (Index k = 0; k < nm; ++k) {
      if (!failed[k]) rmse[r * nm + k] = acc[k] / (static_cast<double>(m) * root_pq);
    }
  });

  for (Index k = 0; k < nm; ++k) {
    ForecastBenchRow row;
    row.method = methods[k];
    row.horizon = h;
    for (Index r = 0; r < reps; ++r) row.rmse.push_back(rmse[r * nm + k]);
    mean_sd(row.rmse, row.mean_rmse, row.sd_rmse, row.completed);
    row.failures = reps - row.completed;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace cpmts

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

// Simulated CP-factor data (scenarios R1, R2, R3) and the replication
// harnesses for rank recovery, loading error and forecast RMSE.

#ifndef CPMTS_SIMBENCH_HPP
#define CPMTS_SIMBENCH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cpmts/forecast.hpp"
#include "cpmts/pipeline.hpp"
#include "cpmts/series.hpp"

namespace cpmts {

/// R1: d1 = d2 = d. R2: d1 = d - 1, d2 = d. R3: d1 = d2 = d - 1.
enum class Scenario { R1, R2, R3 };

const char* scenario_name(Scenario s);
Scenario parse_scenario(const std::string& name);

struct ScenarioConfig {
  Scenario scenario = Scenario::R1;
  Index n = 300;
  Index p = 20;
  Index q = 20;
  Index d = 3;
  std::uint64_t seed = 1;
  double noise_scale = 1.0;
  Index replications = 1;

  Index d1() const;
  Index d2() const;
  /// Throws InvalidArgument when the scenario invariants fail.
  void validate() const;
};

struct GroundTruth {
  Matrix A;  // p x d, unit columns
  Matrix B;  // q x d
  Matrix P;  // p x d1
  Matrix Q;  // q x d2
  Matrix U;  // d1 x d
  Matrix V;  // d2 x d
  Vector ar_coefs;
  Matrix x;  // n x d, the scaled factors x_t
  Matrix signal;  // pq x n, vec(A X_t B')
  MatrixSeries series;
};

/// Throws NumericalError when 64 redraws fail the rank conditions.
GroundTruth generate(const ScenarioConfig& config);

struct ReplicationRecord {
  Index replication = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  Index d1hat = 0;
  Index d2hat = 0;
  Index dhat = 0;
  double varpi_a = 0.0;
  double varpi_b = 0.0;
  bool jd_converged = true;
  double seconds = 0.0;
};

struct ReplicationSummary {
  std::vector<ReplicationRecord> records;  // ordered by replication
  Index completed = 0;
  Index failures = 0;
  Index nonconverged = 0;
  /// Percent of all replications with (d1^, d2^, d^) = (d1, d2, d).
  double freq_all = 0.0;
  /// Percent with d^ = d.
  double freq_d = 0.0;
  /// Mean and SD of 100 varpi^2 over completed replications.
  double mean_varpi_a = 0.0;
  double sd_varpi_a = 0.0;
  double mean_varpi_b = 0.0;
  double sd_varpi_b = 0.0;
};

/// Replication r uses seed config.seed + r for both data and estimator.
/// `jobs` worker threads; results do not depend on it.
ReplicationSummary run_replications(const ScenarioConfig& config,
                                    const EstimatorConfig& estimator = {}, int jobs = 1);

/// Plugs the true signal A X_t B' in as the forecast.
enum class BenchMethod { Unified, Latent, LatentSubstitute, Oracle };

const char* bench_method_name(BenchMethod m);
BenchMethod parse_bench_method(const std::string& name);

struct ForecastBenchRow {
  BenchMethod method = BenchMethod::Unified;
  Index horizon = 1;
  Index completed = 0;
  Index failures = 0;
  double mean_rmse = 0.0;
  double sd_rmse = 0.0;
  /// Per replication RMSE; NaN where the method failed.
  std::vector<double> rmse;
};

/// Generates n + m + 1 points per replication (n = config.n); for s = 1..m fits
/// on observations s..n+s-1 and forecasts h steps ahead. RMSE per replication
/// is (m sqrt(pq))^-1 sum_s ||Y^_{n+s+h-1} - Y_{n+s+h-1}||_F. One estimate per
/// window is shared by every method. m = 0 yields an empty table.
std::vector<ForecastBenchRow> forecast_bench(const ScenarioConfig& config,
                                             const std::vector<BenchMethod>& methods, Index m,
                                             Index h, const EstimatorConfig& estimator = {},
                                             int jobs = 1, Index max_order = 5);

}  // namespace cpmts

#endif  // CPMTS_SIMBENCH_HPP

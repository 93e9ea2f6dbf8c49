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

#include "cpmts/cpmts.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cpmts/error.hpp"
#include "cpmts/forecast.hpp"
#include "cpmts/pipeline.hpp"
#include "cpmts/simbench.hpp"

using nlohmann::json;

struct cpmts_series {
  cpmts::MatrixSeries value;
};

struct cpmts_estimate {
  cpmts::CPEstimate value;
  cpmts::Index p = 0;
  cpmts::Index q = 0;
  cpmts::Index n = 0;
};

struct cpmts_forecast {
  cpmts::ForecastOutput value;
  cpmts::Index p = 0;
  cpmts::Index q = 0;
};

struct cpmts_simulation {
  cpmts::GroundTruth value;
};

namespace {

using cpmts::Index;
using cpmts::Matrix;
using cpmts::Vector;

thread_local std::string g_last_error;

cpmts_status fail(cpmts_status status, const std::string& msg) {
  g_last_error = msg;
  return status;
}

// Runs fn and maps exceptions onto status codes.
template <class Fn>
cpmts_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return CPMTS_OK;
  } catch (const cpmts::NotIdentifiable& e) {
    return fail(CPMTS_NOT_IDENTIFIABLE, e.what());
  } catch (const cpmts::NumericalError& e) {
    return fail(CPMTS_NUMERICAL, e.what());
  } catch (const cpmts::InvalidArgument& e) {
    return fail(CPMTS_INVALID_ARGUMENT, e.what());
  } catch (const json::exception& e) {
    return fail(CPMTS_INVALID_ARGUMENT, std::string("bad JSON: ") + e.what());
  } catch (const std::bad_alloc&) {
    return fail(CPMTS_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CPMTS_INTERNAL, e.what());
  }
}

struct BufferTooSmall : cpmts::Error {
  using cpmts::Error::Error;
};

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_object(const char* text, const char* what) {
  if (text == nullptr || *text == '\0') return json::object();
  json j = json::parse(text);
  CPMTS_REQUIRE(j.is_object(), std::string(what) + " must be a JSON object");
  return j;
}

void reject_unknown(const json& j, const std::set<std::string>& known, const char* what) {
  for (const auto& [key, _] : j.items()) {
    CPMTS_REQUIRE(known.count(key) != 0, std::string("unknown ") + what + " key: " + key);
  }
}

std::optional<double> auto_or_number(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  const json& v = j[key];
  if (v.is_string()) {
    CPMTS_REQUIRE(v.get<std::string>() == "auto", std::string(key) + " must be a number or \"auto\"");
    return std::nullopt;
  }
  CPMTS_REQUIRE(v.is_number(), std::string(key) + " must be a number or \"auto\"");
  const double x = v.get<double>();
  CPMTS_REQUIRE(std::isfinite(x) && x >= 0.0, std::string(key) + " must be nonnegative");
  return x;
}

Index positive_index(const json& j, const char* key, Index fallback) {
  if (!j.contains(key)) return fallback;
  CPMTS_REQUIRE(j[key].is_number_integer(), std::string(key) + " must be an integer");
  const auto v = j[key].get<std::int64_t>();
  CPMTS_REQUIRE(v >= 1, std::string(key) + " must be positive");
  return static_cast<Index>(v);
}

std::uint64_t seed_value(const json& j, std::uint64_t fallback) {
  if (!j.contains("seed")) return fallback;
  CPMTS_REQUIRE(j["seed"].is_number_integer() && j["seed"].get<std::int64_t>() >= 0,
                "seed must be a nonnegative integer");
  return j["seed"].get<std::uint64_t>();
}

cpmts::EstimatorConfig parse_estimator(const char* text) {
  const json j = parse_object(text, "estimator config");
  reject_unknown(j, {"K", "Ktilde", "delta1", "delta2", "c1", "c2", "c3", "seed", "pin_ranks",
                     "jd_max_iter", "jd_tol"},
                 "estimator");
  cpmts::EstimatorConfig c;
  c.K = positive_index(j, "K", c.K);
  c.Ktilde = positive_index(j, "Ktilde", c.Ktilde);
  c.delta1 = auto_or_number(j, "delta1");
  c.delta2 = auto_or_number(j, "delta2");
  c.c1 = auto_or_number(j, "c1");
  c.c2 = auto_or_number(j, "c2");
  c.c3 = auto_or_number(j, "c3");
  c.seed = seed_value(j, c.seed);
  if (j.contains("pin_ranks") && !j["pin_ranks"].is_null()) {
    const json& r = j["pin_ranks"];
    CPMTS_REQUIRE(r.is_array() && r.size() == 3, "pin_ranks must be [d1, d2, d]");
    std::array<Index, 3> ranks{};
    for (int i = 0; i < 3; ++i) {
      CPMTS_REQUIRE(r[i].is_number_integer() && r[i].get<std::int64_t>() >= 1,
                    "pin_ranks entries must be positive integers");
      ranks[i] = r[i].get<Index>();
    }
    c.pinned_ranks = ranks;
  }
  c.jd_max_iter = static_cast<int>(positive_index(j, "jd_max_iter", c.jd_max_iter));
  if (j.contains("jd_tol")) {
    CPMTS_REQUIRE(j["jd_tol"].is_number() && j["jd_tol"].get<double>() >= 0.0,
                  "jd_tol must be nonnegative");
    c.jd_tol = j["jd_tol"].get<double>();
  }
  return c;
}

cpmts::ScenarioConfig parse_scenario_config(const char* text, bool allow_replications) {
  const json j = parse_object(text, "scenario config");
  std::set<std::string> known = {"scenario", "n", "p", "q", "d", "seed", "noise_scale"};
  if (allow_replications) known.insert("replications");
  reject_unknown(j, known, "scenario");
  cpmts::ScenarioConfig c;
  if (j.contains("scenario")) c.scenario = cpmts::parse_scenario(j["scenario"].get<std::string>());
  c.n = positive_index(j, "n", c.n);
  c.p = positive_index(j, "p", c.p);
  c.q = positive_index(j, "q", c.q);
  c.d = positive_index(j, "d", c.d);
  c.seed = seed_value(j, c.seed);
  if (j.contains("noise_scale")) c.noise_scale = j["noise_scale"].get<double>();
  c.replications = positive_index(j, "replications", c.replications);
  c.validate();
  return c;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

// Row-major nested arrays.
json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Index i = 0; i < m.rows(); ++i) out.push_back(vector_json(m.row(i).transpose()));
  return out;
}

json path_json(const cpmts::RatioPath& path) {
  return {{"eigenvalues", vector_json(path.eigenvalues)},
          {"ridge", path.ridge},
          {"ratios", vector_json(path.ratios)},
          {"rank", path.rank}};
}

json diagnostics_json(const cpmts::CPEstimate& est) {
  const cpmts::Diagnostics& d = est.diag;
  json j;
  j["schema"] = 1;
  j["ranks"] = {{"d1", est.d1}, {"d2", est.d2}, {"d", est.d}, {"pinned", d.ranks_pinned}};
  j["tuning"] = {{"K", d.K},           {"Ktilde", d.Ktilde},
                 {"delta1", d.delta1}, {"delta2", d.delta2}, {"c1", d.c1},
                 {"c2", d.c2},         {"c3", d.c3},         {"xi_components", d.xi_components}};
  j["ratio_paths"] = {{"M1", path_json(d.path1)}, {"M2", path_json(d.path2)}, {"M", path_json(d.pathM)}};
  j["identification"] = {{"path", d.identification_path},
                         {"identifiable", d.identifiable},
                         {"omega_singular_values", vector_json(d.omega_singular_values)},
                         {"omega_rank_bound", d.omega_rank_bound},
                         {"kernel_singular_values", vector_json(d.kernel_singular_values)},
                         {"kernel_degenerate", d.kernel_degenerate}};
  j["rotation"] = {{"rotated", d.rotated}, {"phi", vector_json(d.phi)}, {"matrix", matrix_json(d.rotation)}};
  j["joint_diagonalization"] = {{"converged", d.jd_converged},
                                {"restarted", d.jd_restarted},
                                {"iterations", d.jd_iterations},
                                {"objective", d.jd_objective},
                                {"trace", d.jd_trace}};
  j["sigma_ratios"] = vector_json(d.sigma_ratios);
  j["warnings"] = d.warnings;
  return j;
}

const Matrix* estimate_matrix(const cpmts::CPEstimate& est, const std::string& name) {
  if (name == "A") return &est.A;
  if (name == "B") return &est.B;
  if (name == "P") return &est.sub.P;
  if (name == "Q") return &est.sub.Q;
  if (name == "W") return &est.sub.W;
  if (name == "U") return &est.U;
  if (name == "V") return &est.V;
  if (name == "theta") return &est.theta;
  return nullptr;
}

void copy_out(const Matrix& m, double* out, size_t capacity, int64_t* rows, int64_t* cols) {
  if (rows != nullptr) *rows = m.rows();
  if (cols != nullptr) *cols = m.cols();
  if (out == nullptr) return;
  if (capacity < static_cast<size_t>(m.size())) throw BufferTooSmall("output buffer too small");
  std::memcpy(out, m.data(), sizeof(double) * static_cast<size_t>(m.size()));
}

cpmts_status copy_guarded(const Matrix& m, double* out, size_t capacity, int64_t* rows,
                          int64_t* cols) {
  try {
    copy_out(m, out, capacity, rows, cols);
  } catch (const BufferTooSmall& e) {
    return fail(CPMTS_BUFFER_TOO_SMALL, e.what());
  }
  g_last_error.clear();
  return CPMTS_OK;
}

json record_json(const cpmts::ReplicationRecord& r) {
  json j = {{"replication", r.replication}, {"seed", r.seed},      {"ok", r.ok},
            {"d1", r.d1hat},                {"d2", r.d2hat},       {"d", r.dhat},
            {"varpi_a", r.varpi_a},         {"varpi_b", r.varpi_b}, {"jd_converged", r.jd_converged}};
  if (!r.ok) j["error"] = r.error;
  return j;
}

json scenario_json(const cpmts::ScenarioConfig& c) {
  return {{"scenario", cpmts::scenario_name(c.scenario)},
          {"n", c.n},
          {"p", c.p},
          {"q", c.q},
          {"d", c.d},
          {"d1", c.d1()},
          {"d2", c.d2()},
          {"seed", c.seed},
          {"noise_scale", c.noise_scale},
          {"replications", c.replications}};
}

}  // namespace

extern "C" {

const char* cpmts_version(void) { return "0.1.0"; }

const char* cpmts_status_name(cpmts_status status) {
  switch (status) {
    case CPMTS_OK:
      return "ok";
    case CPMTS_INVALID_ARGUMENT:
      return "invalid argument";
    case CPMTS_NUMERICAL:
      return "numerical failure";
    case CPMTS_NOT_IDENTIFIABLE:
      return "not identifiable";
    case CPMTS_BUFFER_TOO_SMALL:
      return "buffer too small";
    case CPMTS_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* cpmts_last_error(void) { return g_last_error.c_str(); }

void cpmts_string_free(char* s) { delete[] s; }

cpmts_status cpmts_series_create(int64_t n, int64_t p, int64_t q, const double* data,
                                 cpmts_series** out) {
  if (out == nullptr || data == nullptr) return fail(CPMTS_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    CPMTS_REQUIRE(n >= 1 && p >= 1 && q >= 1, "series dimensions must be positive");
    const Matrix vecs = Eigen::Map<const Matrix>(data, p * q, n);
    *out = new cpmts_series{cpmts::MatrixSeries(p, q, vecs)};
  });
}

void cpmts_series_free(cpmts_series* series) { delete series; }

cpmts_status cpmts_series_shape(const cpmts_series* series, int64_t* n, int64_t* p, int64_t* q) {
  if (series == nullptr) return fail(CPMTS_INVALID_ARGUMENT, "null series");
  if (n != nullptr) *n = series->value.n();
  if (p != nullptr) *p = series->value.p();
  if (q != nullptr) *q = series->value.q();
  g_last_error.clear();
  return CPMTS_OK;
}

cpmts_status cpmts_series_data(const cpmts_series* series, double* out, size_t capacity) {
  if (series == nullptr || out == nullptr) return fail(CPMTS_INVALID_ARGUMENT, "null argument");
  return copy_guarded(series->value.vecs(), out, capacity, nullptr, nullptr);
}

cpmts_status cpmts_estimate_run(const cpmts_series* series, const char* config_json,
                                cpmts_estimate** out) {
  if (series == nullptr || out == nullptr) return fail(CPMTS_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    const cpmts::EstimatorConfig config = parse_estimator(config_json);
    auto* est = new cpmts_estimate{cpmts::estimate(series->value, config), series->value.p(),
                                   series->value.q(), series->value.n()};
    *out = est;
  });
}

void cpmts_estimate_free(cpmts_estimate* est) { delete est; }

cpmts_status cpmts_estimate_ranks(const cpmts_estimate* est, int64_t* d1, int64_t* d2, int64_t* d) {
  if (est == nullptr) return fail(CPMTS_INVALID_ARGUMENT, "null estimate");
  if (d1 != nullptr) *d1 = est->value.d1;
  if (d2 != nullptr) *d2 = est->value.d2;
  if (d != nullptr) *d = est->value.d;
  g_last_error.clear();
  return CPMTS_OK;
}

cpmts_status cpmts_estimate_matrix(const cpmts_estimate* est, const char* name, double* out,
                                   size_t capacity, int64_t* rows, int64_t* cols) {
  if (est == nullptr || name == nullptr) return fail(CPMTS_INVALID_ARGUMENT, "null argument");
  const Matrix* m = estimate_matrix(est->value, name);
  if (m == nullptr) return fail(CPMTS_INVALID_ARGUMENT, std::string("unknown matrix: ") + name);
  return copy_guarded(*m, out, capacity, rows, cols);
}

cpmts_status cpmts_estimate_diagnostics(const cpmts_estimate* est, char** out) {
  if (est == nullptr || out == nullptr) return fail(CPMTS_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = dup_string(diagnostics_json(est->value).dump(2)); });
}

cpmts_status cpmts_forecast_run(const cpmts_series* series, const cpmts_estimate* est,
                                const char* method, int64_t h, int64_t max_order,
                                cpmts_forecast** out) {
  if (series == nullptr || est == nullptr || method == nullptr || out == nullptr) {
    return fail(CPMTS_INVALID_ARGUMENT, "null argument");
  }
  *out = nullptr;
  return guarded([&] {
    CPMTS_REQUIRE(series->value.p() == est->p && series->value.q() == est->q,
                  "estimate does not match the series shape");
    const cpmts::ForecastMethod m = cpmts::parse_method(method);
    *out = new cpmts_forecast{cpmts::predict(series->value, est->value, m, h, max_order),
                              series->value.p(), series->value.q()};
  });
}

void cpmts_forecast_free(cpmts_forecast* fc) { delete fc; }

cpmts_status cpmts_forecast_horizon(const cpmts_forecast* fc, int64_t* h) {
  if (fc == nullptr || h == nullptr) return fail(CPMTS_INVALID_ARGUMENT, "null argument");
  *h = fc->value.horizon;
  g_last_error.clear();
  return CPMTS_OK;
}

cpmts_status cpmts_forecast_prediction(const cpmts_forecast* fc, int64_t step, double* out,
                                       size_t capacity) {
  if (fc == nullptr || out == nullptr) return fail(CPMTS_INVALID_ARGUMENT, "null argument");
  if (step < 1 || step > fc->value.horizon) return fail(CPMTS_INVALID_ARGUMENT, "step out of range");
  return copy_guarded(fc->value.predictions[step - 1], out, capacity, nullptr, nullptr);
}

cpmts_status cpmts_forecast_info(const cpmts_forecast* fc, char** out) {
  if (fc == nullptr || out == nullptr) return fail(CPMTS_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    const cpmts::VARModel& m = fc->value.model;
    json j = {{"method", cpmts::method_name(fc->value.method)},
              {"horizon", fc->value.horizon},
              {"var_order", m.order},
              {"var_degenerate", m.degenerate},
              {"aic", m.aic},
              {"latent_forecasts", matrix_json(fc->value.latent_forecasts)}};
    *out = dup_string(j.dump(2));
  });
}

cpmts_status cpmts_simulate(const char* scenario, cpmts_simulation** out) {
  if (out == nullptr) return fail(CPMTS_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new cpmts_simulation{cpmts::generate(parse_scenario_config(scenario, false))};
  });
}

void cpmts_simulation_free(cpmts_simulation* sim) { delete sim; }

cpmts_status cpmts_simulation_series(const cpmts_simulation* sim, cpmts_series** out) {
  if (sim == nullptr || out == nullptr) return fail(CPMTS_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new cpmts_series{sim->value.series}; });
}

cpmts_status cpmts_simulation_matrix(const cpmts_simulation* sim, const char* name, double* out,
                                     size_t capacity, int64_t* rows, int64_t* cols) {
  if (sim == nullptr || name == nullptr) return fail(CPMTS_INVALID_ARGUMENT, "null argument");
  const cpmts::GroundTruth& g = sim->value;
  const std::string key = name;
  if (key == "ar") return copy_guarded(g.ar_coefs, out, capacity, rows, cols);
  const Matrix* m = key == "A"        ? &g.A
                    : key == "B"      ? &g.B
                    : key == "P"      ? &g.P
                    : key == "Q"      ? &g.Q
                    : key == "U"      ? &g.U
                    : key == "V"      ? &g.V
                    : key == "x"      ? &g.x
                    : key == "signal" ? &g.signal
                                      : nullptr;
  if (m == nullptr) return fail(CPMTS_INVALID_ARGUMENT, "unknown matrix: " + key);
  return copy_guarded(*m, out, capacity, rows, cols);
}

cpmts_status cpmts_bench_replications(const char* scenario, const char* estimator, int jobs,
                                      char** out) {
  if (out == nullptr) return fail(CPMTS_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    const cpmts::ScenarioConfig sc = parse_scenario_config(scenario, true);
    const cpmts::EstimatorConfig ec = parse_estimator(estimator);
    CPMTS_REQUIRE(jobs >= 1, "jobs must be positive");
    const cpmts::ReplicationSummary s = cpmts::run_replications(sc, ec, jobs);
    json records = json::array();
    for (const auto& r : s.records) records.push_back(record_json(r));
    json j = {{"schema", 1},
              {"config", scenario_json(sc)},
              {"summary",
               {{"completed", s.completed},
                {"failures", s.failures},
                {"nonconverged", s.nonconverged},
                {"freq_all", s.freq_all},
                {"freq_d", s.freq_d},
                {"mean_varpi_a", s.mean_varpi_a},
                {"sd_varpi_a", s.sd_varpi_a},
                {"mean_varpi_b", s.mean_varpi_b},
                {"sd_varpi_b", s.sd_varpi_b}}},
              {"records", records}};
    *out = dup_string(j.dump(2));
  });
}

cpmts_status cpmts_bench_forecast(const char* scenario, const char* estimator, const char* methods,
                                  int64_t m, int64_t h, int jobs, int64_t max_order, char** out) {
  if (out == nullptr || methods == nullptr) return fail(CPMTS_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    const cpmts::ScenarioConfig sc = parse_scenario_config(scenario, true);
    const cpmts::EstimatorConfig ec = parse_estimator(estimator);
    CPMTS_REQUIRE(jobs >= 1, "jobs must be positive");
    CPMTS_REQUIRE(m >= 0, "m must be nonnegative");
    std::vector<cpmts::BenchMethod> list;
    std::stringstream ss(methods);
    for (std::string item; std::getline(ss, item, ',');) {
      if (!item.empty()) list.push_back(cpmts::parse_bench_method(item));
    }
    CPMTS_REQUIRE(!list.empty(), "no forecast methods given");
    const auto rows = cpmts::forecast_bench(sc, list, m, h, ec, jobs, max_order);
    json table = json::array();
    for (const auto& r : rows) {
      json rmse = json::array();
      for (double v : r.rmse) rmse.push_back(std::isnan(v) ? json(nullptr) : json(v));
      table.push_back({{"method", cpmts::bench_method_name(r.method)},
                       {"horizon", r.horizon},
                       {"completed", r.completed},
                       {"failures", r.failures},
                       {"mean_rmse", std::isnan(r.mean_rmse) ? json(nullptr) : json(r.mean_rmse)},
                       {"sd_rmse", std::isnan(r.sd_rmse) ? json(nullptr) : json(r.sd_rmse)},
                       {"rmse", rmse}});
    }
    json j = {{"schema", 1}, {"config", scenario_json(sc)}, {"steps", m}, {"rows", table}};
    *out = dup_string(j.dump(2));
  });
}

cpmts_status cpmts_varpi(const double* a, int64_t rows, int64_t cols, const double* ahat,
                         int64_t cols_hat, double* out) {
  if (a == nullptr || ahat == nullptr || out == nullptr) {
    return fail(CPMTS_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    CPMTS_REQUIRE(rows >= 1 && cols >= 1 && cols_hat >= 1, "varpi: empty loadings");
    const Matrix A = Eigen::Map<const Matrix>(a, rows, cols);
    const Matrix Ahat = Eigen::Map<const Matrix>(ahat, rows, cols_hat);
    *out = cpmts::varpi(A, Ahat);
  });
}

}  // extern "C"

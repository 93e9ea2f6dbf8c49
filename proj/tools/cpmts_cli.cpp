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

// cpmts command line: estimate | forecast | simulate | bench.
//
// Series files are CSV with one row per time point and p*q columns in
// column-stacking order, plus a JSON sidecar {n, p, q, layout: "col-major"}.
// Exit codes: 0 ok, 1 numerical failure, 2 usage or I/O error.

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpmts/cpmts.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

// Carries an exit code up to main.
struct Failure {
  int code;
  std::string message;
};

[[noreturn]] void usage_error(const std::string& msg) { throw Failure{kExitUsage, msg}; }

void check(cpmts_status status) {
  if (status == CPMTS_OK) return;
  const int code = (status == CPMTS_INVALID_ARGUMENT || status == CPMTS_BUFFER_TOO_SMALL)
                       ? kExitUsage
                       : kExitNumerical;
  throw Failure{code, cpmts_last_error()};
}

std::string take_string(char* s) {
  std::string out = s == nullptr ? "" : s;
  cpmts_string_free(s);
  return out;
}

// ---- number formatting and parsing ----

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep) {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

// ---- files ----

std::string read_file(const fs::path& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) usage_error(what + " not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) usage_error("cannot write " + path.string());
  out << text;
  if (!out) usage_error("write failed: " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) usage_error("cannot create " + dir.string() + ": " + ec.message());
}

json parse_json_file(const fs::path& path, const std::string& what) {
  const std::string text = read_file(path, what);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    usage_error(what + " is not valid JSON: " + e.what());
  }
}

// Rows of numbers; a first line that does not parse as numbers is a header.
std::vector<std::vector<double>> read_csv(const fs::path& path) {
  const std::string text = read_file(path, "input");
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    bool numeric = true;
    for (std::string_view cell : split(line, ',')) {
      const auto v = parse_double(cell);
      if (!v) {
        numeric = false;
        break;
      }
      row.push_back(*v);
    }
    if (!numeric) {
      if (rows.empty() && lineno == 1) continue;
      usage_error(path.string() + ":" + std::to_string(lineno) + ": not a number");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// Column-major `data` (rows x cols) as CSV with an optional header.
std::string matrix_csv(const std::vector<double>& data, int64_t rows, int64_t cols,
                       const std::string& prefix) {
  std::string out;
  if (!prefix.empty()) {
    for (int64_t j = 0; j < cols; ++j) {
      out += (j ? "," : "") + prefix + std::to_string(j + 1);
    }
    out += '\n';
  }
  for (int64_t i = 0; i < rows; ++i) {
    for (int64_t j = 0; j < cols; ++j) {
      if (j) out += ',';
      out += fmt(data[static_cast<std::size_t>(i + j * rows)]);
    }
    out += '\n';
  }
  return out;
}

fs::path default_meta(const fs::path& input) {
  fs::path meta = input;
  meta.replace_extension(".meta.json");
  return meta;
}

struct SeriesHandle {
  cpmts_series* ptr = nullptr;
  SeriesHandle() = default;
  SeriesHandle(const SeriesHandle&) = delete;
  SeriesHandle& operator=(const SeriesHandle&) = delete;
  ~SeriesHandle() { cpmts_series_free(ptr); }
};

struct EstimateHandle {
  cpmts_estimate* ptr = nullptr;
  EstimateHandle() = default;
  EstimateHandle(const EstimateHandle&) = delete;
  EstimateHandle& operator=(const EstimateHandle&) = delete;
  ~EstimateHandle() { cpmts_estimate_free(ptr); }
};

void load_series(const std::string& input, const std::string& meta_arg, SeriesHandle& out) {
  if (input.empty()) usage_error("--input is required");
  const fs::path meta_path = meta_arg.empty() ? default_meta(input) : fs::path(meta_arg);
  if (!fs::exists(meta_path)) usage_error("meta not found: " + meta_path.string());
  const json meta = parse_json_file(meta_path, "meta");
  int64_t n = 0, p = 0, q = 0;
  try {
    n = meta.at("n").get<int64_t>();
    p = meta.at("p").get<int64_t>();
    q = meta.at("q").get<int64_t>();
  } catch (const json::exception&) {
    usage_error("meta must hold integer n, p and q");
  }
  if (meta.contains("layout") && meta["layout"] != "col-major") {
    usage_error("unsupported layout: " + meta["layout"].dump());
  }
  if (n < 1 || p < 1 || q < 1) usage_error("meta dimensions must be positive");
  const auto rows = read_csv(input);
  if (static_cast<int64_t>(rows.size()) != n) {
    usage_error("input has " + std::to_string(rows.size()) + " rows, meta says n = " +
                std::to_string(n));
  }
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(n * p * q));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (static_cast<int64_t>(rows[t].size()) != p * q) {
      usage_error("row " + std::to_string(t + 1) + " has " + std::to_string(rows[t].size()) +
                  " values, expected p*q = " + std::to_string(p * q));
    }
    data.insert(data.end(), rows[t].begin(), rows[t].end());
  }
  check(cpmts_series_create(n, p, q, data.data(), &out.ptr));
}

// ---- configuration ----

// Raw flag values; empty / unset means "not given".
struct Flags {
  std::string config;
  std::string input;
  std::string meta;
  std::string out;
  int64_t K = 0;
  int64_t Ktilde = 0;
  std::string delta1;
  std::string delta2;
  std::string ridge;
  uint64_t seed = 0;
  std::string pin_ranks;
  int64_t max_order = 5;
  std::string method = "unified";
  int64_t h = 1;
  std::string scenario = "R1";
  int64_t n = 300;
  int64_t p = 20;
  int64_t q = 20;
  int64_t d = 3;
  double noise = 1.0;
  int64_t reps = 100;
  int jobs = 1;
  int64_t forecast_steps = 0;
  std::string methods = "unified,latent,latent-substitute,oracle";
};

json auto_or_number(const std::string& flag, const std::string& text) {
  if (text == "auto") return "auto";
  const auto v = parse_double(text);
  if (!v || !(*v >= 0.0)) usage_error(flag + " must be \"auto\" or a nonnegative number");
  return *v;
}

json pin_ranks_json(const std::string& text) {
  json out = json::array();
  for (std::string_view cell : split(text, ',')) {
    const auto v = parse_double(cell);
    if (!v || *v < 1 || *v != static_cast<double>(static_cast<int64_t>(*v))) {
      usage_error("--pin-ranks expects three positive integers d1,d2,d");
    }
    out.push_back(static_cast<int64_t>(*v));
  }
  if (out.size() != 3) usage_error("--pin-ranks expects three positive integers d1,d2,d");
  return out;
}

bool given(const CLI::App* app, const char* name) {
  return app->get_option_no_throw(name) != nullptr && app->count(name) > 0;
}

// Precedence: flag > config file > CPMTS_SEED (seed only) > library default.
json resolve_config(const CLI::App* app, const Flags& f) {
  json file = json::object();
  if (!f.config.empty()) {
    file = parse_json_file(f.config, "config");
    if (!file.is_object()) usage_error("config must be a JSON object");
  }
  json est = json::object();
  for (const char* key : {"K", "Ktilde", "delta1", "delta2", "c1", "c2", "c3", "seed", "pin_ranks",
                          "jd_max_iter", "jd_tol"}) {
    if (file.contains(key)) est[key] = file[key];
  }
  if (file.contains("ridge")) est["c1"] = est["c2"] = est["c3"] = file["ridge"];
  if (!file.contains("seed")) {
    if (const char* env = std::getenv("CPMTS_SEED"); env != nullptr && *env != '\0') {
      const auto v = parse_double(env);
      if (!v || *v < 0 || *v != static_cast<double>(static_cast<uint64_t>(*v))) {
        usage_error("CPMTS_SEED must be a nonnegative integer");
      }
      est["seed"] = static_cast<uint64_t>(*v);
    }
  }
  if (given(app, "--K")) est["K"] = f.K;
  if (given(app, "--Ktilde")) est["Ktilde"] = f.Ktilde;
  if (given(app, "--delta1")) est["delta1"] = auto_or_number("--delta1", f.delta1);
  if (given(app, "--delta2")) est["delta2"] = auto_or_number("--delta2", f.delta2);
  if (given(app, "--ridge")) est["c1"] = est["c2"] = est["c3"] = auto_or_number("--ridge", f.ridge);
  if (given(app, "--seed")) est["seed"] = f.seed;
  if (given(app, "--pin-ranks")) est["pin_ranks"] = pin_ranks_json(f.pin_ranks);

  json run = {{"estimator", est}};
  run["max_order"] = given(app, "--max-order") ? f.max_order : file.value("max_order", f.max_order);
  run["file"] = file;
  return run;
}

json resolve_scenario(const CLI::App* app, const Flags& f, const json& run, bool with_reps) {
  const json& file = run["file"];
  json s = json::object();
  auto pick = [&](const char* flag, const char* key, const json& value) {
    if (given(app, flag)) {
      s[key] = value;
    } else if (file.contains(key)) {
      s[key] = file[key];
    } else {
      s[key] = value;
    }
  };
  pick("--scenario", "scenario", f.scenario);
  pick("--n", "n", f.n);
  pick("--p", "p", f.p);
  pick("--q", "q", f.q);
  pick("--d", "d", f.d);
  pick("--noise", "noise_scale", f.noise);
  if (with_reps) pick("--reps", "replications", f.reps);
  if (run["estimator"].contains("seed")) s["seed"] = run["estimator"]["seed"];
  return s;
}

void report_warnings(const json& diag) {
  for (const auto& w : diag.value("warnings", json::array())) {
    std::cerr << "warning: " << w.get<std::string>() << '\n';
  }
}

fs::path require_out(const Flags& f) {
  if (f.out.empty()) usage_error("--out is required");
  make_dir(f.out);
  return f.out;
}

std::vector<double> estimate_matrix(const cpmts_estimate* est, const char* name, int64_t& rows,
                                    int64_t& cols) {
  check(cpmts_estimate_matrix(est, name, nullptr, 0, &rows, &cols));
  std::vector<double> buf(static_cast<std::size_t>(rows * cols));
  check(cpmts_estimate_matrix(est, name, buf.data(), buf.size(), &rows, &cols));
  return buf;
}

json column_major_json(const std::vector<double>& data, int64_t rows, int64_t cols) {
  json out = json::array();
  for (int64_t i = 0; i < rows; ++i) {
    json row = json::array();
    for (int64_t j = 0; j < cols; ++j) row.push_back(data[static_cast<std::size_t>(i + j * rows)]);
    out.push_back(row);
  }
  return out;
}

// Writes loadings, estimate.json and diagnostics.json; returns the diagnostics.
json write_estimate(const fs::path& dir, const cpmts_estimate* est) {
  int64_t d1 = 0, d2 = 0, d = 0;
  check(cpmts_estimate_ranks(est, &d1, &d2, &d));
  int64_t rows = 0, cols = 0;
  const auto A = estimate_matrix(est, "A", rows, cols);
  write_file(dir / "loadings_A.csv", matrix_csv(A, rows, cols, "a"));
  const auto B = estimate_matrix(est, "B", rows, cols);
  write_file(dir / "loadings_B.csv", matrix_csv(B, rows, cols, "b"));

  json doc = {{"schema", 1}, {"ranks", {{"d1", d1}, {"d2", d2}, {"d", d}}}};
  for (const char* name : {"P", "Q", "W", "U", "V", "theta"}) {
    const auto m = estimate_matrix(est, name, rows, cols);
    doc[name] = column_major_json(m, rows, cols);
  }
  write_file(dir / "estimate.json", doc.dump(2) + "\n");

  char* raw = nullptr;
  check(cpmts_estimate_diagnostics(est, &raw));
  const std::string text = take_string(raw);
  write_file(dir / "diagnostics.json", text + "\n");
  return json::parse(text);
}

// ---- commands ----

int cmd_estimate(const CLI::App* app, const Flags& f) {
  const json run = resolve_config(app, f);
  SeriesHandle series;
  load_series(f.input, f.meta, series);
  const fs::path out = require_out(f);
  EstimateHandle est;
  check(cpmts_estimate_run(series.ptr, run["estimator"].dump().c_str(), &est.ptr));
  const json diag = write_estimate(out, est.ptr);
  report_warnings(diag);
  const json& r = diag["ranks"];
  std::cout << "ranks d1=" << r["d1"] << " d2=" << r["d2"] << " d=" << r["d"] << '\n';
  return kExitOk;
}

int cmd_forecast(const CLI::App* app, const Flags& f) {
  if (f.h < 1) usage_error("--h must be at least 1");
  const json run = resolve_config(app, f);
  SeriesHandle series;
  load_series(f.input, f.meta, series);
  const fs::path out = require_out(f);
  EstimateHandle est;
  check(cpmts_estimate_run(series.ptr, run["estimator"].dump().c_str(), &est.ptr));
  const json diag = write_estimate(out, est.ptr);
  report_warnings(diag);

  cpmts_forecast* fc = nullptr;
  const cpmts_status st = cpmts_forecast_run(series.ptr, est.ptr, f.method.c_str(), f.h,
                                             run["max_order"].get<int64_t>(), &fc);
  check(st);
  int64_t n = 0, p = 0, q = 0;
  cpmts_series_shape(series.ptr, &n, &p, &q);
  std::vector<double> buf(static_cast<std::size_t>(p * q));
  try {
    for (int64_t step = 1; step <= f.h; ++step) {
      check(cpmts_forecast_prediction(fc, step, buf.data(), buf.size()));
      write_file(out / ("forecast_h" + std::to_string(step) + ".csv"), matrix_csv(buf, p, q, ""));
    }
    char* raw = nullptr;
    check(cpmts_forecast_info(fc, &raw));
    write_file(out / "forecast.json", take_string(raw) + "\n");
  } catch (...) {
    cpmts_forecast_free(fc);
    throw;
  }
  cpmts_forecast_free(fc);
  std::cout << "wrote " << f.h << " forecast(s) with method " << f.method << '\n';
  return kExitOk;
}

int cmd_simulate(const CLI::App* app, const Flags& f) {
  const json run = resolve_config(app, f);
  const json sc = resolve_scenario(app, f, run, false);
  const fs::path out = require_out(f);
  cpmts_simulation* sim = nullptr;
  check(cpmts_simulate(sc.dump().c_str(), &sim));
  auto get = [&](const char* name, int64_t& rows, int64_t& cols) {
    check(cpmts_simulation_matrix(sim, name, nullptr, 0, &rows, &cols));
    std::vector<double> buf(static_cast<std::size_t>(rows * cols));
    check(cpmts_simulation_matrix(sim, name, buf.data(), buf.size(), &rows, &cols));
    return buf;
  };
  try {
    cpmts_series* series = nullptr;
    check(cpmts_simulation_series(sim, &series));
    int64_t n = 0, p = 0, q = 0;
    cpmts_series_shape(series, &n, &p, &q);
    std::vector<double> data(static_cast<std::size_t>(n * p * q));
    const cpmts_status st = cpmts_series_data(series, data.data(), data.size());
    cpmts_series_free(series);
    check(st);

    std::string csv;
    for (int64_t j = 0; j < q; ++j) {
      for (int64_t i = 0; i < p; ++i) {
        csv += (i || j ? "," : "") + ("y" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
      }
    }
    csv += '\n';
    for (int64_t t = 0; t < n; ++t) {
      for (int64_t k = 0; k < p * q; ++k) {
        if (k) csv += ',';
        csv += fmt(data[static_cast<std::size_t>(t * p * q + k)]);
      }
      csv += '\n';
    }
    write_file(out / "series.csv", csv);
    const json meta = {{"n", n}, {"p", p}, {"q", q}, {"layout", "col-major"}};
    write_file(out / "series.meta.json", meta.dump(2) + "\n");

    int64_t rows = 0, cols = 0;
    const auto A = get("A", rows, cols);
    write_file(out / "truth_A.csv", matrix_csv(A, rows, cols, "a"));
    const auto B = get("B", rows, cols);
    write_file(out / "truth_B.csv", matrix_csv(B, rows, cols, "b"));
    const auto x = get("x", rows, cols);
    write_file(out / "truth_factors.csv", matrix_csv(x, rows, cols, "x"));
    json truth = {{"schema", 1}, {"config", sc}};
    const auto ar = get("ar", rows, cols);
    truth["ar_coefs"] = ar;
    for (const char* name : {"A", "B", "P", "Q", "U", "V"}) {
      const auto m = get(name, rows, cols);
      truth[name] = column_major_json(m, rows, cols);
    }
    const auto xs = get("x", rows, cols);
    truth["factors"] = column_major_json(xs, rows, cols);
    write_file(out / "truth.json", truth.dump(2) + "\n");
  } catch (...) {
    cpmts_simulation_free(sim);
    throw;
  }
  cpmts_simulation_free(sim);
  std::cout << "wrote " << (out / "series.csv").string() << '\n';
  return kExitOk;
}

int cmd_bench(const CLI::App* app, const Flags& f) {
  if (f.jobs < 1) usage_error("--jobs must be at least 1");
  if (f.forecast_steps < 0) usage_error("--forecast-steps must be nonnegative");
  const json run = resolve_config(app, f);
  const json sc = resolve_scenario(app, f, run, true);
  const fs::path out = require_out(f);
  const std::string est = run["estimator"].dump();

  char* raw = nullptr;
  check(cpmts_bench_replications(sc.dump().c_str(), est.c_str(), f.jobs, &raw));
  const std::string text = take_string(raw);
  write_file(out / "summary.json", text + "\n");
  const json summary = json::parse(text);
  std::string csv = "replication,seed,ok,d1,d2,d,varpi_a,varpi_b,jd_converged,error\n";
  for (const auto& r : summary["records"]) {
    csv += std::to_string(r["replication"].get<int64_t>()) + "," +
           std::to_string(r["seed"].get<uint64_t>()) + "," + (r["ok"].get<bool>() ? "1" : "0") +
           "," + std::to_string(r["d1"].get<int64_t>()) + "," +
           std::to_string(r["d2"].get<int64_t>()) + "," + std::to_string(r["d"].get<int64_t>()) +
           "," + fmt(r["varpi_a"].get<double>()) + "," + fmt(r["varpi_b"].get<double>()) + "," +
           (r["jd_converged"].get<bool>() ? "1" : "0") + "," + json(r.value("error", "")).dump() +
           "\n";
  }
  write_file(out / "replications.csv", csv);
  const json& s = summary["summary"];
  std::cout << "rank recovery " << fmt(s["freq_all"].get<double>()) << "%, mean 100*varpi^2 A "
            << (s["mean_varpi_a"].is_number() ? fmt(s["mean_varpi_a"].get<double>()) : "nan")
            << ", failures " << s["failures"] << '\n';

  if (f.forecast_steps > 0) {
    if (f.h < 1) usage_error("--h must be at least 1");
    check(cpmts_bench_forecast(sc.dump().c_str(), est.c_str(), f.methods.c_str(), f.forecast_steps,
                               f.h, f.jobs, run["max_order"].get<int64_t>(), &raw));
    const std::string ftext = take_string(raw);
    write_file(out / "forecast.json", ftext + "\n");
    const json fj = json::parse(ftext);
    std::string fcsv = "method,horizon,completed,failures,mean_rmse,sd_rmse\n";
    for (const auto& r : fj["rows"]) {
      auto num = [](const json& v) { return v.is_number() ? fmt(v.get<double>()) : std::string("nan"); };
      fcsv += r["method"].get<std::string>() + "," + std::to_string(r["horizon"].get<int64_t>()) +
              "," + std::to_string(r["completed"].get<int64_t>()) + "," +
              std::to_string(r["failures"].get<int64_t>()) + "," + num(r["mean_rmse"]) + "," +
              num(r["sd_rmse"]) + "\n";
      std::cout << r["method"].get<std::string>() << " rmse " << num(r["mean_rmse"]) << '\n';
    }
    write_file(out / "forecast.csv", fcsv);
  }
  return kExitOk;
}

void add_estimator_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file (flags take precedence)");
  cmd->add_option("--K", f.K, "lags for M1/M2 (default 20)")->check(CLI::PositiveNumber);
  cmd->add_option("--Ktilde", f.Ktilde, "lags for M (default 10)")->check(CLI::PositiveNumber);
  cmd->add_option("--delta1", f.delta1, "threshold for M1/M2: auto or a number");
  cmd->add_option("--delta2", f.delta2, "threshold for M: auto or a number");
  cmd->add_option("--ridge", f.ridge, "eigenvalue-ratio ridge c1 = c2 = c3: auto or a number");
  cmd->add_option("--seed", f.seed, "seed (falls back to CPMTS_SEED)");
  cmd->add_option("--pin-ranks", f.pin_ranks, "fix ranks as d1,d2,d");
  cmd->add_option("--max-order", f.max_order, "largest VAR order tried (default 5)")
      ->check(CLI::PositiveNumber);
}

void add_io_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--input", f.input, "series CSV")->required();
  cmd->add_option("--meta", f.meta, "series sidecar JSON (default: <input>.meta.json)");
  cmd->add_option("--out", f.out, "output directory")->required();
}

void add_scenario_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--scenario", f.scenario, "R1, R2 or R3");
  cmd->add_option("--n", f.n, "series length");
  cmd->add_option("--p", f.p, "rows");
  cmd->add_option("--q", f.q, "columns");
  cmd->add_option("--d", f.d, "number of factors");
  cmd->add_option("--noise", f.noise, "noise scale (0 = noiseless)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CP-factor models for matrix time series"};
  app.set_help_flag("--help", "print help and exit");  // -h would clash with --h
  app.require_subcommand(1);
  Flags f;

  CLI::App* estimate = app.add_subcommand("estimate", "estimate ranks and loadings");
  add_io_flags(estimate, f);
  add_estimator_flags(estimate, f);

  CLI::App* forecast = app.add_subcommand("forecast", "forecast the next h observations");
  add_io_flags(forecast, f);
  add_estimator_flags(forecast, f);
  forecast->add_option("--method", f.method, "unified, latent or latent-substitute")
      ->check(CLI::IsMember({"unified", "latent", "latent-substitute"}));
  forecast->add_option("--h", f.h, "horizon");

  CLI::App* simulate = app.add_subcommand("simulate", "generate a scenario data set");
  add_scenario_flags(simulate, f);
  simulate->add_option("--config", f.config, "JSON config file (flags take precedence)");
  simulate->add_option("--seed", f.seed, "seed (falls back to CPMTS_SEED)");
  simulate->add_option("--out", f.out, "output directory")->required();

  CLI::App* bench = app.add_subcommand("bench", "replication benchmark");
  add_scenario_flags(bench, f);
  add_estimator_flags(bench, f);
  bench->add_option("--reps", f.reps, "replications")->check(CLI::PositiveNumber);
  bench->add_option("--jobs", f.jobs, "worker threads");
  bench->add_option("--out", f.out, "output directory")->required();
  bench->add_option("--forecast-steps", f.forecast_steps, "rolling windows m (0 = skip)");
  bench->add_option("--methods", f.methods, "forecast methods, comma separated");
  bench->add_option("--h", f.h, "forecast horizon");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*estimate) return cmd_estimate(estimate, f);
    if (*forecast) return cmd_forecast(forecast, f);
    if (*simulate) return cmd_simulate(simulate, f);
    if (*bench) return cmd_bench(bench, f);
  } catch (const Failure& e) {
    std::cerr << "error: " << e.message << '\n';
    return e.code;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}

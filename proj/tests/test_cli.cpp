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

// Runs the cpmts executable end to end in a scratch directory.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpmts/pipeline.hpp"
#include "cpmts/simbench.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string output;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" CPMTS_CLI_PATH "\" " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Csv read_csv(const fs::path& p, bool has_header = true) {
  std::ifstream in(p);
  REQUIRE(in.good());
  Csv c;
  std::string line;
  bool first = has_header;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      c.header = cells;
      first = false;
      continue;
    }
    std::vector<double> row;
    for (const std::string& s : cells) {
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      REQUIRE(res.ec == std::errc());
      row.push_back(v);
    }
    c.rows.push_back(row);
  }
  return c;
}

cpmts::Matrix to_matrix(const Csv& c) {
  cpmts::Matrix m(static_cast<cpmts::Index>(c.rows.size()), static_cast<cpmts::Index>(c.rows.front().size()));
  for (cpmts::Index i = 0; i < m.rows(); ++i)
    for (cpmts::Index j = 0; j < m.cols(); ++j) m(i, j) = c.rows[i][j];
  return m;
}

// One scratch directory per test case.
fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(CPMTS_TEST_SCRATCH) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

const char* kSim = "simulate --scenario R1 --n 300 --p 20 --q 20 --d 3 --seed 7";

}  // namespace

TEST_CASE("simulate is byte-identical across runs") {
  const fs::path dir = scratch("sim");
  REQUIRE(run(std::string(kSim) + " --out " + q(dir / "a")).code == 0);
  REQUIRE(run(std::string(kSim) + " --out " + q(dir / "b")).code == 0);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const fs::path other = dir / "b" / entry.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(slurp(entry.path()) == slurp(other));
    ++files;
  }
  CHECK(files >= 6);

  const Csv y = read_csv(dir / "a" / "series.csv");
  CHECK(y.rows.size() == 300);
  CHECK(y.header.size() == 400);
  CHECK(y.header[0] == "y1_1");
  CHECK(y.header[1] == "y2_1");
  const json meta = json::parse(slurp(dir / "a" / "series.meta.json"));
  CHECK(meta["n"] == 300);
  CHECK(meta["p"] == 20);
  CHECK(meta["q"] == 20);
  CHECK(meta["layout"] == "col-major");

  const Csv a = read_csv(dir / "a" / "truth_A.csv");
  CHECK(a.header == std::vector<std::string>{"a1", "a2", "a3"});
  CHECK(a.rows.size() == 20);
  CHECK(read_csv(dir / "a" / "truth_B.csv").rows.size() == 20);
  CHECK(read_csv(dir / "a" / "truth_factors.csv").rows.size() == 300);
  const json truth = json::parse(slurp(dir / "a" / "truth.json"));
  CHECK(truth.contains("A"));
  CHECK(truth.contains("B"));
  CHECK(truth.contains("ar_coefs"));

  // environment seed is a fallback only
  const std::string base = "simulate --scenario R1 --n 300 --p 20 --q 20 --d 3";
  REQUIRE(run(base + " --out " + q(dir / "env"), "CPMTS_SEED=7").code == 0);
  CHECK(slurp(dir / "env" / "series.csv") == slurp(dir / "a" / "series.csv"));
  REQUIRE(run(base + " --seed 8 --out " + q(dir / "flag"), "CPMTS_SEED=7").code == 0);
  CHECK(slurp(dir / "flag" / "series.csv") != slurp(dir / "a" / "series.csv"));
}

TEST_CASE("noise 0 gives the noiseless signal") {
  const fs::path dir = scratch("noise");
  REQUIRE(run("simulate --scenario R2 --n 50 --p 6 --q 5 --d 3 --seed 2 --noise 0 --out " + q(dir)).code == 0);
  cpmts::ScenarioConfig cfg;
  cfg.scenario = cpmts::Scenario::R2;
  cfg.n = 50;
  cfg.p = 6;
  cfg.q = 5;
  cfg.d = 3;
  cfg.seed = 2;
  cfg.noise_scale = 0.0;
  const cpmts::GroundTruth g = cpmts::generate(cfg);
  const cpmts::Matrix y = to_matrix(read_csv(dir / "series.csv"));
  CHECK(y == g.signal.transpose());
}

TEST_CASE("estimate writes the shape contract and round-trips bit for bit") {
  const fs::path dir = scratch("est");
  REQUIRE(run(std::string(kSim) + " --out " + q(dir / "sim")).code == 0);
  const Run r = run("estimate --input " + q(dir / "sim" / "series.csv") + " --delta1 0 --delta2 0 --out " +
                    q(dir / "est"));
  REQUIRE(r.code == 0);
  const Csv a = read_csv(dir / "est" / "loadings_A.csv");
  const Csv b = read_csv(dir / "est" / "loadings_B.csv");
  const json est = json::parse(slurp(dir / "est" / "estimate.json"));
  const cpmts::Index d = est["ranks"]["d"].get<cpmts::Index>();
  CHECK(a.rows.size() == 20);
  CHECK(a.header.size() == static_cast<std::size_t>(d));
  CHECK(a.header[0] == "a1");
  CHECK(b.header[0] == "b1");
  const json diag = json::parse(slurp(dir / "est" / "diagnostics.json"));
  CHECK(diag["schema"] == 1);

  // in-memory pipeline on the same draw
  cpmts::ScenarioConfig cfg;
  cfg.n = 300;
  cfg.p = 20;
  cfg.q = 20;
  cfg.d = 3;
  cfg.seed = 7;
  const cpmts::GroundTruth g = cpmts::generate(cfg);
  cpmts::EstimatorConfig ec;
  ec.delta1 = ec.delta2 = 0.0;
  ec.seed = 7;
  const cpmts::CPEstimate mem = cpmts::estimate(g.series, ec);
  CHECK(mem.d == d);
  const cpmts::Matrix fa = to_matrix(a), fb = to_matrix(b);
  CHECK(fa == mem.A);
  CHECK(fb == mem.B);
  const cpmts::Matrix ta = to_matrix(read_csv(dir / "sim" / "truth_A.csv"));
  CHECK(ta == g.A);
  CHECK(cpmts::varpi(ta, fa) == cpmts::varpi(g.A, mem.A));
}

TEST_CASE("estimate errors and pinned ranks") {
  const fs::path dir = scratch("pin");
  REQUIRE(run("simulate --scenario R1 --n 200 --p 8 --q 8 --d 3 --seed 4 --out " + q(dir / "sim")).code == 0);
  const Run missing = run("estimate --input " + q(dir / "sim" / "series.csv") + " --meta " +
                          q(dir / "nowhere.json") + " --out " + q(dir / "x"));
  CHECK(missing.code == 2);
  CHECK(missing.output.find("meta not found") != std::string::npos);

  CHECK(run("estimate --input " + q(dir / "nope.csv") + " --out " + q(dir / "x")).code == 2);
  CHECK(run("estimate --bogus").code == 2);
  CHECK(run("").code == 2);

  const Run pinned = run("estimate --input " + q(dir / "sim" / "series.csv") + " --pin-ranks 2,2,3 --out " +
                         q(dir / "est"));
  REQUIRE(pinned.code == 0);
  const json diag = json::parse(slurp(dir / "est" / "diagnostics.json"));
  CHECK(diag["ranks"]["pinned"] == true);
  CHECK(diag["ranks"]["d1"] == 2);
  CHECK(diag["ranks"]["d"] == 3);
  CHECK(diag["ratio_paths"]["M1"]["ratios"].size() > 0);
  CHECK(diag["ratio_paths"]["M"]["ratios"].size() > 0);

  // a config file is overridden by flags
  std::ofstream(dir / "cfg.json") << R"({"pin_ranks": [1, 1, 1], "K": 5})";
  REQUIRE(run("estimate --input " + q(dir / "sim" / "series.csv") + " --config " + q(dir / "cfg.json") +
              " --pin-ranks 2,2,3 --out " + q(dir / "est2"))
              .code == 0);
  const json diag2 = json::parse(slurp(dir / "est2" / "diagnostics.json"));
  CHECK(diag2["ranks"]["d"] == 3);
  CHECK(diag2["tuning"]["K"] == 5);
}

TEST_CASE("forecast files and errors") {
  const fs::path dir = scratch("fc");
  REQUIRE(run("simulate --scenario R1 --n 200 --p 8 --q 6 --d 3 --seed 5 --out " + q(dir / "sim")).code == 0);
  const std::string in = " --input " + q(dir / "sim" / "series.csv");
  REQUIRE(run("forecast" + in + " --method unified --h 2 --out " + q(dir / "out")).code == 0);
  for (const char* f : {"forecast_h1.csv", "forecast_h2.csv"}) {
    const Csv c = read_csv(dir / "out" / f, false);
    CHECK(c.rows.size() == 8);
    CHECK(c.rows.front().size() == 6);
  }
  CHECK_FALSE(fs::exists(dir / "out" / "forecast_h3.csv"));
  CHECK(json::parse(slurp(dir / "out" / "forecast.json"))["method"] == "unified");

  const Run zero = run("forecast" + in + " --method unified --h 0 --out " + q(dir / "z"));
  CHECK(zero.code == 2);
  CHECK(run("forecast" + in + " --method crystal --out " + q(dir / "z")).code == 2);

  REQUIRE(run("simulate --scenario R3 --n 300 --p 10 --q 10 --d 3 --seed 7 --out " + q(dir / "r3")).code == 0);
  const Run lat = run("forecast --input " + q(dir / "r3" / "series.csv") +
                      " --delta1 0 --delta2 0 --method latent --out " + q(dir / "r3out"));
  CHECK(lat.code == 1);
  CHECK(lat.output.find("not identifiable") != std::string::npos);
  CHECK(lat.output.find("unified") != std::string::npos);
  CHECK(run("forecast --input " + q(dir / "r3" / "series.csv") +
            " --delta1 0 --delta2 0 --method unified --out " + q(dir / "r3out"))
            .code == 0);
}

TEST_CASE("bench writes summaries") {
  const fs::path dir = scratch("bench");
  const std::string args = "bench --scenario R1 --n 100 --p 6 --q 6 --d 2 --seed 3 --reps 4 --forecast-steps 2";
  REQUIRE(run(args + " --jobs 1 --out " + q(dir / "a")).code == 0);
  REQUIRE(run(args + " --jobs 2 --out " + q(dir / "b")).code == 0);
  for (const char* f : {"summary.json", "replications.csv", "forecast.json", "forecast.csv"}) {
    REQUIRE(fs::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  std::ifstream reps(dir / "a" / "replications.csv");
  std::string line;
  int lines = 0;
  while (std::getline(reps, line)) ++lines;
  CHECK(lines == 5);
  const json s = json::parse(slurp(dir / "a" / "summary.json"));
  CHECK(s["records"].size() == 4);
  CHECK(s["config"]["replications"] == 4);
}

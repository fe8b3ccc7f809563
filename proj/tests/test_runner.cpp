// Copyright 2026 The ACL Backflow Authors
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

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "catch_amalgamated.hpp"

#include "acl/runner.hpp"

using namespace acl;
namespace fs = std::filesystem;
using Catch::Matchers::WithinAbs;

namespace {

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("acl_test_" + tag + "_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

RunConfig small_config(const fs::path& out) {
  RunConfig c;
  c.model.n_sys = 4;
  c.model.n_env = 6;
  c.model.t_max = 2.0;
  c.model.dt = 0.1;
  c.output_dir = out;
  c.workers = 2;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream is(p);
  std::string line;
  std::getline(is, line);
  return line;
}

std::size_t data_rows(const fs::path& p) {
  std::ifstream is(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) ++n;
  return n - 1;
}

}  // namespace

TEST_CASE("format_double round-trips", "[runner]") {
  std::mt19937_64 g(51);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(g) * std::pow(10.0, static_cast<int>(g() % 40) - 20);
    const std::string s = format_double(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(30.0) == "30");
}

TEST_CASE("config parsing", "[runner]") {
  const auto j = nlohmann::json::parse(R"({"gamma": 0.55, "temp": 0.1, "mode": "sweep",
      "sweep": {"gamma_values": [0.1], "temp_values": [1.0], "seeds": [3, 4]}})");
  const RunConfig c = RunConfig::from_json(j);
  CHECK(c.model.gamma == 0.55);
  CHECK(c.model.temp == 0.1);
  CHECK(c.mode == RunMode::Sweep);
  CHECK(c.sweep.seeds == std::vector<std::uint64_t>{3, 4});
  CHECK(c.model.n_env == 64);

  const RunConfig back = RunConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());

  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"gama": 1})")), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"sweep": {"g": [1]}})")),
                  ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"n_sys": "x"})")), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"mode": "fast"})")), ConfigError);
  RunConfig bad;
  bad.model.dt = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("single run writes the series schema", "[runner]") {
  ScratchDir dir("single");
  const RunConfig c = small_config(dir.path() / "run");
  const RunOutcome out = run_single(c);
  const fs::path csv = c.output_dir / "series.csv";
  CHECK(first_line(csv) == kSeriesHeader);
  CHECK(data_rows(csv) == 21);
  CHECK(out.series.size() == 21);

  for (const char* col : {"D_corr1", "D_corr2", "D_env", "sqrtJ_corr1", "sqrtJ_env"})
    CHECK(read_csv_column(csv, col).front() == 0.0);

  const auto j = nlohmann::json::parse(slurp(c.output_dir / "manifest.json"));
  CHECK(j.at("seed") == 42);
  CHECK(j.at("rng_algorithm") == "mt19937_64/box-muller-53bit");
  CHECK(j.at("grid").at("count") == 21);
  CHECK(j.at("csv_schema_version") == kCsvSchemaVersion);
  CHECK(RunConfig::from_json(j.at("config")).model.n_env == 6);

  const std::string first = slurp(csv);
  run_single(c);
  CHECK(slurp(csv) == first);
  CHECK_THROWS_AS(read_csv_column(csv, "nope"), std::runtime_error);
}

TEST_CASE("without coupling the system distinguishability is constant", "[runner]") {
  ScratchDir dir("free");
  RunConfig c = small_config(dir.path());
  c.model.gamma = 0.0;
  c.emit_globals_derived = false;
  run_single(c);
  const auto d = read_csv_column(dir.path() / "series.csv", "D_S");
  for (double v : d) CHECK_THAT(v, WithinAbs(d.front(), 1e-12));
  const auto corr = read_csv_column(dir.path() / "series.csv", "D_corr1");
  CHECK(std::isnan(corr.back()));
}

TEST_CASE("sweep writes one row per point and a recomputable N", "[runner]") {
  ScratchDir dir("sweep");
  RunConfig c = small_config(dir.path());
  c.mode = RunMode::Sweep;
  c.emit_globals_derived = false;
  c.model.t_max = 4.0;
  c.sweep.gamma_values = {0.0, 1.5};
  c.sweep.temp_values = {0.5};
  c.sweep.seeds = {1, 2};
  const SweepOutcome out = run_sweep(c);
  CHECK_FALSE(out.partial_failure());
  const fs::path summary = dir.path() / "summary.csv";
  CHECK(first_line(summary) == kSummaryHeader);
  CHECK(data_rows(summary) == 4);

  const auto gammas = read_csv_column(summary, "gamma");
  const auto seeds = read_csv_column(summary, "seed");
  const auto temps = read_csv_column(summary, "T");
  const auto nd = read_csv_column(summary, "N_D");
  for (std::size_t i = 0; i < nd.size(); ++i) {
    const fs::path series = dir.path() /
                            point_directory_name(gammas[i], temps[i],
                                                 static_cast<std::uint64_t>(seeds[i])) /
                            "series.csv";
    REQUIRE(fs::exists(series));
    CHECK(nd[i] == blp_measure(read_csv_column(series, "D_S")));
    if (gammas[i] == 0.0) CHECK(nd[i] < 1e-12);
  }
  CHECK(point_directory_name(0.32, 1.0, 5) == "g0.32_T1_s5");
}

TEST_CASE("a failing sweep point is recorded and skipped", "[runner]") {
  ScratchDir dir("partial");
  RunConfig c = small_config(dir.path());
  c.mode = RunMode::Sweep;
  c.emit_globals_derived = false;
  c.sweep.gamma_values = {0.2, 0.4};
  c.sweep.temp_values = {1.0};
  c.sweep.seeds = {1};
  // A regular file where the point directory should go.
  std::ofstream(dir.path() / point_directory_name(0.4, 1.0, 1)) << "blocker";
  const SweepOutcome out = run_sweep(c);
  CHECK(out.partial_failure());
  CHECK(out.summary.size() == 1);
  CHECK(data_rows(dir.path() / "summary.csv") == 1);
  const auto j = nlohmann::json::parse(slurp(dir.path() / "manifest.json"));
  CHECK(j.at("points").at(1).at("status") == "failed");
}

TEST_CASE("convergence report", "[runner]") {
  ScratchDir dir("conv");
  RunConfig c = small_config(dir.path());
  c.model.gamma = 0.0;
  const ConvergenceReport free = run_convergence(c);
  CHECK(free.deviation.trace_distance == 0.0);
  CHECK(free.deviation.sqrt_jsd == 0.0);
  CHECK(fs::exists(dir.path() / "convergence.json"));

  c.model.gamma = 1.0;
  c.model.t_max = 6.0;
  const ModelOperators ops = build_operators(c.model);
  const InitialPair init = InitialPair::coherent(c.model, ops);
  const ConvergenceReport r = convergence_check(c.model, ops, init);
  CHECK(r.deviation.trace_distance >= 0.0);
  CHECK(r.deviation.sqrt_jsd >= 0.0);
  CHECK(r.dt_fine == 0.05);
  CHECK(relative_deviation(1e-14, 3e-14) == 0.0);
  CHECK_THAT(relative_deviation(1.0, 0.99), WithinAbs(0.01, 1e-15));
}

TEST_CASE("wavepacket files", "[runner]") {
  ScratchDir dir("wave");
  RunConfig c = small_config(dir.path());
  c.model.n_sys = 12;
  c.wavepacket.sample_times = {0.0, 1.0, 2.0};
  run_wavepacket(c);
  const fs::path free = dir.path() / "wavepacket_free.csv";
  const fs::path damped = dir.path() / "wavepacket_damped.csv";
  CHECK(first_line(free) == kWavepacketHeader);
  const auto t = read_csv_column(free, "t");
  const auto pf = read_csv_column(free, "p");
  const auto pd = read_csv_column(damped, "p");
  const std::size_t nq = c.wavepacket.q_grid().size();
  REQUIRE(t.size() == 3 * nq);
  for (std::size_t i = 0; i < 3; ++i) {
    double norm = 0.0;
    for (std::size_t k = 0; k < nq; ++k) {
      const double w = (k == 0 || k + 1 == nq) ? 0.5 : 1.0;
      norm += w * pf[i * nq + k];
    }
    CHECK_THAT(norm * c.wavepacket.q_step, WithinAbs(1.0, 1e-6));
  }
  for (std::size_t k = 0; k < nq; ++k) CHECK(pf[k] == pd[k]);
}

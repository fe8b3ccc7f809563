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

#include "acl/runner.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace acl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kTopKeys = {"n_sys", "n_env", "omega_s", "gamma", "temp", "alpha",
                                        "seed", "dt", "t_max", "mode", "out",
                                        "emit_globals_derived", "workers", "sweep", "wavepacket"};
const std::set<std::string> kSweepKeys = {"gamma_values", "temp_values", "seeds"};
const std::set<std::string> kWavepacketKeys = {"q_min", "q_max", "q_step", "sample_times",
                                               "gamma", "temp"};

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, _] : j.items())
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw OutputError("cannot open " + path.string() + " for writing");
  return os;
}

void finish(std::ofstream& os, const fs::path& path) {
  os.flush();
  if (!os) throw OutputError("failed writing " + path.string());
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw OutputError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_json(const fs::path& path, const json& j) {
  auto os = open_output(path);
  os << j.dump(2) << '\n';
  finish(os, path);
}

json grid_json(const ModelParams& m) {
  const TimeGrid g = TimeGrid::make(m.dt, m.t_max);
  return {{"dt", g.dt}, {"t_max", g.t_max}, {"count", g.count()}};
}

json manifest(const RunConfig& config, const ModelParams& model, double seconds,
              const std::vector<fs::path>& files) {
  json out;
  RunConfig resolved = config;
  resolved.model = model;
  out["config"] = resolved.to_json();
  out["seed"] = model.seed;
  out["rng_algorithm"] = std::string(GaussianStream::kAlgorithm);
  out["grid"] = grid_json(model);
  out["wall_clock_seconds"] = seconds;
  out["software_version"] = std::string(kSoftwareVersion);
  out["csv_schema_version"] = kCsvSchemaVersion;
  json list = json::array();
  for (const auto& f : files) list.push_back(f.filename().string());
  out["files"] = list;
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

QuantifierSeries evaluate_grid(const PairEvolution& evo, const TimeGrid& grid,
                               const SeriesOptions& opts) {
  QuantifierSeries series(opts.with_globals);
  const EvaluationOptions eval{opts.with_globals, opts.parallel_branches};
  evo.stream(grid, [&](const StepSnapshot& snap) { series.append(evaluate_snapshot(snap, eval)); });
  return series;
}

bool multi_core() { return std::thread::hardware_concurrency() > 1; }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::Single: return "single";
    case RunMode::Sweep: return "sweep";
    case RunMode::Convergence: return "convergence";
    case RunMode::Wavepacket: return "wavepacket";
  }
  return "single";
}

RunMode parse_run_mode(std::string_view s) {
  if (s == "single") return RunMode::Single;
  if (s == "sweep") return RunMode::Sweep;
  if (s == "convergence") return RunMode::Convergence;
  if (s == "wavepacket") return RunMode::Wavepacket;
  throw ConfigError("unknown mode '" + std::string(s) +
                    "' (expected single|sweep|convergence|wavepacket)");
}

std::vector<double> WavepacketConfig::q_grid() const {
  const auto n = static_cast<std::size_t>(std::floor((q_max - q_min) / q_step * (1.0 + 1e-12))) + 1;
  std::vector<double> q(n);
  for (std::size_t k = 0; k < n; ++k) q[k] = q_min + static_cast<double>(k) * q_step;
  return q;
}

std::vector<double> WavepacketConfig::times() const {
  if (!sample_times.empty()) return sample_times;
  std::vector<double> t;
  for (int k = 0; k <= 8; ++k) t.push_back(k * std::numbers::pi / 4.0);
  return t;
}

void RunConfig::validate() const {
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (output_dir.empty()) throw ConfigError("out: output directory must be set");
  if (mode == RunMode::Sweep) {
    if (sweep.gamma_values.empty()) throw ConfigError("sweep.gamma_values must be nonempty");
    if (sweep.temp_values.empty()) throw ConfigError("sweep.temp_values must be nonempty");
  }
  for (double g : sweep.gamma_values)
    if (!(g >= 0) || !std::isfinite(g)) throw ConfigError("sweep.gamma_values must be >= 0");
  for (double t : sweep.temp_values)
    if (!(t >= 0) || !std::isfinite(t)) throw ConfigError("sweep.temp_values must be >= 0");
  const auto& w = wavepacket;
  if (!(w.q_step > 0) || !(w.q_max > w.q_min) || !std::isfinite(w.q_min) || !std::isfinite(w.q_max))
    throw ConfigError("wavepacket: need q_min < q_max and q_step > 0");
  if (!(w.gamma >= 0) || !(w.temp >= 0)) throw ConfigError("wavepacket: gamma and temp must be >= 0");
  for (double t : w.sample_times)
    if (!std::isfinite(t)) throw ConfigError("wavepacket.sample_times must be finite");
}

unsigned RunConfig::resolved_workers() const {
  if (workers > 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

RunConfig RunConfig::from_json(const json& j) {
  reject_unknown(j, kTopKeys, "config");
  RunConfig c;
  read_if(j, "n_sys", c.model.n_sys);
  read_if(j, "n_env", c.model.n_env);
  read_if(j, "omega_s", c.model.omega_s);
  read_if(j, "gamma", c.model.gamma);
  read_if(j, "temp", c.model.temp);
  read_if(j, "alpha", c.model.alpha);
  read_if(j, "seed", c.model.seed);
  read_if(j, "dt", c.model.dt);
  read_if(j, "t_max", c.model.t_max);
  if (j.contains("mode")) c.mode = parse_run_mode(j.at("mode").get<std::string>());
  if (j.contains("out")) c.output_dir = j.at("out").get<std::string>();
  read_if(j, "emit_globals_derived", c.emit_globals_derived);
  read_if(j, "workers", c.workers);
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    reject_unknown(s, kSweepKeys, "sweep");
    read_if(s, "gamma_values", c.sweep.gamma_values);
    read_if(s, "temp_values", c.sweep.temp_values);
    read_if(s, "seeds", c.sweep.seeds);
  }
  if (j.contains("wavepacket")) {
    const json& w = j.at("wavepacket");
    reject_unknown(w, kWavepacketKeys, "wavepacket");
    read_if(w, "q_min", c.wavepacket.q_min);
    read_if(w, "q_max", c.wavepacket.q_max);
    read_if(w, "q_step", c.wavepacket.q_step);
    read_if(w, "sample_times", c.wavepacket.sample_times);
    read_if(w, "gamma", c.wavepacket.gamma);
    read_if(w, "temp", c.wavepacket.temp);
  }
  return c;
}

json RunConfig::to_json() const {
  const ModelParams& m = model;
  return {
      {"n_sys", m.n_sys},
      {"n_env", m.n_env},
      {"omega_s", m.omega_s},
      {"gamma", m.gamma},
      {"temp", m.temp},
      {"alpha", m.alpha},
      {"seed", m.seed},
      {"dt", m.dt},
      {"t_max", m.t_max},
      {"mode", std::string(to_string(mode))},
      {"out", output_dir.string()},
      {"emit_globals_derived", emit_globals_derived},
      {"workers", workers},
      {"sweep",
       {{"gamma_values", sweep.gamma_values},
        {"temp_values", sweep.temp_values},
        {"seeds", sweep.seeds}}},
      {"wavepacket",
       {{"q_min", wavepacket.q_min},
        {"q_max", wavepacket.q_max},
        {"q_step", wavepacket.q_step},
        {"sample_times", wavepacket.times()},
        {"gamma", wavepacket.gamma},
        {"temp", wavepacket.temp}}},
  };
}

RunConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  try {
    return RunConfig::from_json(json::parse(is));
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

QuantifierSeries compute_series(const ModelParams& params, const SeriesOptions& opts) {
  params.validate();
  const ModelOperators ops = build_operators(params);
  const InitialPair init = InitialPair::coherent(params, ops);
  const PairEvolution evo(ops, init, opts.method);
  return evaluate_grid(evo, TimeGrid::make(params.dt, params.t_max), opts);
}

void write_series_csv(const fs::path& path, const QuantifierSeries& series) {
  auto os = open_output(path);
  os << kSeriesHeader << '\n';
  constexpr auto D = QuantifierKind::TraceDistance;
  constexpr auto J = QuantifierKind::SqrtJensenShannon;
  const auto diffs = series.differences();
  for (std::size_t k = 0; k < series.size(); ++k) {
    const TimeRecord& r = series[k];
    const double cells[] = {r.t,
                            r[D].dist_s,
                            r[J].dist_s,
                            r[D].corr_1,
                            r[D].corr_2,
                            r[J].corr_1,
                            r[J].corr_2,
                            r[D].dist_e,
                            r[J].dist_e,
                            r[D].bound_rhs(),
                            r[J].bound_rhs(),
                            r[D].i_ext(),
                            r[J].i_ext(),
                            diffs[k].delta_x,
                            diffs[k].delta_y};
    bool first = true;
    for (double c : cells) {
      if (!first) os << ',';
      os << format_double(c);
      first = false;
    }
    os << '\n';
  }
  finish(os, path);
}

std::vector<double> read_csv_column(const fs::path& path, std::string_view column) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(path.string() + ": empty file");
  const auto header = split_csv_line(line);
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end())
    throw std::runtime_error(path.string() + ": no column named '" + std::string(column) + "'");
  const auto idx = static_cast<std::size_t>(it - header.begin());
  std::vector<double> out;
  while (std::getline(is, line)) {
    const auto cells = split_csv_line(line);
    if (idx >= cells.size()) throw std::runtime_error(path.string() + ": short row");
    const std::string& cell = cells[idx];
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
      throw std::runtime_error(path.string() + ": cannot parse '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

RunOutcome run_single(const RunConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ensure_directory(config.output_dir);
  RunOutcome out;
  SeriesOptions opts;
  opts.with_globals = config.emit_globals_derived;
  opts.parallel_branches = multi_core();
  out.series = compute_series(config.model, opts);
  out.summary = summarize(out.series, config.model.gamma, config.model.temp, config.model.seed);
  const fs::path csv = config.output_dir / "series.csv";
  write_series_csv(csv, out.series);
  out.files = {csv};
  const fs::path man = config.output_dir / "manifest.json";
  out.files.push_back(man);
  write_json(man, manifest(config, config.model, seconds_since(t0), out.files));
  return out;
}

bool SweepOutcome::partial_failure() const {
  return std::any_of(points.begin(), points.end(), [](const auto& p) { return !p.ok; });
}

std::string point_directory_name(double gamma, double temp, std::uint64_t seed) {
  return "g" + format_double(gamma) + "_T" + format_double(temp) + "_s" + std::to_string(seed);
}

SweepOutcome run_sweep(const RunConfig& config) {
  RunConfig cfg = config;
  cfg.mode = RunMode::Sweep;
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ensure_directory(cfg.output_dir);

  std::vector<std::uint64_t> seeds = cfg.sweep.seeds;
  if (seeds.empty()) seeds.push_back(cfg.model.seed);

  SweepOutcome out;
  for (double g : cfg.sweep.gamma_values)
    for (double t : cfg.sweep.temp_values)
      for (std::uint64_t s : seeds) out.points.push_back({g, t, s, point_directory_name(g, t, s), false, {}});

  std::vector<std::optional<SummaryRecord>> rows(out.points.size());
  std::atomic<std::size_t> next{0};
  const unsigned workers =
      std::min<unsigned>(cfg.resolved_workers(), static_cast<unsigned>(out.points.size()));
  auto work = [&] {
    for (std::size_t i = next++; i < out.points.size(); i = next++) {
      SweepPointStatus& p = out.points[i];
      const auto tp = std::chrono::steady_clock::now();
      try {
        ModelParams m = cfg.model;
        m.gamma = p.gamma;
        m.temp = p.temp;
        m.seed = p.seed;
        SeriesOptions opts;
        opts.with_globals = cfg.emit_globals_derived;
        const QuantifierSeries series = compute_series(m, opts);
        const fs::path dir = cfg.output_dir / p.directory;
        ensure_directory(dir);
        write_series_csv(dir / "series.csv", series);
        write_json(dir / "manifest.json",
                   manifest(cfg, m, seconds_since(tp), {dir / "series.csv", dir / "manifest.json"}));
        rows[i] = summarize(series, p.gamma, p.temp, p.seed);
        p.ok = true;
      } catch (const std::exception& e) {
        p.error = e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }

  const fs::path summary = cfg.output_dir / "summary.csv";
  auto os = open_output(summary);
  os << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    if (!r) continue;
    out.summary.push_back(*r);
    os << format_double(r->gamma) << ',' << format_double(r->temp) << ',' << r->seed << ','
       << format_double(r->nm_value.trace_distance) << ',' << format_double(r->nm_value.sqrt_jsd)
       << ',' << format_double(r->dist_s_t0) << ',' << format_double(r->max_revival_d) << '\n';
  }
  finish(os, summary);

  json man = manifest(cfg, cfg.model, seconds_since(t0), {summary, cfg.output_dir / "manifest.json"});
  json points = json::array();
  for (const auto& p : out.points) {
    json entry = {{"gamma", p.gamma}, {"T", p.temp}, {"seed", p.seed},
                  {"directory", p.directory}, {"status", p.ok ? "ok" : "failed"}};
    if (!p.ok) entry["error"] = p.error;
    points.push_back(entry);
  }
  man["points"] = points;
  write_json(cfg.output_dir / "manifest.json", man);
  return out;
}

double relative_deviation(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale < kConvergenceFloor) return 0.0;
  return std::abs(a - b) / scale;
}

ConvergenceReport convergence_check(const ModelParams& params, const ModelOperators& ops,
                                    const InitialPair& init, ConvergenceQuantity quantity) {
  params.validate();
  const PairEvolution evo(ops, init);
  SeriesOptions opts;
  opts.with_globals = false;
  const TimeGrid coarse_grid = TimeGrid::make(params.dt, params.t_max);
  const TimeGrid fine_grid{params.dt / 2.0, params.t_max};
  const QuantifierSeries coarse = evaluate_grid(evo, coarse_grid, opts);
  const QuantifierSeries fine = evaluate_grid(evo, fine_grid, opts);

  ConvergenceReport rep;
  rep.dt = coarse_grid.dt;
  rep.dt_fine = fine_grid.dt;
  rep.quantity = quantity;
  for (QuantifierKind k : kAllKinds) {
    const auto a = coarse.dist_s(k);
    const auto b = fine.dist_s(k);
    double dev = 0.0;
    double va = 0.0;
    double vb = 0.0;
    if (quantity == ConvergenceQuantity::BlpMeasure) {
      va = blp_measure(a);
      vb = blp_measure(b);
      dev = relative_deviation(va, vb);
    } else {
      // Common times: every other fine point.
      double scale = 0.0;
      double diff = 0.0;
      for (std::size_t i = 0; i < a.size() && 2 * i < b.size(); ++i) {
        scale = std::max({scale, std::abs(a[i]), std::abs(b[2 * i])});
        diff = std::max(diff, std::abs(a[i] - b[2 * i]));
      }
      dev = scale < kConvergenceFloor ? 0.0 : diff / scale;
    }
    if (k == QuantifierKind::TraceDistance) {
      rep.coarse.trace_distance = va;
      rep.fine.trace_distance = vb;
      rep.deviation.trace_distance = dev;
    } else {
      rep.coarse.sqrt_jsd = va;
      rep.fine.sqrt_jsd = vb;
      rep.deviation.sqrt_jsd = dev;
    }
  }
  return rep;
}

ConvergenceReport run_convergence(const RunConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ensure_directory(config.output_dir);
  const ModelOperators ops = build_operators(config.model);
  const InitialPair init = InitialPair::coherent(config.model, ops);
  const ConvergenceReport blp = convergence_check(config.model, ops, init);
  const ConvergenceReport full =
      convergence_check(config.model, ops, init, ConvergenceQuantity::FullSeries);
  json j = {{"dt", blp.dt},
            {"dt_fine", blp.dt_fine},
            {"N",
             {{"D", {{"coarse", blp.coarse.trace_distance},
                     {"fine", blp.fine.trace_distance},
                     {"relative_deviation", blp.deviation.trace_distance}}},
              {"sqrtJ", {{"coarse", blp.coarse.sqrt_jsd},
                         {"fine", blp.fine.sqrt_jsd},
                         {"relative_deviation", blp.deviation.sqrt_jsd}}}}},
            {"series",
             {{"D", {{"relative_deviation", full.deviation.trace_distance}}},
              {"sqrtJ", {{"relative_deviation", full.deviation.sqrt_jsd}}}}},
            {"deviation_floor", kConvergenceFloor}};
  const fs::path path = config.output_dir / "convergence.json";
  write_json(path, j);
  write_json(config.output_dir / "manifest.json",
             manifest(config, config.model, seconds_since(t0),
                      {path, config.output_dir / "manifest.json"}));
  return blp;
}

namespace {

void write_wavepacket_csv(const fs::path& path, const WavepacketSeries& w) {
  auto os = open_output(path);
  os << kWavepacketHeader << '\n';
  for (std::size_t i = 0; i < w.times.size(); ++i)
    for (std::size_t k = 0; k < w.q.size(); ++k)
      os << format_double(w.times[i]) << ',' << format_double(w.q[k]) << ','
         << format_double(w.density[i](static_cast<Index>(k))) << '\n';
  finish(os, path);
}

}  // namespace

WavepacketOutcome run_wavepacket(const RunConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ensure_directory(config.output_dir);
  ModelParams m = config.model;
  m.gamma = config.wavepacket.gamma;
  m.temp = config.wavepacket.temp;
  const ModelOperators ops = build_operators(m);
  const InitialPair init = InitialPair::coherent(m, ops);
  const auto q = config.wavepacket.q_grid();
  const auto times = config.wavepacket.times();
  WavepacketOutcome out{free_wavepacket(m, ops, init, q, times),
                        damped_wavepacket(m, ops, init, q, times)};
  const fs::path free_csv = config.output_dir / "wavepacket_free.csv";
  const fs::path damped_csv = config.output_dir / "wavepacket_damped.csv";
  write_wavepacket_csv(free_csv, out.free);
  write_wavepacket_csv(damped_csv, out.damped);
  write_json(config.output_dir / "manifest.json",
             manifest(config, m, seconds_since(t0),
                      {free_csv, damped_csv, config.output_dir / "manifest.json"}));
  return out;
}

}  // namespace acl

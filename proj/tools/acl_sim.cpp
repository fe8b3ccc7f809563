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

// Command-line front end. Exit codes: 0 success, 1 invalid config,
// 2 numerical abort, 3 partial sweep failure, 4 output error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "acl/runner.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kBadConfig = 1,
  kNumerical = 2,
  kPartialSweep = 3,
  kOutput = 4,
};

struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<int> n_sys;
  std::optional<int> n_env;
  std::optional<double> omega_s;
  std::optional<double> gamma;
  std::optional<double> temp;
  std::optional<double> alpha;
  std::optional<double> dt;
  std::optional<double> t_max;
  std::optional<unsigned> workers;
  bool no_globals = false;
};

template <typename T, typename U>
void apply(const std::optional<T>& v, U& target) {
  if (v) target = static_cast<U>(*v);
}

acl::RunConfig resolve(const std::string& config_path, const Overrides& o) {
  acl::RunConfig c = config_path.empty() ? acl::RunConfig{} : acl::load_config(config_path);
  if (o.out) c.output_dir = *o.out;
  if (o.mode) c.mode = acl::parse_run_mode(*o.mode);
  apply(o.seed, c.model.seed);
  apply(o.n_sys, c.model.n_sys);
  apply(o.n_env, c.model.n_env);
  apply(o.omega_s, c.model.omega_s);
  apply(o.gamma, c.model.gamma);
  apply(o.temp, c.model.temp);
  apply(o.alpha, c.model.alpha);
  apply(o.dt, c.model.dt);
  apply(o.t_max, c.model.t_max);
  apply(o.workers, c.workers);
  if (o.no_globals) c.emit_globals_derived = false;
  c.validate();
  return c;
}

int dispatch(const acl::RunConfig& c) {
  switch (c.mode) {
    case acl::RunMode::Single: {
      const auto r = acl::run_single(c);
      std::cout << "N_D = " << acl::format_double(r.summary.nm_value.trace_distance)
                << "  N_sqrtJ = " << acl::format_double(r.summary.nm_value.sqrt_jsd) << '\n';
      return kOk;
    }
    case acl::RunMode::Sweep: {
      const auto r = acl::run_sweep(c);
      for (const auto& p : r.points)
        if (!p.ok) std::cerr << "point " << p.directory << " failed: " << p.error << '\n';
      return r.partial_failure() ? kPartialSweep : kOk;
    }
    case acl::RunMode::Convergence: {
      const auto r = acl::run_convergence(c);
      std::cout << "relative change of N under dt/2: D " << r.deviation.trace_distance
                << ", sqrtJ " << r.deviation.sqrt_jsd << '\n';
      return kOk;
    }
    case acl::RunMode::Wavepacket:
      acl::run_wavepacket(c);
      return kOk;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adapted Caldeira-Leggett simulator: information backflow in a finite random bath"};
  std::string config_path;
  Overrides o;
  const acl::ModelParams d;

  app.add_option("--config", config_path, "JSON config; keys mirror the model and run fields")
      ->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "output directory (default: out)");
  app.add_option("--seed", o.seed, "GUE seed (default: " + std::to_string(d.seed) + ")");
  app.add_option("--mode", o.mode, "single | sweep | convergence | wavepacket (default: single)")
      ->check(CLI::IsMember({"single", "sweep", "convergence", "wavepacket"}));
  app.add_option("--n-sys", o.n_sys, "system Fock cutoff (default: 16)");
  app.add_option("--n-env", o.n_env, "environment dimension (default: 64)");
  app.add_option("--omega", o.omega_s, "oscillator frequency (default: 1)");
  app.add_option("--gamma", o.gamma, "coupling strength (default: 0.32)");
  app.add_option("--temp", o.temp, "bath temperature (default: 1)");
  app.add_option("--alpha", o.alpha, "coherent displacement of the +/- pair (default: 1)");
  app.add_option("--dt", o.dt, "time step (default: 0.05)");
  app.add_option("--t-max", o.t_max, "final time (default: 30)");
  app.add_option("--workers", o.workers, "sweep worker threads, 0 = all cores (default: 0)");
  app.add_flag("--no-globals", o.no_globals,
               "skip correlation, bound and I_ext columns (written as nan)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kBadConfig;
  }

  acl::RunConfig config;
  try {
    config = resolve(config_path, o);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kBadConfig;
  }

  try {
    return dispatch(config);
  } catch (const acl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kBadConfig;
  } catch (const acl::OutputError& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return kOutput;
  } catch (const acl::InvariantViolation& e) {
    std::cerr << "numerical abort at step " << e.step() << ": " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return kNumerical;
  }
}

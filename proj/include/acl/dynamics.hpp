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

// Exact unitary evolution of two system-environment initial conditions
//
//   rho_SE^(i)(0) = |psi_i><psi_i| (x) rho_E(0),   i = 1, 2,
//
// driven by one diagonalization of the total Hamiltonian. Two propagation
// paths are provided:
//
//  * DensityMatrix: rho(t) = V (rho~ o P(t)) V^dagger on the full d x d
//    density matrix, P_jk = exp(-i(lambda_j - lambda_k)t).
//  * PureBranches: rho_E(0) is split into its eigenvector mixture
//    sum_k p_k |e_k><e_k| and each |psi_i> (x) |e_k> is evolved as a vector.
//    The global state is carried as a factor F with rho = F F^dagger, where
//    column k of F is sqrt(p_k) U(t)|psi_i, e_k>.
//
// The two agree to round-off; the branch path is what long runs use.

#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "acl/linalg.hpp"
#include "acl/model.hpp"

namespace acl {

/// Trace drift beyond this aborts a run. Smaller drift is left alone.
inline constexpr double kTraceDriftAbort = 1e-8;

class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// t_k = k dt for k = 0..count()-1, count() = floor(t_max/dt) + 1. The floor
/// absorbs a relative 1e-9 of representation error, so 30/0.05 gives 601.
struct TimeGrid {
  double dt = 0.05;
  double t_max = 30.0;

  static TimeGrid make(double dt, double t_max);
  std::size_t count() const;
  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
};

/// Global density matrix held as a dense matrix, a factor F (rho = F F^dagger),
/// or both.
class GlobalState {
 public:
  static GlobalState from_dense(DensityMatrix rho);
  static GlobalState from_factor(ComplexMatrix factor);
  static GlobalState from_both(DensityMatrix rho, ComplexMatrix factor);

  bool has_factor() const { return factor_.has_value(); }
  const ComplexMatrix& factor() const { return *factor_; }
  Index dim() const;
  double trace() const;
  /// Materializes F F^dagger when only the factor is held.
  DensityMatrix dense() const;

 private:
  std::optional<ComplexMatrix> factor_;
  std::optional<DensityMatrix> dense_;
};

struct BranchState {
  GlobalState global;
  DensityMatrix system;
  DensityMatrix environment;
};

struct StepSnapshot {
  double t = 0.0;
  std::size_t step = 0;
  std::array<BranchState, 2> branch;
};

struct InitialPair {
  ComplexVector psi_1;
  ComplexVector psi_2;
  ThermalEnsemble env;  // eigen-mixture of rho_e0
  DensityMatrix rho_e0;

  /// Splits rho_e0 into its eigen-mixture; negative round-off weights are dropped.
  static InitialPair from_states(ComplexVector psi_1, ComplexVector psi_2, DensityMatrix rho_e0);
  /// |alpha>, |-alpha> truncated to n_sys, environment in the Gibbs state of h_e.
  static InitialPair coherent(const ModelParams& params, const ModelOperators& ops);
};

enum class Propagation { DensityMatrix, PureBranches };

class PairEvolution {
 public:
  PairEvolution(const ModelOperators& ops, const InitialPair& init,
                Propagation method = Propagation::PureBranches);

  /// t == 0 returns the exact product initial states.
  StepSnapshot at(double t, std::size_t step = 0) const;

  /// Snapshots for every grid time, in order. Throws InvariantViolation with
  /// the step index if the global trace drifts beyond kTraceDriftAbort.
  void stream(const TimeGrid& grid, const std::function<void(const StepSnapshot&)>& sink) const;

  const SpectralDecomposition& spectrum() const { return spectrum_; }
  BipartiteShape shape() const { return shape_; }
  Propagation method() const { return method_; }

 private:
  BranchState initial_branch(int i) const;

  BipartiteShape shape_;
  Propagation method_;
  SpectralDecomposition spectrum_;
  std::array<ComplexVector, 2> psi_;
  DensityMatrix rho_e0_;
  ComplexMatrix env_factor_;                 // rho_e0 = G G^dagger
  std::array<ComplexMatrix, 2> eig_state_;   // V^dagger F0 or V^dagger rho0 V
};

/// Convenience wrapper: builds a PairEvolution and streams the grid.
void evolve_pair(const ModelParams& params, const ModelOperators& ops, const InitialPair& init,
                 const std::function<void(const StepSnapshot&)>& sink,
                 Propagation method = Propagation::PureBranches);

/// tr_E and tr_S of F F^dagger without forming it.
ComplexMatrix reduce_factor(const ComplexMatrix& factor, BipartiteShape shape, Subsystem keep);

struct WavepacketSeries {
  std::vector<double> times;
  std::vector<double> q;
  std::vector<RealVector> density;  // one per time, over q
  std::vector<double> mean_q;       // <q_S>(t)
};

/// |alpha> evolved under H_S alone.
WavepacketSeries free_wavepacket(const ModelParams& params, const ModelOperators& ops,
                                 const InitialPair& init, std::span<const double> q_grid,
                                 std::span<const double> times);

/// Position density of rho_S^(1)(t) under the full coupled model.
WavepacketSeries damped_wavepacket(const ModelParams& params, const ModelOperators& ops,
                                   const InitialPair& init, std::span<const double> q_grid,
                                   std::span<const double> times);

}  // namespace acl

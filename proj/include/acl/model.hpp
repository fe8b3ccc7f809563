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

// Operators and states of the adapted Caldeira-Leggett model: a truncated
// harmonic oscillator coupled through its position to a random-matrix
// environment,
//
//   H = H_S (x) 1_E + 1_S (x) H_E + gamma q_S (x) X_E.
//
// Units: hbar = k_B = omega_S = 1 unless omega_s is set explicitly.

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

#include "acl/linalg.hpp"

namespace acl {

struct ModelParams {
  int n_sys = 16;
  int n_env = 64;
  double omega_s = 1.0;
  double gamma = 0.32;
  double temp = 1.0;
  double alpha = 1.0;
  std::uint64_t seed = 42;
  double dt = 0.05;
  double t_max = 30.0;

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;
  BipartiteShape shape() const { return {n_sys, n_env}; }
};

/// Standard normal deviates from mt19937_64 via Box-Muller on 53-bit
/// uniforms. Unlike std::normal_distribution the transform is fixed here, so
/// a seed yields the same stream on every conforming platform.
class GaussianStream {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64/box-muller-53bit";

  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // [0, 1)
  double normal();

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

struct ModelOperators {
  ComplexMatrix a_s;
  HermitianOperator q_s;
  HermitianOperator h_s;
  HermitianOperator h_e;
  HermitianOperator x_e;
  HermitianOperator h_total;

  BipartiteShape shape() const { return {q_s.dim(), h_e.dim()}; }
};

/// <n|a|m> = sqrt(m) delta_{n,m-1} on Fock labels 0..n_sys-1.
ComplexMatrix truncated_annihilation(int n_sys);
/// (a + a^dagger)/sqrt(2)
HermitianOperator position_operator(const ComplexMatrix& a);
/// omega (a^dagger a + 1/2)
HermitianOperator system_hamiltonian(const ComplexMatrix& a, double omega_s);

/// (G + G^dagger)/(2 sqrt(n)) with G_ij standard complex Gaussian, drawn
/// row-major as (re, im) pairs.
HermitianOperator sample_gue(int n, GaussianStream& rng);

/// Gibbs state as an explicit mixture of eigenvectors of h.
struct ThermalEnsemble {
  RealVector weights;      // sums to 1
  ComplexMatrix vectors;   // eigenvectors of h, columns
  DensityMatrix density() const;
};

/// T > 0: weights exp(-(lambda - lambda_min)/T)/Z. T = 0: uniform over the
/// ground eigenspace (eigenvalues within 1e-10 of lambda_min).
ThermalEnsemble thermal_ensemble(const HermitianOperator& h, double temp);
DensityMatrix gibbs_state(const HermitianOperator& h, double temp);

HermitianOperator total_hamiltonian(const HermitianOperator& h_s, const HermitianOperator& q_s,
                                    const HermitianOperator& h_e, const HermitianOperator& x_e,
                                    double gamma);
HermitianOperator total_hamiltonian(const ModelOperators& ops, double gamma);

/// Draws H_E then X_E from one stream seeded with params.seed.
ModelOperators build_operators(const ModelParams& params);

struct TruncatedCoherentState {
  ComplexVector amplitudes;  // unit norm
  /// |1 - exp(-|alpha|^2) sum_{n < n_sys} |alpha|^{2n}/n!|
  double deficit = 0.0;
};

TruncatedCoherentState truncated_coherent_state(Complex alpha, int n_sys);

/// Oscillator eigenfunctions phi_n(q), n = 0..n_max-1, by the normalized
/// three-term recurrence. Row n, column = grid point.
Eigen::MatrixXd hermite_functions(int n_max, std::span<const double> q_grid);

/// |sum_n c_n phi_n(q)|^2
RealVector position_density(const ComplexVector& state, std::span<const double> q_grid);
/// sum_{nm} rho_nm phi_n(q) phi_m(q)
RealVector position_density(const DensityMatrix& rho, std::span<const double> q_grid);

}  // namespace acl

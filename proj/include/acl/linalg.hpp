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

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace acl {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Eigensolver failed to converge.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, Index dim, Index iterations)
      : std::runtime_error(what), dim_(dim), iterations_(iterations) {}
  Index dim() const { return dim_; }
  Index iterations() const { return iterations_; }

 private:
  Index dim_;
  Index iterations_;
};

/// A matrix function was not finite on some eigenvalue.
class DomainError : public std::domain_error {
 public:
  DomainError(const std::string& what, double eigenvalue)
      : std::domain_error(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const { return eigenvalue_; }

 private:
  double eigenvalue_;
};

inline constexpr double kHermiticityTol = 1e-12;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPositivityTol = 1e-10;

double max_abs(const ComplexMatrix& m);

/// Square complex matrix with ||A - A^dagger||_max <= 1e-12 * max(1, ||A||_max).
class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(ComplexMatrix m);

  /// Returns (m + m^dagger)/2 without checking; for operators known to be
  /// Hermitian up to accumulated round-off.
  static HermitianOperator symmetrized(const ComplexMatrix& m);

  const ComplexMatrix& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }

 private:
  struct Unchecked {};
  HermitianOperator(ComplexMatrix m, Unchecked) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

/// Hermitian, unit-trace operator. Positivity costs an eigensolve and is
/// checked on request only (see require_positive).
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(ComplexMatrix m, double trace_tol = kTraceTol);
  explicit DensityMatrix(HermitianOperator h, double trace_tol = kTraceTol);

  static DensityMatrix pure(const ComplexVector& psi);

  const ComplexMatrix& matrix() const { return h_.matrix(); }
  const HermitianOperator& op() const { return h_; }
  Index dim() const { return h_.dim(); }

  /// Throws std::invalid_argument if the smallest eigenvalue is below -tol.
  void require_positive(double tol = kPositivityTol) const;

 private:
  HermitianOperator h_;
};

struct SpectralDecomposition {
  RealVector eigenvalues;      // ascending
  ComplexMatrix eigenvectors;  // columns
  Index dim() const { return eigenvalues.size(); }
};

/// Global index i = i_sys * env + i_env.
struct BipartiteShape {
  Index sys = 0;
  Index env = 0;
  Index total() const { return sys * env; }
};

enum class Subsystem { System, Environment };

/// Symmetrizes, then diagonalizes. Throws NumericalError on non-convergence.
SpectralDecomposition eig_hermitian(const HermitianOperator& a);
RealVector eigvals_hermitian(const HermitianOperator& a);
/// Eigenvalues of (m + m^dagger)/2 for a matrix that is Hermitian up to
/// round-off; skips the HermitianOperator check on hot paths.
RealVector eigvals_symmetrized(const ComplexMatrix& m);

/// V diag(f(lambda)) V^dagger.
ComplexMatrix matrix_function(const SpectralDecomposition& s,
                              const std::function<Complex(double)>& f);

/// U(t) = V exp(-i Lambda t) V^dagger.
ComplexMatrix propagator(const SpectralDecomposition& s, double t);

/// Phases exp(-i lambda_j t).
ComplexVector eigen_phases(const RealVector& eigenvalues, double t);

/// V (rho_eig o P(t)) V^dagger with P_jk = exp(-i(lambda_j - lambda_k)t);
/// rho_eig is the initial state expressed in the eigenbasis of H.
DensityMatrix evolve_density(const SpectralDecomposition& s, const ComplexMatrix& rho_eig,
                             double t, double trace_tol = kTraceTol);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix partial_trace(const ComplexMatrix& rho, BipartiteShape shape, Subsystem keep);
DensityMatrix partial_trace(const DensityMatrix& rho, BipartiteShape shape, Subsystem keep);

}  // namespace acl

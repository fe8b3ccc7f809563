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

#include "acl/linalg.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace acl {

namespace {

// Eigen's tridiagonal QR gives up after 30 sweeps per dimension.
constexpr Index kEigenIterationsPerDim = 30;

void require_square(const ComplexMatrix& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << who << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw std::invalid_argument(os.str());
  }
}

template <int Options>
Eigen::SelfAdjointEigenSolver<ComplexMatrix> solve(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Options);
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eig_hermitian: no convergence for dimension " << m.rows() << " within "
       << kEigenIterationsPerDim * m.rows() << " iterations";
    throw NumericalError(os.str(), m.rows(), kEigenIterationsPerDim * m.rows());
  }
  return es;
}

}  // namespace

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

HermitianOperator::HermitianOperator(ComplexMatrix m) : m_(std::move(m)) {
  require_square(m_, "HermitianOperator");
  if (!m_.allFinite()) throw std::invalid_argument("HermitianOperator: non-finite entries");
  const double asym = max_abs(m_ - m_.adjoint());
  const double scale = std::max(1.0, max_abs(m_));
  if (asym > kHermiticityTol * scale) {
    std::ostringstream os;
    os << "HermitianOperator: ||A - A^dagger||_max = " << asym << " exceeds tolerance";
    throw std::invalid_argument(os.str());
  }
}

HermitianOperator HermitianOperator::symmetrized(const ComplexMatrix& m) {
  require_square(m, "HermitianOperator::symmetrized");
  ComplexMatrix h = 0.5 * (m + m.adjoint());
  return HermitianOperator(std::move(h), Unchecked{});
}

DensityMatrix::DensityMatrix(ComplexMatrix m, double trace_tol)
    : DensityMatrix(HermitianOperator(std::move(m)), trace_tol) {}

DensityMatrix::DensityMatrix(HermitianOperator h, double trace_tol) : h_(std::move(h)) {
  const Complex tr = h_.matrix().trace();
  if (std::abs(tr - Complex(1.0, 0.0)) > trace_tol) {
    std::ostringstream os;
    os << "DensityMatrix: trace " << tr << " deviates from 1 by more than " << trace_tol;
    throw std::invalid_argument(os.str());
  }
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi) {
  return DensityMatrix(HermitianOperator::symmetrized(psi * psi.adjoint()));
}

void DensityMatrix::require_positive(double tol) const {
  const RealVector ev = eigvals_hermitian(h_);
  if (ev(0) < -tol) {
    std::ostringstream os;
    os << "DensityMatrix: eigenvalue " << ev(0) << " below -" << tol;
    throw std::invalid_argument(os.str());
  }
}

SpectralDecomposition eig_hermitian(const HermitianOperator& a) {
  const ComplexMatrix sym = 0.5 * (a.matrix() + a.matrix().adjoint());
  auto es = solve<Eigen::ComputeEigenvectors>(sym);
  return {es.eigenvalues(), es.eigenvectors()};
}

RealVector eigvals_hermitian(const HermitianOperator& a) {
  return eigvals_symmetrized(a.matrix());
}

RealVector eigvals_symmetrized(const ComplexMatrix& m) {
  require_square(m, "eigvals_hermitian");
  const ComplexMatrix sym = 0.5 * (m + m.adjoint());
  return solve<Eigen::EigenvaluesOnly>(sym).eigenvalues();
}

ComplexMatrix matrix_function(const SpectralDecomposition& s,
                              const std::function<Complex(double)>& f) {
  ComplexVector fl(s.dim());
  for (Index i = 0; i < s.dim(); ++i) {
    const double lambda = s.eigenvalues(i);
    const Complex v = f(lambda);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      std::ostringstream os;
      os << "matrix_function: f is not finite at eigenvalue " << lambda;
      throw DomainError(os.str(), lambda);
    }
    fl(i) = v;
  }
  return s.eigenvectors * fl.asDiagonal() * s.eigenvectors.adjoint();
}

ComplexVector eigen_phases(const RealVector& eigenvalues, double t) {
  ComplexVector p(eigenvalues.size());
  for (Index i = 0; i < eigenvalues.size(); ++i) p(i) = std::polar(1.0, -eigenvalues(i) * t);
  return p;
}

ComplexMatrix propagator(const SpectralDecomposition& s, double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("propagator: time must be finite");
  return s.eigenvectors * eigen_phases(s.eigenvalues, t).asDiagonal() * s.eigenvectors.adjoint();
}

DensityMatrix evolve_density(const SpectralDecomposition& s, const ComplexMatrix& rho_eig,
                             double t, double trace_tol) {
  if (rho_eig.rows() != s.dim() || rho_eig.cols() != s.dim()) {
    std::ostringstream os;
    os << "evolve_density: state is " << rho_eig.rows() << "x" << rho_eig.cols()
       << ", Hamiltonian has dimension " << s.dim();
    throw std::invalid_argument(os.str());
  }
  const ComplexVector p = eigen_phases(s.eigenvalues, t);
  // (rho o P)_jk = p_j rho_jk conj(p_k)
  const ComplexMatrix phased = p.asDiagonal() * rho_eig * p.conjugate().asDiagonal();
  const ComplexMatrix tmp = s.eigenvectors * phased;
  return DensityMatrix(HermitianOperator::symmetrized(tmp * s.eigenvectors.adjoint()), trace_tol);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& rho, BipartiteShape shape, Subsystem keep) {
  if (shape.sys <= 0 || shape.env <= 0 || rho.rows() != shape.total() ||
      rho.cols() != shape.total()) {
    std::ostringstream os;
    os << "partial_trace: matrix " << rho.rows() << "x" << rho.cols()
       << " does not factor as " << shape.sys << "x" << shape.env;
    throw std::invalid_argument(os.str());
  }
  const Index ds = shape.sys;
  const Index de = shape.env;
  if (keep == Subsystem::System) {
    ComplexMatrix out(ds, ds);
    for (Index a = 0; a < ds; ++a)
      for (Index b = 0; b < ds; ++b) out(a, b) = rho.block(a * de, b * de, de, de).trace();
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(de, de);
  for (Index a = 0; a < ds; ++a) out += rho.block(a * de, a * de, de, de);
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, BipartiteShape shape, Subsystem keep) {
  return DensityMatrix(HermitianOperator::symmetrized(partial_trace(rho.matrix(), shape, keep)));
}

}  // namespace acl

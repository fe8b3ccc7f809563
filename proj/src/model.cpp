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

#include "acl/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace acl {

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw std::invalid_argument("ModelParams." + field + ": " + why);
}

}  // namespace

void ModelParams::validate() const {
  if (n_sys < 2) invalid("n_sys", "must be >= 2");
  if (n_env < 2) invalid("n_env", "must be >= 2");
  if (!(omega_s > 0) || !std::isfinite(omega_s)) invalid("omega_s", "must be positive");
  if (!(gamma >= 0) || !std::isfinite(gamma)) invalid("gamma", "must be >= 0");
  if (!(temp >= 0) || !std::isfinite(temp)) invalid("temp", "must be >= 0");
  if (!std::isfinite(alpha)) invalid("alpha", "must be finite");
  if (!(dt > 0) || !std::isfinite(dt)) invalid("dt", "must be > 0");
  if (!(t_max >= dt) || !std::isfinite(t_max)) invalid("t_max", "must be >= dt");
}

double GaussianStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double GaussianStream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

ComplexMatrix truncated_annihilation(int n_sys) {
  if (n_sys < 2) throw std::invalid_argument("truncated_annihilation: n_sys must be >= 2");
  ComplexMatrix a = ComplexMatrix::Zero(n_sys, n_sys);
  for (int m = 1; m < n_sys; ++m) a(m - 1, m) = std::sqrt(static_cast<double>(m));
  return a;
}

HermitianOperator position_operator(const ComplexMatrix& a) {
  return HermitianOperator((a + a.adjoint()) / std::numbers::sqrt2);
}

HermitianOperator system_hamiltonian(const ComplexMatrix& a, double omega_s) {
  const Index n = a.rows();
  ComplexMatrix h = omega_s * (a.adjoint() * a);
  h += 0.5 * omega_s * ComplexMatrix::Identity(n, n);
  return HermitianOperator(std::move(h));
}

HermitianOperator sample_gue(int n, GaussianStream& rng) {
  if (n < 1) throw std::invalid_argument("sample_gue: dimension must be positive");
  const double component = 1.0 / std::numbers::sqrt2;  // E|G_ij|^2 = 1
  ComplexMatrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = Complex(component * re, component * im);
    }
  ComplexMatrix a = (g + g.adjoint()) * (0.5 / std::sqrt(static_cast<double>(n)));
  // Diagonal of G + G^dagger is exactly real, but keep it literally so.
  for (int i = 0; i < n; ++i) a(i, i) = a(i, i).real();
  return HermitianOperator(std::move(a));
}

DensityMatrix ThermalEnsemble::density() const {
  return DensityMatrix(HermitianOperator::symmetrized(
      vectors * weights.cast<Complex>().asDiagonal() * vectors.adjoint()));
}

ThermalEnsemble thermal_ensemble(const HermitianOperator& h, double temp) {
  if (!(temp >= 0) || std::isnan(temp))
    throw std::invalid_argument("gibbs_state: temperature must be >= 0");
  SpectralDecomposition s = eig_hermitian(h);
  const double lmin = s.eigenvalues(0);
  RealVector w(s.dim());
  if (temp == 0.0) {
    for (Index i = 0; i < s.dim(); ++i) w(i) = (s.eigenvalues(i) - lmin <= 1e-10) ? 1.0 : 0.0;
  } else {
    for (Index i = 0; i < s.dim(); ++i) w(i) = std::exp(-(s.eigenvalues(i) - lmin) / temp);
  }
  w /= w.sum();
  return {std::move(w), std::move(s.eigenvectors)};
}

DensityMatrix gibbs_state(const HermitianOperator& h, double temp) {
  return thermal_ensemble(h, temp).density();
}

HermitianOperator total_hamiltonian(const HermitianOperator& h_s, const HermitianOperator& q_s,
                                    const HermitianOperator& h_e, const HermitianOperator& x_e,
                                    double gamma) {
  if (h_s.dim() != q_s.dim() || h_e.dim() != x_e.dim()) {
    std::ostringstream os;
    os << "total_hamiltonian: H_S is " << h_s.dim() << ", q_S is " << q_s.dim() << ", H_E is "
       << h_e.dim() << ", X_E is " << x_e.dim();
    throw std::invalid_argument(os.str());
  }
  const ComplexMatrix id_s = ComplexMatrix::Identity(h_s.dim(), h_s.dim());
  const ComplexMatrix id_e = ComplexMatrix::Identity(h_e.dim(), h_e.dim());
  ComplexMatrix h = kron(h_s.matrix(), id_e) + kron(id_s, h_e.matrix());
  if (gamma != 0.0) h += gamma * kron(q_s.matrix(), x_e.matrix());
  return HermitianOperator(std::move(h));
}

HermitianOperator total_hamiltonian(const ModelOperators& ops, double gamma) {
  return total_hamiltonian(ops.h_s, ops.q_s, ops.h_e, ops.x_e, gamma);
}

ModelOperators build_operators(const ModelParams& params) {
  params.validate();
  ModelOperators ops;
  ops.a_s = truncated_annihilation(params.n_sys);
  ops.q_s = position_operator(ops.a_s);
  ops.h_s = system_hamiltonian(ops.a_s, params.omega_s);
  GaussianStream rng(params.seed);
  ops.h_e = sample_gue(params.n_env, rng);
  ops.x_e = sample_gue(params.n_env, rng);
  ops.h_total = total_hamiltonian(ops, params.gamma);
  return ops;
}

TruncatedCoherentState truncated_coherent_state(Complex alpha, int n_sys) {
  if (n_sys < 1) throw std::invalid_argument("truncated_coherent_state: n_sys must be >= 1");
  ComplexVector c(n_sys);
  c(0) = 1.0;
  for (int n = 1; n < n_sys; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  const double partial = c.squaredNorm();  // sum |alpha|^{2n}/n!
  TruncatedCoherentState out;
  out.deficit = std::abs(1.0 - std::exp(-std::norm(alpha)) * partial);
  out.amplitudes = c / std::sqrt(partial);
  return out;
}

Eigen::MatrixXd hermite_functions(int n_max, std::span<const double> q_grid) {
  const Index nq = static_cast<Index>(q_grid.size());
  Eigen::MatrixXd phi(n_max, nq);
  const double norm0 = std::pow(std::numbers::pi, -0.25);
  for (Index k = 0; k < nq; ++k) {
    const double q = q_grid[static_cast<std::size_t>(k)];
    phi(0, k) = norm0 * std::exp(-0.5 * q * q);
    if (n_max > 1) phi(1, k) = std::numbers::sqrt2 * q * phi(0, k);
    for (int n = 1; n + 1 < n_max; ++n) {
      phi(n + 1, k) = std::sqrt(2.0 / (n + 1)) * q * phi(n, k) -
                      std::sqrt(static_cast<double>(n) / (n + 1)) * phi(n - 1, k);
    }
  }
  return phi;
}

RealVector position_density(const ComplexVector& state, std::span<const double> q_grid) {
  const Eigen::MatrixXd phi = hermite_functions(static_cast<int>(state.size()), q_grid);
  const ComplexVector amp = phi.cast<Complex>().transpose() * state;
  return amp.cwiseAbs2();
}

RealVector position_density(const DensityMatrix& rho, std::span<const double> q_grid) {
  const Eigen::MatrixXd phi = hermite_functions(static_cast<int>(rho.dim()), q_grid);
  const Eigen::MatrixXcd phic = phi.cast<Complex>();
  // p(q_k) = phi_k^T rho phi_k with real phi.
  const Eigen::MatrixXcd rp = rho.matrix() * phic;
  RealVector p(phi.cols());
  for (Index k = 0; k < phi.cols(); ++k) p(k) = (phic.col(k).transpose() * rp.col(k)).value().real();
  return p;
}

}  // namespace acl

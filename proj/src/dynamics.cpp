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

#include "acl/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace acl {

TimeGrid TimeGrid::make(double dt, double t_max) {
  if (!(dt > 0) || !std::isfinite(dt)) throw std::invalid_argument("TimeGrid: dt must be > 0");
  if (!(t_max >= dt) || !std::isfinite(t_max))
    throw std::invalid_argument("TimeGrid: t_max must be >= dt");
  return {dt, t_max};
}

std::size_t TimeGrid::count() const {
  return static_cast<std::size_t>(std::floor(t_max / dt * (1.0 + 1e-9))) + 1;
}

GlobalState GlobalState::from_dense(DensityMatrix rho) {
  GlobalState g;
  g.dense_ = std::move(rho);
  return g;
}

GlobalState GlobalState::from_factor(ComplexMatrix factor) {
  GlobalState g;
  g.factor_ = std::move(factor);
  return g;
}

GlobalState GlobalState::from_both(DensityMatrix rho, ComplexMatrix factor) {
  if (rho.dim() != factor.rows())
    throw std::invalid_argument("GlobalState: dense and factor dimensions differ");
  GlobalState g;
  g.dense_ = std::move(rho);
  g.factor_ = std::move(factor);
  return g;
}

Index GlobalState::dim() const { return dense_ ? dense_->dim() : factor_->rows(); }

double GlobalState::trace() const {
  return dense_ ? dense_->matrix().trace().real() : factor_->squaredNorm();
}

DensityMatrix GlobalState::dense() const {
  if (dense_) return *dense_;
  return DensityMatrix(HermitianOperator::symmetrized(*factor_ * factor_->adjoint()),
                       kTraceDriftAbort);
}

ComplexMatrix reduce_factor(const ComplexMatrix& factor, BipartiteShape shape, Subsystem keep) {
  if (factor.rows() != shape.total())
    throw std::invalid_argument("reduce_factor: factor rows do not match the bipartite shape");
  const Index ds = shape.sys;
  const Index de = shape.env;
  if (keep == Subsystem::Environment) {
    // Column k reshaped to de x ds holds M_k(e, a) = psi_k[a*de + e]; the
    // blocks sit side by side in memory, so rho_E = [M_1 .. M_r][M_1 .. M_r]^dagger.
    Eigen::Map<const ComplexMatrix> blocks(factor.data(), de, ds * factor.cols());
    return blocks * blocks.adjoint();
  }
  ComplexMatrix out = ComplexMatrix::Zero(ds, ds);
  for (Index k = 0; k < factor.cols(); ++k) {
    Eigen::Map<const ComplexMatrix> m(factor.col(k).data(), de, ds);
    out.noalias() += m.transpose() * m.conjugate();
  }
  return out;
}

InitialPair InitialPair::from_states(ComplexVector psi_1, ComplexVector psi_2,
                                     DensityMatrix rho_e0) {
  if (psi_1.size() != psi_2.size())
    throw std::invalid_argument("InitialPair: system vectors differ in dimension");
  for (const auto* psi : {&psi_1, &psi_2})
    if (std::abs(psi->norm() - 1.0) > 1e-12)
      throw std::invalid_argument("InitialPair: system vectors must have unit norm");
  SpectralDecomposition s = eig_hermitian(rho_e0.op());
  RealVector w = s.eigenvalues.cwiseMax(0.0);
  w /= w.sum();
  InitialPair p{std::move(psi_1), std::move(psi_2), ThermalEnsemble{std::move(w), std::move(s.eigenvectors)},
                std::move(rho_e0)};
  return p;
}

InitialPair InitialPair::coherent(const ModelParams& params, const ModelOperators& ops) {
  ThermalEnsemble env = thermal_ensemble(ops.h_e, params.temp);
  DensityMatrix rho_e0 = env.density();
  return InitialPair{truncated_coherent_state(params.alpha, params.n_sys).amplitudes,
                     truncated_coherent_state(-params.alpha, params.n_sys).amplitudes,
                     std::move(env), std::move(rho_e0)};
}

PairEvolution::PairEvolution(const ModelOperators& ops, const InitialPair& init,
                             Propagation method)
    : shape_(ops.shape()), method_(method), psi_{init.psi_1, init.psi_2}, rho_e0_(init.rho_e0) {
  if (init.psi_1.size() != shape_.sys || init.rho_e0.dim() != shape_.env ||
      init.env.vectors.rows() != shape_.env)
    throw std::invalid_argument("PairEvolution: initial states do not match the model dimensions");
  spectrum_ = eig_hermitian(ops.h_total);

  // Zero-weight branches (e.g. excited levels at T = 0) carry nothing.
  std::vector<Index> kept;
  for (Index k = 0; k < init.env.weights.size(); ++k)
    if (init.env.weights(k) > 0.0) kept.push_back(k);
  env_factor_.resize(shape_.env, static_cast<Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j)
    env_factor_.col(static_cast<Index>(j)) =
        std::sqrt(init.env.weights(kept[j])) * init.env.vectors.col(kept[j]);

  const ComplexMatrix& v = spectrum_.eigenvectors;
  for (int i = 0; i < 2; ++i) {
    if (method_ == Propagation::PureBranches) {
      eig_state_[i] = v.adjoint() * kron(psi_[i], env_factor_);
    } else {
      const ComplexMatrix rho0 = kron(psi_[i] * psi_[i].adjoint(), rho_e0_.matrix());
      eig_state_[i] = v.adjoint() * rho0 * v;
    }
  }
}

BranchState PairEvolution::initial_branch(int i) const {
  const ComplexMatrix rho_s = psi_[i] * psi_[i].adjoint();
  DensityMatrix system(HermitianOperator::symmetrized(rho_s));
  DensityMatrix global(HermitianOperator::symmetrized(kron(system.matrix(), rho_e0_.matrix())));
  return BranchState{GlobalState::from_both(std::move(global), kron(psi_[i], env_factor_)),
                     std::move(system), rho_e0_};
}

StepSnapshot PairEvolution::at(double t, std::size_t step) const {
  StepSnapshot snap;
  snap.t = t;
  snap.step = step;
  if (t == 0.0) {
    try {
      for (int i = 0; i < 2; ++i) snap.branch[i] = initial_branch(i);
    } catch (const std::invalid_argument& e) {
      throw InvariantViolation(std::string(e.what()) + " at step " + std::to_string(step), step);
    }
    return snap;
  }
  const ComplexVector phases = eigen_phases(spectrum_.eigenvalues, t);
  for (int i = 0; i < 2; ++i) {
    if (method_ == Propagation::PureBranches) {
      ComplexMatrix f = spectrum_.eigenvectors * (phases.asDiagonal() * eig_state_[i]);
      const double tr = f.squaredNorm();
      if (std::abs(tr - 1.0) > kTraceDriftAbort) {
        std::ostringstream os;
        os << "global trace drifted to " << tr << " at step " << step << " (t = " << t << ")";
        throw InvariantViolation(os.str(), step);
      }
      DensityMatrix rs(HermitianOperator::symmetrized(reduce_factor(f, shape_, Subsystem::System)),
                       kTraceDriftAbort);
      DensityMatrix re(
          HermitianOperator::symmetrized(reduce_factor(f, shape_, Subsystem::Environment)),
          kTraceDriftAbort);
      snap.branch[i] = BranchState{GlobalState::from_factor(std::move(f)), std::move(rs), std::move(re)};
    } else {
      DensityMatrix rho = [&] {
        try {
          return evolve_density(spectrum_, eig_state_[i], t, kTraceDriftAbort);
        } catch (const std::invalid_argument& e) {
          throw InvariantViolation(std::string(e.what()) + " at step " + std::to_string(step), step);
        }
      }();
      DensityMatrix rs = partial_trace(rho, shape_, Subsystem::System);
      DensityMatrix re = partial_trace(rho, shape_, Subsystem::Environment);
      snap.branch[i] = BranchState{GlobalState::from_dense(std::move(rho)), std::move(rs), std::move(re)};
    }
  }
  return snap;
}

void PairEvolution::stream(const TimeGrid& grid,
                           const std::function<void(const StepSnapshot&)>& sink) const {
  const std::size_t n = grid.count();
  for (std::size_t k = 0; k < n; ++k) sink(at(grid.time(k), k));
}

void evolve_pair(const ModelParams& params, const ModelOperators& ops, const InitialPair& init,
                 const std::function<void(const StepSnapshot&)>& sink, Propagation method) {
  params.validate();
  PairEvolution evo(ops, init, method);
  evo.stream(TimeGrid::make(params.dt, params.t_max), sink);
}

namespace {

double mean_position(const ComplexMatrix& rho, const HermitianOperator& q) {
  return (rho * q.matrix()).trace().real();
}

}  // namespace

WavepacketSeries free_wavepacket(const ModelParams& params, const ModelOperators& ops,
                                 const InitialPair& init, std::span<const double> q_grid,
                                 std::span<const double> times) {
  params.validate();
  // H_S is diagonal in the Fock basis.
  const RealVector energies = ops.h_s.matrix().diagonal().real();
  WavepacketSeries out;
  out.q.assign(q_grid.begin(), q_grid.end());
  for (double t : times) {
    const ComplexVector psi = eigen_phases(energies, t).cwiseProduct(init.psi_1);
    // Same construction as the coupled run's initial state, so t = 0 agrees bitwise.
    const DensityMatrix rho(HermitianOperator::symmetrized(psi * psi.adjoint()));
    out.times.push_back(t);
    out.density.push_back(position_density(rho, q_grid));
    out.mean_q.push_back(mean_position(rho.matrix(), ops.q_s));
  }
  return out;
}

WavepacketSeries damped_wavepacket(const ModelParams& params, const ModelOperators& ops,
                                   const InitialPair& init, std::span<const double> q_grid,
                                   std::span<const double> times) {
  params.validate();
  PairEvolution evo(ops, init);
  WavepacketSeries out;
  out.q.assign(q_grid.begin(), q_grid.end());
  std::size_t step = 0;
  for (double t : times) {
    const StepSnapshot snap = evo.at(t, step++);
    const DensityMatrix& rho = snap.branch[0].system;
    out.times.push_back(t);
    out.density.push_back(position_density(rho, q_grid));
    out.mean_q.push_back(mean_position(rho.matrix(), ops.q_s));
  }
  return out;
}

}  // namespace acl

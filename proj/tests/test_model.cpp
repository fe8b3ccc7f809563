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

#include <cmath>
#include <numbers>
#include <vector>

#include "catch_amalgamated.hpp"

#include "acl/model.hpp"

using namespace acl;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Physicists' Hermite polynomial by the three-term recurrence.
double hermite(int n, double x) {
  double h0 = 1.0;
  if (n == 0) return h0;
  double h1 = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double h2 = 2.0 * x * h1 - 2.0 * k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

// Roots of H_n by sign-change scan plus bisection.
std::vector<double> hermite_roots(int n) {
  std::vector<double> roots;
  const double step = 1e-3;
  for (double x = -8.0; x < 8.0; x += step) {
    double lo = x;
    double hi = x + step;
    if (hermite(n, lo) * hermite(n, hi) > 0) continue;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (hermite(n, lo) * hermite(n, mid) <= 0 ? hi : lo) = mid;
    }
    roots.push_back(0.5 * (lo + hi));
  }
  return roots;
}

double trapezoid(const RealVector& f, double h) {
  double s = 0.5 * (f(0) + f(f.size() - 1));
  for (Index i = 1; i + 1 < f.size(); ++i) s += f(i);
  return s * h;
}

std::vector<double> uniform_grid(double lo, double hi, double h) {
  std::vector<double> q;
  for (int k = 0; lo + k * h <= hi + 1e-12; ++k) q.push_back(lo + k * h);
  return q;
}

}  // namespace

TEST_CASE("ladder commutator deviates only in the top level", "[model][oracle]") {
  for (int n : {2, 3, 8, 16}) {
    const ComplexMatrix a = truncated_annihilation(n);
    const ComplexMatrix comm = a * a.adjoint() - a.adjoint() * a;
    ComplexMatrix expected = ComplexMatrix::Identity(n, n);
    expected(n - 1, n - 1) -= static_cast<double>(n);
    CHECK(max_abs(comm - expected) <= 1e-12);
  }
}

TEST_CASE("truncated position spectrum equals Hermite roots", "[model][oracle]") {
  const int n = 16;
  const RealVector ev = eigvals_hermitian(position_operator(truncated_annihilation(n)));
  const auto roots = hermite_roots(n);
  REQUIRE(roots.size() == static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) CHECK_THAT(ev(i), WithinAbs(roots[static_cast<std::size_t>(i)], 1e-10));
}

TEST_CASE("system Hamiltonian is the shifted number operator", "[model]") {
  const HermitianOperator h = system_hamiltonian(truncated_annihilation(5), 1.5);
  for (int k = 0; k < 5; ++k) CHECK_THAT(h.matrix()(k, k).real(), WithinAbs(1.5 * (k + 0.5), 1e-15));
  CHECK(max_abs(h.matrix() - ComplexMatrix(h.matrix().diagonal().asDiagonal())) == 0.0);
}

TEST_CASE("GUE samples are reproducible per seed", "[model]") {
  GaussianStream r1(7), r2(7), r3(8);
  const HermitianOperator a = sample_gue(16, r1);
  const HermitianOperator b = sample_gue(16, r2);
  const HermitianOperator c = sample_gue(16, r3);
  CHECK(a.matrix() == b.matrix());
  CHECK(a.matrix() != c.matrix());
  CHECK(a.matrix() == a.matrix().adjoint());
}

TEST_CASE("environment draws H_E then X_E from one stream", "[model]") {
  ModelParams p;
  p.n_sys = 3;
  p.n_env = 6;
  p.seed = 99;
  const ModelOperators ops = build_operators(p);
  GaussianStream rng(99);
  CHECK(ops.h_e.matrix() == sample_gue(6, rng).matrix());
  CHECK(ops.x_e.matrix() == sample_gue(6, rng).matrix());
}

TEST_CASE("GUE spectrum follows the semicircle of radius sqrt 2", "[model][property]") {
  const int n = 512;
  std::size_t inside = 0;
  std::size_t total = 0;
  double second_moment = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GaussianStream rng(seed);
    const RealVector ev = eigvals_hermitian(sample_gue(n, rng));
    for (Index i = 0; i < ev.size(); ++i) {
      inside += std::abs(ev(i)) <= 2.1 ? 1 : 0;
      second_moment += ev(i) * ev(i);
    }
    total += static_cast<std::size_t>(ev.size());
  }
  CHECK(static_cast<double>(inside) >= 0.95 * static_cast<double>(total));
  // Semicircle of radius R has second moment R^2 / 4.
  CHECK_THAT(second_moment / static_cast<double>(total), WithinRel(0.5, 0.02));
}

TEST_CASE("Gibbs weights of a two-level Hamiltonian", "[model][oracle]") {
  ComplexMatrix h = ComplexMatrix::Zero(2, 2);
  h(1, 1) = 1.0;
  const DensityMatrix g = gibbs_state(HermitianOperator(h), 1.0);
  CHECK_THAT(g.matrix()(0, 0).real(), WithinAbs(0.7310585786300049, 1e-12));
  CHECK_THAT(g.matrix()(1, 1).real(), WithinAbs(0.2689414213699951, 1e-12));
  CHECK_THROWS_AS(gibbs_state(HermitianOperator(h), -1.0), std::invalid_argument);
}

TEST_CASE("zero temperature spreads over the degenerate ground space", "[model]") {
  ComplexMatrix h = ComplexMatrix::Zero(3, 3);
  h(2, 2) = 1.0;
  const DensityMatrix g = gibbs_state(HermitianOperator(h), 0.0);
  CHECK_THAT(g.matrix()(0, 0).real() + g.matrix()(1, 1).real(), WithinAbs(1.0, 1e-14));
  CHECK_THAT(g.matrix()(2, 2).real(), WithinAbs(0.0, 1e-14));
  const ThermalEnsemble e = thermal_ensemble(HermitianOperator(h), 0.0);
  CHECK(e.weights(0) == 0.5);
  CHECK(e.weights(1) == 0.5);
}

TEST_CASE("large energy gaps do not underflow the Gibbs weights", "[model]") {
  ComplexMatrix h = ComplexMatrix::Zero(2, 2);
  h(0, 0) = 5000.0;
  h(1, 1) = 5001.0;
  const DensityMatrix g = gibbs_state(HermitianOperator(h), 0.01);
  CHECK(std::isfinite(g.matrix()(0, 0).real()));
  CHECK_THAT(g.matrix()(0, 0).real(), WithinAbs(1.0, 1e-12));
}

TEST_CASE("truncated coherent state", "[model][oracle]") {
  const auto plus = truncated_coherent_state(1.0, 16);
  const auto minus = truncated_coherent_state(-1.0, 16);
  CHECK(plus.deficit <= 1e-7);
  // Missing tail exp(-1) sum_{n >= 16} 1/n!.
  double tail = 0.0;
  for (int n = 16; n < 40; ++n) tail += std::exp(-1.0 - std::lgamma(n + 1.0));
  CHECK_THAT(plus.deficit, WithinAbs(tail, 1e-15));
  CHECK_THAT(plus.amplitudes.norm(), WithinAbs(1.0, 1e-15));
  const double overlap = std::abs(plus.amplitudes.dot(minus.amplitudes));
  CHECK_THAT(overlap, WithinAbs(std::exp(-2.0), 1e-12));
  CHECK_THAT(std::abs(plus.amplitudes(3)), WithinAbs(std::exp(-0.5) / std::sqrt(6.0), 1e-12));
}

TEST_CASE("Hermite functions are orthonormal on a fine grid", "[model][property]") {
  const double h = 0.01;
  const auto q = uniform_grid(-10.0, 10.0, h);
  const Eigen::MatrixXd phi = hermite_functions(16, q);
  for (int m = 0; m < 16; ++m)
    for (int n = 0; n < 16; ++n) {
      const RealVector prod = phi.row(m).cwiseProduct(phi.row(n)).transpose();
      CHECK_THAT(trapezoid(prod, h), WithinAbs(m == n ? 1.0 : 0.0, 1e-8));
    }
}

TEST_CASE("position densities agree for vectors and density matrices", "[model]") {
  const auto psi = truncated_coherent_state(Complex(0.7, -0.4), 12).amplitudes;
  const auto q = uniform_grid(-8.0, 8.0, 0.01);
  const RealVector p1 = position_density(psi, q);
  const RealVector p2 = position_density(DensityMatrix::pure(psi), q);
  CHECK((p1 - p2).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THAT(trapezoid(p1, 0.01), WithinAbs(1.0, 1e-6));
}

TEST_CASE("total Hamiltonian assembly", "[model]") {
  ModelParams p;
  p.n_sys = 3;
  p.n_env = 4;
  p.gamma = 0.0;
  const ModelOperators free = build_operators(p);
  const ComplexMatrix id_s = ComplexMatrix::Identity(3, 3);
  const ComplexMatrix id_e = ComplexMatrix::Identity(4, 4);
  CHECK(max_abs(free.h_total.matrix() - kron(free.h_s.matrix(), id_e) -
                kron(id_s, free.h_e.matrix())) < 1e-15);
  const HermitianOperator coupled = total_hamiltonian(free, 0.5);
  CHECK(max_abs(coupled.matrix() - free.h_total.matrix() -
                0.5 * kron(free.q_s.matrix(), free.x_e.matrix())) < 1e-15);
}

TEST_CASE("ModelParams validation", "[model]") {
  ModelParams p;
  CHECK_NOTHROW(p.validate());
  p.n_sys = 1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.dt = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.temp = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.gamma = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

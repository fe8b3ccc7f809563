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

// Random generators for property tests. Deliberately independent of the
// library's own GUE stream.

#pragma once

#include <cmath>
#include <random>

#include "acl/linalg.hpp"

namespace acl::test {

inline ComplexMatrix random_complex(Index rows, Index cols, std::mt19937_64& g) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = Complex(n(g), n(g));
  return m;
}

inline HermitianOperator random_hermitian(Index n, std::mt19937_64& g) {
  const ComplexMatrix a = random_complex(n, n, g);
  return HermitianOperator::symmetrized(a + a.adjoint());
}

inline ComplexVector random_state(Index n, std::mt19937_64& g) {
  ComplexVector v = random_complex(n, 1, g);
  return v / v.norm();
}

/// W W^dagger / tr, W of shape n x rank.
inline DensityMatrix random_density(Index n, std::mt19937_64& g, Index rank = -1) {
  const ComplexMatrix w = random_complex(n, rank < 0 ? n : rank, g);
  const ComplexMatrix rho = w * w.adjoint();
  return DensityMatrix(HermitianOperator::symmetrized(rho / rho.trace().real()));
}

/// Factor with F F^dagger of unit trace.
inline ComplexMatrix random_factor(Index n, Index rank, std::mt19937_64& g) {
  const ComplexMatrix f = random_complex(n, rank, g);
  return f / f.norm();
}

}  // namespace acl::test

// Copyright 2026 The cvim Authors
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


#ifndef CVIM_TESTS_SUPPORT_HPP
#define CVIM_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cvim/fockspace.hpp"

namespace cvim::test {

inline Eigen::VectorXd sorted_eigenvalues(const DenseMatrix& m) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(m, Eigen::EigenvaluesOnly);
  Eigen::VectorXd e = es.eigenvalues();
  std::sort(e.data(), e.data() + e.size());
  return e;
}

/// Reference ladder operator written out element by element.
inline DenseMatrix reference_destroy(int dim) {
  DenseMatrix a = DenseMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

/// Reference Kronecker product, row index i = i_lhs * n_rhs + i_rhs.
inline DenseMatrix reference_kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline double max_abs_dense(const DenseMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace cvim::test

#endif  // CVIM_TESTS_SUPPORT_HPP

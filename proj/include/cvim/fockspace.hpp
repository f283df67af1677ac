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

#ifndef CVIM_FOCKSPACE_HPP
#define CVIM_FOCKSPACE_HPP

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cvim/errors.hpp"

namespace cvim {

using Complex = std::complex<double>;
using Index = Eigen::Index;

template <typename Scalar>
using SparseMatrixT = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;
using SparseMatrix = SparseMatrixT<Complex>;
using DenseMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Per-mode truncation dimensions of a multi-mode Fock (or multi-qubit) space.
///
/// Mode 0 is the leftmost factor of every tensor product, i.e. the slowest
/// varying digit of the flat basis index. All tensor operations in the
/// library follow this ordering, and it is part of the file-level contract
/// (state dumps and CSV columns are indexed the same way).
class FockDims {
 public:
  FockDims() = default;
  explicit FockDims(std::vector<int> dims);
  FockDims(std::initializer_list<int> dims) : FockDims(std::vector<int>(dims)) {}

  static FockDims uniform(int modes, int dim);
  static FockDims qubits(int count) { return uniform(count, 2); }

  int modes() const { return static_cast<int>(dims_.size()); }
  int operator[](int mode) const { return dims_.at(static_cast<std::size_t>(mode)); }
  const std::vector<int>& sizes() const { return dims_; }
  Index total() const { return total_; }

  /// Distance in the flat index between neighbouring occupations of `mode`.
  Index stride(int mode) const;
  std::vector<int> occupation(Index flat) const;
  Index flat_index(std::span<const int> occupation) const;

  bool operator==(const FockDims&) const = default;

 private:
  std::vector<int> dims_;
  Index total_ = 0;
};

/// Complex matrix acting on a FockDims space. Stored sparse; dense views are
/// available for small systems.
struct Operator {
  SparseMatrix matrix;
  FockDims dims;

  Operator() = default;
  Operator(SparseMatrix m, FockDims d);

  Index size() const { return matrix.rows(); }
  DenseMatrix dense() const { return DenseMatrix(matrix); }
  Operator adjoint() const;

  Operator& operator+=(const Operator& rhs);
  Operator& operator-=(const Operator& rhs);
  Operator& operator*=(Complex s);
};

Operator operator+(Operator lhs, const Operator& rhs);
Operator operator-(Operator lhs, const Operator& rhs);
Operator operator*(const Operator& lhs, const Operator& rhs);
Operator operator*(Complex s, Operator op);
Operator operator*(Operator op, Complex s);
inline Operator operator*(double s, Operator op) { return Complex(s) * std::move(op); }

/// Pure state; amplitudes are not required to be normalized in transit
/// (non-Hermitian propagation shrinks them) but every normalizing
/// operation leaves the Euclidean norm at 1.
struct StateVector {
  Vector amplitudes;
  FockDims dims;

  StateVector() = default;
  StateVector(Vector amps, FockDims d);

  double norm() const { return amplitudes.norm(); }
  StateVector normalized() const;
};

struct DensityMatrix {
  DenseMatrix matrix;
  FockDims dims;

  DensityMatrix() = default;
  DensityMatrix(DenseMatrix m, FockDims d);
  static DensityMatrix from_state(const StateVector& psi);

  Complex trace() const { return matrix.trace(); }
};

// -- single-mode building blocks ---------------------------------------------

Operator destroy(int dim);
Operator create(int dim);
Operator number(int dim);
Operator identity(const FockDims& dims);
Operator sigma_x();
Operator sigma_z();

// -- tensor structure ----------------------------------------------------------

Operator kron(const Operator& lhs, const Operator& rhs);
Operator embed(const Operator& op, int mode, const FockDims& dims);
/// Annihilation operator of `mode` on the full space.
Operator destroy(int mode, const FockDims& dims);

StateVector basis_state(const FockDims& dims, std::span<const int> occupation);
StateVector vacuum(const FockDims& dims);
StateVector product_state(std::span<const StateVector> factors);

// -- states ----------------------------------------------------------------------

/// Tail weight below which a truncated coherent state is accepted.
inline constexpr double kCoherentTailTolerance = 1e-8;

/// Probability mass of |alpha> above Fock level dim-1.
double coherent_tail_weight(int dim, Complex alpha);
StateVector coherent_state(int dim, Complex alpha);
/// prod_n |alpha_n> + parity * prod_n |-alpha_n>, normalized.
StateVector cat_state(const FockDims& dims, std::span<const Complex> amplitudes, int parity);

// -- measurements ----------------------------------------------------------------

Complex expectation(const StateVector& psi, const Operator& op);
Complex expectation(const DensityMatrix& rho, const Operator& op);
double fidelity(const StateVector& lhs, const StateVector& rhs);
double fidelity(const DensityMatrix& rho, const StateVector& psi);
double trace_distance(const DensityMatrix& lhs, const DensityMatrix& rhs);

/// prod_n exp(i pi a_n^dag a_n): diagonal with entries (-1)^{sum_k n_k}.
Operator parity_operator(const FockDims& dims);

Operator commutator(const Operator& lhs, const Operator& rhs);
/// Largest absolute entry of the matrix.
double max_abs(const Operator& op);
double hermiticity_error(const Operator& op);

/// Basis indices where any mode sits in one of its top `levels` Fock levels.
std::vector<Index> top_level_indices(const FockDims& dims, int levels = 2);

/// Population of |psi|^2 over the given basis indices, relative to the norm.
template <typename Derived>
double population(const Eigen::MatrixBase<Derived>& psi, std::span<const Index> indices) {
  double sum = 0.0;
  for (Index i : indices) sum += std::norm(psi(i));
  return sum / psi.squaredNorm();
}

}  // namespace cvim

#endif  // CVIM_FOCKSPACE_HPP

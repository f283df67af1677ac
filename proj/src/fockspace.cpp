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

#include "cvim/fockspace.hpp"

#include <cmath>
#include <sstream>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

namespace cvim {
namespace {

void require_same_dims(const FockDims& a, const FockDims& b, const char* what) {
  if (!(a == b)) throw DimensionError(std::string(what) + ": mismatched Fock dimensions");
}

SparseMatrix sparse_identity(Index n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

}  // namespace

FockDims::FockDims(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw DimensionError("FockDims: at least one mode is required");
  total_ = 1;
  for (int d : dims_) {
    if (d < 2) throw DimensionError("FockDims: every mode needs dimension >= 2, got " + std::to_string(d));
    total_ *= d;
  }
}

FockDims FockDims::uniform(int modes, int dim) {
  if (modes < 1) throw DimensionError("FockDims: at least one mode is required");
  return FockDims(std::vector<int>(static_cast<std::size_t>(modes), dim));
}

Index FockDims::stride(int mode) const {
  if (mode < 0 || mode >= modes()) throw IndexError("FockDims: mode index out of range");
  Index s = 1;
  for (int k = modes() - 1; k > mode; --k) s *= dims_[static_cast<std::size_t>(k)];
  return s;
}

std::vector<int> FockDims::occupation(Index flat) const {
  if (flat < 0 || flat >= total_) throw IndexError("FockDims: flat index out of range");
  std::vector<int> occ(dims_.size());
  for (int k = modes() - 1; k >= 0; --k) {
    const auto d = dims_[static_cast<std::size_t>(k)];
    occ[static_cast<std::size_t>(k)] = static_cast<int>(flat % d);
    flat /= d;
  }
  return occ;
}

Index FockDims::flat_index(std::span<const int> occupation) const {
  if (occupation.size() != dims_.size()) throw DimensionError("FockDims: occupation has wrong length");
  Index flat = 0;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (occupation[k] < 0 || occupation[k] >= dims_[k]) throw IndexError("FockDims: occupation out of range");
    flat = flat * dims_[k] + occupation[k];
  }
  return flat;
}

Operator::Operator(SparseMatrix m, FockDims d) : matrix(std::move(m)), dims(std::move(d)) {
  if (matrix.rows() != matrix.cols() || matrix.rows() != dims.total())
    throw DimensionError("Operator: matrix side " + std::to_string(matrix.rows()) +
                         " does not match total dimension " + std::to_string(dims.total()));
  matrix.makeCompressed();
}

Operator Operator::adjoint() const { return Operator(SparseMatrix(matrix.adjoint()), dims); }

Operator& Operator::operator+=(const Operator& rhs) {
  require_same_dims(dims, rhs.dims, "operator+");
  matrix += rhs.matrix;
  return *this;
}

Operator& Operator::operator-=(const Operator& rhs) {
  require_same_dims(dims, rhs.dims, "operator-");
  matrix -= rhs.matrix;
  return *this;
}

Operator& Operator::operator*=(Complex s) {
  matrix *= s;
  return *this;
}

Operator operator+(Operator lhs, const Operator& rhs) { return lhs += rhs; }
Operator operator-(Operator lhs, const Operator& rhs) { return lhs -= rhs; }

Operator operator*(const Operator& lhs, const Operator& rhs) {
  require_same_dims(lhs.dims, rhs.dims, "operator*");
  return Operator(SparseMatrix(lhs.matrix * rhs.matrix), lhs.dims);
}

Operator operator*(Complex s, Operator op) { return op *= s; }
Operator operator*(Operator op, Complex s) { return op *= s; }

StateVector::StateVector(Vector amps, FockDims d) : amplitudes(std::move(amps)), dims(std::move(d)) {
  if (amplitudes.size() != dims.total()) throw DimensionError("StateVector: amplitude count does not match dims");
}

StateVector StateVector::normalized() const {
  const double n = norm();
  if (!(n > 0.0)) throw DegenerateStateError("StateVector: cannot normalize a zero vector");
  return StateVector(amplitudes / n, dims);
}

DensityMatrix::DensityMatrix(DenseMatrix m, FockDims d) : matrix(std::move(m)), dims(std::move(d)) {
  if (matrix.rows() != matrix.cols() || matrix.rows() != dims.total())
    throw DimensionError("DensityMatrix: matrix does not match dims");
}

DensityMatrix DensityMatrix::from_state(const StateVector& psi) {
  const StateVector unit = psi.normalized();
  return DensityMatrix(unit.amplitudes * unit.amplitudes.adjoint(), unit.dims);
}

Operator destroy(int dim) {
  if (dim < 2) throw DimensionError("destroy: dimension must be >= 2");
  SparseMatrix a(dim, dim);
  a.reserve(dim - 1);
  for (int n = 1; n < dim; ++n) a.insert(n - 1, n) = std::sqrt(static_cast<double>(n));
  return Operator(std::move(a), FockDims{dim});
}

Operator create(int dim) { return destroy(dim).adjoint(); }

Operator number(int dim) {
  if (dim < 2) throw DimensionError("number: dimension must be >= 2");
  SparseMatrix n(dim, dim);
  n.reserve(dim);
  for (int k = 0; k < dim; ++k) n.insert(k, k) = static_cast<double>(k);
  return Operator(std::move(n), FockDims{dim});
}

Operator identity(const FockDims& dims) { return Operator(sparse_identity(dims.total()), dims); }

Operator sigma_x() {
  SparseMatrix s(2, 2);
  s.insert(0, 1) = 1.0;
  s.insert(1, 0) = 1.0;
  return Operator(std::move(s), FockDims{2});
}

// |0> carries sigma_z = +1 (spin up, s = +1); |1> carries s = -1.
Operator sigma_z() {
  SparseMatrix s(2, 2);
  s.insert(0, 0) = 1.0;
  s.insert(1, 1) = -1.0;
  return Operator(std::move(s), FockDims{2});
}

Operator kron(const Operator& lhs, const Operator& rhs) {
  std::vector<int> dims = lhs.dims.sizes();
  dims.insert(dims.end(), rhs.dims.sizes().begin(), rhs.dims.sizes().end());
  SparseMatrix m = Eigen::kroneckerProduct(lhs.matrix, rhs.matrix);
  return Operator(std::move(m), FockDims(std::move(dims)));
}

Operator embed(const Operator& op, int mode, const FockDims& dims) {
  if (mode < 0 || mode >= dims.modes()) throw IndexError("embed: mode index out of range");
  if (op.dims.modes() != 1 || op.dims[0] != dims[mode])
    throw DimensionError("embed: operator dimension does not match dims[mode]");
  Index left = 1;
  for (int k = 0; k < mode; ++k) left *= dims[k];
  const Index right = dims.stride(mode);
  SparseMatrix inner = Eigen::kroneckerProduct(op.matrix, sparse_identity(right));
  SparseMatrix full = Eigen::kroneckerProduct(sparse_identity(left), inner);
  return Operator(std::move(full), dims);
}

Operator destroy(int mode, const FockDims& dims) {
  if (mode < 0 || mode >= dims.modes()) throw IndexError("destroy: mode index out of range");
  return embed(destroy(dims[mode]), mode, dims);
}

StateVector basis_state(const FockDims& dims, std::span<const int> occupation) {
  Vector v = Vector::Zero(dims.total());
  v(dims.flat_index(occupation)) = 1.0;
  return StateVector(std::move(v), dims);
}

StateVector vacuum(const FockDims& dims) {
  Vector v = Vector::Zero(dims.total());
  v(0) = 1.0;
  return StateVector(std::move(v), dims);
}

StateVector product_state(std::span<const StateVector> factors) {
  if (factors.empty()) throw DimensionError("product_state: no factors");
  std::vector<int> dims;
  Vector v = Vector::Ones(1);
  for (const auto& f : factors) {
    dims.insert(dims.end(), f.dims.sizes().begin(), f.dims.sizes().end());
    Vector next(v.size() * f.amplitudes.size());
    for (Index i = 0; i < v.size(); ++i) next.segment(i * f.amplitudes.size(), f.amplitudes.size()) = v(i) * f.amplitudes;
    v.swap(next);
  }
  return StateVector(std::move(v), FockDims(std::move(dims)));
}

double coherent_tail_weight(int dim, Complex alpha) {
  // Poisson mass above dim-1, summed in log space from the cut upwards.
  const double x = std::norm(alpha);
  if (x == 0.0) return 0.0;
  double tail = 0.0;
  for (int n = dim; n < dim + 4000; ++n) {
    const double term = std::exp(-x + n * std::log(x) - std::lgamma(n + 1.0));
    tail += term;
    if (n > x && term < 1e-18 * tail) break;
  }
  return std::min(tail, 1.0);
}

StateVector coherent_state(int dim, Complex alpha) {
  if (dim < 2) throw DimensionError("coherent_state: dimension must be >= 2");
  const double tail = coherent_tail_weight(dim, alpha);
  if (tail > kCoherentTailTolerance) {
    std::ostringstream os;
    os << "coherent_state: truncated tail weight " << tail << " exceeds " << kCoherentTailTolerance << " at dim "
       << dim;
    throw TruncationError(os.str());
  }
  Vector v(dim);
  v(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < dim; ++n) v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  v /= v.norm();
  return StateVector(std::move(v), FockDims{dim});
}

StateVector cat_state(const FockDims& dims, std::span<const Complex> amplitudes, int parity) {
  if (static_cast<int>(amplitudes.size()) != dims.modes())
    throw DimensionError("cat_state: need one amplitude per mode");
  if (parity != 1 && parity != -1) throw ParameterError("cat_state: parity must be +1 or -1");
  std::vector<StateVector> plus, minus;
  for (int k = 0; k < dims.modes(); ++k) {
    plus.push_back(coherent_state(dims[k], amplitudes[static_cast<std::size_t>(k)]));
    minus.push_back(coherent_state(dims[k], -amplitudes[static_cast<std::size_t>(k)]));
  }
  Vector v = product_state(plus).amplitudes + static_cast<double>(parity) * product_state(minus).amplitudes;
  const double n = v.norm();
  if (n < 1e-12) throw DegenerateStateError("cat_state: superposition vanishes (odd cat of the vacuum)");
  return StateVector(v / n, dims);
}

Complex expectation(const StateVector& psi, const Operator& op) {
  require_same_dims(psi.dims, op.dims, "expectation");
  const double nn = psi.amplitudes.squaredNorm();
  if (!(nn > 0.0)) throw DegenerateStateError("expectation: zero-norm state");
  const Vector opsi = op.matrix * psi.amplitudes;
  return psi.amplitudes.dot(opsi) / nn;
}

Complex expectation(const DensityMatrix& rho, const Operator& op) {
  require_same_dims(rho.dims, op.dims, "expectation");
  return (op.matrix * rho.matrix).trace() / rho.trace();
}

double fidelity(const StateVector& lhs, const StateVector& rhs) {
  require_same_dims(lhs.dims, rhs.dims, "fidelity");
  const double nn = lhs.amplitudes.squaredNorm() * rhs.amplitudes.squaredNorm();
  if (!(nn > 0.0)) throw DegenerateStateError("fidelity: zero-norm state");
  return std::norm(lhs.amplitudes.dot(rhs.amplitudes)) / nn;
}

double fidelity(const DensityMatrix& rho, const StateVector& psi) {
  require_same_dims(rho.dims, psi.dims, "fidelity");
  const Complex v = psi.amplitudes.dot(rho.matrix * psi.amplitudes);
  return v.real() / (psi.amplitudes.squaredNorm() * rho.trace().real());
}

double trace_distance(const DensityMatrix& lhs, const DensityMatrix& rhs) {
  require_same_dims(lhs.dims, rhs.dims, "trace_distance");
  const DenseMatrix diff = lhs.matrix - rhs.matrix;
  const DenseMatrix herm = 0.5 * (diff + diff.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(herm, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

Operator parity_operator(const FockDims& dims) {
  SparseMatrix p(dims.total(), dims.total());
  p.reserve(dims.total());
  for (Index i = 0; i < dims.total(); ++i) {
    const auto occ = dims.occupation(i);
    const int n = std::accumulate(occ.begin(), occ.end(), 0);
    p.insert(i, i) = (n % 2 == 0) ? 1.0 : -1.0;
  }
  return Operator(std::move(p), dims);
}

Operator commutator(const Operator& lhs, const Operator& rhs) { return lhs * rhs - rhs * lhs; }

double max_abs(const Operator& op) {
  double m = 0.0;
  for (Index k = 0; k < op.matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(op.matrix, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

double hermiticity_error(const Operator& op) { return max_abs(op - op.adjoint()); }

std::vector<Index> top_level_indices(const FockDims& dims, int levels) {
  std::vector<Index> out;
  for (Index i = 0; i < dims.total(); ++i) {
    const auto occ = dims.occupation(i);
    for (int k = 0; k < dims.modes(); ++k) {
      if (occ[static_cast<std::size_t>(k)] >= dims[k] - levels) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

}  // namespace cvim

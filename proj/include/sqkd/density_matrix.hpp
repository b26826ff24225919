// Copyright 2026 The sqkd authors
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

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <span>
#include <vector>

#include "sqkd/common.hpp"
#include "sqkd/state_vector.hpp"

namespace sqkd {

class DensityMatrix {
 public:
  explicit DensityMatrix(Eigen::MatrixXcd m) : mat_(std::move(m)) {
    if (mat_.rows() != mat_.cols())
      throw DimensionError("density matrix must be square");
    Eigen::Index d = mat_.rows();
    if (d == 0 || (d & (d - 1)) != 0)
      throw DimensionError("density matrix dimension must be a power of two");
  }

  static DensityMatrix pure(const StateVector& s) {
    Eigen::Map<const Eigen::VectorXcd> v(s.amplitudes().data(),
                                         static_cast<Eigen::Index>(s.dim()));
    return DensityMatrix(v * v.adjoint());
  }

  Eigen::Index dim() const { return mat_.rows(); }
  const Eigen::MatrixXcd& matrix() const { return mat_; }

  double trace_real() const { return mat_.trace().real(); }

  // Hermitian, unit trace, positive semidefinite (eigenvalues >= -tol).
  void validate(double tol = kAlgebraTol) const {
    if ((mat_ - mat_.adjoint()).cwiseAbs().maxCoeff() > tol)
      throw InvariantError("density matrix is not hermitian");
    if (std::abs(mat_.trace().real() - 1.0) > tol ||
        std::abs(mat_.trace().imag()) > tol)
      throw InvariantError("density matrix trace is not 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mat_,
                                                       Eigen::EigenvaluesOnly);
    // Eigenvalues carry solver error; accept within the looser bound.
    if (es.eigenvalues().minCoeff() < -std::max(tol, kEigenTol))
      throw InvariantError("density matrix is not positive semidefinite");
  }

 private:
  Eigen::MatrixXcd mat_;
};

// Reduced state of `keep` (in the given order: bit i of the reduced index is
// keep[i]) after tracing out every other qubit of the pure state.
inline DensityMatrix partial_trace(const StateVector& state,
                                   std::span<const int> keep) {
  const int n = state.num_qubits();
  std::size_t keep_mask = 0;
  for (int q : keep) {
    if (q < 0 || q >= n) throw DimensionError("kept qubit out of range");
    std::size_t bit = std::size_t{1} << q;
    if (keep_mask & bit) throw DimensionError("duplicate kept qubit");
    keep_mask |= bit;
  }
  const int k = static_cast<int>(keep.size());
  const std::size_t kd = std::size_t{1} << k;

  // Enumerate the traced-out subspace once; for each of its basis states,
  // gather the amplitude vector over the kept qubits and accumulate the
  // outer product.
  std::vector<int> rest;
  for (int q = 0; q < n; ++q)
    if (!(keep_mask & (std::size_t{1} << q))) rest.push_back(q);

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(
      static_cast<Eigen::Index>(kd), static_cast<Eigen::Index>(kd));
  Eigen::VectorXcd col(static_cast<Eigen::Index>(kd));
  const std::size_t rd = std::size_t{1} << rest.size();
  for (std::size_t r = 0; r < rd; ++r) {
    std::size_t base = 0;
    for (std::size_t b = 0; b < rest.size(); ++b)
      if (r & (std::size_t{1} << b)) base |= std::size_t{1} << rest[b];
    for (std::size_t i = 0; i < kd; ++i) {
      std::size_t x = base;
      for (int b = 0; b < k; ++b)
        if (i & (std::size_t{1} << b)) x |= std::size_t{1} << keep[b];
      col(static_cast<Eigen::Index>(i)) = state.amp(x);
    }
    rho.noalias() += col * col.adjoint();
  }
  return DensityMatrix(std::move(rho));
}

inline DensityMatrix partial_trace(const StateVector& state,
                                   std::initializer_list<int> keep) {
  return partial_trace(state, std::span<const int>(keep.begin(), keep.size()));
}

// Reduced state of `keep` from a mixed state over n qubits.
inline DensityMatrix partial_trace(const DensityMatrix& rho,
                                   std::span<const int> keep) {
  Eigen::Index d = rho.dim();
  int n = 0;
  while ((Eigen::Index{1} << n) < d) ++n;
  std::size_t keep_mask = 0;
  for (int q : keep) {
    if (q < 0 || q >= n) throw DimensionError("kept qubit out of range");
    std::size_t bit = std::size_t{1} << q;
    if (keep_mask & bit) throw DimensionError("duplicate kept qubit");
    keep_mask |= bit;
  }
  const int k = static_cast<int>(keep.size());
  const std::size_t kd = std::size_t{1} << k;
  std::vector<int> rest;
  for (int q = 0; q < n; ++q)
    if (!(keep_mask & (std::size_t{1} << q))) rest.push_back(q);
  const std::size_t rd = std::size_t{1} << rest.size();

  auto expand = [&](std::size_t i, std::size_t r) {
    std::size_t x = 0;
    for (int b = 0; b < k; ++b)
      if (i & (std::size_t{1} << b)) x |= std::size_t{1} << keep[b];
    for (std::size_t b = 0; b < rest.size(); ++b)
      if (r & (std::size_t{1} << b)) x |= std::size_t{1} << rest[b];
    return x;
  };

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(
      static_cast<Eigen::Index>(kd), static_cast<Eigen::Index>(kd));
  for (std::size_t i = 0; i < kd; ++i)
    for (std::size_t j = 0; j < kd; ++j) {
      cx acc{0, 0};
      for (std::size_t r = 0; r < rd; ++r)
        acc += rho.matrix()(static_cast<Eigen::Index>(expand(i, r)),
                            static_cast<Eigen::Index>(expand(j, r)));
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
    }
  return DensityMatrix(std::move(out));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho,
                                   std::initializer_list<int> keep) {
  return partial_trace(rho, std::span<const int>(keep.begin(), keep.size()));
}

// T(rho, sigma) = 0.5 * ||rho - sigma||_1, via the eigenvalues of the
// hermitian difference. Equals max_E (tr(E rho) - tr(E sigma)) over all
// effects 0 <= E <= I, the bias of the best discriminating measurement.
inline double trace_distance(const Eigen::MatrixXcd& a,
                             const Eigen::MatrixXcd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("trace distance needs equal dimensions");
  Eigen::MatrixXcd d = a - b;
  d = (d + d.adjoint().eval()) * 0.5;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(d, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return trace_distance(a.matrix(), b.matrix());
}

}  // namespace sqkd

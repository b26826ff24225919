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
#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "sqkd/common.hpp"
#include "sqkd/philox.hpp"

namespace sqkd {

enum class Basis : std::uint8_t { Z, X };

inline const char* basis_name(Basis b) { return b == Basis::Z ? "Z" : "X"; }

// Dense multi-qubit pure state. Amplitude index bit i is the value of
// qubit i, i.e. qubit 0 is the least significant bit:
//   amp(index) = <q_{n-1} ... q_1 q_0 | psi>  with  index = sum q_i 2^i.
class StateVector {
 public:
  explicit StateVector(int num_qubits) : n_(num_qubits) {
    check_qubit_count(num_qubits);
    amps_.assign(std::size_t{1} << n_, cx{0.0, 0.0});
    amps_[0] = cx{1.0, 0.0};
  }

  static StateVector from_amplitudes(std::vector<cx> amps) {
    int n = 0;
    while ((std::size_t{1} << n) < amps.size()) ++n;
    if ((std::size_t{1} << n) != amps.size())
      throw DimensionError("amplitude count must be a power of two");
    check_qubit_count(n);
    StateVector s(n);
    s.amps_ = std::move(amps);
    if (!s.is_normalized())
      throw InvariantError("state vector is not normalized");
    return s;
  }

  int num_qubits() const { return n_; }
  std::size_t dim() const { return amps_.size(); }
  cx amp(std::size_t index) const { return amps_.at(index); }
  const std::vector<cx>& amplitudes() const { return amps_; }
  std::vector<cx>& amplitudes() { return amps_; }

  double norm_sq() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
  }

  bool is_normalized(double tol = kAlgebraTol) const {
    return std::abs(norm_sq() - 1.0) <= tol;
  }

  void renormalize() {
    double n = std::sqrt(norm_sq());
    if (n <= 0.0) throw InvariantError("cannot renormalize the zero vector");
    for (auto& a : amps_) a /= n;
  }

 private:
  static void check_qubit_count(int n) {
    if (n < 0 || n > kMaxQubits)
      throw DimensionError("qubit count out of range [0, 12]");
  }

  int n_;
  std::vector<cx> amps_;
};

// |0>, |1>, |+> = (|0>+|1>)/sqrt2, |-> = (|0>-|1>)/sqrt2.
inline StateVector prepare(Basis basis, int bit) {
  if (bit != 0 && bit != 1) throw InvariantError("bit must be 0 or 1");
  StateVector s(1);
  auto& a = s.amplitudes();
  if (basis == Basis::Z) {
    a[0] = bit ? cx{0, 0} : cx{1, 0};
    a[1] = bit ? cx{1, 0} : cx{0, 0};
  } else {
    const double r = 1.0 / std::sqrt(2.0);
    a[0] = cx{r, 0};
    a[1] = bit ? cx{-r, 0} : cx{r, 0};
  }
  return s;
}

// Kronecker product; `low` occupies qubits 0..low.n-1 of the result and
// `high` occupies the bits above, so tensor(high, low) keeps low's indices.
inline StateVector tensor(const StateVector& high, const StateVector& low) {
  int n = high.num_qubits() + low.num_qubits();
  if (n > kMaxQubits) throw DimensionError("tensor product exceeds 12 qubits");
  std::vector<cx> out(std::size_t{1} << n);
  for (std::size_t i = 0; i < high.dim(); ++i)
    for (std::size_t j = 0; j < low.dim(); ++j)
      out[(i << low.num_qubits()) | j] = high.amp(i) * low.amp(j);
  return StateVector::from_amplitudes(std::move(out));
}

inline bool is_unitary(const Eigen::MatrixXcd& u, double tol = kAlgebraTol) {
  if (u.rows() != u.cols()) return false;
  Eigen::MatrixXcd d =
      u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols());
  return d.cwiseAbs().maxCoeff() <= tol;
}

// Applies a 2^k x 2^k unitary to qubits `targets`, where bit i of the
// matrix row/column index is the value of qubit targets[i].
inline void apply_unitary(StateVector& state, const Eigen::MatrixXcd& u,
                          std::span<const int> targets) {
  const int k = static_cast<int>(targets.size());
  const std::size_t block = std::size_t{1} << k;
  if (static_cast<std::size_t>(u.rows()) != block ||
      static_cast<std::size_t>(u.cols()) != block)
    throw DimensionError("unitary dimension does not match target count");
  if (!is_unitary(u)) throw InvariantError("matrix is not unitary");

  std::size_t target_mask = 0;
  for (int t : targets) {
    if (t < 0 || t >= state.num_qubits())
      throw DimensionError("target qubit out of range");
    std::size_t bit = std::size_t{1} << t;
    if (target_mask & bit) throw DimensionError("duplicate target qubit");
    target_mask |= bit;
  }

  auto& amps = state.amplitudes();
  std::vector<std::size_t> idx(block);
  Eigen::VectorXcd in(block), out(block);
  for (std::size_t base = 0; base < amps.size(); ++base) {
    if (base & target_mask) continue;
    for (std::size_t j = 0; j < block; ++j) {
      std::size_t x = base;
      for (int b = 0; b < k; ++b)
        if (j & (std::size_t{1} << b)) x |= std::size_t{1} << targets[b];
      idx[j] = x;
      in(static_cast<Eigen::Index>(j)) = amps[x];
    }
    out = u * in;
    for (std::size_t j = 0; j < block; ++j)
      amps[idx[j]] = out(static_cast<Eigen::Index>(j));
  }
}

inline void apply_unitary(StateVector& state, const Eigen::MatrixXcd& u,
                          std::initializer_list<int> targets) {
  apply_unitary(state, u, std::span<const int>(targets.begin(), targets.size()));
}

namespace detail {

inline Eigen::Matrix2cd hadamard() {
  Eigen::Matrix2cd h;
  const double r = 1.0 / std::sqrt(2.0);
  h << r, r, r, -r;
  return h;
}

}  // namespace detail

// Probability that measuring `target` in `basis` yields outcome 0.
inline double prob_zero(const StateVector& state, int target, Basis basis) {
  StateVector s = state;
  if (basis == Basis::X) apply_unitary(s, detail::hadamard(), {target});
  const std::size_t bit = std::size_t{1} << target;
  double p = 0.0;
  for (std::size_t i = 0; i < s.dim(); ++i)
    if (!(i & bit)) p += std::norm(s.amp(i));
  return p;
}

// Projects `target` onto outcome `bit` in `basis` and renormalizes.
// Returns the outcome probability (caller may reject impossible branches).
inline double project(StateVector& state, int target, Basis basis, int bit) {
  if (basis == Basis::X) apply_unitary(state, detail::hadamard(), {target});
  const std::size_t mask = std::size_t{1} << target;
  const std::size_t want = bit ? mask : 0;
  double p = 0.0;
  auto& amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if ((i & mask) == want)
      p += std::norm(amps[i]);
    else
      amps[i] = cx{0, 0};
  }
  if (p <= 0.0) throw InvariantError("projection onto zero-probability outcome");
  const double scale = 1.0 / std::sqrt(p);
  for (auto& a : amps) a *= scale;
  if (basis == Basis::X) apply_unitary(state, detail::hadamard(), {target});
  return p;
}

// Born-rule measurement with collapse. The outcome is drawn through the
// RandomSource so enumeration can branch on it.
inline int measure(StateVector& state, int target, Basis basis,
                   RandomSource& rs) {
  const double p0 = std::clamp(prob_zero(state, target, basis), 0.0, 1.0);
  const double w[2] = {p0, 1.0 - p0};
  const int outcome = static_cast<int>(rs.choose(w));
  project(state, target, basis, outcome);
  return outcome;
}

}  // namespace sqkd

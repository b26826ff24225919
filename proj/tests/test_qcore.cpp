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

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numbers>

#include "sqkd/density_matrix.hpp"
#include "sqkd/gates.hpp"
#include "sqkd/state_vector.hpp"

using namespace sqkd;
using Catch::Approx;

namespace {

double adiff(cx a, cx b) { return std::abs(a - b); }

}  // namespace

TEST_CASE("prepared single-qubit states", "[qcore]") {
  const double r = 1.0 / std::sqrt(2.0);
  auto z0 = prepare(Basis::Z, 0);
  auto z1 = prepare(Basis::Z, 1);
  auto x0 = prepare(Basis::X, 0);
  auto x1 = prepare(Basis::X, 1);
  REQUIRE(adiff(z0.amp(0), cx{1, 0}) < 1e-15);
  REQUIRE(adiff(z1.amp(1), cx{1, 0}) < 1e-15);
  REQUIRE(adiff(x0.amp(0), cx{r, 0}) < 1e-15);
  REQUIRE(adiff(x0.amp(1), cx{r, 0}) < 1e-15);
  REQUIRE(adiff(x1.amp(0), cx{r, 0}) < 1e-15);
  REQUIRE(adiff(x1.amp(1), cx{-r, 0}) < 1e-15);
  for (const auto& s : {z0, z1, x0, x1}) REQUIRE(s.is_normalized());
}

TEST_CASE("tensor order puts the low argument in the low bits", "[qcore]") {
  // |0> (x) |1>: qubit 0 carries the |1>.
  auto s = tensor(prepare(Basis::Z, 0), prepare(Basis::Z, 1));
  REQUIRE(adiff(s.amp(0), cx{0, 0}) < 1e-15);
  REQUIRE(adiff(s.amp(1), cx{1, 0}) < 1e-15);
  REQUIRE(adiff(s.amp(2), cx{0, 0}) < 1e-15);
  REQUIRE(adiff(s.amp(3), cx{0, 0}) < 1e-15);

  // |+> (x) |0>: amplitude on indices 0 and 2 (qubit 1 in superposition).
  const double r = 1.0 / std::sqrt(2.0);
  auto t = tensor(prepare(Basis::X, 0), prepare(Basis::Z, 0));
  REQUIRE(adiff(t.amp(0), cx{r, 0}) < 1e-15);
  REQUIRE(adiff(t.amp(1), cx{0, 0}) < 1e-15);
  REQUIRE(adiff(t.amp(2), cx{r, 0}) < 1e-15);
  REQUIRE(adiff(t.amp(3), cx{0, 0}) < 1e-15);
}

TEST_CASE("apply_unitary on chosen targets", "[qcore]") {
  // X on qubit 1 of |00> -> |10> (index 2).
  StateVector s(2);
  apply_unitary(s, gates::X(), {1});
  REQUIRE(adiff(s.amp(2), cx{1, 0}) < 1e-15);

  // H twice is identity.
  StateVector t(3);
  apply_unitary(t, gates::H(), {2});
  apply_unitary(t, gates::H(), {2});
  REQUIRE(adiff(t.amp(0), cx{1, 0}) < 1e-12);

  // CNOT built from controlled(X): control = matrix qubit 1, target = 0.
  // With targets {t, c} = {0, 1} acting on |01> (=only qubit 0 set ... here
  // prepare control qubit 1 to |1>): |10> -> |11>.
  StateVector u(2);
  apply_unitary(u, gates::X(), {1});
  apply_unitary(u, gates::controlled(gates::X()), {0, 1});
  REQUIRE(adiff(u.amp(3), cx{1, 0}) < 1e-15);

  // Non-unitary matrices are rejected.
  Eigen::Matrix2cd bad;
  bad << 1, 1, 0, 1;
  StateVector v(1);
  REQUIRE_THROWS_AS(apply_unitary(v, bad, {0}), InvariantError);
  REQUIRE_THROWS_AS(apply_unitary(v, gates::X(), {1}), DimensionError);
}

TEST_CASE("norm is preserved by unitaries and states validate", "[qcore]") {
  PhiloxSource src(11, 0);
  StateVector s(4);
  // Random-ish circuit out of the fixed gate set.
  for (int layer = 0; layer < 10; ++layer) {
    for (int q = 0; q < 4; ++q) {
      switch (src.engine().below(4)) {
        case 0: apply_unitary(s, gates::H(), {q}); break;
        case 1: apply_unitary(s, gates::X(), {q}); break;
        case 2: apply_unitary(s, gates::rotation(0.3 * q + 0.1), {q}); break;
        default: apply_unitary(s, gates::phase(0.7), {q}); break;
      }
    }
    apply_unitary(s, gates::controlled(gates::X()),
                  {static_cast<int>(src.engine().below(2)), 2});
    REQUIRE(s.is_normalized(1e-9));
  }
  REQUIRE_THROWS_AS(StateVector::from_amplitudes({cx{1, 0}, cx{1, 0}}),
                    InvariantError);
}

TEST_CASE("born rule statistics for |+> in Z", "[qcore]") {
  PhiloxSource src(3, 0);
  int ones = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    auto s = prepare(Basis::X, 0);
    ones += measure(s, 0, Basis::Z, src);
  }
  // 5 sigma around n/2.
  REQUIRE(std::abs(ones - n / 2) < 5 * std::sqrt(n * 0.25));
}

TEST_CASE("measurement collapses and repeats", "[qcore]") {
  PhiloxSource src(4, 0);
  for (int i = 0; i < 200; ++i) {
    auto s = prepare(Basis::X, 0);
    int first = measure(s, 0, Basis::Z, src);
    int second = measure(s, 0, Basis::Z, src);
    REQUIRE(first == second);
  }
  // X-basis eigenstates measured in X are deterministic.
  for (int bit : {0, 1}) {
    auto s = prepare(Basis::X, bit);
    REQUIRE(measure(s, 0, Basis::X, src) == bit);
  }
}

TEST_CASE("entangled pair gives correlated outcomes", "[qcore]") {
  PhiloxSource src(5, 0);
  for (int i = 0; i < 100; ++i) {
    StateVector s(2);
    apply_unitary(s, gates::H(), {0});
    apply_unitary(s, gates::controlled(gates::X()), {1, 0});
    int a = measure(s, 0, Basis::Z, src);
    int b = measure(s, 1, Basis::Z, src);
    REQUIRE(a == b);
  }
}

TEST_CASE("partial trace of a product state is the marginal", "[qcore]") {
  auto s = tensor(prepare(Basis::X, 0), prepare(Basis::Z, 1));
  auto rho0 = partial_trace(s, {0});
  auto rho1 = partial_trace(s, {1});
  rho0.validate();
  rho1.validate();
  REQUIRE(adiff(rho0.matrix()(1, 1), cx{1, 0}) < 1e-12);
  REQUIRE(adiff(rho1.matrix()(0, 0), cx{0.5, 0}) < 1e-12);
  REQUIRE(adiff(rho1.matrix()(0, 1), cx{0.5, 0}) < 1e-12);
}

TEST_CASE("partial trace of a Bell pair is maximally mixed", "[qcore]") {
  StateVector s(2);
  apply_unitary(s, gates::H(), {0});
  apply_unitary(s, gates::controlled(gates::X()), {1, 0});
  auto rho = partial_trace(s, {0});
  rho.validate();
  REQUIRE(adiff(rho.matrix()(0, 0), cx{0.5, 0}) < 1e-12);
  REQUIRE(adiff(rho.matrix()(0, 1), cx{0, 0}) < 1e-12);
  REQUIRE(adiff(rho.matrix()(1, 1), cx{0.5, 0}) < 1e-12);

  // Mixed-state overload agrees with the pure-state path.
  auto rho_via_dm = partial_trace(DensityMatrix::pure(s), {0});
  REQUIRE((rho.matrix() - rho_via_dm.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("partial trace keep-order maps keep[i] to bit i", "[qcore]") {
  // |q1 q0> = |1 0>: keeping {1, 0} must show qubit 1 in reduced bit 0.
  StateVector s(2);
  apply_unitary(s, gates::X(), {1});
  auto swapped = partial_trace(s, {1, 0});
  REQUIRE(adiff(swapped.matrix()(1, 1), cx{1, 0}) < 1e-12);
}

// Independent oracle for the trace distance of two single-qubit states:
// scan projective measurements |v(theta, phi)><v| over a fine grid and take
// the best bias. For qubit states the optimum is projective, so the scan
// converges to T from below.
namespace {
double best_projective_bias(const Eigen::Matrix2cd& a,
                            const Eigen::Matrix2cd& b) {
  double best = 0.0;
  const int steps = 2000;
  for (int i = 0; i <= steps; ++i) {
    double th = std::numbers::pi * i / steps;
    for (int j = 0; j < 64; ++j) {
      double ph = 2.0 * std::numbers::pi * j / 64;
      Eigen::Vector2cd v;
      v << std::cos(th / 2), std::polar(std::sin(th / 2), ph);
      double bias = ((v.adjoint() * (a - b) * v)(0, 0)).real();
      best = std::max(best, std::abs(bias));
    }
  }
  return best;
}
}  // namespace

TEST_CASE("trace distance |0> vs |+> matches the measurement scan", "[qcore]") {
  auto rho = DensityMatrix::pure(prepare(Basis::Z, 0));
  auto sig = DensityMatrix::pure(prepare(Basis::X, 0));
  double t = trace_distance(rho, sig);
  // Exact value for these two pure states.
  REQUIRE(t == Approx(0.7071067811865476).margin(1e-6));
  double scanned = best_projective_bias(rho.matrix(), sig.matrix());
  REQUIRE(t == Approx(scanned).margin(1e-5));
}

TEST_CASE("trace distance axioms", "[qcore]") {
  auto z0 = DensityMatrix::pure(prepare(Basis::Z, 0));
  auto z1 = DensityMatrix::pure(prepare(Basis::Z, 1));
  auto x0 = DensityMatrix::pure(prepare(Basis::X, 0));
  REQUIRE(trace_distance(z0, z0) == Approx(0.0).margin(1e-12));
  REQUIRE(trace_distance(z0, z1) == Approx(1.0).margin(1e-9));
  REQUIRE(trace_distance(z0, x0) == Approx(trace_distance(x0, z0)).margin(1e-12));
  // Invariance under a common unitary (here H: maps the pair (z0,x0) to
  // (x0,z0)).
  REQUIRE(trace_distance(z0, x0) == Approx(trace_distance(x0, z0)).margin(1e-12));
}

TEST_CASE("density matrix validation catches bad inputs", "[qcore]") {
  Eigen::Matrix2cd m;
  m << 0.5, cx(0, 0.3), cx(0, 0.3), 0.5;  // not hermitian (sign)
  REQUIRE_THROWS_AS(DensityMatrix(m).validate(), InvariantError);
  Eigen::Matrix2cd tr;
  tr << 0.9, 0, 0, 0.3;
  REQUIRE_THROWS_AS(DensityMatrix(tr).validate(), InvariantError);
  Eigen::Matrix2cd neg;
  neg << 1.2, 0, 0, -0.2;
  REQUIRE_THROWS_AS(DensityMatrix(neg).validate(), InvariantError);
  Eigen::MatrixXcd odd = Eigen::MatrixXcd::Identity(3, 3);
  REQUIRE_THROWS_AS(DensityMatrix(odd), DimensionError);
}

TEST_CASE("twelve qubit cap is enforced", "[qcore]") {
  REQUIRE_NOTHROW(StateVector(12));
  REQUIRE_THROWS_AS(StateVector(13), DimensionError);
}

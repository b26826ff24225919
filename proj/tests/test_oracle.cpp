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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sqkd/oracle.hpp"

namespace sqkd {
namespace {

ProtocolConfig scan_config(Protocol p) {
  ProtocolConfig cfg;
  cfg.protocol = p;
  cfg.n = 0;
  return cfg;
}

double total_mass(const std::vector<RoundAtom>& atoms) {
  double m = 0.0;
  for (const auto& a : atoms) m += a.prob;
  return m;
}

JointKey stats_key(const RunStats& st) {
  return {0, st.errors(RoundClass::ZCtrl), st.errors(RoundClass::XCtrl),
          st.errors(RoundClass::CtrlX), st.errors(RoundClass::SiftKey)};
}

TEST_CASE("enumeration source walks every path exactly once", "[oracle]") {
  // Two-level toy space: coin, then a skewed draw on heads and a forced
  // draw on tails. Expect three leaves with the product weights.
  EnumerationSource src;
  std::vector<std::pair<std::string, double>> leaves;
  do {
    src.begin_path();
    std::string label;
    const double coin[] = {0.5, 0.5};
    if (src.choose(coin) == 0) {
      label += 'h';
      const double skew[] = {0.25, 0.75};
      label += src.choose(skew) == 0 ? '0' : '1';
    } else {
      label += 't';
      const double forced[] = {1.0};
      REQUIRE(src.choose(forced) == 0);
    }
    leaves.emplace_back(label, src.path_probability());
  } while (src.advance());

  REQUIRE(leaves.size() == 3);
  CHECK(leaves[0].first == "h0");
  CHECK_THAT(leaves[0].second, Catch::Matchers::WithinAbs(0.125, 1e-15));
  CHECK(leaves[1].first == "h1");
  CHECK_THAT(leaves[1].second, Catch::Matchers::WithinAbs(0.375, 1e-15));
  CHECK(leaves[2].first == "t");
  CHECK_THAT(leaves[2].second, Catch::Matchers::WithinAbs(0.5, 1e-15));
}

TEST_CASE("enumeration source skips impossible outcomes", "[oracle]") {
  EnumerationSource src;
  const double dead_first[] = {0.0, 1.0};
  REQUIRE(src.choose(dead_first) == 1);
  REQUIRE(src.path_probability() == 1.0);
  REQUIRE_FALSE(src.advance());

  EnumerationSource other;
  const double dead_second[] = {1.0, 0.0};
  REQUIRE(other.choose(dead_second) == 0);
  REQUIRE_FALSE(other.advance());
}

TEST_CASE("enumeration source rejects diverging replays", "[oracle]") {
  EnumerationSource src;
  const double half[] = {0.5, 0.5};
  src.choose(half);
  REQUIRE(src.advance());
  src.begin_path();
  const double skew[] = {0.25, 0.75};
  CHECK_THROWS_AS(src.choose(skew), InvariantError);

  EnumerationSource arity;
  arity.choose(half);
  REQUIRE(arity.advance());
  arity.begin_path();
  const double third[] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  CHECK_THROWS_AS(arity.choose(third), InvariantError);
}

TEST_CASE("undisturbed round table has the textbook atoms", "[oracle]") {
  auto atoms = enumerate_round(scan_config(Protocol::P1), "none");
  REQUIRE(atoms.size() == 16);
  CHECK_THAT(total_mass(atoms), Catch::Matchers::WithinAbs(1.0, 1e-12));

  // Z-prep sift rounds resolve deterministically (4 leaves of 1/16), X-prep
  // sift rounds split on the readout (8 leaves of 1/32), ctrl rounds skip
  // the fresh-bit draw entirely (4 leaves of 1/8).
  int sift_z = 0, sift_x = 0, ctrl = 0;
  for (const auto& a : atoms) {
    REQUIRE_FALSE(a.record.mismatch());
    REQUIRE_FALSE(a.eve_state.has_value());
    REQUIRE_FALSE(a.eve_tag.has_value());
    if (a.record.bob_action == BobAction::Ctrl) {
      ++ctrl;
      CHECK_THAT(a.prob, Catch::Matchers::WithinAbs(0.125, 1e-12));
    } else if (a.record.alice_basis == Basis::Z) {
      ++sift_z;
      CHECK_THAT(a.prob, Catch::Matchers::WithinAbs(1.0 / 16, 1e-12));
    } else {
      ++sift_x;
      CHECK_THAT(a.prob, Catch::Matchers::WithinAbs(1.0 / 32, 1e-12));
    }
  }
  CHECK(sift_z == 4);
  CHECK(sift_x == 8);
  CHECK(ctrl == 4);
}

TEST_CASE("atom tables are normalized across strategies and noise",
          "[oracle]") {
  for (const char* attack :
       {"none", "ir:z:ret", "ir:x:fwd", "ir:z:both", "probe:0.8:ret",
        "phase:2.0:fwd", "mitm"}) {
    for (Protocol p : {Protocol::P1, Protocol::P2}) {
      auto atoms = enumerate_round(scan_config(p), attack);
      INFO(attack << " on " << protocol_name(p));
      CHECK_THAT(total_mass(atoms), Catch::Matchers::WithinAbs(1.0, 1e-9));
    }
  }

  ProtocolConfig noisy = scan_config(Protocol::P1);
  noisy.noise = {NoiseModel::Kind::Depolarizing, 0.3};
  CHECK_THAT(total_mass(enumerate_round(noisy, "probe:0.5:ret")),
             Catch::Matchers::WithinAbs(1.0, 1e-9));

  ProtocolConfig direct = scan_config(Protocol::QSDC);
  for (auto bit : {std::optional<int>(0), std::optional<int>(1),
                   std::optional<int>()}) {
    auto atoms = enumerate_round(direct, "mitm", bit);
    CHECK_THAT(total_mass(atoms), Catch::Matchers::WithinAbs(1.0, 1e-9));
  }
}

TEST_CASE("atom budget guard fires", "[oracle]") {
  CHECK_THROWS_AS(enumerate_round(
                      scan_config(Protocol::P1),
                      [] { return make_strategy("none"); }, std::nullopt,
                      /*max_atoms=*/4),
                  InvariantError);
}

TEST_CASE("bit-flip noise matches its closed forms", "[oracle]") {
  // Flip probability p on each leg: a Z-CTRL round survives iff the legs
  // agree (error 2p(1-p)); X eigenstates are flip-invariant so X-CTRL stays
  // clean; the sifted bit only rides the return leg (error p).
  const double p = 0.25;
  ProtocolConfig cfg = scan_config(Protocol::P1);
  cfg.noise = {NoiseModel::Kind::BitFlip, p};
  auto atoms = enumerate_round(cfg, "none");
  CHECK_THAT(total_mass(atoms), Catch::Matchers::WithinAbs(1.0, 1e-9));
  CHECK_THAT(*conditional_class_error(atoms, RoundClass::ZCtrl),
             Catch::Matchers::WithinAbs(2 * p * (1 - p), 1e-9));
  CHECK_THAT(*conditional_class_error(atoms, RoundClass::XCtrl),
             Catch::Matchers::WithinAbs(0.0, 1e-12));
  CHECK_THAT(*conditional_class_error(atoms, RoundClass::SiftKey),
             Catch::Matchers::WithinAbs(p, 1e-9));
}

TEST_CASE("intercept-resend disturbance and gain are exact", "[oracle]") {
  ProtocolConfig cfg = scan_config(Protocol::P1);
  auto atoms = enumerate_round(cfg, "ir:z:ret");

  CHECK_THAT(*conditional_class_error(atoms, RoundClass::XCtrl),
             Catch::Matchers::WithinAbs(0.5, 1e-9));
  CHECK_THAT(*conditional_class_error(atoms, RoundClass::ZCtrl),
             Catch::Matchers::WithinAbs(0.0, 1e-12));
  CHECK_THAT(*conditional_class_error(atoms, RoundClass::SiftKey),
             Catch::Matchers::WithinAbs(0.0, 1e-12));

  // Per-round alarm mass is 1/4 (X-CTRL) * 1/2, so two rounds detect with
  // probability 1 - (7/8)^2.
  CHECK_THAT(exact_detection_probability(cfg, "ir:z:ret", 2),
             Catch::Matchers::WithinAbs(15.0 / 64, 1e-12));

  // A Z measurement on the return leg reads Bob's fresh bit outright.
  CHECK_THAT(exact_eve_info(cfg, "ir:z:ret"),
             Catch::Matchers::WithinAbs(0.5, 1e-9));
  // On the forward leg she only sees Alice's bit, which is independent of
  // the key bit Bob later injects.
  CHECK_THAT(exact_eve_info(cfg, "ir:z:fwd"),
             Catch::Matchers::WithinAbs(0.0, 1e-9));
}

TEST_CASE("rotation probe matches its closed forms", "[oracle]") {
  ProtocolConfig cfg = scan_config(Protocol::P1);
  const double pi = std::numbers::pi;

  for (double theta : {0.3, 0.9, pi / 2}) {
    INFO("theta = " << theta);
    auto factory = [theta] {
      return std::unique_ptr<AttackStrategy>(
          new EntangleProbe(ProbeFamily::Rotation, theta, true));
    };
    auto atoms = enumerate_round(cfg, factory);
    CHECK_THAT(total_mass(atoms), Catch::Matchers::WithinAbs(1.0, 1e-9));
    CHECK_THAT(*conditional_class_error(atoms, RoundClass::XCtrl),
               Catch::Matchers::WithinAbs((1 - std::cos(theta)) / 2, 1e-9));
    CHECK_THAT(*conditional_class_error(atoms, RoundClass::ZCtrl),
               Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(exact_eve_info(cfg, factory),
               Catch::Matchers::WithinAbs(std::abs(std::sin(theta)) / 2,
                                          1e-9));
  }

  // Zero coupling is a no-op: invisible and worthless.
  auto idle = [] {
    return std::unique_ptr<AttackStrategy>(
        new EntangleProbe(ProbeFamily::Rotation, 0.0, true));
  };
  CHECK_THAT(round_detection_mass(Protocol::P1, enumerate_round(cfg, idle)),
             Catch::Matchers::WithinAbs(0.0, 1e-12));
  CHECK_THAT(exact_eve_info(cfg, idle),
             Catch::Matchers::WithinAbs(0.0, 1e-9));
}

TEST_CASE("phase probe matches its closed forms", "[oracle]") {
  ProtocolConfig cfg = scan_config(Protocol::P2);
  const double pi = std::numbers::pi;

  for (double phi : {0.7, 2.0, pi}) {
    INFO("phi = " << phi);
    auto factory = [phi] {
      return std::unique_ptr<AttackStrategy>(
          new EntangleProbe(ProbeFamily::Phase, phi, true));
    };
    auto atoms = enumerate_round(cfg, factory);
    CHECK_THAT(total_mass(atoms), Catch::Matchers::WithinAbs(1.0, 1e-9));
    CHECK_THAT(*conditional_class_error(atoms, RoundClass::CtrlX),
               Catch::Matchers::WithinAbs((1 - std::cos(phi)) / 4, 1e-9));
    CHECK_THAT(exact_eve_info(cfg, factory),
               Catch::Matchers::WithinAbs(std::abs(std::sin(phi / 2)) / 2,
                                          1e-9));
  }
}

TEST_CASE("baseline gains bracket the strategies", "[oracle]") {
  ProtocolConfig cfg = scan_config(Protocol::P1);
  CHECK_THAT(exact_eve_info(cfg, "none"),
             Catch::Matchers::WithinAbs(0.0, 1e-12));
  // The forger reads every sifted bit off her stored qubit.
  CHECK_THAT(exact_eve_info(cfg, "mitm"),
             Catch::Matchers::WithinAbs(0.5, 1e-9));
}

TEST_CASE("joint error law for clean runs is a point mass", "[oracle]") {
  ProtocolConfig cfg = scan_config(Protocol::P1);
  cfg.explicit_rounds = 4;
  JointPmf pmf = exact_error_joint(cfg, "none");
  REQUIRE(pmf.size() == 1);
  CHECK_THAT(pmf.at({0, 0, 0, 0, 0}), Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("joint error law folds iid rounds binomially", "[oracle]") {
  ProtocolConfig cfg = scan_config(Protocol::P1);
  cfg.explicit_rounds = 2;
  JointPmf pmf = exact_error_joint(cfg, "ir:z:ret");

  // Per round the only alarm mass is 1/8 in X-CTRL; two rounds make its
  // count Binomial(2, 1/8) and leave every other counter at zero.
  std::array<double, 3> ex_marginal{};
  for (const auto& [key, mass] : pmf) {
    CHECK(key[0] == 0);
    CHECK(key[1] == 0);
    CHECK(key[3] == 0);
    CHECK(key[4] == 0);
    REQUIRE(key[2] <= 2);
    ex_marginal[static_cast<std::size_t>(key[2])] += mass;
  }
  CHECK_THAT(ex_marginal[0],
             Catch::Matchers::WithinAbs(49.0 / 64, 1e-12));
  CHECK_THAT(ex_marginal[1],
             Catch::Matchers::WithinAbs(14.0 / 64, 1e-12));
  CHECK_THAT(ex_marginal[2], Catch::Matchers::WithinAbs(1.0 / 64, 1e-12));

  CHECK_THAT(joint_detection_probability(Protocol::P1, pmf),
             Catch::Matchers::WithinAbs(15.0 / 64, 1e-12));
}

TEST_CASE("direct-run joint tracks message consumption exactly", "[oracle]") {
  // Four rounds carrying a two-bit message against the forger. Bob sifts
  // fairly until the message is spent, then reflects without drawing, so
  // the run exhausts iff fewer than two of the four coins land sift:
  // mass 5/16. Completed runs have exactly two ctrl rounds, each of which
  // catches the forged qubit with probability 1/2.
  ProtocolConfig cfg = scan_config(Protocol::QSDC);
  cfg.explicit_rounds = 4;
  Bits message{1, 0};
  JointPmf pmf = exact_error_joint(cfg, "mitm", message);

  double mass = 0.0, exhausted = 0.0;
  for (const auto& [key, m] : pmf) {
    mass += m;
    if (key[0]) exhausted += m;
  }
  CHECK_THAT(mass, Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_THAT(exhausted, Catch::Matchers::WithinAbs(5.0 / 16, 1e-12));
  CHECK_THAT(joint_detection_probability(Protocol::QSDC, pmf),
             Catch::Matchers::WithinAbs((11.0 / 16) * (3.0 / 4), 1e-12));

  CHECK_THROWS_AS(exact_error_joint(cfg, "mitm"), ConfigError);
}

TEST_CASE("joint law agrees with sampled runs", "[oracle]") {
  ProtocolConfig cfg = scan_config(Protocol::P1);
  cfg.explicit_rounds = 4;
  JointPmf exact = exact_error_joint(cfg, "ir:z:ret");

  const int trials = 4000;
  std::map<JointKey, double> sampled;
  for (int t = 0; t < trials; ++t) {
    PhiloxSource src(424242, static_cast<std::uint64_t>(t));
    auto eve = make_strategy("ir:z:ret");
    RunResult res = run_rounds_only(cfg, *eve, src);
    sampled[stats_key(res.stats)] += 1.0 / trials;
  }

  double tv = 0.0;
  for (const auto& [key, p] : exact) {
    auto it = sampled.find(key);
    tv += std::abs(p - (it == sampled.end() ? 0.0 : it->second));
  }
  for (const auto& [key, p] : sampled)
    if (!exact.count(key)) tv += p;
  CHECK(tv / 2 < 0.05);
}

TEST_CASE("oracle guards reject misuse", "[oracle]") {
  ProtocolConfig direct = scan_config(Protocol::QSDC);
  CHECK_THROWS_AS(exact_eve_info(direct, "mitm"), InvariantError);
  CHECK_THROWS_AS(exact_detection_probability(direct, "mitm", 4),
                  InvariantError);
  CHECK_THROWS_AS(
      robustness_scan(Protocol::QSDC, ProbeFamily::Rotation, {0.1}),
      InvariantError);
}

TEST_CASE("robustness scan ties gain to disturbance", "[oracle]") {
  const double pi = std::numbers::pi;
  std::vector<double> grid{0.0, 0.3, pi / 4, pi / 2};
  auto points =
      robustness_scan(Protocol::P1, ProbeFamily::Rotation, grid, 4);
  REQUIRE(points.size() == grid.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    CHECK_THAT(points[i].info,
               Catch::Matchers::WithinAbs(std::abs(std::sin(grid[i])) / 2,
                                          1e-9));
    if (points[i].info > kScanEps) CHECK(points[i].disturbance > kScanEps);
    CHECK(points[i].atoms > 0);
  }
  CHECK_FALSE(scan_has_finding(points));

  // A silent point with gain would be flagged.
  std::vector<ScanPoint> rigged = points;
  rigged[2].disturbance = 0.0;
  CHECK(scan_has_finding(rigged));

  std::string csv = scan_csv(points, Protocol::P1, ProbeFamily::Rotation);
  CHECK(csv.rfind("theta,info,disturbance,atoms,protocol,family\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') ==
        static_cast<long>(grid.size()) + 1);
}

}  // namespace
}  // namespace sqkd

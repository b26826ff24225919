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

#include "sqkd/protocol.hpp"
#include "sqkd/strategies.hpp"

using namespace sqkd;

namespace {

ProtocolConfig base_config(Protocol p, int n, std::uint64_t seed) {
  ProtocolConfig cfg;
  cfg.protocol = p;
  cfg.n = n;
  cfg.seed = seed;
  return cfg;
}

RunResult quiet_run(const ProtocolConfig& cfg) {
  NoEve eve;
  PhiloxSource src(cfg.seed, 0);
  return run_qkd(cfg, eve, src);
}

// Counts channel legs so the deferred-measurement schedule is checkable:
// every quantum transmission must precede the sift-position broadcast.
struct OrderSpy final : AttackStrategy {
  int legs = 0;
  int legs_when_positions_arrived = -1;
  int legs_when_seed_arrived = -1;
  std::string name() const override { return "spy"; }
  void on_forward(FlightState&, int, RandomSource&,
                  MeasurementAudit&) override {
    ++legs;
  }
  void on_return(FlightState&, int, RandomSource&,
                 MeasurementAudit&) override {
    ++legs;
  }
  void on_classical(const ClassicalMessage& msg, EveRunView&,
                    RandomSource&) override {
    if (std::holds_alternative<QsdcSiftPositions>(msg.payload))
      legs_when_positions_arrived = legs;
    if (std::holds_alternative<BlockCodingAnnouncement>(msg.payload))
      legs_when_seed_arrived = legs;
  }
};

}  // namespace

TEST_CASE("first protocol completes cleanly on an ideal channel",
          "[protocol]") {
  ProtocolConfig cfg = base_config(Protocol::P1, 336, 3);
  RunResult r = quiet_run(cfg);

  REQUIRE(r.completed);
  CHECK_FALSE(r.abort_reason.has_value());
  CHECK_FALSE(r.detected);
  CHECK(r.stats.rounds == 3360);
  CHECK(r.stats.errors(RoundClass::ZCtrl) == 0);
  CHECK(r.stats.errors(RoundClass::XCtrl) == 0);
  CHECK(r.stats.errors(RoundClass::SiftKey) == 0);
  CHECK(r.stats.test_errors == 0);
  CHECK(r.stats.info_len == 336);
  CHECK(r.stats.leak == 3 * 84 + 50);
  CHECK(r.stats.key_length == 336 - 302 - 32);
  REQUIRE_FALSE(r.alice_key.empty());
  CHECK(r.alice_key == r.bob_key);
  CHECK(static_cast<int>(r.alice_key.size()) == r.stats.key_length);

  // Limited Bob: he never measured; Alice measured every round.
  CHECK(r.audit.bob == 0);
  CHECK(r.audit.alice == r.stats.rounds);
  CHECK(r.audit.eve == 0);

  // Class counts partition the rounds.
  int total = 0;
  for (int c = 0; c < 5; ++c)
    total += r.stats.class_counts[static_cast<std::size_t>(c)];
  CHECK(total == r.stats.rounds);
}

TEST_CASE("second protocol completes cleanly on an ideal channel",
          "[protocol]") {
  ProtocolConfig cfg = base_config(Protocol::P2, 336, 4);
  RunResult r = quiet_run(cfg);

  REQUIRE(r.completed);
  CHECK(r.stats.errors(RoundClass::CtrlX) == 0);
  CHECK(r.stats.count(RoundClass::CtrlX) > 0);
  CHECK(r.stats.errors(RoundClass::SiftKey) == 0);
  CHECK(r.alice_key == r.bob_key);
  CHECK_FALSE(r.alice_key.empty());
  CHECK(r.audit.bob == 0);

  // The public bases are Alice's measurement bases, one per round.
  const auto* bases = r.transcript.find<BasisAnnouncement>();
  REQUIRE(bases != nullptr);
  CHECK(static_cast<int>(bases->bases.size()) == r.stats.rounds);
}

TEST_CASE("direct communication delivers the payload untouched",
          "[protocol]") {
  Bits payload = bits_from_string("1011001110001111");
  bool delivered_once = false;
  for (std::uint64_t seed = 0; seed < 10 && !delivered_once; ++seed) {
    ProtocolConfig cfg = base_config(Protocol::QSDC, 16, seed);
    NoEve eve;
    PhiloxSource src(seed, 0);
    QsdcResult q = run_qsdc(cfg, eve, src, payload);
    if (q.run.abort_reason == AbortReason::MessageExhausted) continue;

    delivered_once = true;
    REQUIRE(q.run.completed);
    REQUIRE(q.delivered.has_value());
    CHECK(*q.delivered == payload);
    CHECK_FALSE(q.eve_detected);
    CHECK(q.run.stats.errors(RoundClass::ZCtrl) == 0);
    CHECK(q.run.stats.errors(RoundClass::XCtrl) == 0);
    CHECK(q.run.stats.test_errors == 0);
    CHECK(q.run.audit.bob == 0);
    CHECK(q.layout.payload_len == 16);
    CHECK(q.layout.code_len == 28);
    CHECK(q.layout.encoded_len == q.layout.code_len + q.layout.est_len);
    CHECK(q.run.transcript.find<BlockCodingAnnouncement>() != nullptr);
    CHECK(q.run.transcript.find<BlockCodingWithheld>() == nullptr);
  }
  REQUIRE(delivered_once);
}

TEST_CASE("all quantum legs precede the sift-position broadcast",
          "[protocol]") {
  Bits payload = bits_from_string("10110011");
  OrderSpy spy;
  ProtocolConfig cfg = base_config(Protocol::QSDC, 8, 5);
  PhiloxSource src(cfg.seed, 0);
  QsdcResult q = run_qsdc(cfg, spy, src, payload);

  CHECK(spy.legs == 2 * q.run.stats.rounds);
  if (q.run.completed) {
    CHECK(spy.legs_when_positions_arrived == spy.legs);
    CHECK(spy.legs_when_seed_arrived == spy.legs);
    // Receipt confirmation, then positions, then the coding seed.
    int seq_receipt = -1, seq_positions = -1, seq_seed = -1;
    for (const auto& m : q.run.transcript) {
      if (std::holds_alternative<ReceiptConfirmation>(m.payload))
        seq_receipt = m.seq;
      if (std::holds_alternative<QsdcSiftPositions>(m.payload))
        seq_positions = m.seq;
      if (std::holds_alternative<BlockCodingAnnouncement>(m.payload))
        seq_seed = m.seq;
    }
    REQUIRE(seq_receipt >= 0);
    REQUIRE(seq_positions > seq_receipt);
    REQUIRE(seq_seed > seq_positions);
  }
}

TEST_CASE("identical seeds reproduce a run bit for bit", "[protocol]") {
  ProtocolConfig cfg = base_config(Protocol::P1, 64, 17);
  RunResult a = quiet_run(cfg);
  RunResult b = quiet_run(cfg);
  CHECK(run_result_json(a, true).dump() == run_result_json(b, true).dump());

  cfg.seed = 18;
  RunResult c = quiet_run(cfg);
  CHECK(run_result_json(a, true).dump() != run_result_json(c, true).dump());
}

TEST_CASE("bit-flip noise shows up in the right classes", "[protocol]") {
  // A flip on either leg disturbs a reflected Z state: rate 2p(1-p).
  // X eigenstates are invariant under X, so X control rounds stay clean;
  // Bob's fresh bit only crosses the return leg, so sift errors sit at p.
  const double p = 0.05;
  RunStats total;
  for (std::uint64_t seed = 30; seed < 33; ++seed) {
    ProtocolConfig cfg = base_config(Protocol::P1, 336, seed);
    cfg.noise = NoiseModel{NoiseModel::Kind::BitFlip, p};
    cfg.p_ctrl_threshold = 1.0;  // keep the run alive despite the noise
    cfg.p_test_threshold = 1.0;
    RunResult r = quiet_run(cfg);
    for (int c = 0; c < 5; ++c) {
      total.class_counts[static_cast<std::size_t>(c)] +=
          r.stats.class_counts[static_cast<std::size_t>(c)];
      total.class_errors[static_cast<std::size_t>(c)] +=
          r.stats.class_errors[static_cast<std::size_t>(c)];
    }
  }
  CHECK(total.errors(RoundClass::XCtrl) == 0);
  REQUIRE(total.count(RoundClass::ZCtrl) >= 2000);
  double z_rate = static_cast<double>(total.errors(RoundClass::ZCtrl)) /
                  total.count(RoundClass::ZCtrl);
  CHECK(z_rate > 0.075);
  CHECK(z_rate < 0.115);  // 2p(1-p) = 0.095
  double sift_rate = static_cast<double>(total.errors(RoundClass::SiftKey)) /
                     total.count(RoundClass::SiftKey);
  CHECK(sift_rate > 0.035);
  CHECK(sift_rate < 0.065);  // p = 0.05
}

TEST_CASE("abort taxonomy", "[protocol]") {
  SECTION("too few sifted rounds") {
    ProtocolConfig cfg = base_config(Protocol::P1, 336, 40);
    cfg.bob_sift_prob = 0.05;
    RunResult r = quiet_run(cfg);
    REQUIRE(r.abort_reason.has_value());
    CHECK(*r.abort_reason == AbortReason::TooFewSifted);
    CHECK(r.alice_key.empty());
    const auto* abort_msg = r.transcript.find<AbortMessage>();
    REQUIRE(abort_msg != nullptr);
    CHECK(abort_msg->reason == "too_few_sifted");
  }

  SECTION("control error rate past threshold") {
    ProtocolConfig cfg = base_config(Protocol::P1, 336, 41);
    cfg.noise = NoiseModel{NoiseModel::Kind::BitFlip, 0.25};
    RunResult r = quiet_run(cfg);
    REQUIRE(r.abort_reason.has_value());
    CHECK(*r.abort_reason == AbortReason::CtrlErrorRate);
    CHECK(r.detected);
    // The test stage never went public.
    CHECK(r.transcript.find<TestSelection>() == nullptr);
  }

  SECTION("test error rate past threshold") {
    ProtocolConfig cfg = base_config(Protocol::P1, 336, 42);
    cfg.noise = NoiseModel{NoiseModel::Kind::BitFlip, 0.25};
    cfg.p_ctrl_threshold = 1.0;  // a rate cannot exceed one
    RunResult r = quiet_run(cfg);
    REQUIRE(r.abort_reason.has_value());
    CHECK(*r.abort_reason == AbortReason::TestErrorRate);
    CHECK(r.transcript.find<TestSelection>() != nullptr);
    CHECK(r.transcript.find<EccData>() == nullptr);
  }

  SECTION("residual key length nonpositive") {
    // n = 64 leaks 3*16 + 50 = 98 bits plus the 32-bit margin: nothing left.
    ProtocolConfig cfg = base_config(Protocol::P1, 64, 43);
    RunResult r = quiet_run(cfg);
    REQUIRE(r.abort_reason.has_value());
    CHECK(*r.abort_reason == AbortReason::KeyLengthNonpositive);
    CHECK(r.transcript.find<EccData>() != nullptr);
    CHECK(r.transcript.find<PaData>() == nullptr);
  }

  SECTION("reconciliation verify failure") {
    bool found = false;
    for (std::uint64_t seed = 50; seed < 62 && !found; ++seed) {
      ProtocolConfig cfg = base_config(Protocol::P1, 336, seed);
      cfg.noise = NoiseModel{NoiseModel::Kind::BitFlip, 0.10};
      cfg.p_ctrl_threshold = 1.0;
      cfg.p_test_threshold = 1.0;
      RunResult r = quiet_run(cfg);
      if (r.abort_reason == AbortReason::EccVerifyFail) {
        found = true;
        CHECK(r.alice_key.empty());
        CHECK(r.transcript.find<PaData>() == nullptr);
      }
    }
    CHECK(found);
  }

  SECTION("message exhausted before fully sent") {
    Bits payload = bits_from_string("1011001110001111");
    ProtocolConfig cfg = base_config(Protocol::QSDC, 16, 44);
    QsdcLayout layout = QsdcLayout::from_payload(16, cfg.qsdc_est_fraction);
    cfg.explicit_rounds = layout.encoded_len;  // needs ~2x to succeed
    NoEve eve;
    PhiloxSource src(cfg.seed, 0);
    QsdcResult q = run_qsdc(cfg, eve, src, payload);
    REQUIRE(q.run.abort_reason.has_value());
    CHECK(*q.run.abort_reason == AbortReason::MessageExhausted);
    CHECK_FALSE(q.delivered.has_value());
    CHECK_FALSE(q.eve_detected);
    // Alice never measured: the run died before sift positions went out.
    CHECK(q.run.audit.alice == 0);
    CHECK(q.run.transcript.find<QsdcSiftPositions>() == nullptr);
    CHECK(q.run.transcript.find<BlockCodingWithheld>() == nullptr);
  }
}

TEST_CASE("rounds-only mode runs the quantum phase alone", "[protocol]") {
  SECTION("first protocol with explicit rounds") {
    ProtocolConfig cfg = base_config(Protocol::P1, 0, 60);
    cfg.explicit_rounds = 8;
    NoEve eve;
    PhiloxSource src(cfg.seed, 0);
    RunResult r = run_rounds_only(cfg, eve, src);
    CHECK(r.completed);
    CHECK(r.stats.rounds == 8);
    CHECK(r.records.size() == 8);
    CHECK(r.stats.key_length == 0);
    CHECK(r.transcript.find<SiftAnnouncement>() != nullptr);
    CHECK(r.transcript.find<TestSelection>() == nullptr);
    CHECK(r.audit.alice == 8);
    CHECK(r.audit.bob == 0);
  }

  SECTION("round count derives from n when not explicit") {
    ProtocolConfig cfg = base_config(Protocol::P1, 4, 61);
    NoEve eve;
    PhiloxSource src(cfg.seed, 0);
    RunResult r = run_rounds_only(cfg, eve, src);
    CHECK(r.stats.rounds == 40);
  }

  SECTION("second protocol") {
    ProtocolConfig cfg = base_config(Protocol::P2, 0, 62);
    cfg.explicit_rounds = 8;
    NoEve eve;
    PhiloxSource src(cfg.seed, 0);
    RunResult r = run_rounds_only(cfg, eve, src);
    CHECK(r.stats.rounds == 8);
    int total = 0;
    for (int c = 0; c < 5; ++c)
      total += r.stats.class_counts[static_cast<std::size_t>(c)];
    CHECK(total == 8);
  }

  SECTION("direct protocol measures immediately here") {
    ProtocolConfig cfg = base_config(Protocol::QSDC, 0, 63);
    cfg.explicit_rounds = 8;
    Bits message = bits_from_string("10101010");
    NoEve eve;
    PhiloxSource src(cfg.seed, 0);
    RunResult r = run_rounds_only(cfg, eve, src, message);
    CHECK(r.completed);
    CHECK(r.audit.alice == 8);
    CHECK_FALSE(r.detected);  // nobody interfered
  }

  SECTION("direct protocol needs message bits") {
    ProtocolConfig cfg = base_config(Protocol::QSDC, 0, 64);
    cfg.explicit_rounds = 8;
    NoEve eve;
    PhiloxSource src(cfg.seed, 0);
    CHECK_THROWS_AS(run_rounds_only(cfg, eve, src), ConfigError);
  }
}

TEST_CASE("dispatch guards", "[protocol]") {
  NoEve eve;
  PhiloxSource src(0, 0);

  ProtocolConfig qsdc = base_config(Protocol::QSDC, 16, 0);
  CHECK_THROWS_AS(run_qkd(qsdc, eve, src), InvariantError);

  ProtocolConfig p1 = base_config(Protocol::P1, 16, 0);
  CHECK_THROWS_AS(run_qsdc(p1, eve, src, bits_from_string("1010")),
                  InvariantError);

  ProtocolConfig zero = base_config(Protocol::P1, 0, 0);
  CHECK_THROWS_AS(run_qkd(zero, eve, src), ConfigError);

  ProtocolConfig ok = base_config(Protocol::QSDC, 4, 0);
  CHECK_THROWS_AS(run_qsdc(ok, eve, src, Bits{}), ConfigError);
}

TEST_CASE("run serialization carries the full outcome", "[protocol]") {
  ProtocolConfig cfg = base_config(Protocol::P1, 336, 70);
  RunResult r = quiet_run(cfg);
  ordered_json j = run_result_json(r, true);

  CHECK(j["protocol"] == "p1");
  CHECK(j["attack"] == "none");
  CHECK(j["outcome"] == "completed");
  CHECK(j["abort_reason"].is_null());
  CHECK(j["detected"] == false);
  CHECK(j["counts"]["sift_key"].get<int>() >= 2 * 336);
  CHECK(j["error_rates"]["z_ctrl"].get<double>() == 0.0);
  CHECK(j["key_length"] == 2);
  CHECK(j["keys_equal"] == true);
  CHECK(j["audit"]["bob"] == 0);
  CHECK(j["records"].size() == 3360);
  CHECK(j["records"][0].contains("mismatch"));
  CHECK(j["transcript"].is_array());

  // Compact form leaves the bulky parts out.
  ordered_json small = run_result_json(r, false);
  CHECK_FALSE(small.contains("records"));
  CHECK_FALSE(small.contains("transcript"));
}

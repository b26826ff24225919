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

#include <optional>
#include <utility>
#include <vector>

#include "sqkd/config.hpp"
#include "sqkd/qsdc_code.hpp"
#include "sqkd/strategy.hpp"

namespace sqkd {

struct RoundOutcome {
  RoundRecord record;
  FlightState state;
  bool consumed = false;  // a message bit went out (direct runs only)
};

inline RoundClass classify_round(Protocol p, BobAction action, Basis prep,
                                 std::optional<Basis> meas) {
  switch (p) {
    case Protocol::P1:
      if (action == BobAction::Sift)
        return prep == Basis::Z ? RoundClass::SiftKey : RoundClass::Discard;
      return prep == Basis::Z ? RoundClass::ZCtrl : RoundClass::XCtrl;
    case Protocol::P2:
      if (!meas) return RoundClass::Discard;
      if (action == BobAction::Sift && *meas == Basis::Z)
        return RoundClass::SiftKey;
      if (action == BobAction::Ctrl && *meas == Basis::X)
        return RoundClass::CtrlX;
      return RoundClass::Discard;
    case Protocol::QSDC:
      if (action == BobAction::Sift) return RoundClass::SiftKey;
      return prep == Basis::Z ? RoundClass::ZCtrl : RoundClass::XCtrl;
  }
  return RoundClass::Discard;
}

// One ping-pong round. Every random event goes through `rs` in a fixed
// order, so a Monte Carlo source and the enumeration source walk the exact
// same tree:
//   1. Alice's preparation (first protocol / direct runs: basis, then bit;
//      second protocol: none, she always sends |+>)
//   2. forward leg (noise and Eve per channel order)
//   3. Bob's SIFT/CTRL choice; on SIFT the fresh bit (QKD draws it, direct
//      runs take the next message bit without a draw). Once the message is
//      exhausted Bob reflects unconditionally and makes no choice at all.
//   4. return leg
//   5. Alice's measurement when `measure_now` (second protocol draws her
//      basis first; direct runs measure later, after sift positions are
//      public)
//   6. Eve's end-of-round bookkeeping
inline RoundOutcome run_round(const ProtocolConfig& cfg, int round,
                              QuantumChannel& channel, AttackStrategy& eve,
                              RandomSource& rs, MeasurementAudit& audit,
                              std::optional<int> qsdc_bit, bool measure_now,
                              bool retained) {
  RoundRecord rec;
  rec.index = round;

  if (cfg.protocol == Protocol::P2) {
    rec.alice_basis = Basis::X;
    rec.alice_bit = 0;
  } else {
    rec.alice_basis = rs.bit() ? Basis::X : Basis::Z;
    rec.alice_bit = rs.bit();
  }
  FlightState fs(prepare(rec.alice_basis, rec.alice_bit));

  channel.transmit_forward(fs, round, rs, audit);

  bool sift = false;
  const bool forced_ctrl = cfg.protocol == Protocol::QSDC && !qsdc_bit;
  if (!forced_ctrl) sift = rs.bernoulli(cfg.bob_sift_prob);

  bool consumed = false;
  if (sift) {
    rec.bob_action = BobAction::Sift;
    int fresh;
    if (cfg.protocol == Protocol::QSDC) {
      fresh = *qsdc_bit;
      consumed = true;
    } else {
      fresh = rs.bit();
    }
    rec.bob_fresh_bit = fresh;
    // The received qubit leaves circulation untouched; Bob cannot measure.
    fs.swap_transit(SlotRole::Environment, prepare(Basis::Z, fresh));
  } else {
    rec.bob_action = BobAction::Ctrl;
  }

  channel.transmit_return(fs, round, rs, audit);

  std::optional<Basis> meas;
  if (measure_now) {
    switch (cfg.protocol) {
      case Protocol::P1:
        meas = rec.alice_basis;
        break;
      case Protocol::P2:
        meas = rs.bit() ? Basis::X : Basis::Z;
        break;
      case Protocol::QSDC:
        meas = rec.bob_action == BobAction::Sift ? Basis::Z : rec.alice_basis;
        break;
    }
    rec.alice_meas_basis = *meas;
    rec.alice_meas_bit =
        measure_slot(fs, fs.transit(), *meas, Actor::Alice, rs, audit);
  }
  rec.cls = classify_round(cfg.protocol, rec.bob_action, rec.alice_basis, meas);

  eve.end_round(round, fs, retained, rs, audit);
  return RoundOutcome{std::move(rec), std::move(fs), consumed};
}

struct RunResult {
  ProtocolConfig config;
  std::string attack;
  RunStats stats;
  bool completed = false;
  std::optional<AbortReason> abort_reason;
  bool detected = false;  // any check-class mismatch occurred
  Bits alice_key;
  Bits bob_key;
  std::vector<RoundRecord> records;
  Transcript transcript;
  MeasurementAudit audit;
  EveReport eve_report;
  double eve_sift_accuracy = 0.0;
  int eve_scored = 0;  // key rounds the accuracy is averaged over
};

struct QsdcResult {
  RunResult run;
  QsdcLayout layout;
  std::optional<Bits> delivered;   // Alice's decoded payload
  bool eve_detected = false;       // a failed check kept the seed secret
  double eve_payload_info = 0.0;   // fraction of payload bits Eve recovered
};

namespace detail {

inline bool exceeds(std::optional<double> rate, double threshold) {
  return rate.has_value() && *rate > threshold;
}

inline void tally(RunStats& stats, const std::vector<RoundRecord>& records) {
  for (const auto& rec : records) {
    ++stats.class_counts[static_cast<std::size_t>(rec.cls)];
    if (rec.mismatch())
      ++stats.class_errors[static_cast<std::size_t>(rec.cls)];
  }
}

inline void score_eve(RunResult& res, const std::vector<int>& scope) {
  std::map<int, int> guess;
  for (const auto& g : res.eve_report.sift_guesses) guess[g.round] = g.bit;
  int correct = 0, scored = 0;
  for (int r : scope) {
    auto it = guess.find(r);
    if (it == guess.end()) continue;
    const RoundRecord& rec = res.records[static_cast<std::size_t>(r)];
    if (rec.bob_fresh_bit < 0) continue;
    ++scored;
    if (it->second == rec.bob_fresh_bit) ++correct;
  }
  res.eve_scored = scored;
  res.eve_sift_accuracy =
      scored > 0 ? static_cast<double>(correct) / scored : 0.0;
}

inline void check_bob_never_measured(const MeasurementAudit& audit) {
  if (audit.bob != 0) throw InvariantError("bob measured during the run");
}

}  // namespace detail

// Full key-distribution run (first or second protocol): N quantum rounds,
// sifting, control checks, error testing, reconciliation, amplification.
inline RunResult run_qkd(const ProtocolConfig& cfg, AttackStrategy& eve,
                         PhiloxSource& src) {
  cfg.validate();
  if (cfg.protocol == Protocol::QSDC)
    throw InvariantError("direct-communication runs use run_qsdc");
  if (cfg.n < 1)
    throw ConfigError("full runs need n >= 1 (run_rounds_only covers n = 0)");

  RunResult res;
  res.config = cfg;
  res.attack = eve.name();
  const int rounds = cfg.rounds();
  res.stats.rounds = rounds;

  QuantumChannel channel(cfg.noise, eve, cfg.noise_order_flipped);
  RoundStore store;  // key distribution retains no round states
  EveRunView view(&store, &res.audit);
  auto say = [&](Sender sender, MessagePayload payload) {
    const ClassicalMessage& m =
        res.transcript.broadcast(sender, std::move(payload));
    eve.on_classical(m, view, src);
  };

  res.records.reserve(static_cast<std::size_t>(rounds));
  std::vector<int> sift_rounds;
  for (int r = 0; r < rounds; ++r) {
    RoundOutcome out = run_round(cfg, r, channel, eve, src, res.audit,
                                 std::nullopt, /*measure_now=*/true,
                                 /*retained=*/false);
    if (out.record.bob_action == BobAction::Sift) sift_rounds.push_back(r);
    res.records.push_back(out.record);
  }
  detail::tally(res.stats, res.records);

  {
    std::vector<Basis> bases(static_cast<std::size_t>(rounds));
    for (int r = 0; r < rounds; ++r) {
      const auto& rec = res.records[static_cast<std::size_t>(r)];
      // The second protocol hides the preparation (always |+>); what gets
      // compared publicly is Alice's measurement basis.
      bases[static_cast<std::size_t>(r)] = cfg.protocol == Protocol::P2
                                               ? rec.alice_meas_basis
                                               : rec.alice_basis;
    }
    say(Sender::Alice, BasisAnnouncement{std::move(bases)});
  }
  say(Sender::Bob, SiftAnnouncement{sift_rounds});

  std::vector<int> key_rounds;
  for (const auto& rec : res.records)
    if (rec.cls == RoundClass::SiftKey) key_rounds.push_back(rec.index);

  std::optional<AbortReason> abort;
  if (static_cast<int>(key_rounds.size()) < 2 * cfg.n)
    abort = AbortReason::TooFewSifted;

  if (!abort) {
    const double thr = cfg.p_ctrl_threshold;
    bool bad =
        cfg.protocol == Protocol::P2
            ? detail::exceeds(res.stats.error_rate(RoundClass::CtrlX), thr)
            : detail::exceeds(res.stats.error_rate(RoundClass::ZCtrl), thr) ||
                  detail::exceeds(res.stats.error_rate(RoundClass::XCtrl), thr);
    if (bad) abort = AbortReason::CtrlErrorRate;
  }

  std::vector<int> info_rounds;
  if (static_cast<int>(key_rounds.size()) >= 2 * cfg.n) {
    auto [test_rounds, remaining] =
        select_test_bits(key_rounds, cfg.n, src.engine());
    Bits a_test, b_test;
    for (int r : test_rounds) {
      const auto& rec = res.records[static_cast<std::size_t>(r)];
      a_test.push_back(static_cast<std::uint8_t>(rec.alice_meas_bit));
      b_test.push_back(static_cast<std::uint8_t>(rec.bob_fresh_bit));
    }
    res.stats.test_count = static_cast<int>(test_rounds.size());
    res.stats.test_errors = static_cast<int>(hamming_distance(a_test, b_test));
    if (!abort) {
      say(Sender::Bob, TestSelection{test_rounds});
      say(Sender::Alice, TestValues{a_test});
      if (detail::exceeds(res.stats.test_error_rate(), cfg.p_test_threshold))
        abort = AbortReason::TestErrorRate;
      else
        info_rounds.assign(remaining.begin(), remaining.begin() + cfg.n);
    }
  }

  if (!abort) {
    Bits a_info, b_info;
    for (int r : info_rounds) {
      const auto& rec = res.records[static_cast<std::size_t>(r)];
      a_info.push_back(static_cast<std::uint8_t>(rec.alice_meas_bit));
      b_info.push_back(static_cast<std::uint8_t>(rec.bob_fresh_bit));
    }
    res.stats.info_len = cfg.n;
    EccOutcome ecc = ecc_reconcile(a_info, b_info, cfg.ecc, src.engine());
    say(Sender::Bob, ecc.announced);
    res.stats.leak = ecc.leak;
    if (!ecc.verified) {
      abort = AbortReason::EccVerifyFail;
    } else {
      int m = pa_output_length(cfg.n, ecc.leak, cfg.security_margin_s);
      if (m <= 0) {
        abort = AbortReason::KeyLengthNonpositive;
      } else {
        Bits seed = draw_bits(src.engine(),
                              static_cast<std::size_t>(m + cfg.n - 1));
        say(Sender::Bob, PaData{m, seed});
        res.alice_key = toeplitz_hash(ecc.corrected, seed, m);
        res.bob_key = toeplitz_hash(b_info, seed, m);
        res.stats.key_length = m;
      }
    }
  }

  if (abort) {
    Sender who = (*abort == AbortReason::CtrlErrorRate ||
                  *abort == AbortReason::TestErrorRate ||
                  *abort == AbortReason::EccVerifyFail)
                     ? Sender::Alice
                     : Sender::Bob;
    say(who, AbortMessage{abort_reason_name(*abort)});
  }
  res.abort_reason = abort;
  res.completed = !abort.has_value();
  res.detected = disturbance_detected(cfg.protocol, res.stats);

  res.eve_report = eve.finalize(res.transcript, view, src);
  detail::score_eve(res, info_rounds.empty() ? key_rounds : info_rounds);
  detail::check_bob_never_measured(res.audit);
  return res;
}

// Direct-communication run: Bob's fresh bits ARE the encoded message, Alice
// keeps every returned qubit unmeasured until Bob reveals which rounds carry
// message bits, and the decoding seed is only announced once the checks pass.
inline QsdcResult run_qsdc(const ProtocolConfig& cfg, AttackStrategy& eve,
                           PhiloxSource& src, const Bits& payload) {
  cfg.validate();
  if (cfg.protocol != Protocol::QSDC)
    throw InvariantError("run_qsdc needs a direct-communication config");
  if (payload.empty()) throw ConfigError("payload must be nonempty");

  QsdcResult qres;
  RunResult& res = qres.run;
  res.config = cfg;
  res.attack = eve.name();

  const std::uint64_t coding_seed = src.engine().next_u64();
  QsdcMessage msg = make_qsdc_message(payload, coding_seed,
                                      cfg.qsdc_est_fraction, src.engine());
  qres.layout = msg.layout;
  const int rounds = cfg.qsdc_rounds(msg.layout.encoded_len);
  res.stats.rounds = rounds;
  res.stats.info_len = msg.layout.payload_len;

  QuantumChannel channel(cfg.noise, eve, cfg.noise_order_flipped);
  RoundStore store(static_cast<std::size_t>(rounds));
  EveRunView view(&store, &res.audit);
  auto say = [&](Sender sender, MessagePayload payload_msg) {
    const ClassicalMessage& m =
        res.transcript.broadcast(sender, std::move(payload_msg));
    eve.on_classical(m, view, src);
  };

  say(Sender::Bob, QsdcStart{msg.layout.encoded_len, msg.layout.payload_len});

  int consumed = 0;
  std::vector<int> sift_rounds;
  res.records.reserve(static_cast<std::size_t>(rounds));
  for (int r = 0; r < rounds; ++r) {
    std::optional<int> bit;
    if (consumed < msg.layout.encoded_len)
      bit = msg.encoded[static_cast<std::size_t>(consumed)];
    RoundOutcome out = run_round(cfg, r, channel, eve, src, res.audit, bit,
                                 /*measure_now=*/false, /*retained=*/true);
    if (out.consumed) {
      sift_rounds.push_back(r);
      ++consumed;
    }
    res.records.push_back(out.record);
    store[static_cast<std::size_t>(r)].emplace(std::move(out.state));
  }
  say(Sender::Alice, ReceiptConfirmation{});

  std::optional<AbortReason> abort;
  if (consumed < msg.layout.encoded_len) {
    // The round budget ran out mid-message; nothing secret was at stake yet,
    // so Bob aborts without withholding anything and Alice never measures.
    abort = AbortReason::MessageExhausted;
    say(Sender::Bob, AbortMessage{abort_reason_name(*abort)});
  } else {
    say(Sender::Bob, QsdcSiftPositions{sift_rounds});
    for (int r = 0; r < rounds; ++r) {
      auto& rec = res.records[static_cast<std::size_t>(r)];
      auto& fs = *store[static_cast<std::size_t>(r)];
      Basis mb = rec.bob_action == BobAction::Sift ? Basis::Z : rec.alice_basis;
      rec.alice_meas_basis = mb;
      rec.alice_meas_bit =
          measure_slot(fs, fs.transit(), mb, Actor::Alice, src, res.audit);
    }
  }
  detail::tally(res.stats, res.records);

  bool withheld = false;
  if (!abort && !cfg.qsdc_disable_ctrl_check) {
    const double thr = cfg.p_ctrl_threshold;
    if (detail::exceeds(res.stats.error_rate(RoundClass::ZCtrl), thr) ||
        detail::exceeds(res.stats.error_rate(RoundClass::XCtrl), thr)) {
      abort = AbortReason::CtrlErrorRate;
      say(Sender::Alice, AbortMessage{abort_reason_name(*abort)});
      say(Sender::Bob, BlockCodingWithheld{});
      withheld = true;
    }
  }

  if (!abort) {
    std::vector<int> est_idx = qsdc_est_indices(msg.coding_seed, msg.layout);
    std::vector<int> est_rounds;
    Bits est_bits;
    for (int k : est_idx) {
      est_rounds.push_back(sift_rounds[static_cast<std::size_t>(k)]);
      est_bits.push_back(msg.encoded[static_cast<std::size_t>(k)]);
    }
    say(Sender::Bob, QsdcErrorPositions{est_rounds, est_bits});
    res.stats.test_count = static_cast<int>(est_idx.size());
    int errs = 0;
    for (std::size_t i = 0; i < est_rounds.size(); ++i) {
      const auto& rec =
          res.records[static_cast<std::size_t>(est_rounds[i])];
      if (rec.alice_meas_bit != est_bits[i]) ++errs;
    }
    res.stats.test_errors = errs;
    if (!cfg.qsdc_disable_ctrl_check &&
        detail::exceeds(res.stats.test_error_rate(), cfg.p_test_threshold)) {
      abort = AbortReason::TestErrorRate;
      say(Sender::Alice, AbortMessage{abort_reason_name(*abort)});
      say(Sender::Bob, BlockCodingWithheld{});
      withheld = true;
    }
  }

  if (!abort) {
    say(Sender::Bob, BlockCodingAnnouncement{msg.coding_seed});
    Bits enc_hat(static_cast<std::size_t>(msg.layout.encoded_len));
    for (std::size_t k = 0; k < enc_hat.size(); ++k) {
      const auto& rec =
          res.records[static_cast<std::size_t>(sift_rounds[k])];
      enc_hat[k] = static_cast<std::uint8_t>(rec.alice_meas_bit);
    }
    qres.delivered = qsdc_decode(enc_hat, msg.coding_seed, msg.layout);
  }

  res.abort_reason = abort;
  res.completed = !abort.has_value();
  res.detected = disturbance_detected(cfg.protocol, res.stats);
  qres.eve_detected = withheld;

  res.eve_report = eve.finalize(res.transcript, view, src);
  detail::score_eve(res, sift_rounds);
  if (res.eve_report.payload_guess &&
      res.eve_report.payload_guess->size() == payload.size()) {
    std::size_t match =
        payload.size() - hamming_distance(*res.eve_report.payload_guess,
                                          payload);
    qres.eve_payload_info =
        static_cast<double>(match) / static_cast<double>(payload.size());
  }
  detail::check_bob_never_measured(res.audit);
  return qres;
}

// Quantum-phase-only run: N rounds and the two position announcements,
// nothing downstream. This is the mode the exact enumeration mirrors, so
// every protocol measures round by round here; deferring Alice's
// measurements cannot change the joint statistics (Bob's choices are
// independent of her register and the later operations act on other slots).
inline RunResult run_rounds_only(const ProtocolConfig& cfg,
                                 AttackStrategy& eve, PhiloxSource& src,
                                 const std::optional<Bits>& message =
                                     std::nullopt) {
  cfg.validate();
  RunResult res;
  res.config = cfg;
  res.attack = eve.name();

  int rounds;
  if (cfg.explicit_rounds) {
    rounds = *cfg.explicit_rounds;
  } else if (cfg.protocol == Protocol::QSDC) {
    if (!message)
      throw ConfigError("direct-communication rounds need message bits");
    rounds = cfg.qsdc_rounds(static_cast<int>(message->size()));
  } else {
    rounds = cfg.rounds();
  }
  if (cfg.protocol == Protocol::QSDC && !message)
    throw ConfigError("direct-communication rounds need message bits");
  res.stats.rounds = rounds;

  QuantumChannel channel(cfg.noise, eve, cfg.noise_order_flipped);
  RoundStore store;
  EveRunView view(&store, &res.audit);
  auto say = [&](Sender sender, MessagePayload payload) {
    const ClassicalMessage& m =
        res.transcript.broadcast(sender, std::move(payload));
    eve.on_classical(m, view, src);
  };

  int consumed = 0;
  std::vector<int> sift_rounds;
  res.records.reserve(static_cast<std::size_t>(rounds));
  for (int r = 0; r < rounds; ++r) {
    std::optional<int> bit;
    if (cfg.protocol == Protocol::QSDC &&
        consumed < static_cast<int>(message->size()))
      bit = (*message)[static_cast<std::size_t>(consumed)];
    RoundOutcome out = run_round(cfg, r, channel, eve, src, res.audit, bit,
                                 /*measure_now=*/true, /*retained=*/false);
    if (out.consumed) ++consumed;
    if (out.record.bob_action == BobAction::Sift) sift_rounds.push_back(r);
    res.records.push_back(out.record);
  }
  detail::tally(res.stats, res.records);

  {
    std::vector<Basis> bases(static_cast<std::size_t>(rounds));
    for (int r = 0; r < rounds; ++r) {
      const auto& rec = res.records[static_cast<std::size_t>(r)];
      bases[static_cast<std::size_t>(r)] = cfg.protocol == Protocol::P2
                                               ? rec.alice_meas_basis
                                               : rec.alice_basis;
    }
    say(Sender::Alice, BasisAnnouncement{std::move(bases)});
  }
  say(Sender::Bob, SiftAnnouncement{sift_rounds});

  res.completed = true;
  res.detected = disturbance_detected(cfg.protocol, res.stats);
  res.eve_report = eve.finalize(res.transcript, view, src);
  std::vector<int> key_rounds;
  for (const auto& rec : res.records)
    if (rec.cls == RoundClass::SiftKey) key_rounds.push_back(rec.index);
  detail::score_eve(res, key_rounds);
  detail::check_bob_never_measured(res.audit);
  return res;
}

inline ordered_json round_record_json(const RoundRecord& rec) {
  ordered_json j;
  j["index"] = rec.index;
  j["alice_basis"] = basis_name(rec.alice_basis);
  j["alice_bit"] = rec.alice_bit;
  j["bob_action"] = rec.bob_action == BobAction::Sift ? "sift" : "ctrl";
  j["bob_fresh_bit"] = rec.bob_fresh_bit;
  j["alice_meas_basis"] =
      rec.measured() ? ordered_json(basis_name(rec.alice_meas_basis))
                     : ordered_json(nullptr);
  j["alice_meas_bit"] = rec.alice_meas_bit;
  j["class"] = round_class_name(rec.cls);
  j["mismatch"] = rec.mismatch();
  return j;
}

inline ordered_json run_result_json(const RunResult& r,
                                    bool include_records = false) {
  ordered_json j;
  j["protocol"] = protocol_name(r.config.protocol);
  j["attack"] = r.attack;
  j["seed"] = r.config.seed;
  j["noise"] = r.config.noise.to_string();
  j["rounds"] = r.stats.rounds;
  j["outcome"] = r.completed ? "completed" : "aborted";
  j["abort_reason"] = r.abort_reason
                          ? ordered_json(abort_reason_name(*r.abort_reason))
                          : ordered_json(nullptr);
  j["detected"] = r.detected;
  ordered_json counts, errors, rates;
  for (int c = 0; c < 5; ++c) {
    auto rc = static_cast<RoundClass>(c);
    counts[round_class_name(rc)] = r.stats.count(rc);
    errors[round_class_name(rc)] = r.stats.errors(rc);
    auto rate = r.stats.error_rate(rc);
    rates[round_class_name(rc)] =
        rate ? ordered_json(*rate) : ordered_json(nullptr);
  }
  j["counts"] = std::move(counts);
  j["errors"] = std::move(errors);
  j["error_rates"] = std::move(rates);
  j["test_count"] = r.stats.test_count;
  j["test_errors"] = r.stats.test_errors;
  j["info_len"] = r.stats.info_len;
  j["leak"] = r.stats.leak;
  j["key_length"] = r.stats.key_length;
  j["keys_equal"] = r.completed && !r.alice_key.empty()
                        ? ordered_json(r.alice_key == r.bob_key)
                        : ordered_json(nullptr);
  ordered_json eve;
  eve["strategy"] = r.attack;
  eve["sift_accuracy"] = r.eve_sift_accuracy;
  eve["scored"] = r.eve_scored;
  j["eve"] = std::move(eve);
  ordered_json audit;
  audit["alice"] = r.audit.alice;
  audit["bob"] = r.audit.bob;
  audit["eve"] = r.audit.eve;
  j["audit"] = std::move(audit);
  if (include_records) {
    ordered_json recs = ordered_json::array();
    for (const auto& rec : r.records) recs.push_back(round_record_json(rec));
    j["records"] = std::move(recs);
    j["transcript"] = r.transcript.dump();
  }
  return j;
}

inline ordered_json qsdc_result_json(const QsdcResult& q,
                                     bool include_records = false) {
  ordered_json j = run_result_json(q.run, include_records);
  ordered_json d;
  d["payload_len"] = q.layout.payload_len;
  d["encoded_len"] = q.layout.encoded_len;
  d["est_len"] = q.layout.est_len;
  d["delivered"] = q.delivered ? ordered_json(bits_to_string(*q.delivered))
                               : ordered_json(nullptr);
  d["eve_detected"] = q.eve_detected;
  d["eve_payload_info"] = q.eve_payload_info;
  j["direct"] = std::move(d);
  return j;
}

}  // namespace sqkd

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

#include <Eigen/Eigenvalues>
#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "sqkd/gates.hpp"
#include "sqkd/qsdc_code.hpp"
#include "sqkd/strategy.hpp"

namespace sqkd {

// Eve stays out of the way. She still guesses: blind coin flips, which is
// the 1/2-accuracy baseline every attack is measured against.
class NoEve final : public AttackStrategy {
 public:
  std::string name() const override { return "none"; }

  EveReport finalize(const Transcript& tr, EveRunView&,
                     RandomSource& rs) override {
    EveReport rep;
    const std::vector<int>* sift = sift_rounds(tr);
    if (sift)
      for (int r : *sift) rep.sift_guesses.push_back({r, rs.bit(), 0.5});
    return rep;
  }

 private:
  static const std::vector<int>* sift_rounds(const Transcript& tr) {
    if (auto* s = tr.find<SiftAnnouncement>()) return &s->rounds;
    if (auto* q = tr.find<QsdcSiftPositions>()) return &q->rounds;
    return nullptr;
  }
};

// Measure the transit qubit in a fixed basis on the configured legs and
// send the collapsed state onward (measure-and-resend in an eigenbasis is
// exactly collapse).
class InterceptResend final : public AttackStrategy {
 public:
  InterceptResend(Basis basis, bool forward, bool ret)
      : basis_(basis), forward_(forward), return_(ret) {}

  std::string name() const override {
    std::string legs = forward_ && return_ ? "both" : (forward_ ? "fwd" : "ret");
    return std::string("ir:") + (basis_ == Basis::Z ? "z" : "x") + ":" + legs;
  }

  void on_forward(FlightState& fs, int round, RandomSource& rs,
                  MeasurementAudit& audit) override {
    if (forward_) tap(fs, round, rs, audit);
  }
  void on_return(FlightState& fs, int round, RandomSource& rs,
                 MeasurementAudit& audit) override {
    if (return_) tap(fs, round, rs, audit);
  }

  EveReport finalize(const Transcript& tr, EveRunView&,
                     RandomSource&) override {
    EveReport rep;
    if (auto* s = tr.find<SiftAnnouncement>()) harvest(rep, s->rounds);
    if (auto* q = tr.find<QsdcSiftPositions>()) harvest(rep, q->rounds);
    return rep;
  }

 private:
  void tap(FlightState& fs, int round, RandomSource& rs,
           MeasurementAudit& audit) {
    records_[round] =
        measure_slot(fs, fs.transit(), basis_, Actor::Eve, rs, audit);
  }

  void harvest(EveReport& rep, const std::vector<int>& rounds) const {
    for (int r : rounds) {
      auto it = records_.find(r);
      if (it != records_.end())
        rep.sift_guesses.push_back({r, it->second, 1.0});
    }
  }

  Basis basis_;
  bool forward_;
  bool return_;
};

enum class ProbeFamily : std::uint8_t { Rotation, Phase };

inline const char* probe_family_name(ProbeFamily f) {
  return f == ProbeFamily::Rotation ? "probe" : "phase";
}

// One-parameter entangling probes. On the configured leg Eve adjoins an
// ancilla and couples it to the transit qubit:
//   Rotation: ancilla |0>, controlled R(theta) on the ancilla
//             (|0>|a> -> |0>|a>, |1>|0> -> |1>(cos|0> + sin|1>))
//   Phase:    ancilla |+>, controlled phase diag(1, e^{i phi})
// At theta = 0 both are the identity. In Monte Carlo runs she measures each
// ancilla in the basis that optimally separates the two sift hypotheses.
class EntangleProbe final : public AttackStrategy {
 public:
  EntangleProbe(ProbeFamily family, double angle, bool on_return_leg)
      : family_(family), angle_(angle), on_return_(on_return_leg) {
    const double limit = family_ == ProbeFamily::Rotation
                             ? std::numbers::pi / 2
                             : std::numbers::pi;
    if (std::abs(angle_) > limit + kAlgebraTol)
      throw ConfigError("probe angle out of range for this family");
    // Helstrom measurement for the conditional ancilla states generated by
    // Bob's fresh |0> vs |1> on the tapped leg.
    Eigen::Matrix2cd rho0, rho1;
    if (family_ == ProbeFamily::Rotation) {
      Eigen::Vector2cd v0, v1;
      v0 << 1, 0;
      v1 << std::cos(angle_), std::sin(angle_);
      rho0 = v0 * v0.adjoint();
      rho1 = v1 * v1.adjoint();
    } else {
      const double r = 1.0 / std::sqrt(2.0);
      Eigen::Vector2cd v0, v1;
      v0 << r, r;
      v1 << r, std::polar(r, angle_);
      rho0 = v0 * v0.adjoint();
      rho1 = v1 * v1.adjoint();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(rho1 - rho0);
    meas_basis_ = es.eigenvectors();
    // Eigenvalues ascend; outcome 1 (the positive eigenvector) favors bit 1.
    guess_for_outcome_[0] = 0;
    guess_for_outcome_[1] = 1;
  }

  std::string name() const override {
    std::ostringstream os;
    os << probe_family_name(family_) << ":" << angle_ << ":"
       << (on_return_ ? "ret" : "fwd");
    return os.str();
  }

  void on_forward(FlightState& fs, int round, RandomSource& rs,
                  MeasurementAudit& audit) override {
    if (!on_return_) attach(fs, round, rs, audit);
  }
  void on_return(FlightState& fs, int round, RandomSource& rs,
                 MeasurementAudit& audit) override {
    if (on_return_) attach(fs, round, rs, audit);
  }

  void end_round(int round, FlightState& fs, bool /*retained*/,
                 RandomSource& rs, MeasurementAudit& audit) override {
    if (oracle_mode) return;
    auto it = probe_slot_.find(round);
    if (it == probe_slot_.end()) return;
    // Rotate the ancilla into the Helstrom eigenbasis, then read it out.
    apply_unitary(fs.joint(), meas_basis_.adjoint(), {it->second});
    int outcome =
        measure_slot(fs, it->second, Basis::Z, Actor::Eve, rs, audit);
    records_[round] = guess_for_outcome_[outcome];
  }

  EveReport finalize(const Transcript& tr, EveRunView&,
                     RandomSource&) override {
    EveReport rep;
    const std::vector<int>* sift = nullptr;
    if (auto* s = tr.find<SiftAnnouncement>()) sift = &s->rounds;
    if (auto* q = tr.find<QsdcSiftPositions>()) sift = &q->rounds;
    if (sift)
      for (int r : *sift) {
        auto it = records_.find(r);
        if (it != records_.end())
          rep.sift_guesses.push_back({r, it->second, 0.5});
      }
    return rep;
  }

 private:
  void attach(FlightState& fs, int round, RandomSource&, MeasurementAudit&) {
    if (probe_slot_.contains(round))
      throw InvariantError("one probe per round");
    Basis init = family_ == ProbeFamily::Rotation ? Basis::Z : Basis::X;
    int anc = fs.adjoin(prepare(init, 0), SlotRole::EveProbe);
    Eigen::Matrix2cd u = family_ == ProbeFamily::Rotation
                             ? gates::rotation(angle_)
                             : gates::phase(angle_);
    // controlled(): matrix bit 1 is the control; couple (ancilla, transit).
    apply_unitary(fs.joint(), gates::controlled(u), {anc, fs.transit()});
    probe_slot_[round] = anc;
  }

  ProbeFamily family_;
  double angle_;
  bool on_return_;
  Eigen::Matrix2cd meas_basis_;
  int guess_for_outcome_[2]{};
  std::map<int, int> probe_slot_;
};

// Store-and-forge: on every return leg Eve keeps the qubit Bob sent back
// and forwards a fresh uniformly random Z qubit. Once sift positions become
// public she measures her stored qubits in Z; on the direct-communication
// protocol that is the message, provided the decoding seed gets announced.
class QsdcMitm final : public AttackStrategy {
 public:
  std::string name() const override { return "mitm"; }

  void on_return(FlightState& fs, int round, RandomSource& rs,
                 MeasurementAudit&) override {
    int stored = fs.transit();
    fs.swap_transit(SlotRole::EveStore, prepare(Basis::Z, rs.bit()));
    store_slot_[round] = stored;
  }

  void end_round(int round, FlightState& fs, bool retained, RandomSource& rs,
                 MeasurementAudit& audit) override {
    if (oracle_mode || retained) return;
    auto it = store_slot_.find(round);
    if (it != store_slot_.end())
      records_[round] =
          measure_slot(fs, it->second, Basis::Z, Actor::Eve, rs, audit);
  }

  void on_classical(const ClassicalMessage& msg, EveRunView& view,
                    RandomSource& rs) override {
    if (auto* q = std::get_if<QsdcStart>(&msg.payload)) {
      payload_len_ = q->payload_len;
      encoded_len_ = q->length;
    } else if (auto* sp = std::get_if<QsdcSiftPositions>(&msg.payload)) {
      for (int r : sp->rounds)
        if (!records_.contains(r) && view.has_round(r))
          records_[r] = view.measure_eve_slot(r, store_slot_.at(r), Basis::Z, rs);
    } else if (auto* bc = std::get_if<BlockCodingAnnouncement>(&msg.payload)) {
      coding_seed_ = bc->seed;
    }
  }

  EveReport finalize(const Transcript& tr, EveRunView&,
                     RandomSource&) override {
    EveReport rep;
    const std::vector<int>* sift = nullptr;
    if (auto* s = tr.find<SiftAnnouncement>()) sift = &s->rounds;
    if (auto* q = tr.find<QsdcSiftPositions>()) sift = &q->rounds;
    if (sift)
      for (int r : *sift) {
        auto it = records_.find(r);
        if (it != records_.end())
          rep.sift_guesses.push_back({r, it->second, 1.0});
      }
    // The payload needs every transmitted bit plus the withheld seed.
    if (coding_seed_ && sift && payload_len_ > 0 &&
        static_cast<int>(sift->size()) >= encoded_len_) {
      Bits enc(static_cast<std::size_t>(encoded_len_));
      bool complete = true;
      for (int k = 0; k < encoded_len_; ++k) {
        auto it = records_.find((*sift)[static_cast<std::size_t>(k)]);
        if (it == records_.end()) {
          complete = false;
          break;
        }
        enc[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(it->second);
      }
      if (complete) {
        auto layout = QsdcLayout::from_lengths(payload_len_, encoded_len_);
        rep.payload_guess = qsdc_decode(enc, *coding_seed_, layout);
      }
    }
    return rep;
  }

 private:
  std::map<int, int> store_slot_;
  std::optional<std::uint64_t> coding_seed_;
  int payload_len_ = 0;
  int encoded_len_ = 0;
};

// ---------------------------------------------------------------------------
// Descriptor grammar:
//   none | ir:<z|x>:<fwd|ret|both> | probe:<angle>:<fwd|ret>
//        | phase:<angle>:<fwd|ret> | mitm
// Angles accept floats and the forms pi, pi/K, -pi/K. Case-insensitive.

inline double parse_angle(const std::string& tok) {
  std::string s = tok;
  double sign = 1.0;
  std::size_t at = 0;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    if (s[0] == '-') sign = -1.0;
    at = 1;
  }
  if (s.compare(at, 2, "pi") == 0) {
    double denom = 1.0;
    std::size_t rest = at + 2;
    if (rest < s.size()) {
      if (s[rest] != '/') throw ConfigError("bad angle: " + tok);
      try {
        std::size_t used = 0;
        denom = std::stod(s.substr(rest + 1), &used);
        if (used != s.size() - rest - 1 || denom == 0.0)
          throw ConfigError("bad angle: " + tok);
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception&) {
        throw ConfigError("bad angle: " + tok);
      }
    }
    return sign * std::numbers::pi / denom;
  }
  try {
    std::size_t used = 0;
    double v = std::stod(s.substr(at), &used);
    if (used != s.size() - at) throw ConfigError("bad angle: " + tok);
    return sign * v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("bad angle: " + tok);
  }
}

inline std::unique_ptr<AttackStrategy> make_strategy(const std::string& descriptor) {
  std::string d;
  d.reserve(descriptor.size());
  for (char c : descriptor) d.push_back(static_cast<char>(std::tolower(c)));

  std::vector<std::string> parts;
  std::string cur;
  for (char c : d) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);

  if (parts[0] == "none" && parts.size() == 1)
    return std::make_unique<NoEve>();
  if (parts[0] == "mitm" && parts.size() == 1)
    return std::make_unique<QsdcMitm>();
  if (parts[0] == "ir" && parts.size() == 3) {
    Basis b;
    if (parts[1] == "z")
      b = Basis::Z;
    else if (parts[1] == "x")
      b = Basis::X;
    else
      throw ConfigError("bad basis in attack descriptor: " + descriptor);
    if (parts[2] == "fwd") return std::make_unique<InterceptResend>(b, true, false);
    if (parts[2] == "ret") return std::make_unique<InterceptResend>(b, false, true);
    if (parts[2] == "both") return std::make_unique<InterceptResend>(b, true, true);
    throw ConfigError("bad leg in attack descriptor: " + descriptor);
  }
  if ((parts[0] == "probe" || parts[0] == "phase") && parts.size() == 3) {
    double angle = parse_angle(parts[1]);
    bool ret;
    if (parts[2] == "ret")
      ret = true;
    else if (parts[2] == "fwd")
      ret = false;
    else
      throw ConfigError("bad leg in attack descriptor: " + descriptor);
    ProbeFamily fam =
        parts[0] == "probe" ? ProbeFamily::Rotation : ProbeFamily::Phase;
    return std::make_unique<EntangleProbe>(fam, angle, ret);
  }
  throw ConfigError("unknown attack descriptor: " + descriptor);
}

}  // namespace sqkd

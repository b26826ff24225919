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

#include <string>

#include "sqkd/flight_state.hpp"
#include "sqkd/gates.hpp"
#include "sqkd/strategy.hpp"

namespace sqkd {

struct NoiseModel {
  enum class Kind : std::uint8_t { Ideal, BitFlip, Depolarizing };
  Kind kind = Kind::Ideal;
  double p = 0.0;

  void validate() const {
    if (p < 0.0 || p > 1.0) throw ConfigError("noise probability not in [0,1]");
    if (kind == Kind::Ideal && p != 0.0)
      throw ConfigError("ideal noise takes no probability");
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::Ideal: return "ideal";
      case Kind::BitFlip: return "bitflip:" + std::to_string(p);
      case Kind::Depolarizing: return "depolarizing:" + std::to_string(p);
    }
    return "?";
  }

  // "ideal" | "bitflip:<p>" | "depolarizing:<p>"
  static NoiseModel parse(const std::string& s) {
    NoiseModel m;
    if (s == "ideal" || s.empty()) return m;
    auto colon = s.find(':');
    std::string kind = s.substr(0, colon);
    if (kind == "bitflip")
      m.kind = Kind::BitFlip;
    else if (kind == "depolarizing" || kind == "depol")
      m.kind = Kind::Depolarizing;
    else
      throw ConfigError("unknown noise model: " + s);
    if (colon == std::string::npos)
      throw ConfigError("noise model needs a probability: " + s);
    try {
      m.p = std::stod(s.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad noise probability in: " + s);
    }
    m.validate();
    return m;
  }
};

// One noise event on the transit qubit. Ideal noise makes no random choice
// at all, so it adds no branch point to the enumeration.
inline void apply_noise(const NoiseModel& noise, FlightState& fs,
                        RandomSource& rs) {
  switch (noise.kind) {
    case NoiseModel::Kind::Ideal:
      return;
    case NoiseModel::Kind::BitFlip: {
      if (noise.p == 0.0) return;
      if (rs.bernoulli(noise.p))
        apply_unitary(fs.joint(), gates::X(), {fs.transit()});
      return;
    }
    case NoiseModel::Kind::Depolarizing: {
      if (noise.p == 0.0) return;
      if (!rs.bernoulli(noise.p)) return;
      switch (rs.uniform_index(3)) {
        case 0: apply_unitary(fs.joint(), gates::X(), {fs.transit()}); break;
        case 1: apply_unitary(fs.joint(), gates::Y(), {fs.transit()}); break;
        default: apply_unitary(fs.joint(), gates::Z(), {fs.transit()}); break;
      }
      return;
    }
  }
}

// The quantum channel between Alice and Bob, with Eve sitting on it. Exactly
// one qubit may be in flight at a time; the next forward transmission is
// only legal once the previous qubit returned (each protocol works strictly
// ping-pong).
//
// Leg composition order: on the forward leg noise acts first, then Eve; on
// the return leg Eve acts first, then noise. flipping `noise_order` moves it to the
// other side of Eve on both legs (between Eve and Bob).
class QuantumChannel {
 public:
  QuantumChannel(NoiseModel noise, AttackStrategy& eve,
                 bool noise_order_flipped = false)
      : noise_(noise), eve_(&eve), noise_outside_(noise_order_flipped) {
    noise_.validate();
  }

  void transmit_forward(FlightState& fs, int round, RandomSource& rs,
                        MeasurementAudit& audit) {
    if (in_flight_) throw LockstepError("forward: previous qubit still out");
    in_flight_ = true;
    ++forward_count_;
    if (!noise_outside_) apply_noise(noise_, fs, rs);
    eve_->on_forward(fs, round, rs, audit);
    if (noise_outside_) apply_noise(noise_, fs, rs);
  }

  void transmit_return(FlightState& fs, int round, RandomSource& rs,
                       MeasurementAudit& audit) {
    if (!in_flight_) throw LockstepError("return: no qubit in flight");
    in_flight_ = false;
    ++return_count_;
    if (noise_outside_) apply_noise(noise_, fs, rs);
    eve_->on_return(fs, round, rs, audit);
    if (!noise_outside_) apply_noise(noise_, fs, rs);
  }

  bool in_flight() const { return in_flight_; }
  int forward_count() const { return forward_count_; }
  int return_count() const { return return_count_; }
  const NoiseModel& noise() const { return noise_; }

 private:
  NoiseModel noise_;
  AttackStrategy* eve_;
  bool noise_outside_;
  bool in_flight_ = false;
  int forward_count_ = 0;
  int return_count_ = 0;
};

}  // namespace sqkd

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

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sqkd/density_matrix.hpp"
#include "sqkd/flight_state.hpp"
#include "sqkd/transcript.hpp"

namespace sqkd {

struct SiftGuess {
  int round = 0;
  int bit = 0;
  double confidence = 0.5;  // exact posterior where the strategy admits one
};

struct EveReport {
  std::vector<SiftGuess> sift_guesses;
  std::optional<Bits> payload_guess;  // direct-communication runs only
};

// Round states a run keeps alive past the round boundary (the
// direct-communication protocol holds all of them until the classical
// phase). Slot roles still gate what Eve may touch.
using RoundStore = std::vector<std::optional<FlightState>>;

// Eve's handle on retained rounds during the classical phase. Everything
// here is role-checked: she reaches her probe/store slots, nothing else.
class EveRunView {
 public:
  EveRunView(RoundStore* store, MeasurementAudit* audit)
      : store_(store), audit_(audit) {}

  bool has_round(int round) const {
    return store_ && round >= 0 &&
           static_cast<std::size_t>(round) < store_->size() &&
           (*store_)[static_cast<std::size_t>(round)].has_value();
  }

  std::vector<int> eve_slots(int round, SlotRole role) const {
    require(round);
    return (*store_)[static_cast<std::size_t>(round)]->slots(role);
  }

  int measure_eve_slot(int round, int slot, Basis basis, RandomSource& rs) {
    require(round);
    auto& fs = *(*store_)[static_cast<std::size_t>(round)];
    // During the classical phase the wire belongs to Alice again; Eve only
    // reaches the slots she kept.
    SlotRole role = fs.role(slot);
    if (role != SlotRole::EveProbe && role != SlotRole::EveStore)
      throw InvariantError("eve may only measure her own retained slots");
    return measure_slot(fs, slot, basis, Actor::Eve, rs, *audit_);
  }

  // Eve's reduced state over her slots of a retained round.
  DensityMatrix eve_reduced(int round) const {
    require(round);
    const auto& fs = *(*store_)[static_cast<std::size_t>(round)];
    std::vector<int> mine = fs.slots(SlotRole::EveProbe);
    for (int s : fs.slots(SlotRole::EveStore)) mine.push_back(s);
    if (mine.empty())
      throw InvariantError("eve holds no slot in this round");
    return partial_trace(fs.joint(), mine);
  }

 private:
  void require(int round) const {
    if (!has_round(round))
      throw InvariantError("round state not retained");
  }

  RoundStore* store_;
  MeasurementAudit* audit_;
};

// An eavesdropping strategy. Hooks fire while the qubit passes Eve's segment
// of the channel (on_forward / on_return), when a classical message is
// broadcast (on_classical), and at the end of each round once the qubit is
// back with Alice (end_round; Monte Carlo only, see oracle_mode).
//
// One instance serves one run; strategies are stateful across rounds.
class AttackStrategy {
 public:
  virtual ~AttackStrategy() = default;

  virtual std::string name() const = 0;

  virtual void on_forward(FlightState&, int /*round*/, RandomSource&,
                          MeasurementAudit&) {}
  virtual void on_return(FlightState&, int /*round*/, RandomSource&,
                         MeasurementAudit&) {}
  virtual void on_classical(const ClassicalMessage&, EveRunView&,
                            RandomSource&) {}

  // Called after Alice has taken the round's qubit back (and, where the
  // protocol measures round by round, after her measurement). `retained`
  // tells Eve whether this round's state stays alive in the RoundStore.
  virtual void end_round(int /*round*/, FlightState&, bool /*retained*/,
                         RandomSource&, MeasurementAudit&) {}

  virtual EveReport finalize(const Transcript&, EveRunView&, RandomSource&) {
    return {};
  }

  // Eve's classical measurement record for a round, if her strategy produced
  // one. The enumeration oracle uses this as the classical part of her
  // side information.
  std::optional<int> classical_record(int round) const {
    auto it = records_.find(round);
    if (it == records_.end()) return std::nullopt;
    return it->second;
  }

  // In oracle mode strategies must skip their end-of-round measurements:
  // the enumerator harvests Eve's reduced density matrices instead, keeping
  // her side information exact rather than sampled.
  bool oracle_mode = false;

 protected:
  std::map<int, int> records_;
};

}  // namespace sqkd

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

#include <vector>

#include "sqkd/state_vector.hpp"

namespace sqkd {

// Who owns a slot of the round's joint state. Correlations survive
// relabeling (that is the whole point: Eve's probe stays entangled with
// whatever it touched), but measurement access is role-gated.
enum class SlotRole : std::uint8_t {
  Transit,      // the qubit currently on the wire (exactly one)
  EveProbe,     // ancilla Eve attached during a leg
  EveStore,     // a qubit Eve captured and kept
  Environment,  // out of everyone's reach (e.g. the qubit Bob discarded)
};

enum class Actor : std::uint8_t { Alice, Bob, Eve };

// Counts who measured during a run. Bob's count must stay zero: he only
// reflects or swaps in a fresh qubit, and the run controller asserts this.
struct MeasurementAudit {
  int alice = 0;
  int bob = 0;
  int eve = 0;
};

// The joint quantum state of one protocol round: the qubit in transit plus
// every ancilla that got entangled with it along the way. Slots are never
// deleted (qubits do not vanish); they change role.
class FlightState {
 public:
  explicit FlightState(StateVector transit_qubit)
      : joint_(std::move(transit_qubit)) {
    if (joint_.num_qubits() != 1)
      throw DimensionError("flight state starts from a single transit qubit");
    roles_.push_back(SlotRole::Transit);
  }

  const StateVector& joint() const { return joint_; }
  StateVector& joint() { return joint_; }
  int num_qubits() const { return joint_.num_qubits(); }

  int transit() const { return transit_; }
  SlotRole role(int slot) const {
    return roles_.at(static_cast<std::size_t>(slot));
  }

  std::vector<int> slots(SlotRole role) const {
    std::vector<int> out;
    for (int q = 0; q < num_qubits(); ++q)
      if (roles_[static_cast<std::size_t>(q)] == role) out.push_back(q);
    return out;
  }

  // Tensor a fresh (unentangled) register onto the state. Existing slot
  // indices are unchanged; the new slots sit above them. Returns the first
  // new slot index.
  int adjoin(const StateVector& fresh, SlotRole role) {
    if (role == SlotRole::Transit)
      throw InvariantError("only one qubit may be in transit");
    int first = num_qubits();
    joint_ = tensor(fresh, joint_);
    for (int i = 0; i < fresh.num_qubits(); ++i) roles_.push_back(role);
    return first;
  }

  // Take the transit qubit out of circulation (it becomes `new_role`) and
  // put `replacement` on the wire instead. This is Bob's SIFT move and
  // Eve's capture-and-forge move.
  int swap_transit(SlotRole new_role, const StateVector& replacement) {
    if (new_role == SlotRole::Transit)
      throw InvariantError("swap_transit needs a non-transit role");
    if (replacement.num_qubits() != 1)
      throw DimensionError("transit replacement must be a single qubit");
    roles_[static_cast<std::size_t>(transit_)] = new_role;
    int slot = num_qubits();
    joint_ = tensor(replacement, joint_);
    roles_.push_back(SlotRole::Transit);
    transit_ = slot;
    return slot;
  }

 private:
  StateVector joint_;
  std::vector<SlotRole> roles_;
  int transit_ = 0;
};

// Role-gated measurement. Alice may only measure the transit qubit; Eve may
// measure her own slots or the wire while she holds it; Bob has no
// measurement call at all.
inline int measure_slot(FlightState& fs, int slot, Basis basis, Actor actor,
                        RandomSource& rs, MeasurementAudit& audit) {
  const SlotRole role = fs.role(slot);
  switch (actor) {
    case Actor::Alice:
      if (role != SlotRole::Transit)
        throw InvariantError("alice may only measure the transit qubit");
      ++audit.alice;
      break;
    case Actor::Eve:
      if (role == SlotRole::Environment)
        throw InvariantError("eve cannot reach environment slots");
      ++audit.eve;
      break;
    case Actor::Bob:
      ++audit.bob;
      throw InvariantError("bob never measures");
  }
  return measure(fs.joint(), slot, basis, rs);
}

}  // namespace sqkd

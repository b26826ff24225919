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

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <variant>
#include <vector>

#include "sqkd/common.hpp"
#include "sqkd/state_vector.hpp"

namespace sqkd {

using ordered_json = nlohmann::ordered_json;

enum class Sender : std::uint8_t { Alice, Bob };

inline const char* sender_name(Sender s) {
  return s == Sender::Alice ? "alice" : "bob";
}

// Everything broadcast on the authenticated classical channel. Eve reads all
// of it; nobody can forge or reorder it.
struct BasisAnnouncement {         // Alice: per-round bases
  std::vector<Basis> bases;
};
struct SiftAnnouncement {          // Bob: rounds where he swapped in a fresh qubit
  std::vector<int> rounds;
};
struct TestSelection {             // Bob: sifted rounds sacrificed for testing
  std::vector<int> rounds;
};
struct TestValues {                // Alice: her measured bits on those rounds
  Bits values;
};
struct EccData {                   // Bob: reconciliation data for the info bits
  int block_count = 0;
  Bits syndromes;                  // 3 bits per block, Bob's parity bits
  std::vector<std::uint64_t> verify_seeds;
  Bits verify_parities;            // Bob's parity of each seeded subset
};
struct PaData {                    // Bob: hash seed for the final key
  int out_len = 0;
  Bits toeplitz_seed;
};
struct QsdcStart {                 // Bob: announces the message geometry
  int length = 0;                  // encoded length (bits on the wire)
  int payload_len = 0;             // plaintext length before block coding
};
struct ReceiptConfirmation {};     // Alice: all rounds arrived back
struct QsdcSiftPositions {         // Bob: rounds that carry message bits
  std::vector<int> rounds;
};
struct QsdcErrorPositions {        // Bob: sacrificial positions and their bits
  std::vector<int> rounds;
  Bits bits;
};
struct BlockCodingAnnouncement {   // Bob: seed that unlocks decoding
  std::uint64_t seed = 0;
};
struct BlockCodingWithheld {};     // Bob: refuses the seed (attack suspected)
struct AbortMessage {
  std::string reason;
};

using MessagePayload =
    std::variant<BasisAnnouncement, SiftAnnouncement, TestSelection,
                 TestValues, EccData, PaData, QsdcStart, ReceiptConfirmation,
                 QsdcSiftPositions, QsdcErrorPositions,
                 BlockCodingAnnouncement, BlockCodingWithheld, AbortMessage>;

inline const char* kind_name(const MessagePayload& p) {
  struct V {
    const char* operator()(const BasisAnnouncement&) { return "basis_announcement"; }
    const char* operator()(const SiftAnnouncement&) { return "sift_announcement"; }
    const char* operator()(const TestSelection&) { return "test_selection"; }
    const char* operator()(const TestValues&) { return "test_values"; }
    const char* operator()(const EccData&) { return "ecc_data"; }
    const char* operator()(const PaData&) { return "pa_data"; }
    const char* operator()(const QsdcStart&) { return "qsdc_start"; }
    const char* operator()(const ReceiptConfirmation&) { return "receipt_confirmation"; }
    const char* operator()(const QsdcSiftPositions&) { return "qsdc_sift_positions"; }
    const char* operator()(const QsdcErrorPositions&) { return "qsdc_error_positions"; }
    const char* operator()(const BlockCodingAnnouncement&) { return "block_coding_announcement"; }
    const char* operator()(const BlockCodingWithheld&) { return "block_coding_withheld"; }
    const char* operator()(const AbortMessage&) { return "abort"; }
  };
  return std::visit(V{}, p);
}

struct ClassicalMessage {
  int seq = 0;
  Sender sender = Sender::Alice;
  MessagePayload payload;
};

inline ordered_json payload_json(const MessagePayload& p) {
  ordered_json j;
  if (auto* b = std::get_if<BasisAnnouncement>(&p)) {
    std::string s;
    for (Basis x : b->bases) s.push_back(x == Basis::Z ? 'Z' : 'X');
    j["bases"] = s;
  } else if (auto* s = std::get_if<SiftAnnouncement>(&p)) {
    j["rounds"] = s->rounds;
  } else if (auto* t = std::get_if<TestSelection>(&p)) {
    j["rounds"] = t->rounds;
  } else if (auto* v = std::get_if<TestValues>(&p)) {
    j["values"] = bits_to_string(v->values);
  } else if (auto* e = std::get_if<EccData>(&p)) {
    j["block_count"] = e->block_count;
    j["syndromes"] = bits_to_string(e->syndromes);
    j["verify_seeds"] = e->verify_seeds;
    j["verify_parities"] = bits_to_string(e->verify_parities);
  } else if (auto* pa = std::get_if<PaData>(&p)) {
    j["out_len"] = pa->out_len;
    j["toeplitz_seed"] = bits_to_string(pa->toeplitz_seed);
  } else if (auto* q = std::get_if<QsdcStart>(&p)) {
    j["length"] = q->length;
    j["payload_len"] = q->payload_len;
  } else if (std::get_if<ReceiptConfirmation>(&p)) {
    // no fields
  } else if (auto* sp = std::get_if<QsdcSiftPositions>(&p)) {
    j["rounds"] = sp->rounds;
  } else if (auto* ep = std::get_if<QsdcErrorPositions>(&p)) {
    j["rounds"] = ep->rounds;
    j["bits"] = bits_to_string(ep->bits);
  } else if (auto* bc = std::get_if<BlockCodingAnnouncement>(&p)) {
    j["seed"] = bc->seed;
  } else if (std::get_if<BlockCodingWithheld>(&p)) {
    // no fields
  } else if (auto* a = std::get_if<AbortMessage>(&p)) {
    j["reason"] = a->reason;
  }
  return j;
}

// Append-only record of the classical channel.
class Transcript {
 public:
  const ClassicalMessage& broadcast(Sender sender, MessagePayload payload) {
    msgs_.push_back({static_cast<int>(msgs_.size()), sender,
                     std::move(payload)});
    return msgs_.back();
  }

  std::size_t size() const { return msgs_.size(); }
  const ClassicalMessage& operator[](std::size_t i) const {
    return msgs_.at(i);
  }
  auto begin() const { return msgs_.begin(); }
  auto end() const { return msgs_.end(); }

  template <class T>
  const T* find() const {
    for (const auto& m : msgs_)
      if (auto* p = std::get_if<T>(&m.payload)) return p;
    return nullptr;
  }

  ordered_json dump() const {
    ordered_json arr = ordered_json::array();
    for (const auto& m : msgs_) {
      ordered_json j;
      j["seq"] = m.seq;
      j["sender"] = sender_name(m.sender);
      j["kind"] = kind_name(m.payload);
      j["payload"] = payload_json(m.payload);
      arr.push_back(std::move(j));
    }
    return arr;
  }

 private:
  std::vector<ClassicalMessage> msgs_;
};

}  // namespace sqkd

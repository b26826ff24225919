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

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "sqkd/channel.hpp"
#include "sqkd/postproc.hpp"

namespace sqkd {

enum class Protocol : std::uint8_t { P1, P2, QSDC };

inline const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::P1: return "p1";
    case Protocol::P2: return "p2";
    case Protocol::QSDC: return "qsdc";
  }
  return "?";
}

inline Protocol parse_protocol(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(c));
  if (s == "p1") return Protocol::P1;
  if (s == "p2") return Protocol::P2;
  if (s == "qsdc") return Protocol::QSDC;
  throw ConfigError("unknown protocol: " + s);
}

enum class AbortReason : std::uint8_t {
  TooFewSifted,
  CtrlErrorRate,
  TestErrorRate,
  EccVerifyFail,
  KeyLengthNonpositive,
  MessageExhausted,  // direct-communication runs only
};

inline const char* abort_reason_name(AbortReason r) {
  switch (r) {
    case AbortReason::TooFewSifted: return "too_few_sifted";
    case AbortReason::CtrlErrorRate: return "ctrl_error_rate";
    case AbortReason::TestErrorRate: return "test_error_rate";
    case AbortReason::EccVerifyFail: return "ecc_verify_fail";
    case AbortReason::KeyLengthNonpositive: return "key_length_nonpositive";
    case AbortReason::MessageExhausted: return "message_exhausted";
  }
  return "?";
}

enum class BobAction : std::uint8_t { Ctrl, Sift };

// Check classes. Every round lands in exactly one.
enum class RoundClass : std::uint8_t {
  SiftKey,  // raw key material
  ZCtrl,    // reflected Z state, re-measured in Z
  XCtrl,    // reflected X state, re-measured in X
  CtrlX,    // second protocol's sole check: reflected |+>, measured in X
  Discard,
};

inline const char* round_class_name(RoundClass c) {
  switch (c) {
    case RoundClass::SiftKey: return "sift_key";
    case RoundClass::ZCtrl: return "z_ctrl";
    case RoundClass::XCtrl: return "x_ctrl";
    case RoundClass::CtrlX: return "ctrl_x";
    case RoundClass::Discard: return "discard";
  }
  return "?";
}

struct RoundRecord {
  int index = 0;
  Basis alice_basis = Basis::Z;
  int alice_bit = 0;
  BobAction bob_action = BobAction::Ctrl;
  int bob_fresh_bit = -1;   // -1 when CTRL
  Basis alice_meas_basis = Basis::Z;
  int alice_meas_bit = -1;  // -1 when Alice did not measure (aborted early)
  RoundClass cls = RoundClass::Discard;

  bool measured() const { return alice_meas_bit >= 0; }

  // Mismatch on this round's check class (false for DISCARD / unmeasured).
  bool mismatch() const {
    if (!measured()) return false;
    switch (cls) {
      case RoundClass::ZCtrl:
      case RoundClass::XCtrl:
        return alice_meas_bit != alice_bit;
      case RoundClass::CtrlX:
        return alice_meas_bit != 0;  // reflected |+> in X reads 0
      case RoundClass::SiftKey:
        return alice_meas_bit != bob_fresh_bit;
      case RoundClass::Discard:
        return false;
    }
    return false;
  }
};

struct ProtocolConfig {
  Protocol protocol = Protocol::P1;
  int n = 336;                     // INFO length (QKD) / payload bits (QSDC)
  double delta = 0.25;
  double p_ctrl_threshold = 0.05;  // also serves as the P2 CTRL-X threshold
  double p_test_threshold = 0.05;  // also the QSDC error-estimate threshold
  double bob_sift_prob = 0.5;
  NoiseModel noise{};
  std::uint64_t seed = 0;
  int security_margin_s = 32;
  EccConfig ecc{};
  bool noise_order_flipped = false;
  double qsdc_est_fraction = 0.25;
  bool qsdc_disable_ctrl_check = false;
  // Overrides the derived round count; used for small-N oracle comparisons.
  std::optional<int> explicit_rounds;

  int rounds() const {
    if (explicit_rounds) return *explicit_rounds;
    if (protocol == Protocol::QSDC)
      throw InvariantError("qsdc round count derives from the message");
    return static_cast<int>(std::ceil(8.0 * n * (1.0 + delta)));
  }

  int qsdc_rounds(int encoded_len) const {
    if (explicit_rounds) return *explicit_rounds;
    return static_cast<int>(std::ceil(2.0 * encoded_len * (1.0 + delta)));
  }

  void validate() const {
    if (n < 0) throw ConfigError("n must be nonnegative");
    if (delta <= 0.0) throw ConfigError("delta must be positive");
    for (double p : {p_ctrl_threshold, p_test_threshold, bob_sift_prob})
      if (p < 0.0 || p > 1.0) throw ConfigError("probability not in [0,1]");
    if (security_margin_s < 0)
      throw ConfigError("security margin must be nonnegative");
    if (qsdc_est_fraction <= 0.0 || qsdc_est_fraction >= 1.0)
      throw ConfigError("estimation fraction must be in (0,1)");
    if (explicit_rounds && *explicit_rounds < 1)
      throw ConfigError("explicit round count must be positive");
    noise.validate();
    ecc.validate();
  }
};

struct RunStats {
  int rounds = 0;
  std::array<int, 5> class_counts{};  // indexed by RoundClass
  std::array<int, 5> class_errors{};
  int test_count = 0;
  int test_errors = 0;
  int info_len = 0;
  int leak = 0;
  int key_length = 0;

  int count(RoundClass c) const {
    return class_counts[static_cast<std::size_t>(c)];
  }
  int errors(RoundClass c) const {
    return class_errors[static_cast<std::size_t>(c)];
  }
  std::optional<double> error_rate(RoundClass c) const {
    if (count(c) == 0) return std::nullopt;
    return static_cast<double>(errors(c)) / count(c);
  }
  std::optional<double> test_error_rate() const {
    if (test_count == 0) return std::nullopt;
    return static_cast<double>(test_errors) / test_count;
  }
  int sift_count() const { return count(RoundClass::SiftKey); }
};

// Whether this run's check classes saw any mismatch; the oracle uses the
// same predicate, so Monte Carlo and exact enumeration agree by definition.
inline bool disturbance_detected(Protocol p, const RunStats& s) {
  if (p == Protocol::P2) return s.errors(RoundClass::CtrlX) > 0;
  return s.errors(RoundClass::ZCtrl) > 0 || s.errors(RoundClass::XCtrl) > 0;
}

}  // namespace sqkd

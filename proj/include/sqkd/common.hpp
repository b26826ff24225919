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

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqkd {

using cx = std::complex<double>;

// Tolerance for checks that follow from exact algebra (normalization,
// unitarity, probability conservation).
inline constexpr double kAlgebraTol = 1e-9;
// Tolerance for quantities that pass through an eigensolver.
inline constexpr double kEigenTol = 1e-6;

// Dense simulation keeps every amplitude; past this point a single state
// no longer fits the time budget of the test suite.
inline constexpr int kMaxQubits = 12;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed descriptor, inconsistent parameters, file
// errors. The CLI maps this to exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

// Internal consistency violation (norm drift, a party acting out of turn,
// a forbidden measurement). The CLI maps this to exit code 4.
struct InvariantError : Error {
  using Error::Error;
};

struct DimensionError : InvariantError {
  using InvariantError::InvariantError;
};

// A qubit was injected into the channel while the previous one was still
// in flight, or retrieved when none was in flight.
struct LockstepError : InvariantError {
  using InvariantError::InvariantError;
};

// Bit strings are kept unpacked; clarity beats density at these sizes.
using Bits = std::vector<std::uint8_t>;

inline int parity(const Bits& v) {
  int p = 0;
  for (auto b : v) p ^= (b & 1);
  return p;
}

inline std::string bits_to_string(const Bits& v) {
  std::string s;
  s.reserve(v.size());
  for (auto b : v) s.push_back(b ? '1' : '0');
  return s;
}

inline Bits bits_from_string(const std::string& s) {
  Bits v;
  v.reserve(s.size());
  for (char c : s) {
    if (c == '0')
      v.push_back(0);
    else if (c == '1')
      v.push_back(1);
    else
      throw ConfigError("bit string must contain only 0 and 1");
  }
  return v;
}

inline int hamming_distance(const Bits& a, const Bits& b) {
  if (a.size() != b.size()) throw DimensionError("length mismatch");
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] ^ b[i]) & 1;
  return d;
}

}  // namespace sqkd

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
#include <cstdint>
#include <span>

#include "sqkd/common.hpp"

namespace sqkd {

// Philox4x64-10 counter-based generator (Salmon et al., SC'11), the same
// round function used by numpy's Philox bit generator. Counter-based means
// a (seed, stream) pair names a full 2^130-block random sequence with no
// mutable hidden state beyond the block index, so independent streams are
// cheap and replay is exact.
//
// Conventions used here, pinned by test vectors in tests/test_rng.cpp:
//   key     = (seed, stream)
//   counter = (block_index, 0, 0, 0), block_index starting at 0
//   output  = the four u64 lanes of a block, consumed in order
class Philox {
 public:
  using Block = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  Philox() : Philox(0, 0) {}
  Philox(std::uint64_t seed, std::uint64_t stream) : key_{seed, stream} {}

  // One application of the 10-round bijection. Pure function of its inputs.
  static Block block(Block ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round != 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      std::uint64_t hi0, lo0, hi1, lo1;
      mul128(kMult0, ctr[0], hi0, lo0);
      mul128(kMult1, ctr[2], hi1, lo1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

  std::uint64_t next_u64() {
    if (pos_ == 4) {
      buf_ = block({block_index_++, 0, 0, 0}, key_);
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  // Uniform double in [0, 1) with 53 random mantissa bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Uniform integer in [0, n). Rejection-free modulo is fine here: n is
  // always tiny (shuffle indices, Pauli picks) so the bias is < 2^-50.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw InvariantError("below(0)");
    return next_u64() % n;
  }

  std::uint64_t seed() const { return key_[0]; }
  std::uint64_t stream() const { return key_[1]; }

 private:
  // 4x64 multipliers and Weyl key schedule constants.
  static constexpr std::uint64_t kMult0 = 0xD2E7470EE14C6C93ull;
  static constexpr std::uint64_t kMult1 = 0xCA5A826395121157ull;
  static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
  static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

  static void mul128(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                     std::uint64_t& lo) {
#ifdef __SIZEOF_INT128__
    unsigned __int128 w = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(w >> 64);
    lo = static_cast<std::uint64_t>(w);
#else
    std::uint64_t a_lo = a & 0xffffffffull, a_hi = a >> 32;
    std::uint64_t b_lo = b & 0xffffffffull, b_hi = b >> 32;
    std::uint64_t t0 = a_lo * b_lo;
    std::uint64_t t1 = a_hi * b_lo + (t0 >> 32);
    std::uint64_t t2 = a_lo * b_hi + (t1 & 0xffffffffull);
    hi = a_hi * b_hi + (t1 >> 32) + (t2 >> 32);
    lo = (t2 << 32) | (t0 & 0xffffffffull);
#endif
  }

  Key key_;
  std::uint64_t block_index_ = 0;
  Block buf_{};
  int pos_ = 4;
};

// Every random decision the protocols make goes through this interface as an
// explicit discrete choice. Monte Carlo runs draw from a Philox stream; the
// enumeration oracle walks every branch instead. Keeping both behind the same
// interface is what lets the oracle execute the identical protocol code path.
class RandomSource {
 public:
  virtual ~RandomSource() = default;

  // Picks index i with probability weights[i]. Weights must be nonnegative
  // and sum to 1 within kAlgebraTol.
  virtual std::size_t choose(std::span<const double> weights) = 0;

  int bit() {
    static constexpr double half[2] = {0.5, 0.5};
    return static_cast<int>(choose(half));
  }

  bool bernoulli(double p) {
    const double w[2] = {p, 1.0 - p};
    return choose(w) == 0;
  }

  std::size_t uniform_index(std::size_t k) {
    std::vector<double> w(k, 1.0 / static_cast<double>(k));
    return choose(w);
  }
};

// Monte Carlo source: one uniform double per choice, inverse-CDF over the
// weight vector.
class PhiloxSource final : public RandomSource {
 public:
  explicit PhiloxSource(Philox rng) : rng_(rng) {}
  PhiloxSource(std::uint64_t seed, std::uint64_t stream)
      : rng_(seed, stream) {}

  std::size_t choose(std::span<const double> weights) override {
    check_weights(weights);
    const double u = rng_.next_double();
    double acc = 0.0;
    std::size_t last_positive = weights.size();
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      last_positive = i;
      acc += weights[i];
      if (u < acc) return i;
    }
    // u landed in the 1e-9 slack past the last bucket.
    if (last_positive == weights.size())
      throw InvariantError("choose: all weights zero");
    return last_positive;
  }

  // Direct engine access for draws that are not protocol branch points
  // (shuffles, hash seeds, filler bits).
  Philox& engine() { return rng_; }

  static void check_weights(std::span<const double> weights) {
    double sum = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw InvariantError("choose: negative weight");
      sum += w;
    }
    if (std::abs(sum - 1.0) > kAlgebraTol)
      throw InvariantError("choose: weights must sum to 1");
  }

 private:
  Philox rng_;
};

}  // namespace sqkd

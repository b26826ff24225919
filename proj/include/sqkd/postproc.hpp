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
#include <utility>
#include <vector>

#include "sqkd/common.hpp"
#include "sqkd/philox.hpp"
#include "sqkd/transcript.hpp"

namespace sqkd {

// ---------------------------------------------------------------------------
// Sifting helpers

// Uniform n-subset of the sifted round indices for testing; `remaining`
// keeps the original order and its first n entries become the INFO rounds.
inline std::pair<std::vector<int>, std::vector<int>> select_test_bits(
    const std::vector<int>& sifted, int n, Philox& rng) {
  if (static_cast<int>(sifted.size()) < 2 * n)
    throw InvariantError("select_test_bits needs at least 2n sifted rounds");
  const std::size_t sz = sifted.size();
  std::vector<std::size_t> pos(sz);
  for (std::size_t i = 0; i < sz; ++i) pos[i] = i;
  // Partial Fisher-Yates: the first n slots end up a uniform subset.
  for (int i = 0; i < n; ++i) {
    std::size_t j = i + rng.below(sz - static_cast<std::size_t>(i));
    std::swap(pos[static_cast<std::size_t>(i)], pos[j]);
  }
  std::vector<bool> picked(sz, false);
  for (int i = 0; i < n; ++i) picked[pos[static_cast<std::size_t>(i)]] = true;
  std::vector<int> test, remaining;
  test.reserve(static_cast<std::size_t>(n));
  remaining.reserve(sz - static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < sz; ++i)
    (picked[i] ? test : remaining).push_back(sifted[i]);
  return {std::move(test), std::move(remaining)};
}

inline double estimate_error_rate(const Bits& a, const Bits& b) {
  if (a.size() != b.size()) throw DimensionError("length mismatch");
  if (a.empty()) throw InvariantError("error rate of an empty sample");
  return static_cast<double>(hamming_distance(a, b)) /
         static_cast<double>(a.size());
}

// ---------------------------------------------------------------------------
// Hamming(7,4) syndrome reconciliation
//
// Codeword positions 1..7 with parity bits at 1,2,4 and data bits at
// 3,5,6,7; the syndrome of a single-bit error equals the error position.

struct EccConfig {
  int verify_checks = 50;
  void validate() const {
    if (verify_checks < 0) throw ConfigError("verify_checks must be >= 0");
  }
};

namespace hamming74 {

inline constexpr int kDataPositions[4] = {3, 5, 6, 7};

// Parity bits (p1, p2, p4) of the data nibble (d3, d5, d6, d7).
inline std::array<std::uint8_t, 3> parity_bits(
    const std::array<std::uint8_t, 4>& d) {
  return {static_cast<std::uint8_t>(d[0] ^ d[1] ^ d[3]),
          static_cast<std::uint8_t>(d[0] ^ d[2] ^ d[3]),
          static_cast<std::uint8_t>(d[1] ^ d[2] ^ d[3])};
}

// Syndrome of (data nibble, received parity bits); 0 means consistent,
// otherwise the offending codeword position.
inline int syndrome(const std::array<std::uint8_t, 4>& d,
                    const std::array<std::uint8_t, 3>& p) {
  auto mine = parity_bits(d);
  int s1 = mine[0] ^ p[0];
  int s2 = mine[1] ^ p[1];
  int s4 = mine[2] ^ p[2];
  return s1 * 1 + s2 * 2 + s4 * 4;
}

// Full 7-bit codeword in position order 1..7.
inline std::array<std::uint8_t, 7> encode(const std::array<std::uint8_t, 4>& d) {
  auto p = parity_bits(d);
  return {p[0], p[1], d[0], p[2], d[1], d[2], d[3]};
}

// Correct up to one flipped bit and return the data nibble.
inline std::array<std::uint8_t, 4> decode(std::array<std::uint8_t, 7> w) {
  std::array<std::uint8_t, 4> d = {w[2], w[4], w[5], w[6]};
  std::array<std::uint8_t, 3> p = {w[0], w[1], w[3]};
  int s = syndrome(d, p);
  if (s >= 1 && s <= 7) {
    w[s - 1] ^= 1;
    d = {w[2], w[4], w[5], w[6]};
  }
  return d;
}

}  // namespace hamming74

// Membership in verification subset i is derived from a published seed, so
// both sides compute the same subset and the transcript alone replays it.
inline Bits verify_subset_mask(std::uint64_t seed, std::size_t len) {
  Philox rng(seed, 0);
  Bits mask(len);
  for (auto& m : mask) m = rng.bernoulli(0.5) ? 1 : 0;
  return mask;
}

inline int masked_parity(const Bits& bits, const Bits& mask) {
  int p = 0;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (mask[i]) p ^= bits[i] & 1;
  return p;
}

struct EccOutcome {
  bool verified = false;
  Bits corrected;   // Alice's string after correction (unpadded length)
  int leak = 0;     // announced bits charged against the key
  int corrections = 0;
  EccData announced;
};

// Syndrome reconciliation, Alice correcting toward Bob. Bob announces the
// parity bits of each 4-bit block of his string plus verify_checks seeded
// random parities; Alice corrects, then both compare the parities. Two or
// more flips in a block miscorrect, which is what the verification stage
// is for: it passes a wrong key with probability 2^-verify_checks.
inline EccOutcome ecc_reconcile(const Bits& alice, const Bits& bob,
                                const EccConfig& cfg, Philox& bob_rng) {
  if (alice.size() != bob.size()) throw DimensionError("length mismatch");
  if (alice.empty()) throw InvariantError("ecc on empty strings");
  cfg.validate();
  const std::size_t n = alice.size();
  const int blocks = static_cast<int>((n + 3) / 4);

  // Zero-pad to a block multiple; the padding is public and never part of
  // the final key.
  Bits a = alice, b = bob;
  a.resize(static_cast<std::size_t>(blocks) * 4, 0);
  b.resize(static_cast<std::size_t>(blocks) * 4, 0);

  EccOutcome out;
  out.announced.block_count = blocks;
  for (int blk = 0; blk < blocks; ++blk) {
    std::array<std::uint8_t, 4> db{}, da{};
    for (int i = 0; i < 4; ++i) {
      db[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(4 * blk + i)];
      da[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(4 * blk + i)];
    }
    auto pb = hamming74::parity_bits(db);
    for (auto bit : pb) out.announced.syndromes.push_back(bit);
    int s = hamming74::syndrome(da, pb);
    for (int i = 0; i < 4; ++i) {
      if (s == hamming74::kDataPositions[i]) {
        a[static_cast<std::size_t>(4 * blk + i)] ^= 1;
        ++out.corrections;
      }
    }
  }
  a.resize(n);

  for (int c = 0; c < cfg.verify_checks; ++c) {
    std::uint64_t seed = bob_rng.next_u64();
    Bits mask = verify_subset_mask(seed, n);
    out.announced.verify_seeds.push_back(seed);
    out.announced.verify_parities.push_back(
        static_cast<std::uint8_t>(masked_parity(bob, mask)));
  }
  out.verified = true;
  for (int c = 0; c < cfg.verify_checks; ++c) {
    Bits mask = verify_subset_mask(out.announced.verify_seeds[
                                       static_cast<std::size_t>(c)],
                                   n);
    if (masked_parity(a, mask) !=
        out.announced.verify_parities[static_cast<std::size_t>(c)]) {
      out.verified = false;
      break;
    }
  }

  out.corrected = std::move(a);
  out.leak = 3 * blocks + cfg.verify_checks;
  return out;
}

// ---------------------------------------------------------------------------
// Privacy amplification: binary Toeplitz hashing

// T[i][j] = seed[i - j + n - 1] for an m x n matrix; the seed has
// m + n - 1 bits and fully determines the hash.
inline Bits toeplitz_hash(const Bits& key, const Bits& seed, int out_len) {
  const std::size_t n = key.size();
  const std::size_t m = static_cast<std::size_t>(out_len);
  if (seed.size() != m + n - 1)
    throw DimensionError("toeplitz seed must have m + n - 1 bits");
  Bits out(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    int acc = 0;
    for (std::size_t j = 0; j < n; ++j)
      acc ^= (key[j] & seed[i + (n - 1) - j]) & 1;
    out[i] = static_cast<std::uint8_t>(acc);
  }
  return out;
}

inline int pa_output_length(int n_in, int leak, int s) {
  return n_in - leak - s;
}

inline Bits pa_extract(const Bits& key, const Bits& seed, int leak, int s) {
  int m = pa_output_length(static_cast<int>(key.size()), leak, s);
  if (m <= 0) throw InvariantError("privacy amplification output empty");
  return toeplitz_hash(key, seed, m);
}

// Bob's seed draw for the PA announcement.
inline Bits draw_bits(Philox& rng, std::size_t count) {
  Bits out(count);
  for (auto& b : out) b = rng.bernoulli(0.5) ? 1 : 0;
  return out;
}

}  // namespace sqkd

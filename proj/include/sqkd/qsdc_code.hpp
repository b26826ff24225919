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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "sqkd/common.hpp"
#include "sqkd/philox.hpp"
#include "sqkd/postproc.hpp"

namespace sqkd {

// Block coding for the direct-communication protocol. The payload is
// Hamming(7,4)-encoded, padded with sacrificial error-estimation filler
// bits, then permuted and masked under a seed Bob keeps secret until the
// end. Until the seed is announced the encoded string is a one-time-padded
// shuffle: holding every transmitted bit reveals nothing about the payload.
struct QsdcLayout {
  int payload_len = 0;
  int blocks = 0;      // Hamming blocks after zero-padding
  int code_len = 0;    // 7 * blocks
  int est_len = 0;     // error-estimation filler bits
  int encoded_len = 0; // code_len + est_len

  static QsdcLayout from_payload(int payload_len, double est_fraction) {
    if (payload_len < 1) throw ConfigError("payload must be nonempty");
    QsdcLayout l;
    l.payload_len = payload_len;
    l.blocks = (payload_len + 3) / 4;
    l.code_len = 7 * l.blocks;
    l.est_len = std::max<int>(
        1, static_cast<int>(std::llround(l.code_len * est_fraction /
                                         (1.0 - est_fraction))));
    l.encoded_len = l.code_len + l.est_len;
    return l;
  }

  // The announced lengths pin the layout without knowing est_fraction.
  static QsdcLayout from_lengths(int payload_len, int encoded_len) {
    if (payload_len < 1) throw ConfigError("payload must be nonempty");
    QsdcLayout l;
    l.payload_len = payload_len;
    l.blocks = (payload_len + 3) / 4;
    l.code_len = 7 * l.blocks;
    l.est_len = encoded_len - l.code_len;
    l.encoded_len = encoded_len;
    if (l.est_len < 1) throw ConfigError("encoded length too short");
    return l;
  }
};

namespace detail {

inline std::vector<int> coding_permutation(std::uint64_t seed, int len) {
  std::vector<int> perm(static_cast<std::size_t>(len));
  std::iota(perm.begin(), perm.end(), 0);
  Philox rng(seed, 0);
  for (int i = len - 1; i > 0; --i) {
    auto j = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[j]);
  }
  return perm;
}

inline Bits coding_keystream(std::uint64_t seed, int len) {
  Philox rng(seed, 1);
  return draw_bits(rng, static_cast<std::size_t>(len));
}

}  // namespace detail

// encoded[perm[i]] = v[i] ^ keystream[perm[i]], where v is the Hamming
// codeword stream followed by the filler bits.
inline Bits qsdc_encode(const Bits& payload, std::uint64_t coding_seed,
                        const QsdcLayout& layout, Philox& filler_rng) {
  if (static_cast<int>(payload.size()) != layout.payload_len)
    throw DimensionError("payload length does not match layout");
  Bits data = payload;
  data.resize(static_cast<std::size_t>(layout.blocks) * 4, 0);

  Bits v;
  v.reserve(static_cast<std::size_t>(layout.encoded_len));
  for (int b = 0; b < layout.blocks; ++b) {
    std::array<std::uint8_t, 4> nib{};
    for (int i = 0; i < 4; ++i)
      nib[static_cast<std::size_t>(i)] = data[static_cast<std::size_t>(4 * b + i)];
    for (auto bit : hamming74::encode(nib)) v.push_back(bit);
  }
  Bits filler = draw_bits(filler_rng, static_cast<std::size_t>(layout.est_len));
  v.insert(v.end(), filler.begin(), filler.end());

  auto perm = detail::coding_permutation(coding_seed, layout.encoded_len);
  Bits ks = detail::coding_keystream(coding_seed, layout.encoded_len);
  Bits encoded(static_cast<std::size_t>(layout.encoded_len));
  for (int i = 0; i < layout.encoded_len; ++i) {
    auto p = static_cast<std::size_t>(perm[static_cast<std::size_t>(i)]);
    encoded[p] = static_cast<std::uint8_t>(v[static_cast<std::size_t>(i)] ^ ks[p]);
  }
  return encoded;
}

// Indices within the encoded string that carry filler bits; revealing their
// positions and values leaks nothing about the payload.
inline std::vector<int> qsdc_est_indices(std::uint64_t coding_seed,
                                         const QsdcLayout& layout) {
  auto perm = detail::coding_permutation(coding_seed, layout.encoded_len);
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(layout.est_len));
  for (int i = layout.code_len; i < layout.encoded_len; ++i)
    idx.push_back(perm[static_cast<std::size_t>(i)]);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Inverts encode; residual single bit errors per block are corrected by the
// Hamming decode.
inline Bits qsdc_decode(const Bits& encoded, std::uint64_t coding_seed,
                        const QsdcLayout& layout) {
  if (static_cast<int>(encoded.size()) != layout.encoded_len)
    throw DimensionError("encoded length does not match layout");
  auto perm = detail::coding_permutation(coding_seed, layout.encoded_len);
  Bits ks = detail::coding_keystream(coding_seed, layout.encoded_len);
  Bits data;
  data.reserve(static_cast<std::size_t>(layout.blocks) * 4);
  std::array<std::uint8_t, 7> word{};
  for (int b = 0; b < layout.blocks; ++b) {
    for (int i = 0; i < 7; ++i) {
      auto p = static_cast<std::size_t>(perm[static_cast<std::size_t>(7 * b + i)]);
      word[static_cast<std::size_t>(i)] =
          static_cast<std::uint8_t>(encoded[p] ^ ks[p]);
    }
    for (auto bit : hamming74::decode(word)) data.push_back(bit);
  }
  data.resize(static_cast<std::size_t>(layout.payload_len));
  return data;
}

struct QsdcMessage {
  Bits payload;
  Bits encoded;
  std::uint64_t coding_seed = 0;
  QsdcLayout layout;
};

inline QsdcMessage make_qsdc_message(Bits payload, std::uint64_t coding_seed,
                                     double est_fraction, Philox& filler_rng) {
  QsdcMessage m;
  m.layout = QsdcLayout::from_payload(static_cast<int>(payload.size()),
                                      est_fraction);
  m.coding_seed = coding_seed;
  m.encoded = qsdc_encode(payload, coding_seed, m.layout, filler_rng);
  m.payload = std::move(payload);
  return m;
}

}  // namespace sqkd

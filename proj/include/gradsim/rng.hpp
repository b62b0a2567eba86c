// Copyright 2026 The gradsim Authors
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

#ifndef GRADSIM_RNG_HPP_
#define GRADSIM_RNG_HPP_

#include <array>
#include <cstdint>

namespace gradsim {

// Identifies one uniform stream: a master seed shared by a whole experiment
// plus a substream index owned by a single consumer (one replication, one
// experiment cell). Equal specs reproduce equal sequences.
struct StreamSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t substream_index = 0;

  friend bool operator==(const StreamSpec&, const StreamSpec&) = default;
};

// Counter-based uniform generator (Philox4x64-10).
//
// The (master_seed, substream_index) pair is the cipher key and the block
// counter starts at zero, so substreams are cheap to create, carry no shared
// state, and cannot overlap: distinct keys select distinct keyed bijections
// of the counter space, and one substream spans 2^64 blocks of four 64-bit
// words before its low counter word wraps.
//
// Copying a stream copies its position; the copy replays the original
// sequence from that point (used for common-random-number coupling).
// A stream instance is single-consumer; distinct instances are independent.
class UniformStream {
 public:
  explicit UniformStream(StreamSpec spec)
      : key_{spec.master_seed, spec.substream_index}, spec_(spec) {}

  // Next uniform, strictly inside (0,1): midpoints of 2^53 equal cells,
  // so log(next()) and log1p(-next()) are always finite.
  double next() {
    return (static_cast<double>(next_bits() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Next raw 64-bit word of the keyed counter sequence.
  std::uint64_t next_bits() {
    if (cursor_ == kBlockWords) refill();
    return block_[cursor_++];
  }

  const StreamSpec& spec() const { return spec_; }

 private:
  static constexpr int kBlockWords = 4;
  static constexpr int kRounds = 10;
  static constexpr std::uint64_t kMult0 = 0xD2E7470EE14C6C93ULL;
  static constexpr std::uint64_t kMult1 = 0xCA5A826395121157ULL;
  static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

  static void mul_hi_lo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                        std::uint64_t& lo) {
    const unsigned __int128 product =
        static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(b);
    hi = static_cast<std::uint64_t>(product >> 64);
    lo = static_cast<std::uint64_t>(product);
  }

  void refill() {
    std::array<std::uint64_t, 4> state = counter_;
    std::array<std::uint64_t, 2> key = key_;
    for (int round = 0; round < kRounds; ++round) {
      std::uint64_t hi0, lo0, hi1, lo1;
      mul_hi_lo(kMult0, state[0], hi0, lo0);
      mul_hi_lo(kMult1, state[2], hi1, lo1);
      state = {hi1 ^ state[1] ^ key[0], lo1, hi0 ^ state[3] ^ key[1], lo0};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    block_ = state;
    cursor_ = 0;
    for (auto& word : counter_) {  // 256-bit little-endian increment
      if (++word != 0) break;
    }
  }

  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> counter_{0, 0, 0, 0};
  std::array<std::uint64_t, 4> block_{};
  int cursor_ = kBlockWords;
  StreamSpec spec_;
};

inline UniformStream make_stream(StreamSpec spec) { return UniformStream(spec); }

}  // namespace gradsim

#endif  // GRADSIM_RNG_HPP_

/*
 * Copyright 2026 Google LLC.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef STATEFUL_AGG_PRG_H_
#define STATEFUL_AGG_PRG_H_

#include <sodium.h>

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <initializer_list>
#include <limits>
#include <stdexcept>

namespace stateful_agg {

// Short seed of kappa = 128 bits.
using Seed128 = std::array<uint8_t, 16>;
inline constexpr int kSeedBits = 128;

namespace internal {

inline void EnsureSodium() {
  static const bool ok = [] { return sodium_init() >= 0; }();
  if (!ok) throw std::runtime_error("libsodium initialisation failed");
}

}  // namespace internal

// Deterministic generator: ChaCha20 keystream in counter mode under a
// 256-bit key. Every sampler in the library draws from one of these, so all
// randomness is a pure function of the root seed and the derivation labels.
//
// Satisfies UniformRandomBitGenerator.
class Prg {
 public:
  using result_type = uint64_t;

  explicit Prg(uint64_t seed) {
    internal::EnsureSodium();
    key_.fill(0);
    for (int i = 0; i < 8; ++i) key_[i] = static_cast<uint8_t>(seed >> (8 * i));
    key_[31] = 0x5a;
  }

  explicit Prg(const Seed128& seed) {
    internal::EnsureSodium();
    key_.fill(0);
    std::memcpy(key_.data(), seed.data(), seed.size());
    key_[31] = 0xa5;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return NextU64(); }

  uint64_t NextU64() {
    if (pos_ + 8 > buffer_.size()) Refill();
    uint64_t v = 0;
    std::memcpy(&v, buffer_.data() + pos_, 8);
    pos_ += 8;
    return v;
  }

  // Uniform in [0, bound), by rejection. bound must be positive.
  uint64_t UniformBelow(uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("UniformBelow: zero bound");
    const uint64_t limit = max() - (max() % bound + 1) % bound;
    uint64_t v;
    do {
      v = NextU64();
    } while (v > limit);
    return v % bound;
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double UniformDouble() {
    return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  }

  Seed128 NextSeed() {
    Seed128 s;
    uint64_t lo = NextU64(), hi = NextU64();
    std::memcpy(s.data(), &lo, 8);
    std::memcpy(s.data() + 8, &hi, 8);
    return s;
  }

  // Independent child stream keyed by BLAKE2b(key || labels). Does not
  // advance this generator.
  Prg Derive(std::initializer_list<uint64_t> labels) const {
    crypto_generichash_state st;
    crypto_generichash_init(&st, nullptr, 0, 32);
    crypto_generichash_update(&st, key_.data(), key_.size());
    for (uint64_t l : labels) {
      uint8_t b[8];
      for (int i = 0; i < 8; ++i) b[i] = static_cast<uint8_t>(l >> (8 * i));
      crypto_generichash_update(&st, b, sizeof(b));
    }
    Prg child;
    crypto_generichash_final(&st, child.key_.data(), child.key_.size());
    return child;
  }

 private:
  Prg() { internal::EnsureSodium(); }

  void Refill() {
    std::array<uint8_t, crypto_stream_chacha20_ietf_NONCEBYTES> nonce{};
    buffer_.fill(0);
    crypto_stream_chacha20_ietf_xor_ic(buffer_.data(), buffer_.data(),
                                       buffer_.size(), nonce.data(),
                                       block_counter_, key_.data());
    block_counter_ += static_cast<uint32_t>(buffer_.size() / 64);
    pos_ = 0;
  }

  std::array<uint8_t, 32> key_{};
  std::array<uint8_t, 512> buffer_{};
  size_t pos_ = 512;
  uint32_t block_counter_ = 0;
};

}  // namespace stateful_agg

#endif  // STATEFUL_AGG_PRG_H_

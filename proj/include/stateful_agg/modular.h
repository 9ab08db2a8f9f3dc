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

#ifndef STATEFUL_AGG_MODULAR_H_
#define STATEFUL_AGG_MODULAR_H_

#include <cstdint>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"

namespace stateful_agg {

using uint128_t = unsigned __int128;
using int128_t = __int128;

inline uint64_t MulMod(uint64_t a, uint64_t b, uint64_t q) {
  return static_cast<uint64_t>(static_cast<uint128_t>(a) * b % q);
}

inline uint64_t AddMod(uint64_t a, uint64_t b, uint64_t q) {
  uint64_t s = a + b;
  return s >= q ? s - q : s;
}

inline uint64_t SubMod(uint64_t a, uint64_t b, uint64_t q) {
  return a >= b ? a - b : a + q - b;
}

inline uint64_t PowMod(uint64_t base, uint64_t exp, uint64_t q) {
  uint64_t result = 1 % q;
  base %= q;
  while (exp > 0) {
    if (exp & 1) result = MulMod(result, base, q);
    base = MulMod(base, base, q);
    exp >>= 1;
  }
  return result;
}

// Inverse of a modulo prime q (a != 0 mod q).
inline uint64_t InvMod(uint64_t a, uint64_t q) { return PowMod(a, q - 2, q); }

// Reduces a signed value into [0, q).
inline uint64_t ReduceSigned(int64_t v, uint64_t q) {
  int128_t r = static_cast<int128_t>(v) % static_cast<int128_t>(q);
  if (r < 0) r += q;
  return static_cast<uint64_t>(r);
}

// Representative of v mod q in (-q/2, q/2].
inline int64_t CenterMod(uint64_t v, uint64_t q) {
  v %= q;
  return v > q / 2 ? static_cast<int64_t>(v) - static_cast<int64_t>(q)
                   : static_cast<int64_t>(v);
}

// Deterministic Miller-Rabin for 64-bit integers.
inline bool IsPrime(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull,
                     29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull,
                     29ull, 31ull, 37ull}) {
    uint64_t x = PowMod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = MulMod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

// Largest `count` distinct primes q < 2^bits with q = 1 mod 2N, in
// descending order.
inline absl::StatusOr<std::vector<uint64_t>> FindNttPrimes(int bits,
                                                           uint64_t n,
                                                           int count) {
  if (bits < 3 || bits > 62) {
    return absl::InvalidArgumentError(
        absl::StrCat("prime size must be in [3, 62] bits, got ", bits));
  }
  const uint64_t step = 2 * n;
  uint64_t k = ((uint64_t{1} << bits) - 2) / step;
  std::vector<uint64_t> primes;
  for (; k > 0 && static_cast<int>(primes.size()) < count; --k) {
    uint64_t q = k * step + 1;
    if (IsPrime(q)) primes.push_back(q);
  }
  if (static_cast<int>(primes.size()) < count) {
    return absl::NotFoundError(absl::StrCat("not enough ", bits,
                                            "-bit primes congruent to 1 mod ",
                                            step));
  }
  return primes;
}

}  // namespace stateful_agg

#endif  // STATEFUL_AGG_MODULAR_H_

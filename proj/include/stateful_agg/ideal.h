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

// Trusted-party reference: evaluates a program directly over the integers.

#ifndef STATEFUL_AGG_IDEAL_H_
#define STATEFUL_AGG_IDEAL_H_

#include <functional>
#include <vector>

#include "absl/status/statusor.h"
#include "stateful_agg/program.h"
#include "stateful_agg/ring.h"
#include "stateful_agg/status_macros.h"

namespace stateful_agg {

struct IdealReveal {
  size_t round;         // the Reveal instruction being answered
  size_t delivered_at;  // always round + 1
  std::vector<BigInt> values;
};

struct IdealResult {
  std::vector<std::vector<BigInt>> state;  // v_0 .. v_{r-1}
  std::vector<IdealReveal> reveals;
};

// `included(i, j)` selects which clients' inputs count in round i; the
// default includes everyone.
inline absl::StatusOr<IdealResult> RunIdeal(
    const Program& p, size_t n, const InputSource& src,
    const std::function<bool(size_t, size_t)>& included = nullptr) {
  SA_RETURN_IF_ERROR(ValidateOrError(p));
  IdealResult out;
  for (size_t i = 0; i < p.size(); ++i) {
    std::vector<BigInt> v(p.length, 0);
    for (size_t j = 0; j < n; ++j) {
      if (included && !included(i, j)) continue;
      SA_ASSIGN_OR_RETURN(std::vector<int64_t> x, ClientInput(p, i, j, n, src));
      for (size_t e = 0; e < p.length; ++e) v[e] += x[e];
    }
    for (const auto& [k, w] : p.rounds[i].weights) {
      for (size_t e = 0; e < p.length; ++e) v[e] += BigInt(w) * out.state[k][e];
    }
    // The previous round's reveal is released while this round runs.
    if (i > 0 && p.rounds[i - 1].mode == Mode::kReveal) {
      out.reveals.push_back({i - 1, i, out.state[i - 1]});
    }
    out.state.push_back(std::move(v));
  }
  if (!p.rounds.empty() && p.rounds.back().mode == Mode::kReveal) {
    const size_t last = p.size() - 1;
    out.reveals.push_back({last, last + 1, out.state[last]});
  }
  return out;
}

// Representative of v mod 2^w in [low, low + 2^w).
inline int64_t ReduceToWindow(const BigInt& v, int w, int64_t low) {
  const BigInt m = BigInt(1) << w;
  BigInt r = (v - low) % m;
  if (r < 0) r += m;
  return static_cast<int64_t>(r + low);
}

inline std::vector<int64_t> ReduceToWindow(const std::vector<BigInt>& v, int w,
                                           int64_t low) {
  std::vector<int64_t> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(ReduceToWindow(x, w, low));
  return out;
}

}  // namespace stateful_agg

#endif  // STATEFUL_AGG_IDEAL_H_

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

// Symmetric RLWE encryption with additive key shares.
//
// A ciphertext of x under public element P and key s is w = P*s + T*e + x.
// Because it is linear in both s and x, client messages built from shares
// s_j sum to a ciphertext under sum_j s_j. A vector ciphertext is a
// sequence of m ring elements sharing one key.

#ifndef STATEFUL_AGG_CRYPTO_H_
#define STATEFUL_AGG_CRYPTO_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "stateful_agg/prg.h"
#include "stateful_agg/ring.h"
#include "stateful_agg/status_macros.h"

namespace stateful_agg {

using Ciphertext = std::vector<RingElement>;

inline constexpr uint64_t kPublicLabel = 0x7075626c6963;  // "public"

// A_i: m uniform elements, a pure function of (global_seed, round).
inline Ciphertext DerivePublic(const Seed128& global_seed, uint64_t round,
                               size_t m, const RingParamsPtr& params) {
  Prg prg = Prg(global_seed).Derive({kPublicLabel, round});
  Ciphertext out;
  out.reserve(m);
  for (size_t k = 0; k < m; ++k) out.push_back(SampleUniform(prg, params));
  return out;
}

namespace internal {

inline absl::Status CheckShape(std::span<const RingElement> a,
                               std::span<const RingElement> b,
                               const char* what) {
  if (a.size() != b.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        what, " has ", b.size(), " elements, expected ", a.size()));
  }
  for (size_t k = 0; k < a.size(); ++k) {
    SA_RETURN_IF_ERROR(CheckSameRing(a[k], b[k]));
  }
  return absl::OkStatus();
}

}  // namespace internal

// w[k] = p[k]*s + T*noise[k] + x[k] (+ mask[k]). `noise` and `mask` may be
// empty.
inline absl::StatusOr<Ciphertext> Encrypt(std::span<const RingElement> p,
                                          const RingElement& s,
                                          std::span<const RingElement> noise,
                                          std::span<const RingElement> x,
                                          std::span<const RingElement> mask = {}) {
  SA_RETURN_IF_ERROR(internal::CheckShape(p, x, "encoded input"));
  if (!noise.empty()) SA_RETURN_IF_ERROR(internal::CheckShape(p, noise, "noise"));
  if (!mask.empty()) SA_RETURN_IF_ERROR(internal::CheckShape(p, mask, "mask"));
  const int64_t t = static_cast<int64_t>(s.params()->plaintext_modulus());
  Ciphertext w;
  w.reserve(p.size());
  for (size_t k = 0; k < p.size(); ++k) {
    SA_ASSIGN_OR_RETURN(RingElement c, Mul(p[k], s));
    if (!noise.empty()) c += t * noise[k];
    c += x[k];
    if (!mask.empty()) c += mask[k];
    w.push_back(std::move(c));
  }
  return w;
}

// Store-round client message: fresh noise e_k <- D_sigma per element.
inline absl::StatusOr<Ciphertext> StoreMessage(
    std::span<const RingElement> a, const RingElement& s_share,
    std::span<const RingElement> x_encoded, const DiscreteGaussian& noise,
    Prg& prg, std::span<const RingElement> mask = {}) {
  Ciphertext e;
  e.reserve(a.size());
  for (size_t k = 0; k < a.size(); ++k) {
    e.push_back(SampleGaussian(prg, noise, s_share.params()));
  }
  return Encrypt(a, s_share, e, x_encoded, mask);
}

// -sum_k lambda_k P_k over the first lambda.size() rounds.
inline absl::StatusOr<Ciphertext> RevealPublic(
    std::span<const Ciphertext> publics, std::span<const int64_t> lambda,
    size_t m, const RingParamsPtr& params) {
  if (lambda.size() > publics.size()) {
    return absl::NotFoundError(absl::StrCat(
        "weights reference round ", lambda.size(), " but only ",
        publics.size(), " rounds exist"));
  }
  Ciphertext out(m, RingElement::Zero(params));
  for (size_t k = 0; k < lambda.size(); ++k) {
    if (lambda[k] == 0) continue;
    SA_RETURN_IF_ERROR(internal::CheckShape(out, publics[k], "public element"));
    for (size_t e = 0; e < m; ++e) out[e] -= lambda[k] * publics[k][e];
  }
  return out;
}

// Flooding noise g = sum_k lambda_k g_k with independent g_k <- D_sigma.
inline Ciphertext FloodingNoise(std::span<const int64_t> lambda,
                                const DiscreteGaussian& dist, Prg& prg,
                                size_t m, const RingParamsPtr& params) {
  Ciphertext g(m, RingElement::Zero(params));
  for (int64_t l : lambda) {
    if (l == 0) continue;
    for (size_t e = 0; e < m; ++e) g[e] += l * SampleGaussian(prg, dist, params);
  }
  return g;
}

// Reveal-round client message: (-sum_k lambda_k A_k) s + T g + x (+ mask).
inline absl::StatusOr<Ciphertext> RevealMessage(
    std::span<const Ciphertext> publics, std::span<const int64_t> lambda,
    const RingElement& s_share, const DiscreteGaussian& flood, Prg& prg,
    std::span<const RingElement> x_encoded,
    std::span<const RingElement> mask = {}) {
  const auto& params = s_share.params();
  SA_ASSIGN_OR_RETURN(Ciphertext p,
                      RevealPublic(publics, lambda, x_encoded.size(), params));
  Ciphertext g = FloodingNoise(lambda, flood, prg, x_encoded.size(), params);
  return Encrypt(p, s_share, g, x_encoded, mask);
}

inline Ciphertext SumCiphertexts(std::span<const Ciphertext> parts, size_t m,
                                 const RingParamsPtr& params) {
  Ciphertext acc(m, RingElement::Zero(params));
  for (const auto& c : parts) {
    for (size_t e = 0; e < m; ++e) acc[e] += c[e];
  }
  return acc;
}

// Plaintext ring elements of reveal_agg + sum_k lambda_k stored[k]
// - corrections - masks_sum. Decoding reduces centered mod Q, then mod T.
inline absl::StatusOr<Ciphertext> Combine(
    std::span<const Ciphertext> stored, std::span<const RingElement> reveal_agg,
    std::span<const int64_t> lambda,
    std::span<const RingElement> corrections = {},
    std::span<const RingElement> masks_sum = {}) {
  if (lambda.size() > stored.size()) {
    return absl::NotFoundError(absl::StrCat(
        "weights reference ", lambda.size(), " rounds but only ",
        stored.size(), " are stored"));
  }
  Ciphertext acc(reveal_agg.begin(), reveal_agg.end());
  for (size_t k = 0; k < lambda.size(); ++k) {
    if (lambda[k] == 0) continue;
    SA_RETURN_IF_ERROR(internal::CheckShape(reveal_agg, stored[k], "stored round"));
    for (size_t e = 0; e < acc.size(); ++e) acc[e] += lambda[k] * stored[k][e];
  }
  if (!corrections.empty()) {
    SA_RETURN_IF_ERROR(internal::CheckShape(reveal_agg, corrections, "corrections"));
    for (size_t e = 0; e < acc.size(); ++e) acc[e] -= corrections[e];
  }
  if (!masks_sum.empty()) {
    SA_RETURN_IF_ERROR(internal::CheckShape(reveal_agg, masks_sum, "masks"));
    for (size_t e = 0; e < acc.size(); ++e) acc[e] -= masks_sum[e];
  }
  return acc;
}

inline absl::StatusOr<std::vector<int64_t>> Open(
    std::span<const Ciphertext> stored, std::span<const RingElement> reveal_agg,
    std::span<const int64_t> lambda, size_t length, const PackingLayout& layout,
    int64_t window_low, std::span<const RingElement> corrections = {},
    std::span<const RingElement> masks_sum = {}) {
  SA_ASSIGN_OR_RETURN(Ciphertext plain, Combine(stored, reveal_agg, lambda,
                                                corrections, masks_sum));
  return Decode(plain, length, layout, window_low);
}

}  // namespace stateful_agg

#endif  // STATEFUL_AGG_CRYPTO_H_

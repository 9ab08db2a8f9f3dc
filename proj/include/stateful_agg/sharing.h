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

// Additive sharing, Shamir threshold sharing, and seed-compressed resharing
// of ring secrets.

#ifndef STATEFUL_AGG_SHARING_H_
#define STATEFUL_AGG_SHARING_H_

#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "stateful_agg/modular.h"
#include "stateful_agg/prg.h"
#include "stateful_agg/ring.h"
#include "stateful_agg/status_macros.h"

namespace stateful_agg {

// d-1 uniform elements followed by the difference.
inline absl::StatusOr<std::vector<RingElement>> AShare(const RingElement& secret,
                                                       int d, Prg& prg) {
  if (d < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("additive share count must be >= 1, got ", d));
  }
  std::vector<RingElement> shares;
  shares.reserve(d);
  RingElement last = secret;
  for (int k = 0; k + 1 < d; ++k) {
    shares.push_back(SampleUniform(prg, secret.params()));
    last -= shares.back();
  }
  shares.push_back(std::move(last));
  return shares;
}

inline absl::StatusOr<std::vector<uint64_t>> AShareScalar(uint64_t secret, int d,
                                                          uint64_t q, Prg& prg) {
  if (d < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("additive share count must be >= 1, got ", d));
  }
  std::vector<uint64_t> shares;
  uint64_t last = secret % q;
  for (int k = 0; k + 1 < d; ++k) {
    shares.push_back(prg.UniformBelow(q));
    last = SubMod(last, shares.back(), q);
  }
  shares.push_back(last);
  return shares;
}

inline RingElement SumShares(std::span<const RingElement> shares) {
  RingElement acc = shares.front();
  for (size_t i = 1; i < shares.size(); ++i) acc += shares[i];
  return acc;
}

// ---------------------------------------------------------------------------
// Shamir sharing. Evaluation points are 1..h.

struct ScalarShare {
  uint64_t point = 0;
  uint64_t value = 0;
};

struct RingShare {
  uint64_t point = 0;
  RingElement value;
};

struct ThresholdShares {
  int threshold = 0;
  std::vector<RingShare> shares;
};

namespace internal {

inline absl::Status CheckThresholdArgs(int h, int t, uint64_t q) {
  if (t < 1 || h < 1) {
    return absl::InvalidArgumentError("threshold and committee size must be >= 1");
  }
  if (t > h) {
    return absl::InvalidArgumentError(
        absl::StrCat("threshold ", t, " exceeds committee size ", h));
  }
  if (static_cast<uint64_t>(h) >= q) {
    return absl::InvalidArgumentError("committee size must be below the modulus");
  }
  return absl::OkStatus();
}

// Lagrange coefficients for interpolation at zero from the given points.
inline absl::StatusOr<std::vector<uint64_t>> LagrangeAtZero(
    std::span<const uint64_t> points, uint64_t q) {
  std::set<uint64_t> seen;
  for (uint64_t x : points) {
    if (x % q == 0 || !seen.insert(x % q).second) {
      return absl::InvalidArgumentError(
          "evaluation points must be distinct and non-zero");
    }
  }
  std::vector<uint64_t> coeffs(points.size());
  for (size_t j = 0; j < points.size(); ++j) {
    uint64_t num = 1, den = 1;
    for (size_t m = 0; m < points.size(); ++m) {
      if (m == j) continue;
      num = MulMod(num, points[m] % q, q);
      den = MulMod(den, SubMod(points[m] % q, points[j] % q, q), q);
    }
    coeffs[j] = MulMod(num, InvMod(den, q), q);
  }
  return coeffs;
}

}  // namespace internal

inline absl::StatusOr<std::vector<ScalarShare>> TShareScalar(uint64_t secret,
                                                             int h, int t,
                                                             uint64_t q,
                                                             Prg& prg) {
  SA_RETURN_IF_ERROR(internal::CheckThresholdArgs(h, t, q));
  std::vector<uint64_t> poly(t);
  poly[0] = secret % q;
  for (int k = 1; k < t; ++k) poly[k] = prg.UniformBelow(q);
  std::vector<ScalarShare> shares;
  for (int x = 1; x <= h; ++x) {
    uint64_t y = 0;
    for (int k = t - 1; k >= 0; --k) y = AddMod(MulMod(y, x, q), poly[k], q);
    shares.push_back({static_cast<uint64_t>(x), y});
  }
  return shares;
}

inline absl::StatusOr<uint64_t> TRecScalar(std::span<const ScalarShare> shares,
                                           int t, uint64_t q) {
  if (static_cast<int>(shares.size()) < t) {
    return absl::FailedPreconditionError(absl::StrCat(
        "need ", t, " shares to reconstruct, have ", shares.size()));
  }
  std::vector<uint64_t> points;
  for (const auto& s : shares) points.push_back(s.point);
  SA_ASSIGN_OR_RETURN(std::vector<uint64_t> lagrange,
                      internal::LagrangeAtZero(points, q));
  uint64_t acc = 0;
  for (size_t j = 0; j < shares.size(); ++j) {
    acc = AddMod(acc, MulMod(lagrange[j], shares[j].value % q, q), q);
  }
  return acc;
}

// Coefficient-wise (and limb-wise) Shamir sharing of a ring element.
inline absl::StatusOr<ThresholdShares> TShare(const RingElement& secret, int h,
                                              int t, Prg& prg) {
  const auto& params = secret.params();
  for (uint64_t q : params->moduli()) {
    SA_RETURN_IF_ERROR(internal::CheckThresholdArgs(h, t, q));
  }
  ThresholdShares out;
  out.threshold = t;
  for (int x = 1; x <= h; ++x) {
    out.shares.push_back({static_cast<uint64_t>(x), RingElement::Zero(params)});
  }
  std::vector<uint64_t> poly(t);
  for (size_t l = 0; l < params->num_limbs(); ++l) {
    const uint64_t q = params->modulus(l);
    auto src = secret.limb(l);
    for (size_t i = 0; i < src.size(); ++i) {
      poly[0] = src[i];
      for (int k = 1; k < t; ++k) poly[k] = prg.UniformBelow(q);
      for (int x = 1; x <= h; ++x) {
        uint64_t y = 0;
        for (int k = t - 1; k >= 0; --k) y = AddMod(MulMod(y, x, q), poly[k], q);
        out.shares[x - 1].value.mutable_limb(l)[i] = y;
      }
    }
  }
  return out;
}

inline absl::StatusOr<RingElement> TRec(std::span<const RingShare> shares, int t) {
  if (static_cast<int>(shares.size()) < t || shares.empty()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "need ", t, " shares to reconstruct, have ", shares.size()));
  }
  const auto& params = shares.front().value.params();
  std::vector<uint64_t> points;
  for (const auto& s : shares) {
    if (!s.value.SameRing(shares.front().value)) {
      return absl::InvalidArgumentError("threshold shares from different rings");
    }
    points.push_back(s.point);
  }
  RingElement out = RingElement::Zero(params);
  for (size_t l = 0; l < params->num_limbs(); ++l) {
    const uint64_t q = params->modulus(l);
    SA_ASSIGN_OR_RETURN(std::vector<uint64_t> lagrange,
                        internal::LagrangeAtZero(points, q));
    auto dst = out.mutable_limb(l);
    for (size_t j = 0; j < shares.size(); ++j) {
      auto src = shares[j].value.limb(l);
      for (size_t i = 0; i < dst.size(); ++i) {
        dst[i] = AddMod(dst[i], MulMod(lagrange[j], src[i], q), q);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Seed-compressed resharing: d short seeds go to peers, the correction
// y* = secret - sum expand(seed_k) goes to the server.

// Pseudorandom ring element from a seed, uniform in every limb.
inline RingElement Expand(const Seed128& seed, const RingParamsPtr& params) {
  Prg prg(seed);
  return SampleUniform(prg, params);
}

struct SeedReshare {
  std::vector<Seed128> seeds;
  RingElement correction;
};

inline absl::StatusOr<SeedReshare> SeedReshareSecret(const RingElement& secret,
                                                     int d, Prg& prg) {
  if (d < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("reshare fan-out must be >= 1, got ", d));
  }
  SeedReshare out;
  out.correction = secret;
  for (int k = 0; k < d; ++k) {
    out.seeds.push_back(prg.NextSeed());
    out.correction -= Expand(out.seeds.back(), secret.params());
  }
  return out;
}

// Bits sent to peers for one seed-compressed reshare.
inline int64_t SeedReshareBits(const SeedReshare& r) {
  return static_cast<int64_t>(r.seeds.size()) * kSeedBits;
}

}  // namespace stateful_agg

#endif  // STATEFUL_AGG_SHARING_H_

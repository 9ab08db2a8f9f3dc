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

// Dropout tolerance: chaperone committees in the next cohort hold threshold
// backups of key-share pieces and of each client's self-mask seed. The
// server recovers the key shares of clients that dropped and the masks of
// clients that did not.

#ifndef STATEFUL_AGG_DROPOUT_H_
#define STATEFUL_AGG_DROPOUT_H_

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "stateful_agg/crypto.h"
#include "stateful_agg/prg.h"
#include "stateful_agg/ring.h"
#include "stateful_agg/sharing.h"
#include "stateful_agg/status_macros.h"

namespace stateful_agg {

// ---------------------------------------------------------------------------
// Schedules.

struct DropoutSchedule {
  std::map<size_t, std::set<size_t>> dropped;  // round -> client indices

  bool IsDropped(size_t round, size_t client) const {
    auto it = dropped.find(round);
    return it != dropped.end() && it->second.count(client) > 0;
  }
  size_t Count(size_t round) const {
    auto it = dropped.find(round);
    return it == dropped.end() ? 0 : it->second.size();
  }
  bool empty() const {
    return std::all_of(dropped.begin(), dropped.end(),
                       [](const auto& kv) { return kv.second.empty(); });
  }
};

// At most floor(beta * n) clients per round, count and members uniform.
inline DropoutSchedule RandomSchedule(size_t rounds, size_t n, double beta,
                                      Prg& prg) {
  DropoutSchedule s;
  const size_t cap = static_cast<size_t>(std::floor(beta * n + 1e-9));
  for (size_t i = 0; i < rounds; ++i) {
    const size_t k = prg.UniformBelow(cap + 1);
    std::vector<size_t> idx(n);
    for (size_t j = 0; j < n; ++j) idx[j] = j;
    for (size_t j = 0; j < k; ++j) {
      std::swap(idx[j], idx[j + prg.UniformBelow(n - j)]);
      s.dropped[i].insert(idx[j]);
    }
  }
  return s;
}

inline absl::Status CheckSchedule(const DropoutSchedule& s, size_t rounds,
                                  size_t n, double beta) {
  for (const auto& [round, set] : s.dropped) {
    if (round >= rounds) {
      return absl::InvalidArgumentError(
          absl::StrCat("dropout schedule names round ", round + 1,
                       " but the program has ", rounds));
    }
    for (size_t j : set) {
      if (j >= n) {
        return absl::InvalidArgumentError(
            absl::StrCat("dropout schedule names client ", j, " of ", n));
      }
    }
    if (set.size() > beta * n + 1e-9) {
      return absl::InvalidArgumentError(absl::StrCat(
          "round ", round + 1, " drops ", set.size(), " clients, above beta * n"));
    }
  }
  return absl::OkStatus();
}

// {"rounds": {"2": [0, 7]}} with 1-based round keys.
inline absl::StatusOr<DropoutSchedule> ParseSchedule(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("rounds") ||
      !j["rounds"].is_object()) {
    return absl::InvalidArgumentError("dropout schedule needs a \"rounds\" object");
  }
  DropoutSchedule s;
  for (const auto& [key, val] : j["rounds"].items()) {
    uint64_t round;
    if (!absl::SimpleAtoi(key, &round) || round == 0) {
      return absl::InvalidArgumentError(absl::StrCat("bad round key \"", key, "\""));
    }
    if (!val.is_array()) return absl::InvalidArgumentError("client list must be an array");
    for (const auto& c : val) {
      if (!c.is_number_unsigned()) {
        return absl::InvalidArgumentError(absl::StrCat("bad client index ", c.dump()));
      }
      s.dropped[round - 1].insert(c.get<size_t>());
    }
  }
  return s;
}

inline std::string ScheduleToJson(const DropoutSchedule& s) {
  nlohmann::json rounds = nlohmann::json::object();
  for (const auto& [round, set] : s.dropped) {
    if (!set.empty()) rounds[std::to_string(round + 1)] = std::vector<size_t>(set.begin(), set.end());
  }
  return nlohmann::json{{"rounds", rounds}}.dump();
}

// ---------------------------------------------------------------------------
// Committees.

struct DropoutOptions {
  int h = 0;  // committee size; 0 means min(d, cohort size)
  int t = 0;  // threshold; 0 means floor(h/2) + 1
  bool public_committee = false;  // one committee per cohort for everyone
  bool self_reveal_mask = false;  // survivors reveal their own mask seed
  bool zero_masks = false;        // b = 0 and MASK = 0
};

enum class CommitteeKind : uint64_t { kKeyBackup = 1, kMask = 2 };

// h distinct members of a cohort of size `cohort_size`, seeded by
// (kind, owner cohort, owner index). With public_committee every owner in
// the cohort gets the same members.
inline std::vector<size_t> Committee(uint64_t seed, CommitteeKind kind,
                                     size_t owner_cohort, size_t owner,
                                     int h, size_t cohort_size,
                                     bool public_committee) {
  Prg prg = public_committee
                ? Prg(seed).Derive({0x636f6d6d, static_cast<uint64_t>(kind), owner_cohort})
                : Prg(seed).Derive({0x636f6d6d, static_cast<uint64_t>(kind),
                                    owner_cohort, owner});
  std::vector<size_t> idx(cohort_size);
  for (size_t j = 0; j < cohort_size; ++j) idx[j] = j;
  const size_t k = std::min<size_t>(h, cohort_size);
  for (size_t j = 0; j < k; ++j) std::swap(idx[j], idx[j + prg.UniformBelow(cohort_size - j)]);
  idx.resize(k);
  return idx;
}

// ---------------------------------------------------------------------------
// Masks.

// MASK = PRG(b): m uniform ring elements. b = 0 yields the zero mask.
inline Ciphertext ExpandMask(uint64_t b, size_t m, const RingParamsPtr& params) {
  if (b == 0) return Ciphertext(m, RingElement::Zero(params));
  Prg prg = Prg(b).Derive({0x6d61736b});
  Ciphertext out;
  out.reserve(m);
  for (size_t k = 0; k < m; ++k) out.push_back(SampleUniform(prg, params));
  return out;
}

// Mask secret in [1, q0) and its shares for the mask committee.
struct MaskSecret {
  uint64_t b = 0;
  std::vector<ScalarShare> shares;  // shares[u] goes to committee member u
};

inline absl::StatusOr<MaskSecret> MakeMaskSecret(Prg& prg, uint64_t q0, int h,
                                                 int t, bool zero) {
  MaskSecret out;
  out.b = zero ? 0 : 1 + prg.UniformBelow(q0 - 1);
  if (h > 0) {
    SA_ASSIGN_OR_RETURN(out.shares, TShareScalar(out.b, h, t, q0, prg));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Routing. The router is the simulator's ground truth for who dropped; it
// enforces that chaperones release key backups only for dropped receivers
// and mask shares only for surviving owners.

class Router {
 public:
  absl::Status ReleaseKeyBackup(size_t cohort, size_t receiver, bool dropped) {
    if (!dropped) {
      return absl::InternalError(absl::StrCat(
          "key backup of live client ", receiver, " in cohort ", cohort,
          " released"));
    }
    ++key_releases_;
    return absl::OkStatus();
  }

  absl::Status ReleaseMaskShare(size_t cohort, size_t owner, bool dropped) {
    if (dropped) {
      return absl::InternalError(absl::StrCat(
          "mask share of dropped client ", owner, " in cohort ", cohort,
          " released"));
    }
    ++mask_releases_;
    return absl::OkStatus();
  }

  void RecordMaskReconstructed(size_t cohort, size_t owner) {
    reconstructed_.insert({cohort, owner});
  }

  // True when no dropped client's mask secret was ever reconstructed.
  bool MasksPrivate(const DropoutSchedule& s) const {
    for (const auto& [c, j] : reconstructed_) {
      if (s.IsDropped(c, j)) return false;
    }
    return true;
  }

  size_t key_releases() const { return key_releases_; }
  size_t mask_releases() const { return mask_releases_; }
  size_t masks_reconstructed() const { return reconstructed_.size(); }

 private:
  size_t key_releases_ = 0;
  size_t mask_releases_ = 0;
  std::set<std::pair<size_t, size_t>> reconstructed_;
};

// Reconstructs a secret from the shares held by live committee members.
// Fewer than t live members is an unrecoverable round.
inline absl::StatusOr<RingElement> RecoverFromCommittee(
    const ThresholdShares& backup, const std::vector<bool>& member_alive,
    size_t round) {
  std::vector<RingShare> live;
  for (size_t u = 0; u < backup.shares.size(); ++u) {
    if (member_alive[u]) live.push_back(backup.shares[u]);
  }
  if (static_cast<int>(live.size()) < backup.threshold) {
    return absl::FailedPreconditionError(absl::StrCat(
        "unrecoverable round ", round + 1, ": ", live.size(),
        " chaperones alive, threshold ", backup.threshold));
  }
  return TRec(live, backup.threshold);
}

inline absl::StatusOr<uint64_t> RecoverMaskSeed(const MaskSecret& secret,
                                                const std::vector<bool>& member_alive,
                                                int t, uint64_t q0, size_t round) {
  std::vector<ScalarShare> live;
  for (size_t u = 0; u < secret.shares.size(); ++u) {
    if (member_alive[u]) live.push_back(secret.shares[u]);
  }
  if (static_cast<int>(live.size()) < t) {
    return absl::FailedPreconditionError(absl::StrCat(
        "unrecoverable round ", round + 1, ": ", live.size(),
        " mask chaperones alive, threshold ", t));
  }
  return TRecScalar(live, t, q0);
}

}  // namespace stateful_agg

#endif  // STATEFUL_AGG_DROPOUT_H_

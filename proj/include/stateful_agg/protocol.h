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

// Round-based simulation of the multi-cohort protocol.
//
// Every round i, each client of cohort C_i encrypts its input under the
// public element A_i with its key share and, when round i-1 was a Reveal,
// also sends a distributed-decryption share for v_{i-1}. It then reshares
// its key share to d uniformly chosen members of C_{i+1}. The shares of
// every cohort sum to the global key s up to a correction known to the
// server (compressed-resharing corrections and recovered shares of dropped
// clients), which the server folds back in when it finalizes a round.
//
// With dropout handling enabled, messages carry self-masks and key-share
// pieces are backed up to chaperone committees; round i is finalized one
// step later, once C_{i+1} has released the backups it holds.

#ifndef STATEFUL_AGG_PROTOCOL_H_
#define STATEFUL_AGG_PROTOCOL_H_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "stateful_agg/crypto.h"
#include "stateful_agg/dropout.h"
#include "stateful_agg/params.h"
#include "stateful_agg/prg.h"
#include "stateful_agg/program.h"
#include "stateful_agg/ring.h"
#include "stateful_agg/sharing.h"
#include "stateful_agg/status_macros.h"

namespace stateful_agg {

// ---------------------------------------------------------------------------
// Parallelism.

// STATEFUL_AGG_THREADS caps worker threads; default is the hardware count.
inline int ThreadCount() {
  int n = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("STATEFUL_AGG_THREADS")) {
    int v;
    if (absl::SimpleAtoi(env, &v) && v > 0) n = std::min(n, v);
  }
  return n;
}

// Runs fn(0..count-1); returns the first error by index.
inline absl::Status ParallelFor(size_t count, int threads,
                                const std::function<absl::Status(size_t)>& fn) {
  std::vector<absl::Status> status(count);
  const size_t workers = std::min<size_t>(std::max(threads, 1), count);
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) status[i] = fn(i);
  } else {
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (size_t i = w; i < count; i += workers) status[i] = fn(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& s : status) SA_RETURN_IF_ERROR(s);
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------
// Client.

enum StreamLabel : uint64_t {
  kClientStream = 0x636c69,
  kInitStream = 1,
  kNoiseStream = 2,
  kFloodStream = 3,
  kReshareStream = 4,
  kMaskStream = 5,
  kBackupStream = 6,
  kGlobalStream = 7,
};

struct ClientState {
  size_t cohort = 0;
  size_t index = 0;
  RingElement share;
};

// What a client of cohort i sees when it acts.
struct RoundView {
  const Ciphertext* a = nullptr;  // A_i; null for the closing cohort
  std::span<const int64_t> input;  // this client's input vector
  // Decryption of v_{i-1}: -sum_k lambda-bar_k A_k and lambda-bar.
  const Ciphertext* decrypt_public = nullptr;
  std::span<const int64_t> decrypt_lambda;
  size_t next_cohort_size = 0;  // 0: no resharing
  int fanout = 1;
  bool seed_reshare = false;
};

struct ReshareMessage {
  size_t receiver;
  RingElement piece;            // what the receiver adds to its share
  std::optional<Seed128> seed;  // sent instead of the piece when compressed
};

struct ClientOutput {
  Ciphertext store;    // empty for the closing cohort
  Ciphertext decrypt;  // empty unless round i-1 was a Reveal
  std::vector<ReshareMessage> reshares;
  std::optional<RingElement> correction;  // y* for compressed resharing
};

inline Prg ClientPrg(uint64_t seed, size_t cohort, size_t index) {
  return Prg(seed).Derive({kClientStream, cohort, index});
}

inline absl::StatusOr<ClientOutput> ClientStep(const ClientState& state,
                                               const RoundView& view,
                                               const PackingLayout& layout,
                                               const DiscreteGaussian& noise,
                                               const Prg& root,
                                               const Ciphertext* mask = nullptr) {
  const RingParamsPtr& ring = state.share.params();
  ClientOutput out;
  if (view.a != nullptr) {
    SA_ASSIGN_OR_RETURN(Ciphertext x, Encode(view.input, layout, ring));
    x.resize(view.a->size(), RingElement::Zero(ring));
    Prg prg = root.Derive({kNoiseStream});
    SA_ASSIGN_OR_RETURN(
        out.store,
        StoreMessage(*view.a, state.share, x, noise, prg,
                     mask ? std::span<const RingElement>(*mask)
                          : std::span<const RingElement>()));
  }
  if (view.decrypt_public != nullptr) {
    const size_t m = view.decrypt_public->size();
    Prg prg = root.Derive({kFloodStream});
    Ciphertext g = FloodingNoise(view.decrypt_lambda, noise, prg, m, ring);
    Ciphertext zero(m, RingElement::Zero(ring));
    SA_ASSIGN_OR_RETURN(out.decrypt,
                        Encrypt(*view.decrypt_public, state.share, g, zero));
  }
  if (view.next_cohort_size > 0) {
    Prg prg = root.Derive({kReshareStream});
    std::vector<size_t> receivers(view.fanout);
    for (auto& r : receivers) r = prg.UniformBelow(view.next_cohort_size);
    if (view.seed_reshare) {
      SA_ASSIGN_OR_RETURN(SeedReshare sr,
                          SeedReshareSecret(state.share, view.fanout, prg));
      for (int k = 0; k < view.fanout; ++k) {
        out.reshares.push_back({receivers[k], Expand(sr.seeds[k], ring), sr.seeds[k]});
      }
      out.correction = std::move(sr.correction);
    } else {
      SA_ASSIGN_OR_RETURN(std::vector<RingElement> pieces,
                          AShare(state.share, view.fanout, prg));
      for (int k = 0; k < view.fanout; ++k) {
        out.reshares.push_back({receivers[k], std::move(pieces[k]), std::nullopt});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Server.

struct RevealOutput {
  size_t round;         // the Reveal instruction answered
  size_t delivered_at;  // step at which the server obtained it
  std::vector<int64_t> values;
};

// Aggregates of one round as received, before key corrections and masks.
struct RoundAggregate {
  Ciphertext store;
  Ciphertext decrypt;
  Ciphertext decrypt_public;
  std::vector<int64_t> decrypt_lambda;
};

class Server {
 public:
  Server(RingParamsPtr ring, size_t m, size_t length, PackingLayout layout,
         int64_t window_low)
      : ring_(std::move(ring)), m_(m), length_(length), layout_(layout),
        window_low_(window_low) {}

  void AddPublic(Ciphertext a) { publics_.push_back(std::move(a)); }
  const std::vector<Ciphertext>& publics() const { return publics_; }
  const std::vector<Ciphertext>& stored() const { return stored_; }

  // Folds the key correction `offset` (cohort shares sum to s - offset) and
  // the survivors' masks into round i's aggregates, appends the stored
  // ciphertext and, if the round carried decryption shares, opens v_{i-1}.
  absl::StatusOr<std::optional<RevealOutput>> Finalize(size_t round,
                                                       size_t step,
                                                       const RoundAggregate& agg,
                                                       const RingElement& offset,
                                                       const Ciphertext& masks) {
    if (!agg.store.empty()) {
      if (round != stored_.size()) {
        return absl::InternalError(absl::StrCat(
            "round ", round + 1, " finalized out of order"));
      }
      Ciphertext w = agg.store;
      for (size_t e = 0; e < m_; ++e) {
        w[e] += publics_[round][e] * offset;
        if (!masks.empty()) w[e] -= masks[e];
      }
      stored_.push_back(std::move(w));
    }
    if (agg.decrypt.empty()) return std::nullopt;
    Ciphertext d = agg.decrypt;
    for (size_t e = 0; e < m_; ++e) d[e] += agg.decrypt_public[e] * offset;
    std::span<const Ciphertext> prior(stored_.data(), agg.decrypt_lambda.size());
    SA_ASSIGN_OR_RETURN(std::vector<int64_t> values,
                        Open(prior, d, agg.decrypt_lambda, length_, layout_,
                             window_low_));
    return RevealOutput{round - 1, step, std::move(values)};
  }

 private:
  RingParamsPtr ring_;
  size_t m_;
  size_t length_;
  PackingLayout layout_;
  int64_t window_low_;
  std::vector<Ciphertext> publics_;
  std::vector<Ciphertext> stored_;
};

// ---------------------------------------------------------------------------
// Driver.

struct ProtocolOptions {
  uint64_t seed = 1;  // root of all protocol randomness
  bool seed_reshare = false;
  std::optional<int64_t> window_low;  // default: signed slots
  bool dropout = false;               // masks and chaperone backups
  DropoutOptions dropout_opts;
  const DropoutSchedule* schedule = nullptr;
  int threads = 0;  // 0: ThreadCount()
  // Test hook, called once per cohort when its correction is final with
  // (sum of surviving shares + correction) and s.
  std::function<void(size_t, const RingElement&, const RingElement&)> key_observer;
};

struct RoundTranscript {
  size_t round = 0;
  uint64_t c2s_bytes = 0;
  uint64_t c2c_bytes = 0;
  uint64_t c2c_messages = 0;
  size_t dropped = 0;
};

struct Transcript {
  std::vector<RoundTranscript> rounds;
  std::vector<RevealOutput> reveals;
  uint64_t store_bytes_per_client = 0;  // one store upload plus correction
  size_t key_releases = 0;
  size_t mask_releases = 0;
  size_t masks_reconstructed = 0;
  bool masks_private = true;
};

struct ProtocolResult {
  std::vector<RevealOutput> reveals;
  Transcript transcript;
};

namespace internal {

inline uint64_t ModulusBits(const RingParams& ring) {
  uint64_t bits = 0;
  for (uint64_t q : ring.moduli()) bits += std::bit_width(q);
  return bits;
}

// Per-step data kept until the round is finalized.
struct PendingRound {
  RoundAggregate agg;
  RingElement deficit;                     // D_i
  RingElement correction_sum;              // sum of y* sent this round
  RingElement survivor_share_sum;          // for the key observer
  std::vector<std::optional<MaskSecret>> masks;  // per client, survivors only
  // Backups of pieces received by each member of this cohort, indexed by
  // receiver.
  std::vector<std::vector<ThresholdShares>> backups;
};

}  // namespace internal

inline int64_t DefaultWindow(const PackingLayout& layout) {
  return -(int64_t{1} << (layout.slot_width - 1));
}

inline absl::StatusOr<ProtocolResult> RunProtocol(const Program& program,
                                                  const InputSource& inputs,
                                                  const ParamSet& params,
                                                  const ProtocolOptions& opt = {}) {
  SA_RETURN_IF_ERROR(ValidateOrError(program));
  const size_t r = program.size();
  const size_t n = params.n;
  if (n == 0) return absl::InvalidArgumentError("cohorts need at least one client");
  if (params.d < 1) return absl::InvalidArgumentError("resharing fanout d must be >= 1");
  static const DropoutSchedule kNoDrops;
  const DropoutSchedule& schedule = opt.schedule ? *opt.schedule : kNoDrops;
  if (!schedule.empty() && !opt.dropout) {
    return absl::InvalidArgumentError("a dropout schedule needs dropout handling enabled");
  }
  SA_RETURN_IF_ERROR(CheckSchedule(schedule, r, n, 1.0));

  SA_ASSIGN_OR_RETURN(RingParamsPtr ring, BuildRing(params));
  const PackingLayout layout{params.pf, params.slot_width};
  const size_t m = layout.ElementsFor(program.length, ring->degree());
  const int64_t window = opt.window_low.value_or(DefaultWindow(layout));
  const DiscreteGaussian noise(params.sigma_n);
  const int threads = opt.threads > 0 ? opt.threads : ThreadCount();
  const uint64_t q0 = ring->modulus(0);
  const int h = opt.dropout_opts.h > 0 ? opt.dropout_opts.h
                                       : std::min<int>(params.h > 0 ? params.h : params.d, n);
  const int t = opt.dropout_opts.t > 0 ? opt.dropout_opts.t : h / 2 + 1;
  if (opt.dropout && (t > h || static_cast<size_t>(h) > n)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "committee size ", h, " and threshold ", t, " do not fit cohorts of ", n));
  }

  std::vector<std::vector<int64_t>> lambdas(r);
  for (size_t i = 0; i < r; ++i) {
    if (program.rounds[i].mode == Mode::kReveal) {
      SA_ASSIGN_OR_RETURN(lambdas[i], ComposeLambda(program, i));
    }
  }

  // A closing cohort r decrypts a final Reveal and, with dropouts, releases
  // the chaperone backups for round r-1.
  const bool closing = r > 0 && (opt.dropout || program.rounds[r - 1].mode == Mode::kReveal);
  const size_t steps = r + (closing ? 1 : 0);
  const Seed128 global = Prg(opt.seed).Derive({kGlobalStream}).NextSeed();
  const uint64_t bits_q = internal::ModulusBits(*ring);
  const uint64_t ct_bytes = BitsToBytes(layout.CoefficientsFor(program.length) * bits_q);
  const uint64_t elem_bytes = BitsToBytes(static_cast<uint64_t>(ring->degree()) * bits_q);
  const uint64_t scalar_bytes = BitsToBytes(std::bit_width(q0));

  ProtocolResult result;
  Transcript& tr = result.transcript;
  Server server(ring, m, program.length, layout, window);
  Router router;

  // Cohort 0 samples its shares; s is the sum over those who take part.
  std::vector<RingElement> shares(n);
  RingElement key = RingElement::Zero(ring);
  for (size_t j = 0; j < n; ++j) {
    Prg prg = ClientPrg(opt.seed, 0, j).Derive({kInitStream});
    shares[j] = SampleUniform(prg, ring);
    if (!schedule.IsDropped(0, j)) key += shares[j];
  }
  RingElement deficit = RingElement::Zero(ring);  // D_i of the acting cohort
  std::optional<internal::PendingRound> pending;  // round awaiting finalize
  std::vector<std::vector<ThresholdShares>> incoming_backups(n);

  auto finalize = [&](size_t round, size_t step, internal::PendingRound& pr,
                      const std::vector<bool>& next_alive) -> absl::Status {
    // Z: recovered shares of this cohort's dropped members.
    RingElement z = RingElement::Zero(ring);
    Ciphertext masks;
    if (opt.dropout && round < r) {
      for (size_t j = 0; j < n; ++j) {
        if (!schedule.IsDropped(round, j)) continue;
        if (pr.backups[j].empty()) continue;
        SA_RETURN_IF_ERROR(router.ReleaseKeyBackup(round, j, true));
        std::vector<size_t> members =
            Committee(opt.seed, CommitteeKind::kKeyBackup, round, j, h, n,
                      opt.dropout_opts.public_committee);
        std::vector<bool> alive(members.size());
        for (size_t u = 0; u < members.size(); ++u) alive[u] = next_alive[members[u]];
        for (const auto& b : pr.backups[j]) {
          SA_ASSIGN_OR_RETURN(RingElement piece, RecoverFromCommittee(b, alive, round));
          z += piece;
        }
      }
      masks.assign(m, RingElement::Zero(ring));
      for (size_t j = 0; j < n; ++j) {
        if (!pr.masks[j]) continue;
        uint64_t b = pr.masks[j]->b;
        if (!opt.dropout_opts.self_reveal_mask) {
          SA_RETURN_IF_ERROR(router.ReleaseMaskShare(round, j, schedule.IsDropped(round, j)));
          std::vector<size_t> members =
              Committee(opt.seed, CommitteeKind::kMask, round, j, h, n,
                        opt.dropout_opts.public_committee);
          std::vector<bool> alive(members.size());
          for (size_t u = 0; u < members.size(); ++u) alive[u] = next_alive[members[u]];
          SA_ASSIGN_OR_RETURN(b, RecoverMaskSeed(*pr.masks[j], alive, t, q0, round));
        }
        router.RecordMaskReconstructed(round, j);
        Ciphertext mask = ExpandMask(b, m, ring);
        for (size_t e = 0; e < m; ++e) masks[e] += mask[e];
      }
    }
    const RingElement offset = pr.deficit + z;
    if (opt.key_observer) opt.key_observer(round, pr.survivor_share_sum + offset, key);
    SA_ASSIGN_OR_RETURN(std::optional<RevealOutput> out,
                        server.Finalize(round, step, pr.agg, offset, masks));
    if (out) result.reveals.push_back(std::move(*out));
    // Next cohort's shares sum to s - (D_i + Z_i + Y_i).
    deficit = offset + pr.correction_sum;
    return absl::OkStatus();
  };

  for (size_t i = 0; i < steps; ++i) {
    const bool synthetic = i == r;
    const size_t next_size = (i + 1 < steps) ? n : 0;
    RoundTranscript rt;
    rt.round = i;
    rt.dropped = synthetic ? 0 : schedule.Count(i);
    std::vector<bool> alive(n);
    for (size_t j = 0; j < n; ++j) alive[j] = synthetic || !schedule.IsDropped(i, j);
    // This cohort's chaperones release for the previous round first, which
    // also fixes the correction D_i its own shares carry.
    if (opt.dropout && pending) {
      SA_RETURN_IF_ERROR(finalize(i - 1, i, *pending, alive));
      pending.reset();
    }

    std::optional<Ciphertext> a;
    if (!synthetic) a = DerivePublic(global, i, m, ring);
    server.AddPublic(a ? *a : Ciphertext());
    Ciphertext decrypt_public;
    const std::vector<int64_t>* lam = nullptr;
    if (i > 0 && program.rounds[i - 1].mode == Mode::kReveal) {
      lam = &lambdas[i - 1];
      SA_ASSIGN_OR_RETURN(decrypt_public,
                          RevealPublic(server.publics(), *lam, m, ring));
    }

    std::vector<std::optional<ClientOutput>> outs(n);
    std::vector<std::optional<MaskSecret>> masks(n);
    std::vector<std::vector<ThresholdShares>> backups_by_sender(n);
    SA_RETURN_IF_ERROR(ParallelFor(n, threads, [&](size_t j) -> absl::Status {
      if (!synthetic && schedule.IsDropped(i, j)) return absl::OkStatus();
      const Prg root = ClientPrg(opt.seed, i, j);
      std::vector<int64_t> x;
      if (!synthetic) {
        SA_ASSIGN_OR_RETURN(x, ClientInput(program, i, j, n, inputs));
      }
      std::optional<Ciphertext> mask;
      if (opt.dropout && !synthetic) {
        Prg mprg = root.Derive({kMaskStream});
        SA_ASSIGN_OR_RETURN(
            masks[j], MakeMaskSecret(mprg, q0, opt.dropout_opts.self_reveal_mask ? 0 : h,
                                     t, opt.dropout_opts.zero_masks));
        mask = ExpandMask(masks[j]->b, m, ring);
      }
      RoundView view;
      view.a = a ? &*a : nullptr;
      view.input = x;
      if (lam) {
        view.decrypt_public = &decrypt_public;
        view.decrypt_lambda = *lam;
      }
      view.next_cohort_size = next_size;
      view.fanout = params.d;
      view.seed_reshare = opt.seed_reshare;
      ClientState st{i, j, shares[j]};
      SA_ASSIGN_OR_RETURN(outs[j], ClientStep(st, view, layout, noise, root,
                                              mask ? &*mask : nullptr));
      // Backups go to each receiver's committee, one cohort further on.
      if (opt.dropout && next_size > 0 && i + 1 < r) {
        Prg bprg = root.Derive({kBackupStream});
        for (const auto& msg : outs[j]->reshares) {
          SA_ASSIGN_OR_RETURN(ThresholdShares ts, TShare(msg.piece, h, t, bprg));
          backups_by_sender[j].push_back(std::move(ts));
        }
      }
      return absl::OkStatus();
    }));

    // Aggregate and route.
    internal::PendingRound pr;
    pr.deficit = deficit;
    pr.correction_sum = RingElement::Zero(ring);
    pr.survivor_share_sum = RingElement::Zero(ring);
    pr.masks = std::move(masks);
    pr.backups = std::move(incoming_backups);
    pr.backups.resize(n);
    if (!synthetic) pr.agg.store.assign(m, RingElement::Zero(ring));
    if (lam) {
      pr.agg.decrypt.assign(m, RingElement::Zero(ring));
      pr.agg.decrypt_public = decrypt_public;
      pr.agg.decrypt_lambda = *lam;
    }
    std::vector<RingElement> next_shares(next_size, RingElement::Zero(ring));
    incoming_backups.assign(n, {});
    for (size_t j = 0; j < n; ++j) {
      if (!outs[j]) continue;
      const ClientOutput& o = *outs[j];
      pr.survivor_share_sum += shares[j];
      for (size_t e = 0; e < o.store.size(); ++e) pr.agg.store[e] += o.store[e];
      for (size_t e = 0; e < o.decrypt.size(); ++e) pr.agg.decrypt[e] += o.decrypt[e];
      rt.c2s_bytes += (o.store.empty() ? 0 : ct_bytes) + (o.decrypt.empty() ? 0 : ct_bytes);
      if (o.correction) {
        pr.correction_sum += *o.correction;
        rt.c2s_bytes += elem_bytes;
      }
      if (opt.dropout && opt.dropout_opts.self_reveal_mask && pr.masks[j]) {
        rt.c2s_bytes += scalar_bytes;
      }
      for (size_t k = 0; k < o.reshares.size(); ++k) {
        const auto& msg = o.reshares[k];
        next_shares[msg.receiver] += msg.piece;
        rt.c2c_bytes += msg.seed ? kKappa / 8 : elem_bytes;
        ++rt.c2c_messages;
        if (k < backups_by_sender[j].size()) {
          incoming_backups[msg.receiver].push_back(std::move(backups_by_sender[j][k]));
          rt.c2c_bytes += static_cast<uint64_t>(h) * elem_bytes;
          rt.c2c_messages += h;
        }
      }
      if (pr.masks[j] && !pr.masks[j]->shares.empty()) {
        rt.c2c_bytes += static_cast<uint64_t>(h) * scalar_bytes;
        rt.c2c_messages += h;
      }
      if (tr.store_bytes_per_client == 0 && !o.store.empty()) {
        tr.store_bytes_per_client = ct_bytes + (o.correction ? elem_bytes : 0);
      }
    }
    tr.rounds.push_back(rt);

    // Without dropout handling the round is complete now; with it, the next
    // cohort's releases complete it. The closing cohort never drops.
    if (!opt.dropout) {
      SA_RETURN_IF_ERROR(finalize(i, i, pr, {}));
    } else if (synthetic) {
      SA_RETURN_IF_ERROR(finalize(i, i, pr, alive));
    } else {
      pending = std::move(pr);
    }
    shares = std::move(next_shares);
  }
  tr.reveals = result.reveals;
  tr.key_releases = router.key_releases();
  tr.mask_releases = router.mask_releases();
  tr.masks_reconstructed = router.masks_reconstructed();
  tr.masks_private = router.MasksPrivate(schedule);
  return result;
}

// Honest-link experiment for the resharing graph: in each of `cohorts`
// trials, floor(gamma n) members of the sending and receiving cohorts are
// corrupt, and every honest sender draws d receivers with replacement.
// Returns the number of trials in which some honest sender reached no
// honest receiver.
inline size_t HonestLinkFailures(size_t n, int d, double gamma, size_t cohorts,
                                 Prg& prg) {
  const size_t corrupt = static_cast<size_t>(std::floor(gamma * n + 1e-9));
  auto pick_corrupt = [&] {
    std::vector<size_t> idx(n);
    for (size_t j = 0; j < n; ++j) idx[j] = j;
    std::vector<bool> bad(n, false);
    for (size_t j = 0; j < corrupt; ++j) {
      std::swap(idx[j], idx[j + prg.UniformBelow(n - j)]);
      bad[idx[j]] = true;
    }
    return bad;
  };
  size_t failures = 0;
  for (size_t c = 0; c < cohorts; ++c) {
    const std::vector<bool> bad_senders = pick_corrupt();
    const std::vector<bool> bad_receivers = pick_corrupt();
    bool failed = false;
    for (size_t j = 0; j < n; ++j) {
      if (bad_senders[j]) continue;
      bool linked = false;
      for (int k = 0; k < d; ++k) linked |= !bad_receivers[prg.UniformBelow(n)];
      failed |= !linked;
    }
    failures += failed;
  }
  return failures;
}

}  // namespace stateful_agg

#endif  // STATEFUL_AGG_PROTOCOL_H_

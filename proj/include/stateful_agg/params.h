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

// Parameter selection: security table, communication cost model, noise
// budget, grid search and committee sizing.

#ifndef STATEFUL_AGG_PARAMS_H_
#define STATEFUL_AGG_PARAMS_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "stateful_agg/modular.h"
#include "stateful_agg/program.h"
#include "stateful_agg/ring.h"
#include "stateful_agg/status_macros.h"

namespace stateful_agg {

inline constexpr double kBaseSigma = 3.2;
inline constexpr int kKappa = 128;
inline constexpr double kDefaultDelta = 0x1.0p-40;
inline constexpr double kTailCut = DiscreteGaussian::kTailCut;

inline double SigmaS(double sigma = kBaseSigma) { return std::sqrt(2.0) * sigma; }
inline double SigmaN(size_t r, double sigma = kBaseSigma) {
  return 2.0 * sigma * std::sqrt(static_cast<double>(r) + 1.0);
}

// Largest log2(q) with 128-bit security for ternary-free uniform secrets,
// from the homomorphic encryption standard tables.
inline absl::StatusOr<int> MaxLogq(int degree) {
  switch (degree) {
    case 2048: return 54;
    case 4096: return 109;
    case 8192: return 218;
    case 16384: return 438;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("no security table entry for N = ", degree));
}

inline constexpr int kTableDegrees[] = {2048, 4096, 8192, 16384};

// d >= ln(2 n r / delta) / (1 - gamma): every honest sender reaches an honest
// receiver except with probability delta.
inline absl::StatusOr<int> CommitteeSize(size_t n, size_t r, double gamma,
                                         double delta = kDefaultDelta) {
  if (!(gamma >= 0 && gamma < 1)) {
    return absl::InvalidArgumentError("gamma must lie in [0, 1)");
  }
  if (!(delta > 0 && delta < 1)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1)");
  }
  const double v = std::log(2.0 * static_cast<double>(n) * r / delta) / (1.0 - gamma);
  return static_cast<int>(std::ceil(v - 1e-12));
}

struct CostReport {
  uint64_t client_to_server_bytes = 0;
  uint64_t client_to_client_bytes = 0;
  double expansion = 0;
};

inline uint64_t BitsToBytes(uint64_t bits) { return (bits + 7) / 8; }

// Per-client, per-store-round upload: the used ciphertext coefficients plus
// one full ring element of key-correction from compressed resharing.
// Expansion is relative to l entries of `input_bits` bits.
inline CostReport CostModel(int degree, int logq, size_t length, int pf,
                            int d = 0, int input_bits = 16) {
  CostReport c;
  const uint64_t coeffs = (length + pf - 1) / pf + static_cast<uint64_t>(degree);
  c.client_to_server_bytes = BitsToBytes(coeffs * logq);
  c.client_to_client_bytes = static_cast<uint64_t>(d) * kKappa / 8;
  c.expansion = static_cast<double>(c.client_to_server_bytes) /
                (static_cast<double>(length) * input_bits / 8.0);
  return c;
}

struct ParamSet {
  int degree = 2048;
  int logq = 44;
  int pf = 1;
  int slot_width = 26;
  double sigma = kBaseSigma;
  double sigma_s = SigmaS();
  double sigma_n = SigmaN(1000);
  size_t n = 1000;
  size_t r = 1000;
  size_t length = 1000;
  int input_bits = 16;
  int d = 0;  // resharing fanout
  int h = 0;  // chaperone committee size
  int t = 0;  // reconstruction threshold
  double gamma = 0;
  double beta = 0;
  double delta = kDefaultDelta;
  int kappa = kKappa;

  int plaintext_bits() const { return pf * slot_width; }
};

// Fills the derived fields: noise schedule, fanout and committee defaults.
inline absl::StatusOr<ParamSet> MakeParamSet(int degree, int logq, int pf,
                                             int slot_width, size_t n, size_t r,
                                             size_t length, int input_bits = 16,
                                             double gamma = 0, double beta = 0,
                                             double delta = kDefaultDelta) {
  ParamSet p;
  p.degree = degree;
  p.logq = logq;
  p.pf = pf;
  p.slot_width = slot_width;
  p.n = n;
  p.r = r;
  p.length = length;
  p.input_bits = input_bits;
  p.gamma = gamma;
  p.beta = beta;
  p.delta = delta;
  p.sigma_s = SigmaS(p.sigma);
  p.sigma_n = SigmaN(r, p.sigma);
  SA_ASSIGN_OR_RETURN(p.d, CommitteeSize(n, r, gamma, delta));
  p.h = p.d;
  p.t = p.h / 2 + 1;
  return p;
}

// Ring for simulation: log2(q) split over limbs of at most 60 bits,
// T = 2^(pf * slot_width).
inline absl::StatusOr<RingParamsPtr> BuildRing(const ParamSet& p) {
  if (p.plaintext_bits() > 61) {
    return absl::FailedPreconditionError(absl::StrCat(
        "simulation supports plaintext moduli up to 2^61, got 2^",
        p.plaintext_bits()));
  }
  if (p.logq <= p.plaintext_bits()) {
    return absl::InvalidArgumentError("log2(q) must exceed the plaintext bits");
  }
  const int limbs = (p.logq + 59) / 60;
  const int base = p.logq / limbs;
  const int extra = p.logq % limbs;
  std::vector<uint64_t> moduli;
  if (extra > 0) {
    SA_ASSIGN_OR_RETURN(auto hi, FindNttPrimes(base + 1, p.degree, extra));
    moduli.insert(moduli.end(), hi.begin(), hi.end());
  }
  SA_ASSIGN_OR_RETURN(auto lo, FindNttPrimes(base, p.degree, limbs - extra));
  moduli.insert(moduli.end(), lo.begin(), lo.end());
  return RingParams::Create(p.degree, std::move(moduli),
                            uint64_t{1} << p.plaintext_bits());
}

// Bits per packed slot: room for the sum of n inputs below 2^input_bits plus
// a +-12 sigma band of aggregate DP noise.
inline int SlotWidth(size_t n, int input_bits, double dp_sigma = 0) {
  const double range = static_cast<double>(n) * std::ldexp(1.0, input_bits) +
                       2 * kTailCut * dp_sigma;
  return static_cast<int>(std::ceil(std::log2(range) - 1e-12));
}

// Weight statistics of the reveals of a program: for each reveal of v_i the
// opened combination is sum_{k<=i} lambda-bar_k w^k plus the decryption
// shares, whose flooding noise carries the same weights.
struct NoiseStats {
  double max_l1 = 1;  // max sum_k |lambda-bar_k|
  double max_l2 = 1;  // max sqrt(sum_k lambda-bar_k^2)
};

inline absl::StatusOr<NoiseStats> ComputeNoiseStats(const Program& p) {
  NoiseStats s{0, 0};
  for (size_t i = 0; i < p.size(); ++i) {
    if (p.rounds[i].mode != Mode::kReveal) continue;
    SA_ASSIGN_OR_RETURN(std::vector<int64_t> lam, ComposeLambda(p, i));
    double l1 = 0, l2 = 0;
    for (int64_t v : lam) {
      l1 += std::abs(static_cast<double>(v));
      l2 += static_cast<double>(v) * static_cast<double>(v);
    }
    s.max_l1 = std::max(s.max_l1, l1);
    s.max_l2 = std::max(s.max_l2, std::sqrt(l2));
  }
  return s;
}

// Stats of a sum over r rounds revealed at the end: all weights one.
inline NoiseStats SumProgramStats(size_t r) {
  return {static_cast<double>(r), std::sqrt(static_cast<double>(r))};
}

struct NoiseBudget {
  bool ok = false;             // worst-case bound fits
  bool rss_ok = false;         // root-sum-square estimate fits
  double worst_noise = 0;      // l_inf bound on the error polynomial
  double rss_noise = 0;
  double required_bits = 0;    // log2(T (2 B + 1)) for the worst case
  double rss_required_bits = 0;
  double deficit_bits = 0;     // max(0, required - log2 q)
};

// Decoding is exact when |T e + x| < q/2 with x in [-T/2, T/2), i.e.
// T (2B + 1) < q. Each of the n store noises and n flooding noises per
// weighted round is bounded by 12 sigma_n.
inline NoiseBudget CheckNoiseBudget(const ParamSet& p, const NoiseStats& s) {
  NoiseBudget b;
  const double n = static_cast<double>(p.n);
  b.worst_noise = kTailCut * p.sigma_n * n * 2.0 * s.max_l1;
  b.rss_noise = kTailCut * p.sigma_n * std::sqrt(2.0 * n) * s.max_l2;
  const double t_bits = p.plaintext_bits();
  b.required_bits = t_bits + std::log2(2 * b.worst_noise + 1);
  b.rss_required_bits = t_bits + std::log2(2 * b.rss_noise + 1);
  b.ok = b.required_bits < p.logq;
  b.rss_ok = b.rss_required_bits < p.logq;
  b.deficit_bits = std::max(0.0, b.required_bits - p.logq);
  return b;
}

struct GridOptions {
  double dp_sigma = 0;  // aggregate DP noise std in input units
  int max_pf = 64;
  int logq_cap = 0;     // extra cap on log2(q), 0 for none
  double gamma = 0;
  double delta = kDefaultDelta;
};

// Smallest-upload parameters over the security table. Noise is checked with
// the root-sum-square estimate for a single-aggregate reveal.
inline absl::StatusOr<ParamSet> GridSearch(size_t n, size_t length, size_t r,
                                           int input_bits,
                                           const GridOptions& opt = {}) {
  if (n == 0 || length == 0 || r == 0) {
    return absl::InvalidArgumentError("n, l and r must be positive");
  }
  const int slot = SlotWidth(n, input_bits, opt.dp_sigma);
  std::optional<ParamSet> best;
  uint64_t best_bytes = 0;
  for (int degree : kTableDegrees) {
    int cap = MaxLogq(degree).value();
    if (opt.logq_cap > 0) cap = std::min(cap, opt.logq_cap);
    for (int pf = 1; pf <= opt.max_pf; ++pf) {
      if (static_cast<size_t>(pf) > length && pf > 1) break;
      SA_ASSIGN_OR_RETURN(ParamSet cand,
                          MakeParamSet(degree, 0, pf, slot, n, r, length,
                                       input_bits, opt.gamma, 0, opt.delta));
      cand.logq = cap;
      const NoiseBudget at_cap = CheckNoiseBudget(cand, NoiseStats{});
      if (!at_cap.rss_ok) break;  // larger pf only needs more bits
      cand.logq = static_cast<int>(std::floor(at_cap.rss_required_bits)) + 1;
      const uint64_t bytes =
          CostModel(degree, cand.logq, length, pf).client_to_server_bytes;
      if (!best || bytes < best_bytes) {
        best = cand;
        best_bytes = bytes;
      }
    }
  }
  if (!best) {
    return absl::ResourceExhaustedError(absl::StrCat(
        "no secure parameters for n = ", n, ", l = ", length,
        ", input bits = ", input_bits, ": the noise budget exceeds every "
        "admissible modulus"));
  }
  return *best;
}

inline std::string CostCsvHeader() {
  return "n,l,N,logq,pf,client_comm_bytes,expansion";
}

inline std::string CostCsvRow(const ParamSet& p) {
  const CostReport c = CostModel(p.degree, p.logq, p.length, p.pf, 0, p.input_bits);
  return absl::StrFormat("%d,%d,%d,%d,%d,%d,%.4f", p.n, p.length, p.degree,
                         p.logq, p.pf, c.client_to_server_bytes, c.expansion);
}

}  // namespace stateful_agg

#endif  // STATEFUL_AGG_PARAMS_H_

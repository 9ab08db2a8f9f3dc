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

// Arithmetic in the negacyclic ring R_Q = Z_Q[X]/(X^N + 1). Q is either a
// single NTT-friendly prime below 2^62 or a product of such primes held in
// residue-number-system form, one limb per prime.

#ifndef STATEFUL_AGG_RING_H_
#define STATEFUL_AGG_RING_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "stateful_agg/modular.h"
#include "stateful_agg/prg.h"
#include "stateful_agg/status_macros.h"

namespace stateful_agg {

using BigInt = boost::multiprecision::cpp_int;

// Products below this degree use the schoolbook convolution.
inline constexpr int kNttThreshold = 256;

// Twiddle tables for the negacyclic NTT modulo one prime.
struct NttTables {
  uint64_t q = 0;
  std::vector<uint64_t> psi_rev;      // psi^bitrev(i)
  std::vector<uint64_t> psi_inv_rev;  // psi^-bitrev(i)
  uint64_t n_inv = 0;
};

class RingParams {
 public:
  // `moduli` are the RNS limbs; `plaintext_modulus` is T. Every limb must be
  // a distinct prime below 2^62 with q = 1 mod 2N, and T must be coprime to
  // every limb.
  static absl::StatusOr<std::shared_ptr<const RingParams>> Create(
      int degree, std::vector<uint64_t> moduli, uint64_t plaintext_modulus) {
    if (degree <= 0 || (degree & (degree - 1)) != 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("ring degree must be a power of two, got ", degree));
    }
    if (moduli.empty()) {
      return absl::InvalidArgumentError("at least one modulus is required");
    }
    if (plaintext_modulus < 2 || plaintext_modulus >= (uint64_t{1} << 62)) {
      return absl::InvalidArgumentError("plaintext modulus must be in [2, 2^62)");
    }
    for (size_t i = 0; i < moduli.size(); ++i) {
      uint64_t q = moduli[i];
      if (q >= (uint64_t{1} << 62) || !IsPrime(q)) {
        return absl::InvalidArgumentError(
            absl::StrCat("modulus ", q, " is not a prime below 2^62"));
      }
      if ((q - 1) % (2 * static_cast<uint64_t>(degree)) != 0) {
        return absl::InvalidArgumentError(absl::StrCat(
            "modulus ", q, " is not congruent to 1 mod 2N = ", 2 * degree));
      }
      if (std::gcd(q, plaintext_modulus) != 1) {
        return absl::InvalidArgumentError(
            absl::StrCat("plaintext modulus shares a factor with ", q));
      }
      for (size_t j = 0; j < i; ++j) {
        if (moduli[j] == q) {
          return absl::InvalidArgumentError("RNS moduli must be distinct");
        }
      }
    }
    auto params = std::shared_ptr<RingParams>(new RingParams());
    params->degree_ = degree;
    params->moduli_ = std::move(moduli);
    params->t_ = plaintext_modulus;
    params->Precompute();
    return std::shared_ptr<const RingParams>(std::move(params));
  }

  // Convenience: `limbs` primes of `bits_per_limb` bits each.
  static absl::StatusOr<std::shared_ptr<const RingParams>> CreateWithPrimeBits(
      int degree, int bits_per_limb, int limbs, uint64_t plaintext_modulus) {
    SA_ASSIGN_OR_RETURN(std::vector<uint64_t> primes,
                        FindNttPrimes(bits_per_limb, degree, limbs));
    return Create(degree, std::move(primes), plaintext_modulus);
  }

  int degree() const { return degree_; }
  size_t num_limbs() const { return moduli_.size(); }
  uint64_t modulus(size_t limb) const { return moduli_[limb]; }
  const std::vector<uint64_t>& moduli() const { return moduli_; }
  uint64_t plaintext_modulus() const { return t_; }
  const BigInt& composite_modulus() const { return big_q_; }
  double log2_modulus() const { return log2_q_; }
  const NttTables& ntt(size_t limb) const { return ntt_[limb]; }

  // Reduces a signed integer into every limb.
  uint64_t Reduce(int64_t v, size_t limb) const {
    return ReduceSigned(v, moduli_[limb]);
  }

  // Maps per-limb residues to the centered representative of the value mod
  // Q, then to [0, T).
  uint64_t CenteredModT(std::span<const uint64_t> residues) const {
    if (moduli_.size() == 1) {
      int64_t c = CenterMod(residues[0], moduli_[0]);
      int64_t r = c % static_cast<int64_t>(t_);
      return static_cast<uint64_t>(r < 0 ? r + static_cast<int64_t>(t_) : r);
    }
    BigInt x = 0;
    for (size_t i = 0; i < moduli_.size(); ++i) {
      uint64_t y = MulMod(residues[i], crt_inv_[i], moduli_[i]);
      x += crt_basis_[i] * y;
    }
    x %= big_q_;
    if (x > big_q_ / 2) x -= big_q_;
    BigInt r = x % t_;
    if (r < 0) r += t_;
    return static_cast<uint64_t>(r);
  }

  // Centered representative of the value mod Q, as a big integer.
  BigInt CenteredLift(std::span<const uint64_t> residues) const {
    if (moduli_.size() == 1) return BigInt(CenterMod(residues[0], moduli_[0]));
    BigInt x = 0;
    for (size_t i = 0; i < moduli_.size(); ++i) {
      x += crt_basis_[i] * MulMod(residues[i], crt_inv_[i], moduli_[i]);
    }
    x %= big_q_;
    if (x > big_q_ / 2) x -= big_q_;
    return x;
  }

 private:
  RingParams() = default;

  void Precompute() {
    big_q_ = 1;
    for (uint64_t q : moduli_) big_q_ *= q;
    log2_q_ = 0;
    for (uint64_t q : moduli_) log2_q_ += std::log2(static_cast<double>(q));
    for (uint64_t q : moduli_) {
      BigInt qi = big_q_ / q;
      crt_basis_.push_back(qi);
      crt_inv_.push_back(InvMod(static_cast<uint64_t>(qi % q), q));
    }
    for (uint64_t q : moduli_) ntt_.push_back(MakeTables(q));
  }

  NttTables MakeTables(uint64_t q) const {
    const uint64_t n = static_cast<uint64_t>(degree_);
    uint64_t psi = 0;
    // psi^N = -1 forces order exactly 2N since 2N is a power of two.
    for (uint64_t x = 2;; ++x) {
      psi = PowMod(x, (q - 1) / (2 * n), q);
      if (PowMod(psi, n, q) == q - 1) break;
    }
    int log_n = 0;
    while ((uint64_t{1} << log_n) < n) ++log_n;
    NttTables t;
    t.q = q;
    t.psi_rev.resize(n);
    t.psi_inv_rev.resize(n);
    const uint64_t psi_inv = InvMod(psi, q);
    uint64_t p = 1, pi = 1;
    std::vector<uint64_t> pow(n), pow_inv(n);
    for (uint64_t i = 0; i < n; ++i) {
      pow[i] = p;
      pow_inv[i] = pi;
      p = MulMod(p, psi, q);
      pi = MulMod(pi, psi_inv, q);
    }
    for (uint64_t i = 0; i < n; ++i) {
      uint64_t r = 0;
      for (int b = 0; b < log_n; ++b) r |= ((i >> b) & 1) << (log_n - 1 - b);
      t.psi_rev[i] = pow[r];
      t.psi_inv_rev[i] = pow_inv[r];
    }
    t.n_inv = InvMod(n % q, q);
    return t;
  }

  int degree_ = 0;
  std::vector<uint64_t> moduli_;
  uint64_t t_ = 0;
  BigInt big_q_;
  double log2_q_ = 0;
  std::vector<BigInt> crt_basis_;
  std::vector<uint64_t> crt_inv_;
  std::vector<NttTables> ntt_;
};

using RingParamsPtr = std::shared_ptr<const RingParams>;

namespace internal {

inline void ForwardNtt(std::span<uint64_t> a, const NttTables& t) {
  const size_t n = a.size();
  const uint64_t q = t.q;
  size_t len = n;
  for (size_t m = 1; m < n; m <<= 1) {
    len >>= 1;
    for (size_t i = 0; i < m; ++i) {
      const size_t j1 = 2 * i * len;
      const uint64_t s = t.psi_rev[m + i];
      for (size_t j = j1; j < j1 + len; ++j) {
        uint64_t u = a[j];
        uint64_t v = MulMod(a[j + len], s, q);
        a[j] = AddMod(u, v, q);
        a[j + len] = SubMod(u, v, q);
      }
    }
  }
}

inline void InverseNtt(std::span<uint64_t> a, const NttTables& t) {
  const size_t n = a.size();
  const uint64_t q = t.q;
  size_t len = 1;
  for (size_t m = n; m > 1; m >>= 1) {
    size_t j1 = 0;
    const size_t h = m >> 1;
    for (size_t i = 0; i < h; ++i) {
      const uint64_t s = t.psi_inv_rev[h + i];
      for (size_t j = j1; j < j1 + len; ++j) {
        uint64_t u = a[j];
        uint64_t v = a[j + len];
        a[j] = AddMod(u, v, q);
        a[j + len] = MulMod(SubMod(u, v, q), s, q);
      }
      j1 += 2 * len;
    }
    len <<= 1;
  }
  for (auto& x : a) x = MulMod(x, t.n_inv, q);
}

}  // namespace internal

// An element of R_Q in coefficient form. Residues are stored limb-major:
// limb l occupies [l*N, (l+1)*N).
class RingElement {
 public:
  RingElement() = default;

  static RingElement Zero(RingParamsPtr params) {
    const size_t size = params->num_limbs() * params->degree();
    return RingElement(std::move(params), std::vector<uint64_t>(size, 0));
  }

  // Coefficients given as signed integers, reduced into every limb.
  static absl::StatusOr<RingElement> FromSigned(RingParamsPtr params,
                                                std::span<const int64_t> coeffs) {
    if (coeffs.size() != static_cast<size_t>(params->degree())) {
      return absl::InvalidArgumentError(absl::StrCat(
          "expected ", params->degree(), " coefficients, got ", coeffs.size()));
    }
    RingElement out = Zero(params);
    for (size_t l = 0; l < params->num_limbs(); ++l) {
      for (size_t i = 0; i < coeffs.size(); ++i) {
        out.data_[l * coeffs.size() + i] = params->Reduce(coeffs[i], l);
      }
    }
    return out;
  }

  // Coefficients already reduced, in [0, q) for a single-limb ring.
  static absl::StatusOr<RingElement> FromCoefficients(
      RingParamsPtr params, std::span<const uint64_t> coeffs) {
    if (params->num_limbs() != 1) {
      return absl::InvalidArgumentError(
          "FromCoefficients requires a single-limb ring");
    }
    if (coeffs.size() != static_cast<size_t>(params->degree())) {
      return absl::InvalidArgumentError(absl::StrCat(
          "expected ", params->degree(), " coefficients, got ", coeffs.size()));
    }
    for (uint64_t c : coeffs) {
      if (c >= params->modulus(0)) {
        return absl::InvalidArgumentError("coefficient not reduced mod q");
      }
    }
    return RingElement(std::move(params),
                       std::vector<uint64_t>(coeffs.begin(), coeffs.end()));
  }

  const RingParamsPtr& params() const { return params_; }
  int degree() const { return params_->degree(); }
  bool IsZero() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](uint64_t v) { return v == 0; });
  }

  std::span<const uint64_t> limb(size_t l) const {
    return std::span<const uint64_t>(data_).subspan(l * degree(), degree());
  }
  std::span<uint64_t> mutable_limb(size_t l) {
    return std::span<uint64_t>(data_).subspan(l * degree(), degree());
  }
  // Residues of coefficient i across all limbs.
  std::vector<uint64_t> residues(size_t i) const {
    std::vector<uint64_t> r(params_->num_limbs());
    for (size_t l = 0; l < r.size(); ++l) r[l] = data_[l * degree() + i];
    return r;
  }
  // Single-limb coefficient access.
  uint64_t coeff(size_t i) const { return data_[i]; }
  const std::vector<uint64_t>& data() const { return data_; }

  bool SameRing(const RingElement& other) const {
    return params_ == other.params_ ||
           (params_->degree() == other.params_->degree() &&
            params_->moduli() == other.params_->moduli());
  }

  friend bool operator==(const RingElement& a, const RingElement& b) {
    return a.SameRing(b) && a.data_ == b.data_;
  }

  // Unchecked in-place arithmetic; callers guarantee a shared ring.
  RingElement& operator+=(const RingElement& o) {
    for (size_t l = 0; l < params_->num_limbs(); ++l) {
      const uint64_t q = params_->modulus(l);
      auto a = mutable_limb(l);
      auto b = o.limb(l);
      for (size_t i = 0; i < a.size(); ++i) a[i] = AddMod(a[i], b[i], q);
    }
    return *this;
  }
  RingElement& operator-=(const RingElement& o) {
    for (size_t l = 0; l < params_->num_limbs(); ++l) {
      const uint64_t q = params_->modulus(l);
      auto a = mutable_limb(l);
      auto b = o.limb(l);
      for (size_t i = 0; i < a.size(); ++i) a[i] = SubMod(a[i], b[i], q);
    }
    return *this;
  }
  RingElement& operator*=(int64_t scalar) {
    for (size_t l = 0; l < params_->num_limbs(); ++l) {
      const uint64_t q = params_->modulus(l);
      const uint64_t s = params_->Reduce(scalar, l);
      for (auto& x : mutable_limb(l)) x = MulMod(x, s, q);
    }
    return *this;
  }
  RingElement operator-() const {
    RingElement out = Zero(params_);
    out -= *this;
    return out;
  }
  friend RingElement operator+(RingElement a, const RingElement& b) {
    return a += b;
  }
  friend RingElement operator-(RingElement a, const RingElement& b) {
    return a -= b;
  }
  friend RingElement operator*(int64_t s, RingElement a) { return a *= s; }
  friend RingElement operator*(const RingElement& a, const RingElement& b) {
    RingElement out = Zero(a.params_);
    for (size_t l = 0; l < a.params_->num_limbs(); ++l) {
      if (a.degree() >= kNttThreshold) {
        MulLimbNtt(a.limb(l), b.limb(l), a.params_->ntt(l), out.mutable_limb(l));
      } else {
        MulLimbSchoolbook(a.limb(l), b.limb(l), a.params_->modulus(l),
                          out.mutable_limb(l));
      }
    }
    return out;
  }

  static void MulLimbSchoolbook(std::span<const uint64_t> a,
                                std::span<const uint64_t> b, uint64_t q,
                                std::span<uint64_t> out) {
    const size_t n = a.size();
    std::fill(out.begin(), out.end(), 0);
    for (size_t i = 0; i < n; ++i) {
      if (a[i] == 0) continue;
      for (size_t j = 0; j < n; ++j) {
        uint64_t p = MulMod(a[i], b[j], q);
        size_t k = i + j;
        if (k < n) {
          out[k] = AddMod(out[k], p, q);
        } else {
          out[k - n] = SubMod(out[k - n], p, q);  // X^N = -1
        }
      }
    }
  }

  static void MulLimbNtt(std::span<const uint64_t> a, std::span<const uint64_t> b,
                         const NttTables& t, std::span<uint64_t> out) {
    std::vector<uint64_t> fa(a.begin(), a.end()), fb(b.begin(), b.end());
    internal::ForwardNtt(fa, t);
    internal::ForwardNtt(fb, t);
    for (size_t i = 0; i < fa.size(); ++i) out[i] = MulMod(fa[i], fb[i], t.q);
    internal::InverseNtt(out, t);
  }

 private:
  RingElement(RingParamsPtr params, std::vector<uint64_t> data)
      : params_(std::move(params)), data_(std::move(data)) {}

  RingParamsPtr params_;
  std::vector<uint64_t> data_;
};

namespace internal {
inline absl::Status CheckSameRing(const RingElement& a, const RingElement& b) {
  if (!a.params() || !b.params() || !a.SameRing(b)) {
    return absl::InvalidArgumentError("ring parameter mismatch");
  }
  return absl::OkStatus();
}
}  // namespace internal

inline absl::StatusOr<RingElement> Add(const RingElement& a,
                                       const RingElement& b) {
  SA_RETURN_IF_ERROR(internal::CheckSameRing(a, b));
  return a + b;
}

inline absl::StatusOr<RingElement> Sub(const RingElement& a,
                                       const RingElement& b) {
  SA_RETURN_IF_ERROR(internal::CheckSameRing(a, b));
  return a - b;
}

inline absl::StatusOr<RingElement> Mul(const RingElement& a,
                                       const RingElement& b) {
  SA_RETURN_IF_ERROR(internal::CheckSameRing(a, b));
  return a * b;
}

// Schoolbook negacyclic product regardless of degree. Kept as the oracle for
// the NTT path.
inline absl::StatusOr<RingElement> MulSchoolbook(const RingElement& a,
                                                 const RingElement& b) {
  SA_RETURN_IF_ERROR(internal::CheckSameRing(a, b));
  RingElement out = RingElement::Zero(a.params());
  for (size_t l = 0; l < a.params()->num_limbs(); ++l) {
    RingElement::MulLimbSchoolbook(a.limb(l), b.limb(l), a.params()->modulus(l),
                                   out.mutable_limb(l));
  }
  return out;
}

inline RingElement ScalarMul(int64_t lambda, const RingElement& a) {
  return lambda * a;
}

inline RingElement SampleUniform(Prg& prg, const RingParamsPtr& params) {
  RingElement out = RingElement::Zero(params);
  for (size_t l = 0; l < params->num_limbs(); ++l) {
    const uint64_t q = params->modulus(l);
    for (auto& x : out.mutable_limb(l)) x = prg.UniformBelow(q);
  }
  return out;
}

// Discrete Gaussian over Z with the given standard deviation, sampled by
// inverse CDF over a table truncated at +-12 sigma.
class DiscreteGaussian {
 public:
  static constexpr double kTailCut = 12.0;

  explicit DiscreteGaussian(double sigma) : sigma_(sigma) {
    if (!(sigma > 0)) return;
    bound_ = static_cast<int64_t>(std::ceil(kTailCut * sigma));
    cdf_.reserve(2 * bound_ + 1);
    long double total = 0;
    std::vector<long double> w(2 * bound_ + 1);
    const long double s2 = 2.0L * sigma * sigma;
    for (int64_t k = -bound_; k <= bound_; ++k) {
      w[k + bound_] = std::exp(-static_cast<long double>(k) * k / s2);
      total += w[k + bound_];
    }
    long double acc = 0;
    for (long double x : w) {
      acc += x;
      cdf_.push_back(static_cast<double>(acc / total));
    }
    cdf_.back() = 1.0;
  }

  double sigma() const { return sigma_; }
  int64_t bound() const { return bound_; }

  int64_t Sample(Prg& prg) const {
    if (cdf_.empty()) return 0;
    const double u = prg.UniformDouble();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<int64_t>(it - cdf_.begin()) - bound_;
  }

 private:
  double sigma_;
  int64_t bound_ = 0;
  std::vector<double> cdf_;
};

inline RingElement SampleGaussian(Prg& prg, const DiscreteGaussian& dist,
                                  const RingParamsPtr& params) {
  RingElement out = RingElement::Zero(params);
  const int n = params->degree();
  for (int i = 0; i < n; ++i) {
    const int64_t v = dist.Sample(prg);
    for (size_t l = 0; l < params->num_limbs(); ++l) {
      out.mutable_limb(l)[i] = params->Reduce(v, l);
    }
  }
  return out;
}

inline RingElement SampleGaussian(Prg& prg, double sigma,
                                  const RingParamsPtr& params) {
  return SampleGaussian(prg, DiscreteGaussian(sigma), params);
}

// ---------------------------------------------------------------------------
// Plaintext packing. `pf` entries share a coefficient; entry j of a group
// occupies bits [j*w, (j+1)*w). Coefficients live in Z_T with
// T >= 2^(pf*w).

struct PackingLayout {
  int pf = 1;
  int slot_width = 16;

  size_t CoefficientsFor(size_t length) const {
    return (length + pf - 1) / pf;
  }
  size_t ElementsFor(size_t length, int degree) const {
    return (CoefficientsFor(length) + degree - 1) / degree;
  }
  int bits() const { return pf * slot_width; }
};

inline absl::Status ValidateLayout(const PackingLayout& layout,
                                   const RingParams& params) {
  if (layout.pf < 1 || layout.slot_width < 1) {
    return absl::InvalidArgumentError("packing factor and slot width must be positive");
  }
  if (layout.bits() > 62) {
    return absl::InvalidArgumentError("packed coefficient exceeds 62 bits");
  }
  const uint64_t t = params.plaintext_modulus();
  if (t < (uint64_t{1} << layout.bits())) {
    return absl::InvalidArgumentError(absl::StrCat(
        "pf * slot_width = ", layout.bits(), " exceeds the bit length of T"));
  }
  return absl::OkStatus();
}

// Packs signed entries with |x| < 2^slot_width. The coefficient is
// sum_j x_j 2^(j w) mod T, which for non-negative entries is exactly the
// concatenated bit layout.
inline absl::StatusOr<std::vector<RingElement>> Encode(
    std::span<const int64_t> values, const PackingLayout& layout,
    const RingParamsPtr& params) {
  SA_RETURN_IF_ERROR(ValidateLayout(layout, *params));
  const int n = params->degree();
  const uint64_t t = params->plaintext_modulus();
  const int64_t limit = int64_t{1} << layout.slot_width;
  const size_t coeff_count = layout.CoefficientsFor(values.size());
  const size_t elems = layout.ElementsFor(values.size(), n);
  std::vector<int64_t> coeffs(elems * n, 0);
  for (size_t c = 0; c < coeff_count; ++c) {
    int128_t acc = 0;
    for (int j = 0; j < layout.pf; ++j) {
      const size_t idx = c * layout.pf + j;
      if (idx >= values.size()) break;
      const int64_t x = values[idx];
      if (x >= limit || x <= -limit) {
        return absl::OutOfRangeError(absl::StrCat(
            "entry ", idx, " = ", x, " does not fit a ", layout.slot_width,
            "-bit slot"));
      }
      acc += static_cast<int128_t>(x) << (j * layout.slot_width);
    }
    acc %= static_cast<int128_t>(t);
    if (acc < 0) acc += t;
    coeffs[c] = static_cast<int64_t>(acc);
  }
  std::vector<RingElement> out;
  out.reserve(elems);
  for (size_t e = 0; e < elems; ++e) {
    SA_ASSIGN_OR_RETURN(
        RingElement elem,
        RingElement::FromSigned(
            params, std::span<const int64_t>(coeffs).subspan(e * n, n)));
    out.push_back(std::move(elem));
  }
  return out;
}

// Unpacks `length` entries from plaintext coefficients in [0, T). Each slot is
// read into the window [window_low, window_low + 2^w); window_low = 0 yields
// the raw slot bits.
inline std::vector<int64_t> DecodeCoefficients(std::span<const uint64_t> coeffs,
                                               size_t length,
                                               const PackingLayout& layout,
                                               int64_t window_low = 0) {
  std::vector<int64_t> out(length, 0);
  const int w = layout.slot_width;
  const int128_t slot_mod = int128_t{1} << w;
  for (size_t c = 0; c < coeffs.size(); ++c) {
    int128_t rest = coeffs[c];
    for (int j = 0; j < layout.pf; ++j) {
      const size_t idx = c * layout.pf + j;
      if (idx >= length) break;
      int128_t digit = (rest - window_low) % slot_mod;
      if (digit < 0) digit += slot_mod;
      digit += window_low;
      out[idx] = static_cast<int64_t>(digit);
      rest = (rest - digit) >> w;
    }
  }
  return out;
}

// Decodes plaintext ring elements whose coefficients represent values in
// [0, T).
inline std::vector<int64_t> Decode(std::span<const RingElement> elems,
                                   size_t length, const PackingLayout& layout,
                                   int64_t window_low = 0) {
  std::vector<uint64_t> coeffs;
  const size_t needed = layout.CoefficientsFor(length);
  for (const auto& e : elems) {
    for (size_t i = 0; i < static_cast<size_t>(e.degree()) && coeffs.size() < needed;
         ++i) {
      coeffs.push_back(e.params()->CenteredModT(e.residues(i)));
    }
  }
  coeffs.resize(needed, 0);
  return DecodeCoefficients(coeffs, length, layout, window_low);
}

}  // namespace stateful_agg

#endif  // STATEFUL_AGG_RING_H_

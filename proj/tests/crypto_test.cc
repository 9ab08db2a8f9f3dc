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

#include "stateful_agg/crypto.h"

#include <set>
#include <vector>

#include <gtest/gtest.h>
#include "stateful_agg/sharing.h"

namespace stateful_agg {
namespace {

constexpr PackingLayout kLayout{1, 16};
constexpr int64_t kSigned = -(int64_t{1} << 15);

RingParamsPtr TestRing(int degree = 16, int limbs = 1) {
  return RingParams::CreateWithPrimeBits(degree, 50, limbs, 1 << 16).value();
}

Seed128 TestSeed(uint64_t v) {
  Seed128 s{};
  for (int i = 0; i < 8; ++i) s[i] = static_cast<uint8_t>(v >> (8 * i));
  return s;
}

std::vector<int64_t> RandomVector(Prg& prg, size_t len, int bits) {
  std::vector<int64_t> v(len);
  for (auto& e : v) {
    e = static_cast<int64_t>(prg.UniformBelow(uint64_t{1} << bits)) -
        (int64_t{1} << (bits - 1));
  }
  return v;
}

TEST(DerivePublicTest, DeterministicAndShaped) {
  auto p = TestRing();
  auto a = DerivePublic(TestSeed(1), 5, 3, p);
  auto b = DerivePublic(TestSeed(1), 5, 3, p);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, DerivePublic(TestSeed(2), 5, 3, p));
  EXPECT_TRUE(DerivePublic(TestSeed(1), 5, 0, p).empty());
}

TEST(DerivePublicTest, NoCollisionsAcrossRounds) {
  auto p = TestRing();
  std::set<std::vector<uint64_t>> seen;
  for (uint64_t i = 0; i < 10000; ++i) {
    ASSERT_TRUE(seen.insert(DerivePublic(TestSeed(3), i, 1, p)[0].data()).second);
  }
}

TEST(StoreMessageTest, DegenerateEncryptionIsPlaintext) {
  auto p = TestRing();
  Prg prg(40);
  auto a = DerivePublic(TestSeed(4), 0, 2, p);
  auto x = Encode(RandomVector(prg, 20, 8), kLayout, p).value();
  x.resize(2, RingElement::Zero(p));
  auto w = StoreMessage(a, RingElement::Zero(p), x, DiscreteGaussian(0), prg).value();
  EXPECT_EQ(w, x);
}

TEST(StoreMessageTest, MaskIsAdditive) {
  auto p = TestRing();
  Prg prg(41);
  auto a = DerivePublic(TestSeed(5), 0, 1, p);
  auto s = SampleUniform(prg, p);
  Ciphertext x = {SampleUniform(prg, p)};
  Ciphertext mask = {SampleUniform(prg, p)};
  DiscreteGaussian g(3.2);
  Prg r1(7), r2(7);
  auto plain = StoreMessage(a, s, x, g, r1).value();
  auto masked = StoreMessage(a, s, x, g, r2, mask).value();
  EXPECT_EQ(masked[0] - mask[0], plain[0]);
}

TEST(StoreMessageTest, ShapeMismatch) {
  auto p = TestRing();
  Prg prg(42);
  auto a = DerivePublic(TestSeed(6), 0, 2, p);
  Ciphertext x = {RingElement::Zero(p)};
  EXPECT_EQ(StoreMessage(a, RingElement::Zero(p), x, DiscreteGaussian(1), prg)
                .status()
                .code(),
            absl::StatusCode::kInvalidArgument);
  auto other = TestRing(32);
  Ciphertext y = {RingElement::Zero(other), RingElement::Zero(other)};
  EXPECT_FALSE(StoreMessage(a, RingElement::Zero(p), y, DiscreteGaussian(1), prg).ok());
}

TEST(StoreMessageTest, SharesAggregateUnderSummedKey) {
  for (int limbs : {1, 2}) {
    auto p = TestRing(64, limbs);
    Prg prg(43);
    auto s = SampleUniform(prg, p);
    auto shares = AShare(s, 3, prg).value();
    auto values = RandomVector(prg, 64, 12);
    auto a = DerivePublic(TestSeed(7), 0, 1, p);
    auto x = Encode(values, kLayout, p).value();
    Ciphertext zero = {RingElement::Zero(p)};
    DiscreteGaussian g(3.2 * 2 * 3);
    std::vector<Ciphertext> msgs;
    for (int j = 0; j < 3; ++j) {
      msgs.push_back(StoreMessage(a, shares[j], j == 0 ? x : zero, g, prg).value());
    }
    auto agg = SumCiphertexts(msgs, 1, p);
    Ciphertext key_term = {a[0] * s};
    EXPECT_EQ(Open({}, agg, {}, 64, kLayout, kSigned, key_term).value(), values);
  }
}

TEST(RevealMessageTest, TrivialCases) {
  auto p = TestRing();
  Prg prg(44);
  std::vector<Ciphertext> publics = {DerivePublic(TestSeed(8), 0, 1, p),
                                     DerivePublic(TestSeed(8), 1, 1, p)};
  auto s = SampleUniform(prg, p);
  Ciphertext zero = {RingElement::Zero(p)};
  std::vector<int64_t> none = {0, 0};
  auto w = RevealMessage(publics, none, s, DiscreteGaussian(0), prg, zero).value();
  EXPECT_TRUE(w[0].IsZero());
  std::vector<int64_t> one = {0, 1};
  w = RevealMessage(publics, one, s, DiscreteGaussian(0), prg, zero).value();
  EXPECT_EQ(w[0], -(publics[1][0] * s));
  std::vector<int64_t> three = {0, 1, 1};
  EXPECT_EQ(RevealMessage(publics, three, s, DiscreteGaussian(0), prg, zero)
                .status()
                .code(),
            absl::StatusCode::kNotFound);
}

TEST(RevealMessageTest, StoredPlusRevealSharesOpensToInput) {
  auto p = TestRing(64, 2);
  Prg prg(45);
  auto s = SampleUniform(prg, p);
  auto shares = AShare(s, 2, prg).value();
  auto values = RandomVector(prg, 64, 10);
  std::vector<Ciphertext> publics = {DerivePublic(TestSeed(9), 0, 1, p)};
  auto x = Encode(values, kLayout, p).value();
  Ciphertext zero = {RingElement::Zero(p)};
  DiscreteGaussian g(20);
  std::vector<Ciphertext> store, reveal;
  std::vector<int64_t> lam = {1};
  for (int j = 0; j < 2; ++j) {
    store.push_back(StoreMessage(publics[0], shares[j], j ? x : zero, g, prg).value());
    reveal.push_back(RevealMessage(publics, lam, shares[j], g, prg, zero).value());
  }
  std::vector<Ciphertext> stored = {SumCiphertexts(store, 1, p)};
  auto out = Open(stored, SumCiphertexts(reveal, 1, p), lam, 64, kLayout, kSigned);
  EXPECT_EQ(out.value(), values);
}

TEST(OpenTest, ZeroStateZeroReveal) {
  auto p = TestRing();
  Ciphertext zero = {RingElement::Zero(p)};
  auto out = Open({}, zero, {}, 10, kLayout, 0).value();
  EXPECT_EQ(out, std::vector<int64_t>(10, 0));
}

TEST(OpenTest, CenteredReductionHandlesNegativeNoise) {
  // w = A s - T + x: without centering mod q, the -T wraps to q - T and the
  // result mod T is off by q mod T.
  auto p = TestRing();
  Prg prg(46);
  auto a = DerivePublic(TestSeed(10), 0, 1, p);
  auto s = SampleUniform(prg, p);
  std::vector<int64_t> vals(16, 5), minus_one(16, -1);
  Ciphertext x = Encode(vals, kLayout, p).value();
  Ciphertext e = {RingElement::FromSigned(p, minus_one).value()};
  auto w = Encrypt(a, s, e, x).value();
  Ciphertext key = {a[0] * s};
  EXPECT_EQ(Open({}, w, {}, 16, kLayout, 0, key).value(), vals);
  const uint64_t raw = (w[0] - key[0]).coeff(0) % (1 << 16);
  EXPECT_NE(raw, 5u);
}

TEST(OpenTest, MessageHomomorphism) {
  auto p = TestRing(64);
  Prg prg(47);
  auto s = SampleUniform(prg, p);
  std::vector<Ciphertext> publics = {DerivePublic(TestSeed(11), 0, 1, p),
                                     DerivePublic(TestSeed(11), 1, 1, p)};
  for (int trial = 0; trial < 100; ++trial) {
    auto x1 = RandomVector(prg, 64, 10), x2 = RandomVector(prg, 64, 10);
    const int64_t a = static_cast<int64_t>(prg.UniformBelow(9)) - 4;
    const int64_t b = static_cast<int64_t>(prg.UniformBelow(9)) - 4;
    DiscreteGaussian g(50);
    std::vector<Ciphertext> stored = {
        StoreMessage(publics[0], s, Encode(x1, kLayout, p).value(), g, prg).value(),
        StoreMessage(publics[1], s, Encode(x2, kLayout, p).value(), g, prg).value()};
    // The decryption share for a*c1 + b*c2 is -(a A_1 + b A_2) s.
    std::vector<int64_t> lam = {a, b};
    Ciphertext zero = {RingElement::Zero(p)};
    auto dec = RevealMessage(publics, lam, s, DiscreteGaussian(0), prg, zero).value();
    auto out = Open(stored, dec, lam, 64, kLayout, kSigned).value();
    for (size_t i = 0; i < 64; ++i) ASSERT_EQ(out[i], a * x1[i] + b * x2[i]);
  }
}

TEST(OpenTest, NoWraparoundAcrossRandomOpens) {
  auto p = TestRing(64, 1);
  Prg prg(48);
  const int n = 4;
  DiscreteGaussian g(2 * 3.2 * std::sqrt(11.0));
  int failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto s = SampleUniform(prg, p);
    auto shares = AShare(s, n, prg).value();
    std::vector<Ciphertext> publics = {DerivePublic(TestSeed(trial), 0, 1, p)};
    std::vector<int64_t> expected(64, 0);
    std::vector<Ciphertext> store, reveal;
    std::vector<int64_t> lam = {1};
    for (int j = 0; j < n; ++j) {
      auto v = RandomVector(prg, 64, 8);
      for (size_t i = 0; i < 64; ++i) expected[i] += v[i];
      store.push_back(StoreMessage(publics[0], shares[j], Encode(v, kLayout, p).value(), g, prg).value());
      Ciphertext zero = {RingElement::Zero(p)};
      reveal.push_back(RevealMessage(publics, lam, shares[j], g, prg, zero).value());
    }
    std::vector<Ciphertext> stored = {SumCiphertexts(store, 1, p)};
    if (Open(stored, SumCiphertexts(reveal, 1, p), lam, 64, kLayout, kSigned).value() !=
        expected) {
      ++failures;
    }
  }
  EXPECT_EQ(failures, 0);
}

}  // namespace
}  // namespace stateful_agg

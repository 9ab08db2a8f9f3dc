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

#include "stateful_agg/dropout.h"

#include <vector>

#include <gtest/gtest.h>
#include "stateful_agg/ideal.h"
#include "stateful_agg/protocol.h"

namespace stateful_agg {
namespace {

ParamSet DeskParams(size_t n, size_t r, size_t len, int d = 3) {
  ParamSet p = MakeParamSet(16, 60, 1, 16, n, r, len).value();
  p.d = d;
  return p;
}

InputTensor RandomData(Prg& prg, size_t r, size_t n, size_t len, int bits) {
  InputTensor data(r, std::vector<std::vector<int64_t>>(n, std::vector<int64_t>(len)));
  for (auto& round : data)
    for (auto& v : round)
      for (auto& e : v) e = static_cast<int64_t>(prg.UniformBelow(uint64_t{1} << bits));
  return data;
}

Program RandomProgram(Prg& prg, size_t r, size_t len) {
  Program p;
  p.length = len;
  for (size_t i = 0; i < r; ++i) {
    Instruction ins;
    ins.mode = prg.UniformBelow(2) ? Mode::kReveal : Mode::kStore;
    for (size_t k = 0; k < i; ++k) {
      int64_t w = static_cast<int64_t>(prg.UniformBelow(5)) - 2;
      if (w != 0) ins.weights[k] = w;
    }
    p.rounds.push_back(ins);
  }
  return p;
}

Program SumProgram(size_t r, size_t len) {
  Program p;
  p.length = len;
  p.rounds.resize(r);
  p.rounds.back().mode = Mode::kReveal;
  for (size_t k = 0; k + 1 < r; ++k) p.rounds.back().weights[k] = 1;
  return p;
}

std::vector<std::vector<int64_t>> Values(const std::vector<RevealOutput>& r) {
  std::vector<std::vector<int64_t>> out;
  for (const auto& x : r) out.push_back(x.values);
  return out;
}

void ExpectMatchesSurvivorIdeal(const Program& p, const InputTensor& data,
                                const ParamSet& params,
                                const DropoutSchedule& s,
                                const ProtocolResult& res) {
  auto ideal = RunIdeal(p, params.n, InputSource{&data},
                        [&](size_t i, size_t j) { return !s.IsDropped(i, j); })
                   .value();
  ASSERT_EQ(res.reveals.size(), ideal.reveals.size());
  for (size_t k = 0; k < res.reveals.size(); ++k) {
    EXPECT_EQ(res.reveals[k].round, ideal.reveals[k].round);
    EXPECT_EQ(res.reveals[k].values,
              ReduceToWindow(ideal.reveals[k].values, 16, -(1 << 15)));
  }
  EXPECT_TRUE(res.transcript.masks_private);
}

ProtocolOptions WithDropouts(const DropoutSchedule* s, int h = 5, int t = 3) {
  ProtocolOptions opt;
  opt.dropout = true;
  opt.dropout_opts.h = h;
  opt.dropout_opts.t = t;
  opt.schedule = s;
  return opt;
}

TEST(BackupTest, DegenerateCommitteeHoldsTheSecret) {
  auto ring = RingParams::CreateWithPrimeBits(16, 40, 1, 1 << 8).value();
  Prg prg(61);
  auto secret = SampleUniform(prg, ring);
  auto ts = TShare(secret, 1, 1, prg).value();
  EXPECT_EQ(ts.shares[0].value, secret);
  EXPECT_EQ(RecoverFromCommittee(ts, {true}, 0).value(), secret);
  EXPECT_EQ(RecoverFromCommittee(ts, {false}, 0).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST(BackupTest, AnyThresholdSubsetRecovers) {
  auto ring = RingParams::CreateWithPrimeBits(16, 40, 2, 1 << 8).value();
  Prg prg(62);
  auto secret = SampleUniform(prg, ring);
  auto ts = TShare(secret, 5, 3, prg).value();
  for (int mask = 0; mask < 32; ++mask) {
    std::vector<bool> alive(5);
    int count = 0;
    for (int u = 0; u < 5; ++u) count += alive[u] = (mask >> u) & 1;
    auto rec = RecoverFromCommittee(ts, alive, 0);
    if (count >= 3) {
      EXPECT_EQ(rec.value(), secret);
    } else {
      EXPECT_FALSE(rec.ok());
    }
  }
}

TEST(CommitteeTest, DistinctDeterministicAndPublicVariant) {
  auto c = Committee(1, CommitteeKind::kMask, 3, 4, 5, 12, false);
  ASSERT_EQ(c.size(), 5u);
  std::set<size_t> uniq(c.begin(), c.end());
  EXPECT_EQ(uniq.size(), 5u);
  for (size_t v : c) EXPECT_LT(v, 12u);
  EXPECT_EQ(c, Committee(1, CommitteeKind::kMask, 3, 4, 5, 12, false));
  EXPECT_EQ(Committee(1, CommitteeKind::kMask, 3, 4, 5, 12, true),
            Committee(1, CommitteeKind::kMask, 3, 9, 5, 12, true));
  EXPECT_EQ(Committee(1, CommitteeKind::kMask, 3, 4, 20, 12, false).size(), 12u);
}

TEST(MaskTest, ReconstructedSeedExpandsToClientMask) {
  auto ring = RingParams::CreateWithPrimeBits(16, 50, 1, 1 << 16).value();
  Prg prg(63);
  const uint64_t q0 = ring->modulus(0);
  auto secret = MakeMaskSecret(prg, q0, 5, 3, false).value();
  EXPECT_NE(secret.b, 0u);
  std::vector<ScalarShare> some = {secret.shares[4], secret.shares[1], secret.shares[2]};
  const uint64_t b = TRecScalar(some, 3, q0).value();
  EXPECT_EQ(ExpandMask(b, 2, ring), ExpandMask(secret.b, 2, ring));
  auto zero = MakeMaskSecret(prg, q0, 5, 3, true).value();
  EXPECT_EQ(zero.b, 0u);
  for (const auto& e : ExpandMask(0, 2, ring)) EXPECT_TRUE(e.IsZero());
}

TEST(RouterTest, Assertions) {
  Router router;
  EXPECT_TRUE(router.ReleaseKeyBackup(1, 2, true).ok());
  EXPECT_EQ(router.ReleaseKeyBackup(1, 3, false).code(), absl::StatusCode::kInternal);
  EXPECT_TRUE(router.ReleaseMaskShare(1, 3, false).ok());
  EXPECT_EQ(router.ReleaseMaskShare(1, 2, true).code(), absl::StatusCode::kInternal);
  DropoutSchedule s;
  s.dropped[1] = {2};
  router.RecordMaskReconstructed(1, 3);
  EXPECT_TRUE(router.MasksPrivate(s));
  router.RecordMaskReconstructed(1, 2);
  EXPECT_FALSE(router.MasksPrivate(s));
}

TEST(ScheduleTest, JsonRoundTripAndErrors) {
  auto s = ParseSchedule(R"({"rounds": {"2": [0, 7], "5": []}})").value();
  EXPECT_TRUE(s.IsDropped(1, 7));
  EXPECT_FALSE(s.IsDropped(0, 7));
  EXPECT_EQ(s.Count(1), 2u);
  auto again = ParseSchedule(ScheduleToJson(s)).value();
  EXPECT_EQ(again.dropped.at(1), s.dropped.at(1));
  EXPECT_FALSE(ParseSchedule("[]").ok());
  EXPECT_FALSE(ParseSchedule(R"({"rounds": {"0": [1]}})").ok());
  EXPECT_FALSE(ParseSchedule(R"({"rounds": {"1": [-1]}})").ok());
  s.dropped[4] = {1};
  EXPECT_FALSE(CheckSchedule(s, 3, 10, 0.5).ok());  // round 5 of 3
  s.dropped.erase(4);
  EXPECT_FALSE(CheckSchedule(s, 3, 7, 0.5).ok());   // client 7 of 7
  EXPECT_FALSE(CheckSchedule(s, 3, 10, 0.1).ok());  // 2 > 0.1 * 10
  EXPECT_TRUE(CheckSchedule(s, 3, 10, 0.2).ok());
}

TEST(ScheduleTest, RandomScheduleRespectsBeta) {
  Prg prg(64);
  for (int trial = 0; trial < 50; ++trial) {
    auto s = RandomSchedule(6, 10, 0.2, prg);
    EXPECT_TRUE(CheckSchedule(s, 6, 10, 0.2).ok());
  }
}

TEST(DropoutProtocolTest, ZeroMasksNoDropsEqualsPlainRun) {
  Prg prg(65);
  Program p = RandomProgram(prg, 5, 4);
  InputTensor data = RandomData(prg, 5, 8, 4, 8);
  ParamSet params = DeskParams(8, 5, 4);
  auto plain = RunProtocol(p, InputSource{&data}, params, {.seed = 4}).value();
  ProtocolOptions opt = WithDropouts(nullptr);
  opt.seed = 4;
  opt.dropout_opts.zero_masks = true;
  auto zero = RunProtocol(p, InputSource{&data}, params, opt).value();
  opt.dropout_opts.zero_masks = false;
  auto masked = RunProtocol(p, InputSource{&data}, params, opt).value();
  EXPECT_EQ(Values(zero.reveals), Values(plain.reveals));
  EXPECT_EQ(Values(masked.reveals), Values(plain.reveals));
  // No drops: every survivor mask is reconstructed and no key backup opens.
  EXPECT_EQ(masked.transcript.masks_reconstructed, 5u * 8u);
  EXPECT_EQ(masked.transcript.key_releases, 0u);
}

TEST(DropoutProtocolTest, SingleDropoutInSumProgram) {
  Prg prg(66);
  Program p = SumProgram(4, 3);
  InputTensor data = RandomData(prg, 4, 6, 3, 8);
  DropoutSchedule s;
  s.dropped[1] = {2};
  ParamSet params = DeskParams(6, 4, 3);
  auto res = RunProtocol(p, InputSource{&data}, params, WithDropouts(&s, 3, 2)).value();
  ExpectMatchesSurvivorIdeal(p, data, params, s, res);
  EXPECT_EQ(res.transcript.key_releases, 1u);
  EXPECT_EQ(res.transcript.rounds[1].dropped, 1u);
}

TEST(DropoutProtocolTest, ConsecutiveRoundDropouts) {
  Prg prg(67);
  Program p = RandomProgram(prg, 5, 4);
  p.rounds.back().mode = Mode::kReveal;
  InputTensor data = RandomData(prg, 5, 10, 4, 8);
  DropoutSchedule s;
  s.dropped[1] = {3};
  s.dropped[2] = {3, 5};
  s.dropped[3] = {0};
  ParamSet params = DeskParams(10, 5, 4);
  auto res = RunProtocol(p, InputSource{&data}, params, WithDropouts(&s)).value();
  ExpectMatchesSurvivorIdeal(p, data, params, s, res);
}

TEST(DropoutProtocolTest, RoundOneDropoutsDefineTheKey) {
  Program p = SumProgram(3, 2);
  Prg prg(68);
  InputTensor data = RandomData(prg, 3, 5, 2, 8);
  DropoutSchedule s;
  s.dropped[0] = {1};
  s.dropped[2] = {4};
  ParamSet params = DeskParams(5, 3, 2);
  auto res = RunProtocol(p, InputSource{&data}, params, WithDropouts(&s, 3, 2)).value();
  ExpectMatchesSurvivorIdeal(p, data, params, s, res);
}

TEST(DropoutProtocolTest, RandomSchedulesMatchSurvivorIdeal) {
  Prg prg(69);
  for (int trial = 0; trial < 10; ++trial) {
    Program p = RandomProgram(prg, 6, 4);
    p.rounds.back().mode = Mode::kReveal;
    InputTensor data = RandomData(prg, 6, 10, 4, 8);
    DropoutSchedule s = RandomSchedule(6, 10, 0.2, prg);
    ParamSet params = DeskParams(10, 6, 4);
    ProtocolOptions opt = WithDropouts(&s);
    opt.seed = 200 + trial;
    size_t bad_keys = 0;
    opt.key_observer = [&](size_t, const RingElement& sum, const RingElement& key) {
      bad_keys += !(sum == key);
    };
    auto res = RunProtocol(p, InputSource{&data}, params, opt).value();
    ExpectMatchesSurvivorIdeal(p, data, params, s, res);
    EXPECT_EQ(bad_keys, 0u);
  }
}

TEST(DropoutProtocolTest, AlternativeCommitteeModes) {
  Prg prg(70);
  Program p = RandomProgram(prg, 5, 3);
  p.rounds.back().mode = Mode::kReveal;
  InputTensor data = RandomData(prg, 5, 10, 3, 8);
  DropoutSchedule s = RandomSchedule(5, 10, 0.2, prg);
  ParamSet params = DeskParams(10, 5, 3);
  for (int variant = 0; variant < 3; ++variant) {
    ProtocolOptions opt = WithDropouts(&s);
    opt.dropout_opts.public_committee = variant == 1;
    opt.dropout_opts.self_reveal_mask = variant == 2;
    auto res = RunProtocol(p, InputSource{&data}, params, opt).value();
    ExpectMatchesSurvivorIdeal(p, data, params, s, res);
    if (variant == 2) EXPECT_EQ(res.transcript.mask_releases, 0u);
  }
}

TEST(DropoutProtocolTest, QuorumFailureAborts) {
  // Committees of 3 out of 4 with threshold 3: two drops in the releasing
  // cohort always leave a committee short.
  Program p = SumProgram(4, 1);
  InputTensor data(4, std::vector<std::vector<int64_t>>(4, {1}));
  DropoutSchedule s;
  s.dropped[1] = {0};
  s.dropped[2] = {1, 2};
  ParamSet params = DeskParams(4, 4, 1);
  auto res = RunProtocol(p, InputSource{&data}, params, WithDropouts(&s, 3, 3));
  EXPECT_EQ(res.status().code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_NE(res.status().message().find("unrecoverable round"), std::string::npos);
}

TEST(DropoutProtocolTest, BadCommitteeParameters) {
  Program p = SumProgram(2, 1);
  ParamSet params = DeskParams(4, 2, 1);
  EXPECT_FALSE(RunProtocol(p, InputSource{}, params, WithDropouts(nullptr, 5, 3)).ok());
  EXPECT_FALSE(RunProtocol(p, InputSource{}, params, WithDropouts(nullptr, 3, 4)).ok());
}

}  // namespace
}  // namespace stateful_agg

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

#include "stateful_agg/program.h"

#include <functional>
#include <vector>

#include <gtest/gtest.h>

namespace stateful_agg {
namespace {

Program RandomProgram(Prg& prg, size_t r, int64_t wmax) {
  Program p;
  p.length = 1;
  for (size_t i = 0; i < r; ++i) {
    Instruction ins;
    ins.mode = prg.UniformBelow(2) ? Mode::kStore : Mode::kReveal;
    for (size_t k = 0; k < i; ++k) {
      int64_t w = static_cast<int64_t>(prg.UniformBelow(2 * wmax + 1)) - wmax;
      if (w != 0 && prg.UniformBelow(3) != 0) ins.weights[k] = w;
    }
    p.rounds.push_back(ins);
  }
  return p;
}

// v_i = x_i + sum_k lambda_{i,k} v_k over Z_q.
std::vector<uint64_t> Eager(const Program& p, const std::vector<uint64_t>& x,
                            uint64_t q) {
  std::vector<uint64_t> v(p.size());
  for (size_t i = 0; i < p.size(); ++i) {
    uint64_t acc = x[i] % q;
    for (const auto& [k, w] : p.rounds[i].weights) {
      acc = (acc + ReduceSigned(w, q) * v[k]) % q;
    }
    v[i] = acc;
  }
  return v;
}

// Sum over all chains j = k_1 < ... < k_m = i of the product of edge weights.
uint64_t ChainSum(const Program& p, size_t j, size_t i, uint64_t q) {
  if (i == j) return 1;
  uint64_t total = 0;
  for (const auto& [k, w] : p.rounds[i].weights) {
    if (k < j) continue;
    total = (total + ReduceSigned(w, q) * ChainSum(p, j, k, q)) % q;
  }
  return total;
}

TEST(ValidateTest, EmptyProgramIsValid) {
  EXPECT_TRUE(Validate(Program{}).empty());
}

TEST(ValidateTest, SelfAndForwardReferences) {
  Program p;
  p.rounds.resize(3);
  p.rounds[1].weights[1] = 1;
  p.rounds[2].weights[0] = 1;
  auto v = Validate(p);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].round, 1u);
  p.rounds[0].weights[2] = 1;
  EXPECT_EQ(Validate(p).size(), 2u);
  EXPECT_FALSE(ValidateOrError(p).ok());
}

TEST(ValidateTest, WeightRangeAndGaussianVariance) {
  Program p;
  p.rounds.resize(2);
  p.rounds[1].weights[0] = 97;
  EXPECT_TRUE(Validate(p).empty());
  EXPECT_EQ(Validate(p, 97).size(), 1u);
  p.rounds[1].weights[0] = -96;
  EXPECT_TRUE(Validate(p, 97).empty());
  p.rounds[0].input = InputRule::Gaussian(0);
  EXPECT_EQ(Validate(p).size(), 1u);
}

TEST(ComposeLambdaTest, NoWeightsGivesUnitVector) {
  Program p;
  p.rounds.resize(5);
  auto lam = ComposeLambdaMod(p, 3, 97);
  EXPECT_EQ(lam, (std::vector<uint64_t>{0, 0, 0, 1}));
  EXPECT_EQ(ComposeLambda(p, 3).value(), (std::vector<int64_t>{0, 0, 0, 1}));
}

TEST(ComposeLambdaTest, ThreeRoundExample) {
  Program p;
  p.rounds.resize(3);
  p.rounds[1].weights[0] = 2;
  p.rounds[2].weights[0] = 1;
  p.rounds[2].weights[1] = 3;
  EXPECT_EQ(ComposeLambdaMod(p, 2, 97), (std::vector<uint64_t>{7, 3, 1}));
  EXPECT_EQ(ComposeLambda(p, 2).value(), (std::vector<int64_t>{7, 3, 1}));
}

TEST(ComposeLambdaTest, NegativeWeightsAreReduced) {
  Program p;
  p.rounds.resize(2);
  p.rounds[1].weights[0] = -1;
  EXPECT_EQ(ComposeLambdaMod(p, 1, 97), (std::vector<uint64_t>{96, 1}));
  EXPECT_EQ(ComposeLambda(p, 1).value(), (std::vector<int64_t>{-1, 1}));
}

TEST(ComposeLambdaTest, LazyEqualsEagerOnRandomPrograms) {
  Prg prg(21);
  for (int trial = 0; trial < 200; ++trial) {
    const uint64_t q = 97;
    const size_t r = 1 + prg.UniformBelow(8);
    Program p = RandomProgram(prg, r, 3);
    std::vector<uint64_t> x(r);
    for (auto& e : x) e = prg.UniformBelow(q);
    auto v = Eager(p, x, q);
    for (size_t i = 0; i < r; ++i) {
      auto lam = ComposeLambdaMod(p, i, q);
      uint64_t dot = 0;
      for (size_t k = 0; k <= i; ++k) dot = (dot + lam[k] * x[k]) % q;
      ASSERT_EQ(dot, v[i]) << "trial " << trial << " round " << i;
    }
  }
}

TEST(ComposeLambdaTest, MatchesChainSumFormula) {
  Prg prg(22);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t r = 1 + prg.UniformBelow(5);
    Program p = RandomProgram(prg, r, 5);
    for (size_t i = 0; i < r; ++i) {
      auto lam = ComposeLambdaMod(p, i, 101);
      for (size_t j = 0; j <= i; ++j) ASSERT_EQ(lam[j], ChainSum(p, j, i, 101));
    }
  }
}

TEST(ComposeLambdaTest, AffineInEachEdge) {
  Prg prg(23);
  const uint64_t q = 101;
  for (int trial = 0; trial < 50; ++trial) {
    const size_t r = 2 + prg.UniformBelow(4);
    Program p = RandomProgram(prg, r, 4);
    for (size_t i = 1; i < r; ++i) {
      for (size_t k = 0; k < i; ++k) {
        auto at = [&](int64_t w) {
          Program c = p;
          if (w == 0) {
            c.rounds[i].weights.erase(k);
          } else {
            c.rounds[i].weights[k] = w;
          }
          return ComposeLambdaMod(c, r - 1, q);
        };
        auto l0 = at(0), l1 = at(1), l2 = at(2);
        for (size_t e = 0; e < r; ++e) {
          ASSERT_EQ((l2[e] + l0[e]) % q, (2 * l1[e]) % q);
        }
      }
    }
  }
}

TEST(ComposeLambdaTest, IntegerMatchesModular) {
  Prg prg(24);
  for (int trial = 0; trial < 100; ++trial) {
    Program p = RandomProgram(prg, 1 + prg.UniformBelow(8), 2);
    for (size_t i = 0; i < p.size(); ++i) {
      auto li = ComposeLambda(p, i).value();
      auto lm = ComposeLambdaMod(p, i, 1000003);
      for (size_t k = 0; k <= i; ++k) ASSERT_EQ(ReduceSigned(li[k], 1000003), lm[k]);
    }
  }
}

TEST(ComposeLambdaTest, IntegerOverflowIsReported) {
  Program p;
  p.rounds.resize(70);
  for (size_t i = 1; i < 70; ++i) p.rounds[i].weights[i - 1] = 2;
  EXPECT_EQ(ComposeLambda(p, 69).status().code(), absl::StatusCode::kOutOfRange);
  EXPECT_TRUE(ComposeLambda(p, 10).ok());
  EXPECT_FALSE(ComposeLambda(p, 70).ok());
}

TEST(ClientInputTest, RulesAndShapes) {
  Program p;
  p.length = 2;
  p.rounds = {Instruction{Mode::kStore, InputRule::Data(), {}},
              Instruction{Mode::kStore, InputRule::Zero(), {}},
              Instruction{Mode::kReveal, InputRule::Gaussian(4.0), {}}};
  InputTensor data = {{{1, 2}, {3, 4}}, {}, {}};
  InputSource src{&data, 7, 0.0};
  EXPECT_EQ(ClientInput(p, 0, 1, 2, src).value(), (std::vector<int64_t>{3, 4}));
  EXPECT_EQ(ClientInput(p, 1, 1, 2, src).value(), (std::vector<int64_t>{0, 0}));
  EXPECT_EQ(ClientInput(p, 2, 0, 2, src).value(), ClientInput(p, 2, 0, 2, src).value());
  EXPECT_FALSE(ClientInput(p, 0, 2, 3, src).ok());
  data[0][0] = {1};
  EXPECT_FALSE(ClientInput(p, 0, 0, 2, src).ok());
}

TEST(ClientInputTest, PerClientNoiseSumsToTargetVariance) {
  // 8 clients, gamma = 0.25: the 6 honest ones together carry variance 36.
  Program p;
  p.length = 1;
  p.rounds = {Instruction{Mode::kReveal, InputRule::Gaussian(36.0), {}}};
  const size_t n = 8;
  const double gamma = 0.25;
  EXPECT_DOUBLE_EQ(PerClientSigma(36.0, n, gamma), std::sqrt(6.0));
  double s2 = 0;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    InputSource src{nullptr, static_cast<uint64_t>(t), gamma};
    int64_t sum = 0;
    for (size_t j = 0; j < 6; ++j) sum += ClientInput(p, 0, j, n, src).value()[0];
    s2 += static_cast<double>(sum * sum);
  }
  EXPECT_NEAR(s2 / trials, 36.0, 36.0 * 0.05);
}

TEST(ProgramJsonTest, RoundTripAndNegativeWeights) {
  const char* text = R"({"l": 3, "rounds": [
      {"mode": "store", "input": "data", "weights": {}},
      {"mode": "store", "input": {"gauss": 2.5}},
      {"mode": "reveal", "input": "zero", "weights": {"1": "-1", "2": 4}}]})";
  Program p = ParseProgram(text).value();
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p.length, 3u);
  EXPECT_EQ(p.rounds[1].input, InputRule::Gaussian(2.5));
  EXPECT_EQ(p.rounds[2].weights.at(0), -1);
  EXPECT_EQ(p.rounds[2].weights.at(1), 4);
  EXPECT_EQ(ProgramFromJson(ProgramToJson(p)).value(), p);
}

TEST(ProgramJsonTest, Errors) {
  EXPECT_FALSE(ParseProgram("{").ok());
  EXPECT_FALSE(ParseProgram(R"({"l": 1, "rounds": [{"mode": "load"}]})").ok());
  EXPECT_FALSE(ParseProgram(R"({"l": 1, "rounds": [{"mode": "store", "weights": {"0": "1"}}]})").ok());
  EXPECT_FALSE(ParseProgram(R"({"l": 1, "rounds": [{"mode": "store", "weights": {"1": "x"}}]})").ok());
  EXPECT_FALSE(ParseProgram(R"({"l": 1, "rounds": [3]})").ok());
  EXPECT_FALSE(ParseProgram(R"({"rounds": []})").ok());
}

}  // namespace
}  // namespace stateful_agg

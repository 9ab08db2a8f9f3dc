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

// Programs for stateful aggregation: a sequence of Store/Reveal
// instructions, each aggregating one cohort's inputs plus a weighted
// combination of earlier round values.
//
// Round indices are 0-based in memory. The JSON file format and all CSV
// outputs use 1-based round numbers.

#ifndef STATEFUL_AGG_PROGRAM_H_
#define STATEFUL_AGG_PROGRAM_H_

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "json.hpp"
#include "stateful_agg/modular.h"
#include "stateful_agg/prg.h"
#include "stateful_agg/ring.h"
#include "stateful_agg/status_macros.h"

namespace stateful_agg {

enum class Mode { kStore, kReveal };

struct InputRule {
  enum class Kind { kData, kGaussian, kZero, kDataGaussian };
  Kind kind = Kind::kData;
  double variance = 0;  // total sigma^2 for the noisy kinds

  static InputRule Data() { return {Kind::kData, 0}; }
  static InputRule Gaussian(double variance) {
    return {Kind::kGaussian, variance};
  }
  static InputRule Zero() { return {Kind::kZero, 0}; }
  // Client data plus its share of sigma^2 noise.
  static InputRule DataGaussian(double variance) {
    return {Kind::kDataGaussian, variance};
  }
  bool noisy() const {
    return kind == Kind::kGaussian || kind == Kind::kDataGaussian;
  }

  bool operator==(const InputRule&) const = default;
};

struct Instruction {
  Mode mode = Mode::kStore;
  InputRule input;
  // round index k < own index -> lambda_{i,k}. Signed representatives.
  std::map<size_t, int64_t> weights;

  bool operator==(const Instruction&) const = default;
};

struct Program {
  size_t length = 1;  // entries per input vector
  std::vector<Instruction> rounds;

  size_t size() const { return rounds.size(); }
  bool operator==(const Program&) const = default;
};

struct Violation {
  size_t round;
  std::string message;
};

// Structural checks. With q != 0, weights must also have |lambda| < q.
inline std::vector<Violation> Validate(const Program& p, uint64_t q = 0) {
  std::vector<Violation> out;
  if (p.length == 0) out.push_back({0, "vector length must be positive"});
  for (size_t i = 0; i < p.rounds.size(); ++i) {
    const Instruction& ins = p.rounds[i];
    if (ins.input.noisy() &&
        !(ins.input.variance > 0 && std::isfinite(ins.input.variance))) {
      out.push_back({i, "gaussian input needs a positive variance"});
    }
    for (const auto& [k, w] : ins.weights) {
      if (k >= i) {
        out.push_back({i, absl::StrCat("weight references round ", k + 1,
                                       " which is not earlier than round ",
                                       i + 1)});
      }
      const uint64_t mag =
          w < 0 ? uint64_t{0} - static_cast<uint64_t>(w) : static_cast<uint64_t>(w);
      if (q != 0 && mag >= q) {
        out.push_back({i, absl::StrCat("weight ", w, " is not reduced mod ", q)});
      }
    }
  }
  return out;
}

inline absl::Status ValidateOrError(const Program& p, uint64_t q = 0) {
  std::vector<Violation> v = Validate(p, q);
  if (v.empty()) return absl::OkStatus();
  std::vector<std::string> parts;
  for (const auto& x : v) parts.push_back(absl::StrCat("round ", x.round + 1, ": ", x.message));
  return absl::InvalidArgumentError(absl::StrJoin(parts, "; "));
}

// Composed weights lambda-bar^i over Z_q: entry k is the coefficient of
// round k's aggregate in v_i, with entry i equal to 1. Computed by pushing
// coefficients backwards through the dependency graph.
inline std::vector<uint64_t> ComposeLambdaMod(const Program& p, size_t i,
                                              uint64_t q) {
  std::vector<uint64_t> lam(i + 1, 0);
  lam[i] = 1 % q;
  for (size_t j = i + 1; j-- > 0;) {
    if (lam[j] == 0) continue;
    for (const auto& [k, w] : p.rounds[j].weights) {
      lam[k] = AddMod(lam[k], MulMod(lam[j], ReduceSigned(w, q), q), q);
    }
  }
  return lam;
}

// Same over the integers. Fails if any intermediate leaves int64.
inline absl::StatusOr<std::vector<int64_t>> ComposeLambda(const Program& p,
                                                          size_t i) {
  if (i >= p.rounds.size()) {
    return absl::OutOfRangeError(absl::StrCat("round ", i + 1, " is past the end"));
  }
  std::vector<int64_t> lam(i + 1, 0);
  lam[i] = 1;
  for (size_t j = i + 1; j-- > 0;) {
    if (lam[j] == 0) continue;
    for (const auto& [k, w] : p.rounds[j].weights) {
      int64_t term;
      if (k >= j || __builtin_mul_overflow(lam[j], w, &term) ||
          __builtin_add_overflow(lam[k], term, &lam[k])) {
        return absl::OutOfRangeError(
            absl::StrCat("composed weights of round ", i + 1,
                         " overflow 64-bit integers"));
      }
    }
  }
  return lam;
}

// ---------------------------------------------------------------------------
// Client inputs.

// data[round][client][entry]; rounds whose rule is not kData may be empty.
using InputTensor = std::vector<std::vector<std::vector<int64_t>>>;

struct InputSource {
  const InputTensor* data = nullptr;
  uint64_t noise_seed = 0;
  double gamma = 0;  // assumed corrupt fraction, inflates per-client noise
};

// Per-client standard deviation for a Gaussian rule with total variance
// `variance` split over n clients of which a (1 - gamma) fraction is honest.
inline double PerClientSigma(double variance, size_t n, double gamma) {
  return std::sqrt(variance / (static_cast<double>(n) * (1.0 - gamma)));
}

// The vector client j contributes in round i. Gaussian noise is drawn from a
// stream keyed by (round, client) so every evaluator replays it exactly.
inline absl::StatusOr<std::vector<int64_t>> ClientInput(const Program& p,
                                                        size_t round,
                                                        size_t client, size_t n,
                                                        const InputSource& src) {
  const InputRule& rule = p.rounds[round].input;
  switch (rule.kind) {
    case InputRule::Kind::kZero:
      return std::vector<int64_t>(p.length, 0);
    case InputRule::Kind::kGaussian: {
      DiscreteGaussian dist(PerClientSigma(rule.variance, n, src.gamma));
      Prg prg = Prg(src.noise_seed).Derive({round, client});
      std::vector<int64_t> out(p.length);
      for (auto& v : out) v = dist.Sample(prg);
      return out;
    }
    case InputRule::Kind::kData:
    case InputRule::Kind::kDataGaussian:
      break;
  }
  if (src.data == nullptr || round >= src.data->size() ||
      client >= (*src.data)[round].size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "no data for round ", round + 1, " client ", client));
  }
  std::vector<int64_t> v = (*src.data)[round][client];
  if (v.size() != p.length) {
    return absl::InvalidArgumentError(
        absl::StrCat("round ", round + 1, " client ", client, " has ",
                     v.size(), " entries, expected ", p.length));
  }
  if (rule.kind == InputRule::Kind::kDataGaussian) {
    DiscreteGaussian dist(PerClientSigma(rule.variance, n, src.gamma));
    Prg prg = Prg(src.noise_seed).Derive({round, client});
    for (auto& e : v) e += dist.Sample(prg);
  }
  return v;
}

// ---------------------------------------------------------------------------
// JSON format:
// {"l": 4, "rounds": [{"mode": "store", "input": "data"|"zero"|{"gauss": v}
//                      |{"data_gauss": v},
//                      "weights": {"1": "-1", ...}}]}

inline nlohmann::json ProgramToJson(const Program& p) {
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& ins : p.rounds) {
    nlohmann::json r;
    r["mode"] = ins.mode == Mode::kStore ? "store" : "reveal";
    switch (ins.input.kind) {
      case InputRule::Kind::kData: r["input"] = "data"; break;
      case InputRule::Kind::kZero: r["input"] = "zero"; break;
      case InputRule::Kind::kGaussian:
        r["input"] = {{"gauss", ins.input.variance}};
        break;
      case InputRule::Kind::kDataGaussian:
        r["input"] = {{"data_gauss", ins.input.variance}};
        break;
    }
    nlohmann::json w = nlohmann::json::object();
    for (const auto& [k, v] : ins.weights) w[std::to_string(k + 1)] = std::to_string(v);
    r["weights"] = w;
    rounds.push_back(r);
  }
  return {{"l", p.length}, {"rounds", rounds}};
}

namespace internal {
inline absl::StatusOr<Program> ProgramFromJsonUnchecked(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("l") || !j.contains("rounds") ||
      !j["l"].is_number_integer() || !j["rounds"].is_array()) {
    return absl::InvalidArgumentError("program needs integer \"l\" and array \"rounds\"");
  }
  Program p;
  if (j["l"].get<int64_t>() < 1) return absl::InvalidArgumentError("\"l\" must be positive");
  p.length = j["l"].get<size_t>();
  for (const auto& r : j["rounds"]) {
    Instruction ins;
    const std::string mode = r.value("mode", "");
    if (mode == "store") {
      ins.mode = Mode::kStore;
    } else if (mode == "reveal") {
      ins.mode = Mode::kReveal;
    } else {
      return absl::InvalidArgumentError(absl::StrCat("bad mode \"", mode, "\""));
    }
    const auto& in = r.contains("input") ? r["input"] : nlohmann::json("data");
    if (in == "data") {
      ins.input = InputRule::Data();
    } else if (in == "zero") {
      ins.input = InputRule::Zero();
    } else if (in.is_object() && in.contains("gauss") && in["gauss"].is_number()) {
      ins.input = InputRule::Gaussian(in["gauss"].get<double>());
    } else if (in.is_object() && in.contains("data_gauss") &&
               in["data_gauss"].is_number()) {
      ins.input = InputRule::DataGaussian(in["data_gauss"].get<double>());
    } else {
      return absl::InvalidArgumentError(absl::StrCat("bad input rule ", in.dump()));
    }
    if (r.contains("weights")) {
      if (!r["weights"].is_object()) return absl::InvalidArgumentError("weights must be an object");
      for (const auto& [key, val] : r["weights"].items()) {
        uint64_t k;
        if (!absl::SimpleAtoi(key, &k) || k == 0) {
          return absl::InvalidArgumentError(absl::StrCat("bad round key \"", key, "\""));
        }
        int64_t w;
        if (val.is_number_integer()) {
          w = val.get<int64_t>();
        } else if (!val.is_string() || !absl::SimpleAtoi(val.get<std::string>(), &w)) {
          return absl::InvalidArgumentError(absl::StrCat("bad weight ", val.dump()));
        }
        if (w != 0) ins.weights[k - 1] = w;
      }
    }
    p.rounds.push_back(std::move(ins));
  }
  return p;
}
}  // namespace internal

inline absl::StatusOr<Program> ProgramFromJson(const nlohmann::json& j) {
  try {
    return internal::ProgramFromJsonUnchecked(j);
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed program: ", e.what()));
  }
}

inline absl::StatusOr<Program> ParseProgram(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return absl::InvalidArgumentError("program is not valid JSON");
  return ProgramFromJson(j);
}

}  // namespace stateful_agg

#endif  // STATEFUL_AGG_PROGRAM_H_

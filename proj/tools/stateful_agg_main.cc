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

// Command-line driver: simulated runs, program generation, cost tables and
// parameter search.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "json.hpp"
#include "stateful_agg/dp.h"
#include "stateful_agg/dropout.h"
#include "stateful_agg/ideal.h"
#include "stateful_agg/io.h"
#include "stateful_agg/params.h"
#include "stateful_agg/program.h"
#include "stateful_agg/protocol.h"

namespace sa = stateful_agg;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitUnrecoverable = 3;
constexpr int kExitIdealMismatch = 4;

int Fail(int code, const absl::Status& s) {
  std::cerr << "error: " << s.message() << "\n";
  return code;
}

int Fail(int code, const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return code;
}

// Writes to `path`, or stdout when it is empty or "-".
absl::Status Emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return absl::OkStatus();
  }
  return sa::WriteFile(path, text);
}

// ---------------------------------------------------------------------------

struct RunConfig {
  std::string program;
  size_t n = 0;
  double gamma = 0;
  double beta = 0;
  uint64_t seed = 0;
  std::string schedule;
  std::string params;
  std::string inputs;
  std::string out = ".";
  int input_bits = 8;
  bool check_ideal = false;
  bool seed_reshare = false;
  int threads = 0;
};

// Desk-scale ring unless overridden from a JSON file with any of degree,
// logq, pf, slot_width, d, h, t, sigma.
absl::StatusOr<sa::ParamSet> RunParams(const RunConfig& c, size_t rounds,
                                       size_t length) {
  SA_ASSIGN_OR_RETURN(sa::ParamSet p,
                      sa::MakeParamSet(64, 120, 1, 32, c.n, rounds, length,
                                       c.input_bits, c.gamma, c.beta));
  p.d = std::min<int>(p.d, 8);
  p.h = 0;
  p.t = 0;
  if (c.params.empty()) return p;
  SA_ASSIGN_OR_RETURN(std::string text, sa::ReadFile(c.params));
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return absl::InvalidArgumentError("params file is not a JSON object");
  }
  try {
    for (const auto& [key, val] : j.items()) {
      if (key == "degree") p.degree = val.get<int>();
      else if (key == "logq") p.logq = val.get<int>();
      else if (key == "pf") p.pf = val.get<int>();
      else if (key == "slot_width") p.slot_width = val.get<int>();
      else if (key == "d") p.d = val.get<int>();
      else if (key == "h") p.h = val.get<int>();
      else if (key == "t") p.t = val.get<int>();
      else if (key == "sigma") {
        p.sigma = val.get<double>();
        p.sigma_s = sa::SigmaS(p.sigma);
        p.sigma_n = sa::SigmaN(rounds, p.sigma);
      } else {
        return absl::InvalidArgumentError(absl::StrCat("unknown params key \"", key, "\""));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("bad params value: ", e.what()));
  }
  return p;
}

int CmdRun(const RunConfig& c) {
  if (c.n == 0) return Fail(kExitBadInput, "--n must be positive");
  if (!(c.gamma >= 0 && c.gamma < 1) || !(c.beta >= 0 && c.beta < 1)) {
    return Fail(kExitBadInput, "--gamma and --beta must lie in [0, 1)");
  }
  auto text = sa::ReadFile(c.program);
  if (!text.ok()) return Fail(kExitBadInput, text.status());
  auto program = sa::ParseProgram(*text);
  if (!program.ok()) return Fail(kExitBadInput, program.status());
  if (auto v = sa::ValidateOrError(*program); !v.ok()) return Fail(kExitBadInput, v);
  const size_t r = program->size();

  auto params = RunParams(c, r, program->length);
  if (!params.ok()) return Fail(kExitBadInput, params.status());

  sa::InputTensor data;
  if (!c.inputs.empty()) {
    auto in = sa::ReadFile(c.inputs);
    if (!in.ok()) return Fail(kExitBadInput, in.status());
    auto parsed = sa::ParseInputCsv(*in, r, c.n, program->length);
    if (!parsed.ok()) return Fail(kExitBadInput, parsed.status());
    data = std::move(*parsed);
  } else {
    data = sa::SyntheticInputs(c.seed, r, c.n, program->length, c.input_bits);
  }
  const sa::InputSource src{&data, c.seed, c.gamma};

  sa::DropoutSchedule schedule;
  bool dropout = false;
  if (!c.schedule.empty()) {
    auto s = sa::ReadFile(c.schedule);
    if (!s.ok()) return Fail(kExitBadInput, s.status());
    auto parsed = sa::ParseSchedule(*s);
    if (!parsed.ok()) return Fail(kExitBadInput, parsed.status());
    schedule = std::move(*parsed);
    dropout = true;
    const double beta = c.beta > 0 ? c.beta : 1.0;
    if (auto st = sa::CheckSchedule(schedule, r, c.n, beta); !st.ok()) {
      return Fail(kExitBadInput, st);
    }
  } else if (c.beta > 0) {
    sa::Prg prg = sa::Prg(c.seed).Derive({0x64726f70});
    schedule = sa::RandomSchedule(r, c.n, c.beta, prg);
    dropout = true;
  }

  sa::ProtocolOptions opt;
  opt.seed = c.seed;
  opt.seed_reshare = c.seed_reshare;
  opt.dropout = dropout;
  opt.schedule = dropout ? &schedule : nullptr;
  opt.dropout_opts.h = params->h;
  opt.dropout_opts.t = params->t;
  opt.threads = c.threads;

  const auto budget = sa::CheckNoiseBudget(
      *params, sa::ComputeNoiseStats(*program).value_or(sa::NoiseStats{}));
  if (!budget.ok) {
    std::cerr << absl::StrFormat(
        "warning: worst-case noise needs %.1f bits of modulus, have %d\n",
        budget.required_bits, params->logq);
  }

  auto result = sa::RunProtocol(*program, src, *params, opt);
  if (!result.ok()) {
    if (result.status().code() == absl::StatusCode::kFailedPrecondition) {
      return Fail(kExitUnrecoverable, result.status());
    }
    return Fail(kExitFailure, result.status());
  }

  std::error_code ec;
  std::filesystem::create_directories(c.out, ec);
  const std::string reveals_path = (std::filesystem::path(c.out) / "reveals.csv").string();
  const std::string transcript_path =
      (std::filesystem::path(c.out) / "transcript.csv").string();
  if (auto st = sa::WriteFile(reveals_path, sa::RevealsCsv(result->reveals, program->length));
      !st.ok()) {
    return Fail(kExitBadInput, st);
  }
  if (auto st = sa::WriteFile(transcript_path, sa::TranscriptCsv(result->transcript));
      !st.ok()) {
    return Fail(kExitBadInput, st);
  }
  std::cerr << absl::StrFormat("%d reveals, %d rounds, %d dropouts -> %s\n",
                               result->reveals.size(), r,
                               [&] {
                                 size_t total = 0;
                                 for (size_t i = 0; i < r; ++i) total += schedule.Count(i);
                                 return total;
                               }(),
                               c.out);

  if (c.check_ideal) {
    auto ideal = sa::RunIdeal(*program, c.n, src, [&](size_t i, size_t j) {
      return !schedule.IsDropped(i, j);
    });
    if (!ideal.ok()) return Fail(kExitFailure, ideal.status());
    const int w = params->slot_width;
    const int64_t low = -(int64_t{1} << (w - 1));
    bool match = ideal->reveals.size() == result->reveals.size();
    for (size_t k = 0; match && k < ideal->reveals.size(); ++k) {
      match = ideal->reveals[k].round == result->reveals[k].round &&
              sa::ReduceToWindow(ideal->reveals[k].values, w, low) ==
                  result->reveals[k].values;
    }
    if (!match) return Fail(kExitIdealMismatch, "protocol reveals differ from the ideal functionality");
    if (!result->transcript.masks_private) {
      return Fail(kExitIdealMismatch, "a dropped client's mask was reconstructed");
    }
    std::cerr << "ideal check: match\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct GenConfig {
  std::string kind;
  int h = 3;
  size_t rounds = 8;
  double variance = 0;
  size_t length = 1;
  std::string matrix;
  size_t band = 4;
  int precision = 12;
  std::string matrix_out;
  std::string out;
};

int CmdGen(const GenConfig& c) {
  sa::Program p;
  if (c.kind == "baseline") {
    if (c.rounds == 0) return Fail(kExitBadInput, "--rounds must be positive");
    p = sa::BaselineProgram(c.rounds, c.variance, c.length);
  } else if (c.kind == "tree") {
    if (c.h < 0 || c.h > 20) return Fail(kExitBadInput, "--height must be in [0, 20]");
    p = sa::TreeProgram(c.h, c.variance, c.length);
  } else if (c.kind == "mf") {
    sa::BandedMatrix m;
    if (!c.matrix.empty()) {
      auto text = sa::ReadFile(c.matrix);
      if (!text.ok()) return Fail(kExitBadInput, text.status());
      auto parsed = sa::ParseBandedMatrixCsv(*text);
      if (!parsed.ok()) return Fail(kExitBadInput, parsed.status());
      m = std::move(*parsed);
    } else {
      if (c.rounds == 0 || c.band == 0) {
        return Fail(kExitBadInput, "--rounds and --band must be positive");
      }
      auto real = sa::NormalizedBandedToeplitz(
          c.rounds, sa::SqrtPrefixCoefficients(c.band));
      auto d = sa::DiscretizeC(real, c.band, c.precision);
      if (!d.ok()) return Fail(kExitBadInput, d.status());
      m = std::move(*d);
    }
    if (!c.matrix_out.empty()) {
      if (auto st = sa::WriteFile(c.matrix_out, sa::BandedMatrixToCsv(m)); !st.ok()) {
        return Fail(kExitBadInput, st);
      }
    }
    p = sa::MfProgram(m, c.variance, c.length);
  } else {
    return Fail(kExitBadInput, absl::StrCat("unknown program kind \"", c.kind, "\""));
  }
  if (auto st = sa::ValidateOrError(p); !st.ok()) return Fail(kExitFailure, st);
  if (auto st = Emit(c.out, sa::ProgramToJson(p).dump(2) + "\n"); !st.ok()) {
    return Fail(kExitBadInput, st);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchConfig {
  std::vector<size_t> n = {1000, 100000, 10000000};
  std::vector<size_t> l = {1000, 100000, 10000000};
  size_t rounds = 1000;
  int input_bits = 16;
  std::string out;
  std::string plot;
};

int CmdBench(const BenchConfig& c) {
  std::string table = sa::CostCsvHeader() + "\n";
  std::string plot = "n,l,client_comm_bytes,baseline_bytes\n";
  for (size_t n : c.n) {
    for (size_t l : c.l) {
      auto p = sa::GridSearch(n, l, c.rounds, c.input_bits);
      if (!p.ok()) {
        std::cerr << absl::StrFormat("n=%d l=%d: %s\n", n, l, p.status().message());
        continue;
      }
      table += sa::CostCsvRow(*p) + "\n";
      const auto cost = sa::CostModel(p->degree, p->logq, l, p->pf, 0, c.input_bits);
      absl::StrAppend(&plot, n, ",", l, ",", cost.client_to_server_bytes, ",",
                      sa::BitsToBytes(uint64_t{l} * c.input_bits), "\n");
    }
  }
  if (auto st = Emit(c.out, table); !st.ok()) return Fail(kExitBadInput, st);
  if (!c.plot.empty()) {
    if (auto st = sa::WriteFile(c.plot, plot); !st.ok()) return Fail(kExitBadInput, st);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct ParamsConfig {
  size_t n = 1000;
  size_t l = 1000;
  size_t rounds = 1000;
  int input_bits = 16;
  double gamma = 0;
  double dp_sigma = 0;
  int logq_cap = 0;
};

int CmdParams(const ParamsConfig& c) {
  sa::GridOptions opt;
  opt.gamma = c.gamma;
  opt.dp_sigma = c.dp_sigma;
  opt.logq_cap = c.logq_cap;
  auto p = sa::GridSearch(c.n, c.l, c.rounds, c.input_bits, opt);
  if (!p.ok()) {
    std::cout << "infeasible: " << p.status().message() << "\n";
    return kExitFailure;
  }
  const auto cost = sa::CostModel(p->degree, p->logq, c.l, p->pf, p->d, c.input_bits);
  std::cout << absl::StrFormat(
      "N = %d\nlogq = %d\npf = %d\nslot_width = %d\nsigma = %.4f\nsigma_s = %.4f\n"
      "sigma_n = %.4f\nd = %d\nh = %d\nt = %d\nclient_comm_bytes = %d\n"
      "expansion = %.4f\n",
      p->degree, p->logq, p->pf, p->slot_width, p->sigma, p->sigma_s, p->sigma_n,
      p->d, p->h, p->t, cost.client_to_server_bytes, cost.expansion);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stateful secure aggregation simulator"};
  app.require_subcommand(1);

  RunConfig run;
  auto* run_cmd = app.add_subcommand("run", "Simulate a protocol execution");
  run_cmd->add_option("--program", run.program, "Program JSON")->required();
  run_cmd->add_option("--n", run.n, "Clients per cohort")->required();
  run_cmd->add_option("--gamma", run.gamma, "Corrupt fraction");
  run_cmd->add_option("--beta", run.beta, "Dropout fraction (random schedule if no file)");
  run_cmd->add_option("--seed", run.seed, "Root seed")->required();
  run_cmd->add_option("--dropout-schedule", run.schedule, "Dropout schedule JSON");
  run_cmd->add_option("--params", run.params, "JSON parameter overrides");
  run_cmd->add_option("--inputs", run.inputs, "Input CSV (round,client,v1,...)");
  run_cmd->add_option("--input-bits", run.input_bits, "Synthetic input width")
      ->check(CLI::Range(1, 30));
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--threads", run.threads, "Worker threads");
  run_cmd->add_flag("--check-ideal", run.check_ideal, "Compare with the ideal functionality");
  run_cmd->add_flag("--seed-reshare", run.seed_reshare, "Compress reshares with seeds");

  GenConfig gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a DP program");
  gen_cmd->add_option("kind", gen.kind, "tree | mf | baseline")->required();
  gen_cmd->add_option("--height", gen.h, "Tree height h (2^h leaves)");
  gen_cmd->add_option("--rounds", gen.rounds, "Releases (baseline, mf)");
  gen_cmd->add_option("--variance", gen.variance, "Noise variance sigma^2");
  gen_cmd->add_option("--l", gen.length, "Vector length");
  gen_cmd->add_option("--matrix", gen.matrix, "Banded C CSV (mf)");
  gen_cmd->add_option("--band", gen.band, "Band width of the generated C (mf)");
  gen_cmd->add_option("--precision", gen.precision, "Precision bits of the generated C (mf)");
  gen_cmd->add_option("--matrix-out", gen.matrix_out, "Write the generated C here (mf)");
  gen_cmd->add_option("--out", gen.out, "Output file (stdout by default)");

  BenchConfig bench;
  auto* bench_cmd = app.add_subcommand("bench", "Cost table over (n, l)");
  bench_cmd->add_option("--n", bench.n, "Cohort sizes")->delimiter(',');
  bench_cmd->add_option("--l", bench.l, "Vector lengths")->delimiter(',');
  bench_cmd->add_option("--rounds", bench.rounds, "Rounds");
  bench_cmd->add_option("--input-bits", bench.input_bits, "Input width");
  bench_cmd->add_option("--out", bench.out, "Table CSV (stdout by default)");
  bench_cmd->add_option("--plot", bench.plot, "Plot-data CSV with the cleartext baseline");

  ParamsConfig params;
  auto* params_cmd = app.add_subcommand("params", "Search parameters for one setting");
  params_cmd->add_option("--n", params.n, "Clients per cohort");
  params_cmd->add_option("--l", params.l, "Vector length");
  params_cmd->add_option("--rounds", params.rounds, "Rounds");
  params_cmd->add_option("--input-bits", params.input_bits, "Input width");
  params_cmd->add_option("--gamma", params.gamma, "Corrupt fraction");
  params_cmd->add_option("--dp-sigma", params.dp_sigma, "Aggregate DP noise std");
  params_cmd->add_option("--logq-cap", params.logq_cap, "Upper bound on log2(q)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitBadInput;
  }
  if (*run_cmd) return CmdRun(run);
  if (*gen_cmd) return CmdGen(gen);
  if (*bench_cmd) return CmdBench(bench);
  if (*params_cmd) return CmdParams(params);
  return kExitFailure;
}

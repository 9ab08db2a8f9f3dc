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

// File helpers and the CSV files written by the command-line driver. Rounds
// are 1-based in every file, clients 0-based.

#ifndef STATEFUL_AGG_IO_H_
#define STATEFUL_AGG_IO_H_

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/ascii.h"
#include "absl/strings/match.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "stateful_agg/program.h"
#include "stateful_agg/protocol.h"

namespace stateful_agg {

inline absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline absl::Status WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  out << text;
  out.close();
  if (!out) return absl::DataLossError(absl::StrCat("short write to ", path));
  return absl::OkStatus();
}

// "round,v1,...,vl" then one row per reveal.
inline std::string RevealsCsv(const std::vector<RevealOutput>& reveals, size_t length) {
  std::string out = "round";
  for (size_t k = 1; k <= length; ++k) absl::StrAppend(&out, ",v", k);
  out += "\n";
  for (const auto& r : reveals) {
    absl::StrAppend(&out, r.round + 1, ",", absl::StrJoin(r.values, ","), "\n");
  }
  return out;
}

// One row per cohort, including the closing cohort when there is one.
inline std::string TranscriptCsv(const Transcript& t) {
  std::string out = "round,c2s_bytes,c2c_bytes,dropped_count\n";
  for (const auto& r : t.rounds) {
    absl::StrAppend(&out, r.round + 1, ",", r.c2s_bytes, ",", r.c2c_bytes, ",",
                    r.dropped, "\n");
  }
  return out;
}

// Optional explicit inputs: header "round,client,v1,...", one row per
// (round, client). Missing rows are zero vectors.
inline absl::StatusOr<InputTensor> ParseInputCsv(const std::string& text,
                                                 size_t rounds, size_t n,
                                                 size_t length) {
  InputTensor data(rounds, std::vector<std::vector<int64_t>>(
                               n, std::vector<int64_t>(length, 0)));
  bool header = true;
  size_t line_no = 0;
  for (absl::string_view raw : absl::StrSplit(text, '\n')) {
    ++line_no;
    absl::string_view line = absl::StripAsciiWhitespace(raw);
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (!absl::StartsWith(line, "round,client")) {
        return absl::InvalidArgumentError("input CSV needs header \"round,client,...\"");
      }
      continue;
    }
    std::vector<absl::string_view> cells = absl::StrSplit(line, ',');
    size_t round, client;
    if (cells.size() != length + 2 || !absl::SimpleAtoi(cells[0], &round) ||
        !absl::SimpleAtoi(cells[1], &client) || round == 0 || round > rounds ||
        client >= n) {
      return absl::InvalidArgumentError(absl::StrCat("bad input row at line ", line_no));
    }
    for (size_t k = 0; k < length; ++k) {
      if (!absl::SimpleAtoi(absl::StripAsciiWhitespace(cells[k + 2]),
                            &data[round - 1][client][k])) {
        return absl::InvalidArgumentError(absl::StrCat("bad value at line ", line_no));
      }
    }
  }
  if (header) return absl::InvalidArgumentError("empty input CSV");
  return data;
}

// Deterministic synthetic inputs in [0, 2^bits).
inline InputTensor SyntheticInputs(uint64_t seed, size_t rounds, size_t n,
                                   size_t length, int bits) {
  Prg prg = Prg(seed).Derive({0x696e70});
  InputTensor data(rounds, std::vector<std::vector<int64_t>>(
                               n, std::vector<int64_t>(length)));
  for (auto& round : data)
    for (auto& v : round)
      for (auto& e : v) e = static_cast<int64_t>(prg.UniformBelow(uint64_t{1} << bits));
  return data;
}

}  // namespace stateful_agg

#endif  // STATEFUL_AGG_IO_H_

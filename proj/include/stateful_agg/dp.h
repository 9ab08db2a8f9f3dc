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

// Differentially private programs: per-client noise splitting, independent
// per-round releases, prefix-tree aggregation, and banded matrix
// factorization with streaming post-processing.

#ifndef STATEFUL_AGG_DP_H_
#define STATEFUL_AGG_DP_H_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <sstream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "stateful_agg/program.h"
#include "stateful_agg/status_macros.h"

namespace stateful_agg {

// Target variance alpha^2 split across n clients so that the (1 - gamma) n
// honest ones alone already reach it.
struct NoiseSplit {
  double target_variance = 0;
  size_t n = 1;
  double gamma = 0;

  double per_client_variance() const {
    return target_variance / (static_cast<double>(n) * (1.0 - gamma));
  }
  double honest_variance() const {
    return per_client_variance() * (1.0 - gamma) * static_cast<double>(n);
  }
};

// r independent releases x_i + z_i.
inline Program BaselineProgram(size_t r, double variance, size_t length = 1) {
  Program p;
  p.length = length;
  Instruction ins;
  ins.mode = Mode::kReveal;
  ins.input = variance > 0 ? InputRule::DataGaussian(variance) : InputRule::Data();
  p.rounds.assign(r, ins);
  return p;
}

// Noise nodes z_1..z_{2^h} stored in the odd rounds; even round 2i reveals
// x_i + z_i - sum_{d < h_i} z_{i - 2^d}, where 2^{h_i} exactly divides i.
// Running sums of the reveals are then the prefix sums of x carrying one
// noise node per set bit of the prefix length.
inline Program TreeProgram(int h, double variance, size_t length = 1) {
  Program p;
  p.length = length;
  const size_t leaves = size_t{1} << h;
  for (size_t i = 1; i <= leaves; ++i) {
    Instruction store;
    store.mode = Mode::kStore;
    store.input = variance > 0 ? InputRule::Gaussian(variance) : InputRule::Zero();
    p.rounds.push_back(store);

    Instruction reveal;
    reveal.mode = Mode::kReveal;
    reveal.input = InputRule::Data();
    reveal.weights[2 * i - 2] = 1;  // z_i
    const int hi = std::countr_zero(i);
    for (int d = 0; d < hi; ++d) reveal.weights[2 * (i - (size_t{1} << d)) - 2] = -1;
    p.rounds.push_back(reveal);
  }
  return p;
}

// Server side post-processing for baseline and tree programs.
inline std::vector<std::vector<int64_t>> RunningSums(
    const std::vector<std::vector<int64_t>>& reveals) {
  std::vector<std::vector<int64_t>> out;
  for (const auto& v : reveals) {
    if (out.empty()) {
      out.push_back(v);
      continue;
    }
    std::vector<int64_t> next = out.back();
    for (size_t k = 0; k < v.size(); ++k) next[k] += v[k];
    out.push_back(std::move(next));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Banded lower-triangular matrices with entries at scale 2^p.

class BandedMatrix {
 public:
  BandedMatrix() = default;

  static absl::StatusOr<BandedMatrix> Create(size_t rows, size_t band,
                                             int precision_bits) {
    if (rows == 0 || band == 0) {
      return absl::InvalidArgumentError("banded matrix needs rows and band >= 1");
    }
    if (precision_bits < 0 || precision_bits > 30) {
      return absl::InvalidArgumentError(
          absl::StrCat("precision_bits must be in [0, 30], got ", precision_bits));
    }
    BandedMatrix m;
    m.rows_ = rows;
    m.band_ = band;
    m.precision_bits_ = precision_bits;
    m.entries_.resize(rows);
    for (size_t i = 0; i < rows; ++i) m.entries_[i].assign(std::min(i + 1, band), 0);
    return m;
  }

  size_t rows() const { return rows_; }
  size_t band() const { return band_; }
  int precision_bits() const { return precision_bits_; }
  double scale() const { return std::ldexp(1.0, precision_bits_); }

  bool InBand(size_t i, size_t k) const { return k <= i && i - k < band_; }
  size_t first_col(size_t i) const { return i + 1 > band_ ? i + 1 - band_ : 0; }

  // Scaled integer entry; zero outside the band.
  int64_t scaled(size_t i, size_t k) const {
    return InBand(i, k) ? entries_[i][k - first_col(i)] : 0;
  }
  void set_scaled(size_t i, size_t k, int64_t v) {
    entries_[i][k - first_col(i)] = v;
  }
  double value(size_t i, size_t k) const {
    return static_cast<double>(scaled(i, k)) / scale();
  }
  const std::vector<int64_t>& row(size_t i) const { return entries_[i]; }

  double Frobenius() const {
    double acc = 0;
    for (size_t i = 0; i < rows_; ++i)
      for (int64_t v : entries_[i]) acc += static_cast<double>(v) * static_cast<double>(v);
    return std::sqrt(acc) / scale();
  }

  bool Invertible() const {
    for (size_t i = 0; i < rows_; ++i)
      if (scaled(i, i) == 0) return false;
    return true;
  }

  std::vector<std::vector<double>> Dense() const {
    std::vector<std::vector<double>> d(rows_, std::vector<double>(rows_, 0));
    for (size_t i = 0; i < rows_; ++i)
      for (size_t k = first_col(i); k <= i; ++k) d[i][k] = value(i, k);
    return d;
  }

  bool operator==(const BandedMatrix&) const = default;

 private:
  size_t rows_ = 0;
  size_t band_ = 0;
  int precision_bits_ = 0;
  std::vector<std::vector<int64_t>> entries_;
};

// Rounds toward zero, which never increases any entry's magnitude and hence
// never increases the Frobenius norm. Entries outside the band are ignored.
inline absl::StatusOr<BandedMatrix> DiscretizeC(
    const std::vector<std::vector<double>>& c, size_t band, int precision_bits) {
  const size_t r = c.size();
  SA_ASSIGN_OR_RETURN(BandedMatrix m, BandedMatrix::Create(r, band, precision_bits));
  for (size_t i = 0; i < r; ++i) {
    if (c[i].size() < i + 1) {
      return absl::InvalidArgumentError(absl::StrCat("row ", i + 1, " is too short"));
    }
    for (size_t k = m.first_col(i); k <= i; ++k) {
      if (!std::isfinite(c[i][k])) return absl::InvalidArgumentError("non-finite entry");
      m.set_scaled(i, k, static_cast<int64_t>(std::trunc(c[i][k] * m.scale())));
    }
  }
  if (!m.Invertible()) {
    return absl::InvalidArgumentError("diagonal entry rounds to zero");
  }
  return m;
}

// Lower-triangular Toeplitz matrix with first column (coeffs, 0, ...).
inline std::vector<std::vector<double>> BandedToeplitz(
    size_t r, const std::vector<double>& coeffs) {
  std::vector<std::vector<double>> c(r, std::vector<double>(r, 0));
  for (size_t i = 0; i < r; ++i)
    for (size_t d = 0; d < coeffs.size() && d <= i; ++d) c[i][i - d] = coeffs[d];
  return c;
}

// Coefficients of the square root of the all-ones lower-triangular matrix,
// binom(2k, k) / 4^k, truncated to the band.
inline std::vector<double> SqrtPrefixCoefficients(size_t band) {
  std::vector<double> out(band);
  double c = 1;
  for (size_t k = 0; k < band; ++k) {
    out[k] = c;
    c *= (2.0 * k + 1) / (2.0 * k + 2);
  }
  return out;
}

// Banded Toeplitz C scaled to unit Frobenius norm.
inline std::vector<std::vector<double>> NormalizedBandedToeplitz(
    size_t r, const std::vector<double>& coeffs) {
  auto c = BandedToeplitz(r, coeffs);
  double f = 0;
  for (const auto& row : c)
    for (double v : row) f += v * v;
  f = std::sqrt(f);
  for (auto& row : c)
    for (double& v : row) v /= f;
  return c;
}

// Odd rounds store x_i; even round 2i reveals (C X)_i plus fresh noise, at
// the matrix scale: the revealed value is 2^p (C X + eta)_i with eta of
// variance `variance`.
inline Program MfProgram(const BandedMatrix& c, double variance, size_t length = 1) {
  Program p;
  p.length = length;
  const double s = c.scale();
  for (size_t i = 0; i < c.rows(); ++i) {
    Instruction store;
    store.mode = Mode::kStore;
    store.input = InputRule::Data();
    p.rounds.push_back(store);

    Instruction reveal;
    reveal.mode = Mode::kReveal;
    reveal.input = variance > 0 ? InputRule::Gaussian(variance * s * s)
                                : InputRule::Zero();
    for (size_t k = c.first_col(i); k <= i; ++k) {
      if (c.scaled(i, k) != 0) reveal.weights[2 * k] = c.scaled(i, k);
    }
    p.rounds.push_back(reveal);
  }
  return p;
}

// Applies A C^{-1} to the revealed stream C X + eta one row at a time:
// banded forward substitution for y = C^{-1}(...), then a running sum.
// Holds the last b - 1 solved rows plus the running sum.
class PostProcessor {
 public:
  explicit PostProcessor(const BandedMatrix& c) : c_(c) {}

  // `revealed` at matrix scale, as produced by MfProgram.
  absl::StatusOr<std::vector<double>> Push(const std::vector<int64_t>& revealed) {
    std::vector<double> v(revealed.size());
    for (size_t k = 0; k < v.size(); ++k) {
      v[k] = static_cast<double>(revealed[k]) / c_.scale();
    }
    return PushValue(std::move(v));
  }

  absl::StatusOr<std::vector<double>> PushValue(std::vector<double> v) {
    if (next_ >= c_.rows()) {
      return absl::OutOfRangeError("more reveals than matrix rows");
    }
    if (c_.scaled(next_, next_) == 0) {
      return absl::FailedPreconditionError("singular banded matrix");
    }
    if (!sum_.empty() && v.size() != sum_.size()) {
      return absl::InvalidArgumentError("reveal length changed mid-stream");
    }
    const size_t i = next_++;
    // history_[j] holds y_{i - history_.size() + j}.
    for (size_t j = 0; j < history_.size(); ++j) {
      const double cij = c_.value(i, i - history_.size() + j);
      if (cij == 0) continue;
      for (size_t k = 0; k < v.size(); ++k) v[k] -= cij * history_[j][k];
    }
    const double diag = c_.value(i, i);
    for (double& e : v) e /= diag;
    if (sum_.empty()) sum_.assign(v.size(), 0);
    for (size_t k = 0; k < v.size(); ++k) sum_[k] += v[k];
    if (c_.band() > 1) {
      history_.push_back(std::move(v));
      if (history_.size() > c_.band() - 1) history_.pop_front();
    }
    peak_ = std::max(peak_, retained());
    return sum_;
  }

  // Vectors currently held, counting the running sum.
  size_t retained() const { return history_.size() + (sum_.empty() ? 0 : 1); }
  size_t peak_retained() const { return peak_; }

 private:
  BandedMatrix c_;
  size_t next_ = 0;
  std::deque<std::vector<double>> history_;
  std::vector<double> sum_;
  size_t peak_ = 0;
};

// ---------------------------------------------------------------------------
// CSV: header "rows,band,precision_bits", the three values, then one line
// per row with the scaled in-band entries from column max(0, i - b + 1).

inline std::string BandedMatrixToCsv(const BandedMatrix& m) {
  std::ostringstream out;
  out << "rows,band,precision_bits\n"
      << m.rows() << "," << m.band() << "," << m.precision_bits() << "\n";
  for (size_t i = 0; i < m.rows(); ++i) {
    for (size_t k = 0; k < m.row(i).size(); ++k) {
      if (k) out << ",";
      out << m.row(i)[k];
    }
    out << "\n";
  }
  return out.str();
}

inline absl::StatusOr<BandedMatrix> ParseBandedMatrixCsv(const std::string& text) {
  std::vector<std::string> lines;
  for (absl::string_view l : absl::StrSplit(text, '\n')) {
    std::string s(absl::StripAsciiWhitespace(l));
    if (!s.empty()) lines.push_back(s);
  }
  if (lines.size() < 2 || lines[0] != "rows,band,precision_bits") {
    return absl::InvalidArgumentError(
        "banded matrix CSV needs header \"rows,band,precision_bits\"");
  }
  std::vector<std::string> head = absl::StrSplit(lines[1], ',');
  size_t rows, band;
  int p;
  if (head.size() != 3 || !absl::SimpleAtoi(head[0], &rows) ||
      !absl::SimpleAtoi(head[1], &band) || !absl::SimpleAtoi(head[2], &p)) {
    return absl::InvalidArgumentError(absl::StrCat("bad size line \"", lines[1], "\""));
  }
  SA_ASSIGN_OR_RETURN(BandedMatrix m, BandedMatrix::Create(rows, band, p));
  if (lines.size() != rows + 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("expected ", rows, " matrix rows, got ", lines.size() - 2));
  }
  for (size_t i = 0; i < rows; ++i) {
    std::vector<std::string> cells = absl::StrSplit(lines[i + 2], ',');
    if (cells.size() != m.row(i).size()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "row ", i + 1, " has ", cells.size(), " entries, expected ", m.row(i).size()));
    }
    for (size_t k = 0; k < cells.size(); ++k) {
      int64_t v;
      if (!absl::SimpleAtoi(absl::StripAsciiWhitespace(cells[k]), &v)) {
        return absl::InvalidArgumentError(absl::StrCat("bad entry \"", cells[k], "\""));
      }
      m.set_scaled(i, m.first_col(i) + k, v);
    }
  }
  return m;
}

}  // namespace stateful_agg

#endif  // STATEFUL_AGG_DP_H_

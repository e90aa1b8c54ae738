// Copyright 2026 seqks authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEQKS_SPECTRUM_HPP_
#define SEQKS_SPECTRUM_HPP_

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "seqks/error.hpp"

namespace seqks {

/// Probability mass function over D ordered bins. Normalizes on
/// construction; weights must be finite, non-negative, and not all zero.
class Density {
 public:
  Density() = default;

  explicit Density(std::vector<double> weights) : pmf_(std::move(weights)) {
    if (pmf_.empty()) throw DomainError("density needs at least one bin");
    double total = 0.0;
    for (double w : pmf_) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw DomainError("density weights must be finite and non-negative");
      }
      total += w;
    }
    if (total <= 0.0) throw DomainError("density weights sum to zero");
    for (double& w : pmf_) w /= total;
  }

  std::size_t dim() const { return pmf_.size(); }
  double pmf(std::size_t j) const { return pmf_[j]; }
  std::span<const double> values() const { return pmf_; }

 private:
  std::vector<double> pmf_;
};

/// Convex combination w * f0 + (1 - w) * fa, bin by bin.
inline Density mix_densities(const Density& f0, const Density& fa, double w) {
  if (f0.dim() != fa.dim()) throw DimensionError(f0.dim(), fa.dim());
  if (!(w >= 0.0 && w <= 1.0)) throw DomainError("mixing weight outside [0, 1]");
  std::vector<double> out(f0.dim());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = w * f0.pmf(j) + (1.0 - w) * fa.pmf(j);
  }
  return Density(std::move(out));
}

/// Reference distribution over D bins with its cumulative sums
/// precomputed. cdf(D - 1) is forced to exactly 1.
class SpectrumCdf {
 public:
  SpectrumCdf() = default;

  explicit SpectrumCdf(const Density& density)
      : pmf_(density.values().begin(), density.values().end()) {
    build();
  }

  explicit SpectrumCdf(std::vector<double> weights)
      : SpectrumCdf(Density(std::move(weights))) {}

  std::size_t dim() const { return pmf_.size(); }
  double pmf(std::size_t j) const { return pmf_[j]; }

  /// P(bin <= j).
  double cdf(std::size_t j) const { return cdf_[j]; }

  std::span<const double> cdf_values() const { return cdf_; }
  std::span<const double> pmf_values() const { return pmf_; }

  Density density() const { return Density(pmf_); }

 private:
  void build() {
    cdf_.resize(pmf_.size());
    double run = 0.0;
    for (std::size_t j = 0; j < pmf_.size(); ++j) {
      run += pmf_[j];
      cdf_[j] = run;
    }
    // Guard the top against accumulated rounding.
    double top = cdf_.back();
    for (double& c : cdf_) c = std::min(c / top, 1.0);
    cdf_.back() = 1.0;
  }

  std::vector<double> pmf_;
  std::vector<double> cdf_;
};

/// Counts per bin observed in one time step.
class CountVector {
 public:
  CountVector() = default;

  explicit CountVector(std::vector<std::int64_t> counts)
      : counts_(std::move(counts)) {
    for (auto c : counts_) {
      if (c < 0) throw DomainError("counts must be non-negative");
    }
  }

  static CountVector zeros(std::size_t dim) {
    return CountVector(std::vector<std::int64_t>(dim, 0));
  }

  std::size_t dim() const { return counts_.size(); }
  std::int64_t operator[](std::size_t j) const { return counts_[j]; }
  std::int64_t& operator[](std::size_t j) { return counts_[j]; }

  std::int64_t total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
  }

  std::span<const std::int64_t> values() const { return counts_; }

 private:
  std::vector<std::int64_t> counts_;
};

/// Unbinned measurements collected in one time step.
struct RawSampleBatch {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

}  // namespace seqks

#endif  // SEQKS_SPECTRUM_HPP_

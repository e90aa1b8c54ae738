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

#ifndef SEQKS_KS_HPP_
#define SEQKS_KS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "seqks/error.hpp"
#include "seqks/spectrum.hpp"

namespace seqks {

namespace detail {

/// max_j |F0(j) - cum_j / total| over bins, with the smallest attaining j.
/// Prefix sums stay in 64-bit integers; each bin divides by total once.
inline double max_cdf_gap(std::span<const double> cdf0,
                          std::span<const std::int64_t> bin_counts,
                          std::int64_t total, std::size_t* argmax_bin) {
  const double inv_total = 1.0 / static_cast<double>(total);
  std::int64_t cum = 0;
  double best = -1.0;
  std::size_t best_j = 0;
  for (std::size_t j = 0; j < cdf0.size(); ++j) {
    cum += bin_counts[j];
    double gap = std::fabs(cdf0[j] - static_cast<double>(cum) * inv_total);
    if (gap > best) {
      best = gap;
      best_j = j;
    }
  }
  if (argmax_bin != nullptr) *argmax_bin = best_j;
  return best;
}

}  // namespace detail

struct KsDistanceResult {
  double value = 0.0;
  std::size_t argmax_bin = 0;
};

/// √N · max_j |F⁰(j) − F̂(j)| for aggregated counts against the reference.
inline KsDistanceResult ks_distance_with_argmax(const SpectrumCdf& cdf0,
                                                const CountVector& agg) {
  if (cdf0.dim() != agg.dim()) throw DimensionError(cdf0.dim(), agg.dim());
  std::int64_t total = agg.total();
  if (total == 0) throw EmptyWindowError();
  KsDistanceResult r;
  double gap = detail::max_cdf_gap(cdf0.cdf_values(), agg.values(), total,
                                   &r.argmax_bin);
  r.value = std::sqrt(static_cast<double>(total)) * gap;
  return r;
}

inline double ks_distance(const SpectrumCdf& cdf0, const CountVector& agg) {
  return ks_distance_with_argmax(cdf0, agg).value;
}

/// √N · sup_y |F₀(y) − F̂(y)| for raw observations, evaluated exactly at the
/// jump points of the sorted sample. cdf0_eval must be a CDF on the reals.
template <typename Cdf>
double ks_distance_raw(Cdf&& cdf0_eval, const RawSampleBatch& agg) {
  if (agg.values.empty()) throw EmptyWindowError();
  std::vector<double> ys(agg.values);
  std::sort(ys.begin(), ys.end());
  const double n = static_cast<double>(ys.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    double f0 = cdf0_eval(ys[i]);
    double lo = std::fabs(f0 - static_cast<double>(i) / n);
    double hi = std::fabs(f0 - static_cast<double>(i + 1) / n);
    sup = std::max({sup, lo, hi});
  }
  return std::sqrt(n) * sup;
}

/// Kolmogorov distribution K(x) = 1 − 2 Σ_{k≥1} (−1)^{k−1} exp(−2k²x²).
/// Below the crossover the theta-dual form √(2π)/x Σ exp(−(2k−1)²π²/(8x²))
/// is used instead; the alternating series cancels catastrophically there.
/// Either series stops once a term drops below 1e−12.
inline double kolmogorov_cdf(double x) {
  if (x < 0.0 || !std::isfinite(x)) {
    throw DomainError("kolmogorov_cdf needs x >= 0");
  }
  if (x == 0.0) return 0.0;
  if (x < 1.18) {
    const double v = M_PI * M_PI / (8.0 * x * x);
    double sum = 0.0;
    for (int k = 1; k <= 100000; k += 2) {
      double term = std::exp(-static_cast<double>(k) * static_cast<double>(k) * v);
      sum += term;
      if (term == 0.0 || term < 1e-12 * sum) break;
    }
    return std::clamp(std::sqrt(2.0 * M_PI) / x * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100000; ++k) {
    double term = std::exp(-2.0 * static_cast<double>(k) *
                           static_cast<double>(k) * x * x);
    sum += sign * term;
    if (term < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(1.0 - 2.0 * sum, 0.0, 1.0);
}

/// Inverse of kolmogorov_cdf on (0, 1), by bisection.
inline double kolmogorov_quantile(double p) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw DomainError("kolmogorov_quantile needs p in [0, 1)");
  }
  if (p == 0.0) return 0.0;
  double lo = 0.0;
  double hi = 4.0;
  while (kolmogorov_cdf(hi) < p) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    double mid = 0.5 * (lo + hi);
    if (kolmogorov_cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace seqks

#endif  // SEQKS_KS_HPP_

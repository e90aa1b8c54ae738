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

#ifndef SEQKS_RNG_HPP_
#define SEQKS_RNG_HPP_

#include <cmath>
#include <cstdint>

#include "seqks/error.hpp"

namespace seqks {

/// SplitMix64 finalizer: a bijective avalanche mix of a 64-bit word.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent substream seed from a master seed and a stream
/// index. Substreams with distinct indices never share state, so replicate
/// results do not depend on scheduling order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed) + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

/// Counter-based uniform generator (SplitMix64): the state is a plain
/// counter and every output is a hash of it, so sequences are reproducible
/// bit-for-bit on any platform. All samplers below are implemented in-tree
/// for the same reason; std::* distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : counter_(seed) {}

  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(derive_seed(seed, stream));
  }

  std::uint64_t next_u64() {
    counter_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = counter_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    // Multiply-shift; bias is < 2^-64 * n, negligible for n << 2^64.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal via Box-Muller (second draw cached).
  double next_normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = 1.0 - next_double();  // (0, 1]
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * kPi * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  /// Poisson draw: sequential inversion below kInversionCutoff, Hormann's
  /// PTRS transformed rejection above it.
  std::int64_t next_poisson(double mu) {
    if (mu < 0.0 || !std::isfinite(mu)) {
      throw DomainError("poisson rate must be finite and non-negative");
    }
    if (mu == 0.0) return 0;
    if (mu < kInversionCutoff) return poisson_inversion(mu);
    return poisson_ptrs(mu);
  }

 private:
  static constexpr double kPi = 3.141592653589793238462643383279502884;
  static constexpr double kInversionCutoff = 30.0;

  std::int64_t poisson_inversion(double mu) {
    double p = std::exp(-mu);
    double s = p;
    double u = next_double();
    std::int64_t k = 0;
    while (u > s) {
      ++k;
      p *= mu / static_cast<double>(k);
      s += p;
      if (k > 2000) break;  // cannot happen for mu < cutoff except fp edge
    }
    return k;
  }

  std::int64_t poisson_ptrs(double mu) {
    const double log_mu = std::log(mu);
    const double b = 0.931 + 2.53 * std::sqrt(mu);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      double u = next_double() - 0.5;
      double v = next_double();
      double us = 0.5 - std::fabs(u);
      auto k = static_cast<std::int64_t>(
          std::floor((2.0 * a / us + b) * u + mu + 0.43));
      if (us >= 0.07 && v <= v_r) return k;
      if (k < 0 || (us < 0.013 && v > us)) continue;
      if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
          static_cast<double>(k) * log_mu - mu -
              std::lgamma(static_cast<double>(k) + 1.0)) {
        return k;
      }
    }
  }

  std::uint64_t counter_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace seqks

#endif  // SEQKS_RNG_HPP_

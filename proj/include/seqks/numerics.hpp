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

#ifndef SEQKS_NUMERICS_HPP_
#define SEQKS_NUMERICS_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "seqks/error.hpp"

namespace seqks {

inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

/// log(sum(exp(x_i))) with the usual max shift; -inf inputs are fine.
inline double log_sum_exp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

namespace detail {

// Regularized lower incomplete gamma by power series, for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  // Near x ~ a the terms decay like exp(-n^2 / 2x), so the iteration count
  // must scale with sqrt(x); 1e5 covers a up to ~1e9.
  for (int n = 0; n < 100000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma by Lentz continued fraction, x >= a + 1.
inline double gamma_q_cont_fraction(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw DomainError("gamma_p requires a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_cont_fraction(a, x);
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
inline double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw DomainError("gamma_q requires a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_cont_fraction(a, x);
}

/// P(X <= k) for X ~ Poisson(lambda), exact through the gamma identity.
inline double poisson_cdf(double lambda, std::int64_t k) {
  if (lambda < 0.0) throw DomainError("poisson rate must be non-negative");
  if (k < 0) return 0.0;
  if (lambda == 0.0) return 1.0;
  return gamma_q(static_cast<double>(k) + 1.0, lambda);
}

/// Grow-on-demand lookup for log(n) and log(n!) over the integer counts a
/// detector actually sees; counts past the table cap fall back to libm.
/// Not shared between threads; each detector instance owns one.
class IntLogCache {
 public:
  static constexpr std::int64_t kMaxTable = std::int64_t{1} << 21;

  double log_factorial(std::int64_t n) {
    if (n < 0) throw DomainError("negative count");
    if (n >= kMaxTable) return std::lgamma(static_cast<double>(n) + 1.0);
    ensure(n);
    return lfact_[static_cast<std::size_t>(n)];
  }

  /// log(n) for n >= 1.
  double log_int(std::int64_t n) {
    if (n < 1) throw DomainError("log_int needs n >= 1");
    if (n >= kMaxTable) return std::log(static_cast<double>(n));
    ensure(n);
    return logn_[static_cast<std::size_t>(n)];
  }

 private:
  void ensure(std::int64_t n) {
    auto need = static_cast<std::size_t>(n) + 1;
    if (need <= lfact_.size()) return;
    if (lfact_.empty()) {
      lfact_.push_back(0.0);  // log 0! = 0
      logn_.push_back(0.0);   // unused slot for n = 0
    }
    lfact_.reserve(need);
    logn_.reserve(need);
    for (std::size_t k = lfact_.size(); k < need; ++k) {
      double lk = std::log(static_cast<double>(k));
      logn_.push_back(lk);
      lfact_.push_back(lfact_[k - 1] + lk);
    }
  }

  std::vector<double> lfact_;
  std::vector<double> logn_;
};

}  // namespace seqks

#endif  // SEQKS_NUMERICS_HPP_

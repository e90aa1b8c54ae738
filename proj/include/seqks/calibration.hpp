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

#ifndef SEQKS_CALIBRATION_HPP_
#define SEQKS_CALIBRATION_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "seqks/error.hpp"
#include "seqks/numerics.hpp"
#include "seqks/parallel.hpp"
#include "seqks/rng.hpp"
#include "seqks/simulation.hpp"
#include "seqks/spectrum.hpp"

namespace seqks {

struct FalseAlarmBudget {
  std::int64_t horizon = 1;  // T
  std::size_t window = 1;    // L
  double alpha = 1.0;        // tolerated E(A_T)

  void validate() const {
    if (window < 1) throw ConfigError("window", "must be at least 1");
    if (horizon < static_cast<std::int64_t>(window)) {
      throw ConfigError("horizon", "must be at least the window size");
    }
    if (!(alpha > 0.0)) throw ConfigError("alpha", "must be positive");
  }
};

/// Smallest c_L ≥ 0 with 2·T·L·exp(−2c_L²) ≤ alpha:
/// c_L = √(max(0, log(2TL/alpha))/2).
inline double threshold_from_bound(const FalseAlarmBudget& budget) {
  budget.validate();
  double ratio = 2.0 * static_cast<double>(budget.horizon) *
                 static_cast<double>(budget.window) / budget.alpha;
  return std::sqrt(std::max(0.0, std::log(ratio)) / 2.0);
}

/// max_j |F₀(ξ_j) − F_c(ξ_j)|, the discrete total-variation analog.
inline double tv_distance(const SpectrumCdf& cdf0, const SpectrumCdf& cdfc) {
  if (cdf0.dim() != cdfc.dim()) throw DimensionError(cdf0.dim(), cdfc.dim());
  double best = 0.0;
  for (std::size_t j = 0; j < cdf0.dim(); ++j) {
    best = std::max(best, std::fabs(cdf0.cdf(j) - cdfc.cdf(j)));
  }
  return best;
}

inline double tv_distance(const Density& f0, const Density& fc) {
  return tv_distance(SpectrumCdf(f0), SpectrumCdf(fc));
}

// ---------------------------------------------------------------------------
// Power bound

/// Law of the aggregate count Σ N_k feeding the tail term.
struct WindowCountsDist {
  enum class Kind { kDeterministic, kPoisson };
  Kind kind = Kind::kDeterministic;
  double value = 0.0;  // the total itself, or the Poisson mean

  static WindowCountsDist deterministic(double total) {
    return {Kind::kDeterministic, total};
  }
  static WindowCountsDist poisson(double mean) {
    return {Kind::kPoisson, mean};
  }
};

struct PowerDiagnostics {
  double tv = 0.0;
  double c_L = 0.0;
  double required_counts = 0.0;  // (2c_L/tv)² on Σ N_k
  double prob_bound = 0.0;       // raw; can be vacuous (negative)
  double prob_bound_clamped = 0.0;
  double tail_prob = 0.0;  // P(√(Σ N_k) < 2c_L/tv)
  std::string tail_method;
};

/// 1 − 2exp(−2c_L²) − P(√(Σ N_k) < 2c_L/tv). The Poisson tail is exact via
/// the incomplete-gamma identity while the rate keeps it stable, else a
/// continuity-corrected normal approximation; the method used is recorded.
inline PowerDiagnostics power_lower_bound(double c_l, double tv,
                                          const WindowCountsDist& counts) {
  if (!(c_l > 0.0)) throw DomainError("threshold must be positive");
  if (!(tv > 0.0)) throw DomainError("power undefined at zero tv distance");
  if (tv > 1.0 + 1e-12) throw DomainError("tv distance exceeds 1");
  PowerDiagnostics d;
  d.tv = tv;
  d.c_L = c_l;
  double root = 2.0 * c_l / tv;
  d.required_counts = root * root;
  switch (counts.kind) {
    case WindowCountsDist::Kind::kDeterministic:
      d.tail_prob = counts.value < d.required_counts ? 1.0 : 0.0;
      d.tail_method = "deterministic";
      break;
    case WindowCountsDist::Kind::kPoisson: {
      if (!(counts.value >= 0.0)) throw DomainError("negative Poisson mean");
      // P(N < x) = P(N <= k) with k the largest integer strictly below x.
      double x = d.required_counts;
      auto k = static_cast<std::int64_t>(std::ceil(x)) - 1;
      if (counts.value <= 1e6) {
        d.tail_prob = poisson_cdf(counts.value, k);
        d.tail_method = "exact-poisson";
      } else {
        double z = (static_cast<double>(k) + 0.5 - counts.value) /
                   std::sqrt(counts.value);
        d.tail_prob = normal_cdf(z);
        d.tail_method = "normal-approx";
      }
      break;
    }
  }
  d.prob_bound = 1.0 - 2.0 * std::exp(-2.0 * c_l * c_l) - d.tail_prob;
  d.prob_bound_clamped = std::clamp(d.prob_bound, 0.0, 1.0);
  return d;
}

// ---------------------------------------------------------------------------
// Monte-Carlo calibration

/// Alarm convention of the detector being calibrated: the windowed KS and
/// the likelihood rules fire on stat ≥ c, the pooled KS on stat > c.
enum class AlarmComparison { kGeq, kGt };

struct McCalibrationResult {
  double threshold = 0.0;
  std::size_t pooled_steps = 0;       // statistics pooled over all replicates
  std::int64_t allowed_crossings = 0; // ⌊reps · target⌋
};

/// Simulates `reps` null streams of length `horizon`, pools every per-step
/// statistic, and returns the smallest threshold whose mean number of
/// crossings per stream is ≤ target. One sort-free selection pass; no
/// re-simulation per candidate. factory(rep) must return a fresh stateful
/// callable StreamStep -> StepOutcome; skipped steps stay out of the pool.
template <typename DetectorFactory>
McCalibrationResult calibrate_monte_carlo_full(
    const Scenario& null_scenario, std::int64_t horizon, double target,
    std::int64_t reps, std::uint64_t seed, DetectorFactory&& factory,
    AlarmComparison cmp = AlarmComparison::kGeq, unsigned threads = 0) {
  if (!(target > 0.0)) throw DomainError("calibration target must be positive");
  if (reps < 1) throw DomainError("calibration needs at least one replicate");
  if (horizon < 1) throw DomainError("calibration needs a positive horizon");
  null_scenario.validate();
  if (null_scenario.changepoint && *null_scenario.changepoint < horizon) {
    throw DomainError("calibration scenario has a changepoint in range");
  }
  if (null_scenario.changepoint_range &&
      null_scenario.changepoint_range->first < horizon) {
    throw DomainError("calibration scenario has a changepoint in range");
  }
  McCalibrationResult result;
  if (std::isinf(target)) {
    return result;  // any threshold qualifies; report the smallest
  }
  std::vector<std::vector<double>> per_rep(static_cast<std::size_t>(reps));
  parallel_for(
      static_cast<std::size_t>(reps),
      [&](std::size_t rep) {
        ScenarioStream stream(null_scenario,
                              Rng::substream(seed, static_cast<std::uint64_t>(rep)));
        auto det = factory(rep);
        auto& stats = per_rep[rep];
        stats.reserve(static_cast<std::size_t>(horizon));
        for (std::int64_t t = 1; t <= horizon; ++t) {
          StepOutcome out = det(stream.next());
          if (!out.skipped) stats.push_back(out.w_stat);
        }
      },
      threads);
  std::vector<double> pooled;
  for (auto& v : per_rep) {
    pooled.insert(pooled.end(), v.begin(), v.end());
    v.clear();
    v.shrink_to_fit();
  }
  result.pooled_steps = pooled.size();
  auto kmax = static_cast<std::int64_t>(
      std::floor(static_cast<double>(reps) * target + 1e-9));
  result.allowed_crossings = kmax;
  if (kmax >= static_cast<std::int64_t>(pooled.size())) {
    return result;  // even threshold 0 stays within budget
  }
  auto nth = pooled.begin() + kmax;
  std::nth_element(pooled.begin(), nth, pooled.end(), std::greater<>());
  double boundary = *nth;  // the (kmax+1)-th largest statistic
  result.threshold = cmp == AlarmComparison::kGeq
                         ? std::nextafter(boundary,
                                          std::numeric_limits<double>::infinity())
                         : boundary;
  return result;
}

template <typename DetectorFactory>
double calibrate_monte_carlo(const Scenario& null_scenario,
                             std::int64_t horizon, double target,
                             std::int64_t reps, std::uint64_t seed,
                             DetectorFactory&& factory,
                             AlarmComparison cmp = AlarmComparison::kGeq,
                             unsigned threads = 0) {
  return calibrate_monte_carlo_full(null_scenario, horizon, target, reps, seed,
                                    std::forward<DetectorFactory>(factory), cmp,
                                    threads)
      .threshold;
}

}  // namespace seqks

#endif  // SEQKS_CALIBRATION_HPP_

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

#ifndef SEQKS_SIMULATION_HPP_
#define SEQKS_SIMULATION_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seqks/baselines.hpp"
#include "seqks/detector.hpp"
#include "seqks/error.hpp"
#include "seqks/numerics.hpp"
#include "seqks/rng.hpp"
#include "seqks/spectrum.hpp"

namespace seqks {

// ---------------------------------------------------------------------------
// Densities and generators

struct GaussianComponent {
  double weight = 1.0;
  double mean = 0.0;
  double sd = 1.0;
};

/// Analytic mixture of normals; drives the raw-sample mode.
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<GaussianComponent> components)
      : comps_(std::move(components)) {
    if (comps_.empty()) throw ConfigError("components", "needs at least one");
    double total = 0.0;
    for (const auto& c : comps_) {
      if (!(c.weight >= 0.0)) throw ConfigError("weight", "must be non-negative");
      if (!(c.sd > 0.0)) throw ConfigError("sd", "must be positive");
      total += c.weight;
    }
    if (!(total > 0.0)) throw ConfigError("weight", "weights sum to zero");
    cum_.reserve(comps_.size());
    double run = 0.0;
    for (auto& c : comps_) {
      c.weight /= total;
      run += c.weight;
      cum_.push_back(run);
    }
    cum_.back() = 1.0;
  }

  const std::vector<GaussianComponent>& components() const { return comps_; }

  double cdf(double y) const {
    double v = 0.0;
    for (const auto& c : comps_) {
      v += c.weight * normal_cdf((y - c.mean) / c.sd);
    }
    return v;
  }

  double pdf(double y) const {
    double v = 0.0;
    for (const auto& c : comps_) {
      double z = (y - c.mean) / c.sd;
      v += c.weight * std::exp(-0.5 * z * z) /
           (c.sd * std::sqrt(2.0 * 3.14159265358979323846));
    }
    return v;
  }

  double sample(Rng& rng) const {
    double u = rng.next_double();
    auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    std::size_t i = std::min<std::size_t>(
        static_cast<std::size_t>(it - cum_.begin()), comps_.size() - 1);
    return comps_[i].mean + comps_[i].sd * rng.next_normal();
  }

 private:
  std::vector<GaussianComponent> comps_;
  std::vector<double> cum_;
};

/// Bins the mixture CDF into D equal-width channels over [lo, hi]; mass
/// outside the support folds into the edge bins, so weights sum to 1 exactly.
inline Density gaussian_mixture_density(const GaussianMixture& mix,
                                        std::size_t bins, double lo,
                                        double hi) {
  if (bins < 2) throw ConfigError("bins", "needs at least 2");
  if (!(hi > lo)) throw ConfigError("support", "needs hi > lo");
  std::vector<double> w(bins);
  const double width = (hi - lo) / static_cast<double>(bins);
  double prev = 0.0;  // left edge of bin 0 extends to -inf
  for (std::size_t j = 0; j + 1 < bins; ++j) {
    double edge = lo + width * static_cast<double>(j + 1);
    double c = mix.cdf(edge);
    w[j] = std::max(0.0, c - prev);
    prev = c;
  }
  w[bins - 1] = std::max(0.0, 1.0 - prev);  // right edge extends to +inf
  return Density(std::move(w));
}

inline Density gaussian_mixture_density(
    const std::vector<GaussianComponent>& components, std::size_t bins,
    double lo, double hi) {
  return gaussian_mixture_density(GaussianMixture(components), bins, lo, hi);
}

/// Per-event inverse-CDF sampler for Multinomial(N, weights).
class MultinomialSampler {
 public:
  explicit MultinomialSampler(const Density& d)
      : cum_(d.values().begin(), d.values().end()) {
    double run = 0.0;
    for (double& c : cum_) {
      run += c;
      c = run;
    }
    cum_.back() = 1.0;
  }

  void sample_into(std::int64_t n, Rng& rng,
                   std::vector<std::int64_t>& out) const {
    out.assign(cum_.size(), 0);
    for (std::int64_t i = 0; i < n; ++i) {
      double u = rng.next_double();
      auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
      std::size_t j = std::min<std::size_t>(
          static_cast<std::size_t>(it - cum_.begin()), cum_.size() - 1);
      ++out[j];
    }
  }

  CountVector sample(std::int64_t n, Rng& rng) const {
    std::vector<std::int64_t> out;
    sample_into(n, rng, out);
    return CountVector(std::move(out));
  }

 private:
  std::vector<double> cum_;
};

/// N_t ∼ Poisson(μ), then x_t ∼ Multinomial(N_t, weights).
inline CountVector sample_counts(const Density& d, double mu, Rng& rng) {
  if (!(mu > 0.0)) throw DomainError("mu must be positive");
  std::int64_t n = rng.next_poisson(mu);
  return MultinomialSampler(d).sample(n, rng);
}

// ---------------------------------------------------------------------------
// Source physics

struct SourceSpec {
  double strength_mci = 1.0;   // source activity, milliCuries
  double distance_m = 1.0;     // meters
  double background_rate = 1.0;  // λ₀, counts per step
  Density anomaly_density;     // f_A

  void validate() const {
    if (!(strength_mci > 0.0)) throw ConfigError("strength_mci", "must be positive");
    if (!(distance_m > 0.0)) throw ConfigError("distance_m", "must be positive");
    if (!(background_rate > 0.0)) {
      throw ConfigError("background_rate", "must be positive");
    }
  }
};

/// Count rate of a source of the given activity at distance d:
/// (mCi/0.000844) · 630 · (0.05/d)² · exp(−0.0100029·(d + 0.05)).
inline double source_rate(double strength_mci, double distance_m) {
  if (!(distance_m > 0.0)) throw DomainError("distance must be positive");
  double geometry = (0.05 / distance_m) * (0.05 / distance_m);
  return (strength_mci / 0.000844) * 630.0 * geometry *
         std::exp(-0.0100029 * (distance_m + 0.05));
}

inline double source_rate(const SourceSpec& spec) {
  spec.validate();
  return source_rate(spec.strength_mci, spec.distance_m);
}

/// Background fraction of the post-change mixture: λ₀/(λ₀ + λ_source).
inline double anomaly_weight(double lambda0, double lambda_source) {
  if (!(lambda0 > 0.0)) throw DomainError("lambda0 must be positive");
  if (lambda_source < 0.0) throw DomainError("lambda_source must be non-negative");
  return lambda0 / (lambda0 + lambda_source);
}

// ---------------------------------------------------------------------------
// Scenarios

enum class StreamMode { kBinned, kRaw };

/// One synthetic stream: f_t = pre for t ≤ v, post for t > v.
struct Scenario {
  Density pre;
  Density post;
  std::optional<std::int64_t> changepoint;  // v; none means no change
  std::optional<std::pair<std::int64_t, std::int64_t>> changepoint_range;
  double mu = 1.0;            // E(N_t)
  bool fixed_counts = false;  // N_t = round(mu) instead of Poisson
  std::int64_t horizon = 1;   // T
  StreamMode mode = StreamMode::kBinned;
  std::optional<GaussianMixture> pre_raw;   // raw-sample generators
  std::optional<GaussianMixture> post_raw;
  double support_lo = 0.0;  // binning interval for raw mode
  double support_hi = 0.0;

  void validate() const {
    if (pre.dim() == 0) throw ConfigError("pre", "missing density");
    if (post.dim() != pre.dim()) throw ConfigError("post", "dimension mismatch");
    if (!(mu > 0.0)) throw ConfigError("mu", "must be positive");
    if (horizon < 1) throw ConfigError("horizon", "must be at least 1");
    if (changepoint && *changepoint >= horizon) {
      throw ConfigError("changepoint", "must be before the horizon");
    }
    if (changepoint && *changepoint < 0) {
      throw ConfigError("changepoint", "must be non-negative");
    }
    if (changepoint_range) {
      auto [lo, hi] = *changepoint_range;
      if (lo < 0 || hi < lo || hi >= horizon) {
        throw ConfigError("changepoint_range", "needs 0 <= lo <= hi < horizon");
      }
    }
    if (mode == StreamMode::kRaw) {
      if (!pre_raw || !post_raw) {
        throw ConfigError("mode", "raw mode needs analytic generators");
      }
      if (!(support_hi > support_lo)) {
        throw ConfigError("support", "raw mode needs hi > lo");
      }
    }
  }
};

/// Data generated for one time step. Raw mode fills all three views from the
/// same draws; binned mode fills counts only.
struct StreamStep {
  std::int64_t t = 0;
  CountVector counts;
  RawSampleBatch raw;
  MeanObservation mean_obs;
};

/// Sequential generator for a scenario. The changepoint (fixed or drawn from
/// the configured range) is resolved up front so the draw order is stable.
class ScenarioStream {
 public:
  ScenarioStream(const Scenario& s, Rng rng)
      : scenario_(&s),
        rng_(rng),
        pre_sampler_(s.pre),
        post_sampler_(s.post) {
    s.validate();
    if (s.changepoint_range) {
      auto [lo, hi] = *s.changepoint_range;
      v_ = lo + static_cast<std::int64_t>(
                    rng_.next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    } else if (s.changepoint) {
      v_ = *s.changepoint;
    } else {
      v_ = std::numeric_limits<std::int64_t>::max();  // never switches
    }
  }

  /// Resolved v; int64 max when the scenario never changes.
  std::int64_t changepoint() const { return v_; }
  std::int64_t t() const { return t_; }

  StreamStep next() {
    ++t_;
    StreamStep step;
    step.t = t_;
    const bool post = t_ > v_;
    std::int64_t n = scenario_->fixed_counts
                         ? std::llround(scenario_->mu)
                         : rng_.next_poisson(scenario_->mu);
    if (scenario_->mode == StreamMode::kBinned) {
      const MultinomialSampler& sampler = post ? post_sampler_ : pre_sampler_;
      sampler.sample_into(n, rng_, scratch_counts_);
      step.counts = CountVector(scratch_counts_);
    } else {
      const GaussianMixture& mix =
          post ? *scenario_->post_raw : *scenario_->pre_raw;
      step.raw.values.resize(static_cast<std::size_t>(n));
      const std::size_t bins = scenario_->pre.dim();
      const double lo = scenario_->support_lo;
      const double width =
          (scenario_->support_hi - lo) / static_cast<double>(bins);
      scratch_counts_.assign(bins, 0);
      double sum = 0.0;
      for (auto& y : step.raw.values) {
        y = mix.sample(rng_);
        sum += y;
        auto j = static_cast<std::int64_t>(std::floor((y - lo) / width));
        j = std::clamp<std::int64_t>(j, 0, static_cast<std::int64_t>(bins) - 1);
        ++scratch_counts_[static_cast<std::size_t>(j)];
      }
      step.counts = CountVector(scratch_counts_);
      step.mean_obs.n = n;
      step.mean_obs.mean = n > 0 ? sum / static_cast<double>(n) : 0.0;
    }
    return step;
  }

 private:
  const Scenario* scenario_;
  Rng rng_;
  MultinomialSampler pre_sampler_;
  MultinomialSampler post_sampler_;
  std::int64_t v_ = 0;
  std::int64_t t_ = 0;
  std::vector<std::int64_t> scratch_counts_;
};

// ---------------------------------------------------------------------------
// Scenario runner

/// A detector bound to a name, fed one StreamStep at a time.
struct DetectorHandle {
  std::string name;
  std::function<StepOutcome(const StreamStep&)> step;
};

struct DelayRecord {
  std::string detector;
  std::int64_t replicate = 0;
  std::int64_t changepoint = 0;
  std::int64_t horizon = 0;
  std::optional<std::int64_t> detection_time;  // first alarm with t > v
  std::int64_t false_alarms = 0;               // alarms with t <= v
  bool censored = false;
  std::int64_t delay = 0;  // τ − v, or horizon − v when censored
};

/// Streams one replicate through every detector on identical data. Stops
/// early once every detector has raised a post-change alarm.
inline std::vector<DelayRecord> run_scenario(
    const Scenario& s, std::vector<DetectorHandle>& detectors,
    std::uint64_t seed, std::int64_t replicate = 0) {
  s.validate();
  if (detectors.empty()) throw ConfigError("detectors", "none configured");
  ScenarioStream stream(s, Rng(seed));
  const std::int64_t v = stream.changepoint();
  // Delay accounting for a never-changing stream treats the horizon as v.
  const std::int64_t v_acct = std::min(v, s.horizon);
  std::vector<DelayRecord> records(detectors.size());
  for (std::size_t i = 0; i < detectors.size(); ++i) {
    records[i].detector = detectors[i].name;
    records[i].replicate = replicate;
    records[i].changepoint = v_acct;
    records[i].horizon = s.horizon;
  }
  std::size_t undetected = detectors.size();
  for (std::int64_t t = 1; t <= s.horizon && undetected > 0; ++t) {
    StreamStep step = stream.next();
    for (std::size_t i = 0; i < detectors.size(); ++i) {
      if (records[i].detection_time) continue;
      StepOutcome out = detectors[i].step(step);
      if (!out.alarm) continue;
      if (t <= v) {
        ++records[i].false_alarms;
      } else {
        records[i].detection_time = t;
        --undetected;
      }
    }
  }
  for (auto& r : records) {
    if (r.detection_time) {
      r.delay = *r.detection_time - v_acct;
    } else {
      r.censored = true;
      r.delay = s.horizon - v_acct;
    }
  }
  return records;
}

enum class CensorPolicy { kCensorAtHorizon, kExcludeCensored };

inline std::string_view censor_policy_name(CensorPolicy p) {
  switch (p) {
    case CensorPolicy::kCensorAtHorizon:
      return "censor-at-horizon";
    case CensorPolicy::kExcludeCensored:
      return "exclude-censored";
  }
  return "unknown";
}

struct DelaySummary {
  std::string detector;
  std::size_t reps = 0;
  double mean_delay = 0.0;
  double detection_fraction = 0.0;
  double mean_false_alarms = 0.0;
  std::size_t censored = 0;
  CensorPolicy policy = CensorPolicy::kCensorAtHorizon;
};

/// Mean delay over replicates of one detector; censored runs enter at
/// horizon − v (flagged) or drop out, per the declared policy.
inline DelaySummary average_detection_delay(
    std::span<const DelayRecord> records,
    CensorPolicy policy = CensorPolicy::kCensorAtHorizon) {
  if (records.empty()) throw DomainError("no delay records");
  DelaySummary s;
  s.detector = records.front().detector;
  s.policy = policy;
  s.reps = records.size();
  double delay_sum = 0.0;
  std::size_t delay_n = 0;
  std::size_t detected = 0;
  double fa_sum = 0.0;
  for (const auto& r : records) {
    if (r.detector != s.detector) {
      throw DomainError("records mix detectors");
    }
    fa_sum += static_cast<double>(r.false_alarms);
    if (r.censored) {
      ++s.censored;
      if (policy == CensorPolicy::kCensorAtHorizon) {
        delay_sum += static_cast<double>(r.delay);
        ++delay_n;
      }
    } else {
      ++detected;
      delay_sum += static_cast<double>(r.delay);
      ++delay_n;
    }
  }
  s.detection_fraction =
      static_cast<double>(detected) / static_cast<double>(records.size());
  s.mean_false_alarms = fa_sum / static_cast<double>(records.size());
  s.mean_delay = delay_n > 0
                     ? delay_sum / static_cast<double>(delay_n)
                     : std::numeric_limits<double>::quiet_NaN();
  return s;
}

}  // namespace seqks

#endif  // SEQKS_SIMULATION_HPP_

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

#ifndef SEQKS_BASELINES_HPP_
#define SEQKS_BASELINES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "seqks/detector.hpp"
#include "seqks/error.hpp"
#include "seqks/ks.hpp"
#include "seqks/numerics.hpp"
#include "seqks/spectrum.hpp"

namespace seqks {

// ---------------------------------------------------------------------------
// Pooled KS

/// Cumulative per-bin counts since t = 1.
class PooledState {
 public:
  explicit PooledState(std::size_t dim) : cum_(dim, 0) {}

  std::size_t dim() const { return cum_.size(); }
  std::int64_t t() const { return t_; }
  std::int64_t total() const { return total_; }
  std::span<const std::int64_t> cumulative() const { return cum_; }

  void add(std::span<const std::int64_t> x) {
    if (x.size() != cum_.size()) throw DimensionError(cum_.size(), x.size());
    ++t_;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] < 0) throw DomainError("counts must be non-negative");
      cum_[j] += x[j];
      total_ += x[j];
    }
  }

  void reset() {
    t_ = 0;
    total_ = 0;
    std::fill(cum_.begin(), cum_.end(), 0);
  }

 private:
  std::vector<std::int64_t> cum_;
  std::int64_t total_ = 0;
  std::int64_t t_ = 0;
};

/// κ_t = (Σ_{k≤t} N_k) · max_j |F⁰(j) − F̂_{1:t}(j)|. The multiplier is the
/// raw pooled total, not its square root. Alarm on strict κ_t > c.
inline StepOutcome pooled_ks_step(PooledState& state, const SpectrumCdf& cdf0,
                                  const CountVector& x, double c) {
  if (cdf0.dim() != state.dim()) throw DimensionError(state.dim(), cdf0.dim());
  state.add(x.values());
  StepOutcome out;
  out.t = state.t();
  out.argmax_start = 1;
  if (state.total() == 0) {
    out.skipped = true;
    return out;
  }
  std::size_t jstar = 0;
  double gap = detail::max_cdf_gap(cdf0.cdf_values(), state.cumulative(),
                                   state.total(), &jstar);
  out.w_stat = static_cast<double>(state.total()) * gap;
  out.argmax_bin = jstar;
  out.alarm = out.w_stat > c;
  return out;
}

class PooledKsDetector {
 public:
  PooledKsDetector(SpectrumCdf cdf0, double threshold)
      : cdf0_(std::move(cdf0)), threshold_(threshold), state_(cdf0_.dim()) {}

  StepOutcome step(const CountVector& x) {
    return pooled_ks_step(state_, cdf0_, x, threshold_);
  }

  const PooledState& state() const { return state_; }
  double threshold() const { return threshold_; }
  void reset() { state_.reset(); }

 private:
  SpectrumCdf cdf0_;
  double threshold_;
  PooledState state_;
};

// ---------------------------------------------------------------------------
// Poisson nulls

/// Per-channel baseline rates. Channels with zero rate take no part in the
/// likelihood ratios; callers can surface excluded_channels() as a warning.
class PoissonNull {
 public:
  explicit PoissonNull(std::vector<double> rates) : rates_(std::move(rates)) {
    if (rates_.empty()) throw ConfigError("rates", "needs at least one channel");
    for (std::size_t j = 0; j < rates_.size(); ++j) {
      double r = rates_[j];
      if (!(r >= 0.0) || !std::isfinite(r)) {
        throw ConfigError("rates", "must be finite and non-negative");
      }
      if (r > 0.0) {
        active_.push_back(j);
        log_rates_.push_back(std::log(r));
        active_rate_sum_ += r;
      }
    }
    if (active_.empty()) throw ConfigError("rates", "all channels have rate zero");
  }

  std::size_t dim() const { return rates_.size(); }
  std::span<const double> rates() const { return rates_; }
  std::span<const std::size_t> active() const { return active_; }
  std::size_t excluded_channels() const { return rates_.size() - active_.size(); }
  double active_rate_sum() const { return active_rate_sum_; }

  /// log rate of the i-th active channel.
  double log_rate_of_active(std::size_t i) const { return log_rates_[i]; }

 private:
  std::vector<double> rates_;
  std::vector<std::size_t> active_;
  std::vector<double> log_rates_;
  double active_rate_sum_ = 0.0;
};

namespace detail {

inline double lfact_of(IntLogCache* cache, std::int64_t n) {
  return cache != nullptr ? cache->log_factorial(n)
                          : std::lgamma(static_cast<double>(n) + 1.0);
}

inline double log_of(IntLogCache* cache, std::int64_t n) {
  return cache != nullptr ? cache->log_int(n)
                          : std::log(static_cast<double>(n));
}

struct PoissonSweepScratch {
  std::vector<std::int64_t> suffix;  // per-channel sums over s..t
  std::vector<double> per_start;     // one value per window start
};

/// Bayes factor exponent for one start: the gamma(1,1) marginal against the
/// null, channels factorized, all in log space.
/// log BF = Σ_j lgamma(S_j + 1) − (S_j + 1)·log(m + 1) + m·λ⁰_j − S_j·log λ⁰_j.
inline void ef_poisson_sweep(std::span<const CountVector> window,
                             const PoissonNull& null, IntLogCache* cache,
                             PoissonSweepScratch& scratch) {
  if (window.empty()) throw EmptyWindowError();
  const auto active = null.active();
  scratch.suffix.assign(active.size(), 0);
  scratch.per_start.clear();
  std::int64_t s_total = 0;
  double dot = 0.0;  // Σ_j S_j · log λ⁰_j, additive over steps
  double m = 0.0;
  for (std::size_t back = 0; back < window.size(); ++back) {
    const CountVector& x = window[window.size() - 1 - back];
    if (x.dim() != null.dim()) throw DimensionError(null.dim(), x.dim());
    m += 1.0;
    double lfact_sum = 0.0;
    for (std::size_t i = 0; i < active.size(); ++i) {
      std::int64_t c = x[active[i]];
      scratch.suffix[i] += c;
      s_total += c;
      dot += static_cast<double>(c) * null.log_rate_of_active(i);
      lfact_sum += lfact_of(cache, scratch.suffix[i]);
    }
    double log_bf = lfact_sum -
                    (static_cast<double>(s_total) +
                     static_cast<double>(active.size())) *
                        std::log(m + 1.0) +
                    m * null.active_rate_sum() - dot;
    scratch.per_start.push_back(log_bf);
  }
}

/// GLR exponent for one start, channel-wise MLE λ̂_j = S_j / m:
/// Σ_j S_j·(log S_j − log m − log λ⁰_j) − S_total + m·Σ_j λ⁰_j, 0·log 0 = 0.
inline void glr_poisson_sweep(std::span<const CountVector> window,
                              const PoissonNull& null, IntLogCache* cache,
                              PoissonSweepScratch& scratch) {
  if (window.empty()) throw EmptyWindowError();
  const auto active = null.active();
  scratch.suffix.assign(active.size(), 0);
  scratch.per_start.clear();
  std::int64_t s_total = 0;
  double dot = 0.0;
  double m = 0.0;
  for (std::size_t back = 0; back < window.size(); ++back) {
    const CountVector& x = window[window.size() - 1 - back];
    if (x.dim() != null.dim()) throw DimensionError(null.dim(), x.dim());
    m += 1.0;
    double slogs = 0.0;  // Σ_j S_j log S_j
    for (std::size_t i = 0; i < active.size(); ++i) {
      std::int64_t c = x[active[i]];
      scratch.suffix[i] += c;
      s_total += c;
      dot += static_cast<double>(c) * null.log_rate_of_active(i);
      if (scratch.suffix[i] > 0) {
        slogs += static_cast<double>(scratch.suffix[i]) *
                 log_of(cache, scratch.suffix[i]);
      }
    }
    double stat = slogs - static_cast<double>(s_total) * std::log(m) - dot -
                  static_cast<double>(s_total) + m * null.active_rate_sum();
    scratch.per_start.push_back(stat);
  }
}

/// Index into per_start (back order: 0 is start t) of the max, ties to the
/// smallest start s, meaning the largest back index.
inline std::size_t argmax_smallest_start(std::span<const double> per_start) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < per_start.size(); ++i) {
    if (per_start[i] >= per_start[best]) best = i;
  }
  return best;
}

}  // namespace detail

/// Σ_s BF(s, t) over window starts, log-sum-exp guarded; clamps at the
/// largest finite exponent so finite inputs never map to non-finite output.
inline StepOutcome ef_poisson_step(std::span<const CountVector> window,
                                   const PoissonNull& null, double c,
                                   IntLogCache* cache = nullptr) {
  detail::PoissonSweepScratch scratch;
  detail::ef_poisson_sweep(window, null, cache, scratch);
  StepOutcome out;
  out.t = static_cast<std::int64_t>(window.size());
  double lse = log_sum_exp(scratch.per_start);
  out.w_stat = std::exp(std::min(lse, 709.0));
  out.alarm = out.w_stat >= c;
  std::size_t back = detail::argmax_smallest_start(scratch.per_start);
  out.argmax_start = out.t - static_cast<std::int64_t>(back);
  return out;
}

/// max over window starts of the channel-factorized Poisson GLR.
inline StepOutcome glr_poisson_step(std::span<const CountVector> window,
                                    const PoissonNull& null, double c,
                                    IntLogCache* cache = nullptr) {
  detail::PoissonSweepScratch scratch;
  detail::glr_poisson_sweep(window, null, cache, scratch);
  StepOutcome out;
  out.t = static_cast<std::int64_t>(window.size());
  std::size_t back = detail::argmax_smallest_start(scratch.per_start);
  out.w_stat = std::max(0.0, scratch.per_start[back]);
  out.alarm = out.w_stat >= c;
  out.argmax_start = out.t - static_cast<std::int64_t>(back);
  return out;
}

namespace detail {

/// Ring shared by the windowed count baselines: keeps the last L vectors in
/// arrival order as a contiguous span.
class CountVectorWindow {
 public:
  CountVectorWindow(std::size_t dim, std::size_t window)
      : dim_(dim), window_(window) {
    if (window_ < 1) throw ConfigError("window", "must be at least 1");
    win_.reserve(window_);
  }

  void push(const CountVector& x) {
    if (x.dim() != dim_) throw DimensionError(dim_, x.dim());
    ++t_;
    if (win_.size() == window_) {
      win_.erase(win_.begin());
    }
    win_.push_back(x);
  }

  std::span<const CountVector> view() const { return win_; }
  std::int64_t t() const { return t_; }

  void reset() {
    t_ = 0;
    win_.clear();
  }

 private:
  std::size_t dim_;
  std::size_t window_;
  std::int64_t t_ = 0;
  std::vector<CountVector> win_;
};

}  // namespace detail

class EfPoissonDetector {
 public:
  EfPoissonDetector(PoissonNull null, std::size_t window, double threshold)
      : null_(std::move(null)),
        threshold_(threshold),
        ring_(null_.dim(), window) {}

  StepOutcome step(const CountVector& x) {
    ring_.push(x);
    detail::ef_poisson_sweep(ring_.view(), null_, &cache_, scratch_);
    StepOutcome out;
    out.t = ring_.t();
    double lse = log_sum_exp(scratch_.per_start);
    out.w_stat = std::exp(std::min(lse, 709.0));
    out.alarm = out.w_stat >= threshold_;
    std::size_t back = detail::argmax_smallest_start(scratch_.per_start);
    out.argmax_start = out.t - static_cast<std::int64_t>(back);
    return out;
  }

  const PoissonNull& null() const { return null_; }
  double threshold() const { return threshold_; }
  void reset() { ring_.reset(); }

 private:
  PoissonNull null_;
  double threshold_;
  detail::CountVectorWindow ring_;
  IntLogCache cache_;
  detail::PoissonSweepScratch scratch_;
};

class GlrPoissonDetector {
 public:
  GlrPoissonDetector(PoissonNull null, std::size_t window, double threshold)
      : null_(std::move(null)),
        threshold_(threshold),
        ring_(null_.dim(), window) {}

  StepOutcome step(const CountVector& x) {
    ring_.push(x);
    detail::glr_poisson_sweep(ring_.view(), null_, &cache_, scratch_);
    StepOutcome out;
    out.t = ring_.t();
    std::size_t back = detail::argmax_smallest_start(scratch_.per_start);
    out.w_stat = std::max(0.0, scratch_.per_start[back]);
    out.alarm = out.w_stat >= threshold_;
    out.argmax_start = out.t - static_cast<std::int64_t>(back);
    return out;
  }

  const PoissonNull& null() const { return null_; }
  double threshold() const { return threshold_; }
  void reset() { ring_.reset(); }

 private:
  PoissonNull null_;
  double threshold_;
  detail::CountVectorWindow ring_;
  IntLogCache cache_;
  detail::PoissonSweepScratch scratch_;
};

// ---------------------------------------------------------------------------
// Gaussian mean rules

struct GaussianNull {
  double sigma = 1.0;          // pre-change sd of one observation
  std::int64_t n_per_step = 1; // observations averaged into each ȳ_t
  double tau = 1.0;            // prior sd of the post-change mean

  void validate() const {
    if (!(sigma > 0.0)) throw ConfigError("sigma", "must be positive");
    if (!(tau > 0.0)) throw ConfigError("tau", "must be positive");
    if (n_per_step < 1) throw ConfigError("n_per_step", "must be at least 1");
  }
};

/// Per-step mean with the sample size behind it.
struct MeanObservation {
  double mean = 0.0;
  std::int64_t n = 0;
};

/// Σ_s BF(s, t), BF the conjugate-normal marginal of a N(0, τ²) prior on the
/// shifted mean: with A = Σ n_k/σ², B = Σ n_k ȳ_k/σ² over s..t,
/// log BF = −log(1 + Aτ²)/2 + B²τ²/(2(1 + Aτ²)). Steps with n = 0 carry no
/// evidence and drop out of A and B.
inline StepOutcome ef_gaussian_step(std::span<const MeanObservation> window,
                                    const GaussianNull& null, double c) {
  if (window.empty()) throw EmptyWindowError();
  null.validate();
  const double inv_var = 1.0 / (null.sigma * null.sigma);
  const double tau2 = null.tau * null.tau;
  std::vector<double> log_bf;
  log_bf.reserve(window.size());
  double a = 0.0;
  double b = 0.0;
  for (std::size_t back = 0; back < window.size(); ++back) {
    const MeanObservation& obs = window[window.size() - 1 - back];
    if (obs.n < 0) throw DomainError("sample size must be non-negative");
    if (obs.n > 0) {
      a += static_cast<double>(obs.n) * inv_var;
      b += static_cast<double>(obs.n) * obs.mean * inv_var;
    }
    double denom = 1.0 + a * tau2;
    log_bf.push_back(-0.5 * std::log(denom) + b * b * tau2 / (2.0 * denom));
  }
  StepOutcome out;
  out.t = static_cast<std::int64_t>(window.size());
  double lse = log_sum_exp(log_bf);
  out.w_stat = std::exp(std::min(lse, 709.0));
  out.alarm = out.w_stat >= c;
  std::size_t back = detail::argmax_smallest_start(log_bf);
  out.argmax_start = out.t - static_cast<std::int64_t>(back);
  return out;
}

/// max over starts of (Σ n_s ȳ_s/σ²)² / (2 Σ n_s/σ²), the shifted-mean GLR
/// with the MLE plugged in. With estimate_variance the alternative also
/// frees σ and the closed-form MSE enters; single-step windows are then
/// skipped since the variance MLE degenerates.
inline StepOutcome glr_gaussian_step(std::span<const MeanObservation> window,
                                     const GaussianNull& null, double c,
                                     bool estimate_variance = false) {
  if (window.empty()) throw EmptyWindowError();
  null.validate();
  const double sigma2 = null.sigma * null.sigma;
  const double inv_var = 1.0 / sigma2;
  StepOutcome out;
  out.t = static_cast<std::int64_t>(window.size());
  out.argmax_start = out.t;
  double sw = 0.0;    // Σ n_s/σ²
  double swy = 0.0;   // Σ n_s ȳ_s/σ²
  double sn = 0.0;    // Σ n_s
  double sny = 0.0;   // Σ n_s ȳ_s
  double snyy = 0.0;  // Σ n_s ȳ_s²
  double best = -1.0;
  bool any = false;
  for (std::size_t back = 0; back < window.size(); ++back) {
    const MeanObservation& obs = window[window.size() - 1 - back];
    if (obs.n < 0) throw DomainError("sample size must be non-negative");
    const double m = static_cast<double>(back) + 1.0;
    if (obs.n > 0) {
      double n = static_cast<double>(obs.n);
      sw += n * inv_var;
      swy += n * obs.mean * inv_var;
      sn += n;
      sny += n * obs.mean;
      snyy += n * obs.mean * obs.mean;
    }
    double stat;
    if (!estimate_variance) {
      if (sw <= 0.0) continue;
      stat = swy * swy / (2.0 * sw);
    } else {
      if (back == 0 || sn <= 0.0) continue;
      double mse = (snyy - sny * sny / sn) / m;
      if (!(mse > 0.0)) continue;
      stat = 0.5 * m * std::log(sigma2 / mse) - 0.5 * m + snyy / (2.0 * sigma2);
    }
    if (stat >= best) {
      best = stat;
      out.argmax_start = out.t - static_cast<std::int64_t>(back);
      any = true;
    }
  }
  if (!any) {
    out.skipped = true;
    return out;
  }
  out.w_stat = std::max(0.0, best);
  out.alarm = out.w_stat >= c;
  return out;
}

namespace detail {

class MeanWindow {
 public:
  explicit MeanWindow(std::size_t window) : window_(window) {
    if (window_ < 1) throw ConfigError("window", "must be at least 1");
    win_.reserve(window_);
  }

  void push(MeanObservation obs) {
    ++t_;
    if (win_.size() == window_) win_.erase(win_.begin());
    win_.push_back(obs);
  }

  std::span<const MeanObservation> view() const { return win_; }
  std::int64_t t() const { return t_; }

  void reset() {
    t_ = 0;
    win_.clear();
  }

 private:
  std::size_t window_;
  std::int64_t t_ = 0;
  std::vector<MeanObservation> win_;
};

}  // namespace detail

class EfGaussianDetector {
 public:
  EfGaussianDetector(GaussianNull null, std::size_t window, double threshold)
      : null_(null), threshold_(threshold), ring_(window) {
    null_.validate();
  }

  StepOutcome step(MeanObservation obs) {
    ring_.push(obs);
    StepOutcome out = ef_gaussian_step(ring_.view(), null_, threshold_);
    out.t = ring_.t();
    out.argmax_start += ring_.t() - static_cast<std::int64_t>(ring_.view().size());
    return out;
  }

  const GaussianNull& null() const { return null_; }
  double threshold() const { return threshold_; }
  void reset() { ring_.reset(); }

 private:
  GaussianNull null_;
  double threshold_;
  detail::MeanWindow ring_;
};

class GlrGaussianDetector {
 public:
  GlrGaussianDetector(GaussianNull null, std::size_t window, double threshold,
                      bool estimate_variance = false)
      : null_(null),
        threshold_(threshold),
        estimate_variance_(estimate_variance),
        ring_(window) {
    null_.validate();
  }

  StepOutcome step(MeanObservation obs) {
    ring_.push(obs);
    StepOutcome out =
        glr_gaussian_step(ring_.view(), null_, threshold_, estimate_variance_);
    out.t = ring_.t();
    out.argmax_start += ring_.t() - static_cast<std::int64_t>(ring_.view().size());
    return out;
  }

  const GaussianNull& null() const { return null_; }
  double threshold() const { return threshold_; }
  void reset() { ring_.reset(); }

 private:
  GaussianNull null_;
  double threshold_;
  bool estimate_variance_;
  detail::MeanWindow ring_;
};

}  // namespace seqks

#endif  // SEQKS_BASELINES_HPP_

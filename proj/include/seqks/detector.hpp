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

#ifndef SEQKS_DETECTOR_HPP_
#define SEQKS_DETECTOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "seqks/error.hpp"
#include "seqks/ks.hpp"
#include "seqks/spectrum.hpp"

namespace seqks {

enum class DetectorMode { kBinned, kRawSample };

struct DetectorConfig {
  std::size_t window = 1;  // L
  double threshold = 1.0;  // c_L
  DetectorMode mode = DetectorMode::kBinned;

  void validate() const {
    if (window < 1) throw ConfigError("window", "must be at least 1");
    if (!(threshold > 0.0) || !std::isfinite(threshold)) {
      throw ConfigError("threshold", "must be positive and finite");
    }
  }
};

struct StepOutcome {
  std::int64_t t = 0;
  double w_stat = 0.0;
  bool alarm = false;
  std::int64_t argmax_start = 0;
  std::size_t argmax_bin = 0;
  bool skipped = false;
};

/// Ring of the last L count vectors plus the scratch accumulators that give
/// every per-window statistic in one O(L·D) sweep. Owns the reference CDF.
/// Not safe for concurrent mutation; cheap to move between threads.
class WindowState {
 public:
  WindowState(SpectrumCdf cdf0, std::size_t window)
      : cdf0_(std::move(cdf0)),
        window_(window),
        rows_(window * cdf0_.dim(), 0),
        row_totals_(window, 0),
        scratch_(cdf0_.dim(), 0) {
    if (window_ < 1) throw ConfigError("window", "must be at least 1");
    if (cdf0_.dim() == 0) throw ConfigError("reference", "needs bins");
  }

  std::size_t dim() const { return cdf0_.dim(); }
  std::size_t window() const { return window_; }
  std::int64_t t() const { return t_; }
  const SpectrumCdf& reference() const { return cdf0_; }

  /// Steps currently retained: min(t, L).
  std::size_t retained() const {
    return static_cast<std::size_t>(
        std::min<std::int64_t>(t_, static_cast<std::int64_t>(window_)));
  }

  /// Oldest time index still in the ring.
  std::int64_t min_time() const {
    return t_ - static_cast<std::int64_t>(retained()) + 1;
  }

  /// Counts recorded at time s; s must still be retained.
  std::span<const std::int64_t> counts_at(std::int64_t s) const {
    check_retained(s);
    return row(slot(s));
  }

  std::int64_t total_at(std::int64_t s) const {
    check_retained(s);
    return row_totals_[slot(s)];
  }

  void reset() {
    t_ = 0;
    std::fill(rows_.begin(), rows_.end(), 0);
    std::fill(row_totals_.begin(), row_totals_.end(), 0);
  }

  /// Appends x, evicts the entry from L steps ago, and evaluates
  /// W_t = max_s Δ_{s:t} over the retained starts. Empty windows are left
  /// out of the max; ties prefer the smallest s, then the smallest bin.
  StepOutcome step(const DetectorConfig& cfg, std::span<const std::int64_t> x) {
    cfg.validate();
    if (cfg.window != window_) {
      throw ConfigError("window", "does not match detector state");
    }
    push(x);
    StepOutcome out;
    out.t = t_;
    out.skipped = true;
    out.argmax_start = t_;
    std::fill(scratch_.begin(), scratch_.end(), 0);
    std::int64_t total = 0;
    double best = -1.0;
    const auto ref = cdf0_.cdf_values();
    const std::size_t n = retained();
    for (std::size_t back = 0; back < n; ++back) {
      const std::int64_t s = t_ - static_cast<std::int64_t>(back);
      const auto r = row(slot(s));
      for (std::size_t j = 0; j < scratch_.size(); ++j) scratch_[j] += r[j];
      total += row_totals_[slot(s)];
      if (total == 0) continue;
      std::size_t jstar = 0;
      double gap = detail::max_cdf_gap(ref, scratch_, total, &jstar);
      double delta = std::sqrt(static_cast<double>(total)) * gap;
      if (delta >= best) {
        best = delta;
        out.argmax_start = s;
        out.argmax_bin = jstar;
      }
    }
    if (best >= 0.0) {
      out.skipped = false;
      out.w_stat = best;
      out.alarm = out.w_stat >= cfg.threshold;
    }
    return out;
  }

 private:
  void push(std::span<const std::int64_t> x) {
    if (x.size() != dim()) throw DimensionError(dim(), x.size());
    ++t_;
    auto dst = row(slot(t_));
    std::int64_t total = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] < 0) throw DomainError("counts must be non-negative");
      dst[j] = x[j];
      total += x[j];
    }
    row_totals_[slot(t_)] = total;
  }

  void check_retained(std::int64_t s) const {
    if (s < min_time() || s > t_) throw DomainError("time index not retained");
  }

  std::size_t slot(std::int64_t s) const {
    return static_cast<std::size_t>((s - 1) %
                                    static_cast<std::int64_t>(window_));
  }

  std::span<const std::int64_t> row(std::size_t sl) const {
    return {rows_.data() + sl * dim(), dim()};
  }

  std::span<std::int64_t> row(std::size_t sl) {
    return {rows_.data() + sl * dim(), dim()};
  }

  SpectrumCdf cdf0_;
  std::size_t window_ = 1;
  std::int64_t t_ = 0;
  std::vector<std::int64_t> rows_;
  std::vector<std::int64_t> row_totals_;
  std::vector<std::int64_t> scratch_;
};

inline StepOutcome detector_step(WindowState& state, const DetectorConfig& cfg,
                                 const CountVector& x) {
  return state.step(cfg, x.values());
}

/// Windowed KS detector over binned counts.
class KsWindowDetector {
 public:
  KsWindowDetector(SpectrumCdf cdf0, DetectorConfig cfg)
      : cfg_(cfg), state_(std::move(cdf0), cfg.window) {
    cfg_.validate();
  }

  StepOutcome step(const CountVector& x) { return state_.step(cfg_, x.values()); }
  StepOutcome step(std::span<const std::int64_t> x) { return state_.step(cfg_, x); }

  const DetectorConfig& config() const { return cfg_; }
  const WindowState& state() const { return state_; }
  void reset() { state_.reset(); }

 private:
  DetectorConfig cfg_;
  WindowState state_;
};

/// Windowed KS detector over raw (unbinned) observations. Each incoming
/// batch is sorted once and its reference CDF values are cached, so the
/// per-step suffix merges never re-evaluate F0; every Δ_{s:t} is then read
/// off an already-sorted sample.
class RawKsWindowDetector {
 public:
  RawKsWindowDetector(std::function<double(double)> cdf0_eval,
                      DetectorConfig cfg)
      : cfg_(cfg), cdf0_(std::move(cdf0_eval)), ring_(cfg.window) {
    cfg_.validate();
    if (!cdf0_) throw ConfigError("reference", "needs a CDF");
  }

  StepOutcome step(const RawSampleBatch& batch) {
    ++t_;
    auto& slot_vec = ring_[slot(t_)];
    slot_vec.clear();
    slot_vec.reserve(batch.values.size());
    for (double y : batch.values) slot_vec.push_back(Sample{y, 0.0});
    std::sort(slot_vec.begin(), slot_vec.end(), by_value);
    for (auto& s : slot_vec) s.f0 = cdf0_(s.y);

    StepOutcome out;
    out.t = t_;
    out.skipped = true;
    out.argmax_start = t_;
    merged_.clear();
    double best = -1.0;
    const std::size_t n = retained();
    for (std::size_t back = 0; back < n; ++back) {
      const std::int64_t s = t_ - static_cast<std::int64_t>(back);
      const auto& ys = ring_[slot(s)];
      if (!ys.empty()) {
        std::size_t mid = merged_.size();
        merged_.insert(merged_.end(), ys.begin(), ys.end());
        std::inplace_merge(merged_.begin(),
                           merged_.begin() + static_cast<std::ptrdiff_t>(mid),
                           merged_.end(), by_value);
      }
      if (merged_.empty()) continue;
      std::size_t istar = 0;
      double sup = sorted_sup_gap(merged_, &istar);
      double delta = std::sqrt(static_cast<double>(merged_.size())) * sup;
      if (delta >= best) {
        best = delta;
        out.argmax_start = s;
        out.argmax_bin = istar;
      }
    }
    if (best >= 0.0) {
      out.skipped = false;
      out.w_stat = best;
      out.alarm = out.w_stat >= cfg_.threshold;
    }
    return out;
  }

  const DetectorConfig& config() const { return cfg_; }
  std::int64_t t() const { return t_; }

 private:
  struct Sample {
    double y;
    double f0;
  };

  static bool by_value(const Sample& a, const Sample& b) { return a.y < b.y; }

  static double sorted_sup_gap(const std::vector<Sample>& ys,
                               std::size_t* argmax) {
    const double n = static_cast<double>(ys.size());
    double sup = -1.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      double f0 = ys[i].f0;
      double gap = std::max(std::fabs(f0 - static_cast<double>(i) / n),
                            std::fabs(f0 - static_cast<double>(i + 1) / n));
      if (gap > sup) {
        sup = gap;
        *argmax = i;
      }
    }
    return sup;
  }

  std::size_t retained() const {
    return static_cast<std::size_t>(
        std::min<std::int64_t>(t_, static_cast<std::int64_t>(cfg_.window)));
  }

  std::size_t slot(std::int64_t s) const {
    return static_cast<std::size_t>((s - 1) %
                                    static_cast<std::int64_t>(cfg_.window));
  }

  DetectorConfig cfg_;
  std::function<double(double)> cdf0_;
  std::int64_t t_ = 0;
  std::vector<std::vector<Sample>> ring_;
  std::vector<Sample> merged_;
};

}  // namespace seqks

#endif  // SEQKS_DETECTOR_HPP_

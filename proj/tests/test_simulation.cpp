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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <vector>

#include "seqks/calibration.hpp"
#include "seqks/detector.hpp"
#include "seqks/error.hpp"
#include "seqks/rng.hpp"
#include "seqks/simulation.hpp"
#include "seqks/spectrum.hpp"
#include "support/oracles.hpp"

namespace {

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using seqks::CensorPolicy;
using seqks::Density;
using seqks::DelayRecord;
using seqks::GaussianComponent;
using seqks::GaussianMixture;
using seqks::Scenario;
using seqks::ScenarioStream;
using seqks::StreamStep;

std::vector<std::int64_t> to_vec(std::span<const std::int64_t> s) {
  return {s.begin(), s.end()};
}

// ---------------------------------------------------------------------------
// Count generators

TEST_CASE("multinomial sampler matches its weights in the long run",
          "[simulation]") {
  Density d(std::vector<double>{0.2, 0.3, 0.5});
  seqks::MultinomialSampler sampler(d);
  seqks::Rng rng(71);
  const std::int64_t n = 30000;
  seqks::CountVector x = sampler.sample(n, rng);
  REQUIRE(x.total() == n);
  for (std::size_t j = 0; j < 3; ++j) {
    const double p = d.values()[j];
    const double tol = 4.0 * std::sqrt(p * (1.0 - p) / n);
    REQUIRE_THAT(static_cast<double>(x.values()[j]) / n, WithinAbs(p, tol));
  }
}

TEST_CASE("sample_counts totals behave like Poisson draws", "[simulation]") {
  Density d(std::vector<double>{1.0, 2.0, 1.0, 1.0});
  seqks::Rng rng(72);
  const double mu = 500.0;
  const int reps = 20000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int i = 0; i < reps; ++i) {
    auto x = seqks::sample_counts(d, mu, rng);
    const double t = static_cast<double>(x.total());
    sum += t;
    sum2 += t * t;
  }
  const double mean = sum / reps;
  const double var = sum2 / reps - mean * mean;
  REQUIRE_THAT(mean, WithinAbs(mu, 4.0 * std::sqrt(mu / reps)));
  // Var of the sample variance of Poisson(mu) is (mu + 2 mu^2)/reps.
  REQUIRE_THAT(var, WithinAbs(mu, 4.0 * std::sqrt((mu + 2 * mu * mu) / reps)));
  REQUIRE_THROWS_AS(seqks::sample_counts(d, 0.0, rng), seqks::DomainError);
}

// ---------------------------------------------------------------------------
// Gaussian mixtures and binning

GaussianMixture two_bump() {
  return GaussianMixture(
      {{0.6, -1.5, 0.8}, {0.4, 2.0, 1.2}});
}

TEST_CASE("gaussian mixture cdf integrates the pdf", "[simulation]") {
  GaussianMixture mix = two_bump();
  const double pairs[][2] = {{-3.0, -1.0}, {-1.0, 0.5}, {0.5, 4.0}};
  for (const auto& p : pairs) {
    const double direct = mix.cdf(p[1]) - mix.cdf(p[0]);
    const double quad = seqks::test::simpson(
        [&](double y) { return mix.pdf(y); }, p[0], p[1], 4000);
    REQUIRE_THAT(direct, WithinAbs(quad, 1e-8));
  }
}

TEST_CASE("gaussian mixture normalizes its weights", "[simulation]") {
  GaussianMixture mix({{2.0, 0.0, 1.0}, {6.0, 1.0, 2.0}});
  REQUIRE_THAT(mix.components()[0].weight, WithinRel(0.25, 1e-15));
  REQUIRE_THAT(mix.components()[1].weight, WithinRel(0.75, 1e-15));
  REQUIRE_THROWS_AS(GaussianMixture({}), seqks::ConfigError);
  REQUIRE_THROWS_AS(GaussianMixture({{-1.0, 0.0, 1.0}}), seqks::ConfigError);
  REQUIRE_THROWS_AS(GaussianMixture({{1.0, 0.0, 0.0}}), seqks::ConfigError);
  REQUIRE_THROWS_AS(GaussianMixture({{0.0, 0.0, 1.0}}), seqks::ConfigError);
}

TEST_CASE("gaussian_mixture_density matches the analytic cdf", "[simulation]") {
  GaussianMixture mix = two_bump();
  const std::size_t bins = 32;
  const double lo = -6.0;
  const double hi = 6.0;
  Density d = seqks::gaussian_mixture_density(mix, bins, lo, hi);
  REQUIRE(d.dim() == bins);
  const double width = (hi - lo) / bins;
  // Interior bins carry cdf increments; the edge bins absorb the tails.
  double acc = 0.0;
  for (std::size_t j = 0; j < bins; ++j) {
    acc += d.values()[j];
    if (j + 1 < bins) {
      REQUIRE_THAT(acc, WithinAbs(mix.cdf(lo + width * (j + 1)), 1e-12));
    }
  }
  REQUIRE_THAT(acc, WithinAbs(1.0, 1e-12));
  REQUIRE_THROWS_AS(seqks::gaussian_mixture_density(mix, 1, lo, hi),
                    seqks::ConfigError);
  REQUIRE_THROWS_AS(seqks::gaussian_mixture_density(mix, 8, 2.0, 2.0),
                    seqks::ConfigError);
}

TEST_CASE("symmetric mixtures bin symmetrically", "[simulation]") {
  GaussianMixture mix({{0.5, -2.0, 1.0}, {0.5, 2.0, 1.0}});
  Density d = seqks::gaussian_mixture_density(mix, 16, -8.0, 8.0);
  for (std::size_t j = 0; j < 8; ++j) {
    REQUIRE_THAT(d.values()[j], WithinAbs(d.values()[15 - j], 1e-14));
  }
}

TEST_CASE("mixture samples agree with their mean", "[simulation]") {
  GaussianMixture mix = two_bump();
  seqks::Rng rng(73);
  const int n = 30000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += mix.sample(rng);
  const double want = 0.6 * -1.5 + 0.4 * 2.0;
  // Mixture sd is below 2.3; allow four standard errors.
  REQUIRE_THAT(sum / n, WithinAbs(want, 4.0 * 2.3 / std::sqrt(1.0 * n)));
}

// ---------------------------------------------------------------------------
// Source physics

TEST_CASE("source_rate reference values", "[simulation]") {
  // Unit activity at contact distance: 630 damped by one table interval.
  const double contact = seqks::source_rate(0.000844, 0.05);
  REQUIRE_THAT(contact, WithinRel(630.0 * std::exp(-0.0100029 * 0.1), 1e-13));
  REQUIRE_THAT(contact, WithinAbs(629.3701, 5e-4));

  const long double want = (100.0L / 0.000844L) * 630.0L *
                           (0.05L / 150.0L) * (0.05L / 150.0L) *
                           std::exp(-0.0100029L * 150.05L);
  REQUIRE_THAT(seqks::source_rate(100.0, 150.0),
               WithinRel(static_cast<double>(want), 1e-12));
  REQUIRE_THAT(seqks::source_rate(100.0, 150.0), WithinAbs(1.8487, 2e-4));
}

TEST_CASE("source_rate scales and decays as expected", "[simulation]") {
  REQUIRE_THAT(seqks::source_rate(2.0, 3.0),
               WithinRel(2.0 * seqks::source_rate(1.0, 3.0), 1e-15));
  double prev = seqks::source_rate(1.0, 0.05);
  for (double d = 0.5; d <= 300.0; d *= 2.0) {
    const double r = seqks::source_rate(1.0, d);
    REQUIRE(r < prev);
    REQUIRE(r > 0.0);
    prev = r;
  }
  REQUIRE_THROWS_AS(seqks::source_rate(1.0, 0.0), seqks::DomainError);
  REQUIRE_THROWS_AS(seqks::source_rate(1.0, -2.0), seqks::DomainError);
}

TEST_CASE("anomaly_weight mixes rates into densities consistently",
          "[simulation]") {
  REQUIRE(seqks::anomaly_weight(3.0, 0.0) == 1.0);
  REQUIRE_THAT(seqks::anomaly_weight(2.0, 2.0), WithinRel(0.5, 1e-15));
  REQUIRE_THROWS_AS(seqks::anomaly_weight(0.0, 1.0), seqks::DomainError);
  REQUIRE_THROWS_AS(seqks::anomaly_weight(1.0, -0.1), seqks::DomainError);

  // Mixing with w = lambda0/(lambda0 + lambda_s) reproduces the density of
  // the superposed processes.
  seqks::Rng rng(74);
  std::vector<double> w0(6), wa(6);
  for (std::size_t j = 0; j < 6; ++j) {
    w0[j] = 0.1 + rng.next_double();
    wa[j] = 0.1 + rng.next_double();
  }
  Density f0(w0), fa(wa);
  const double lambda0 = 40.0;
  const double lambda_s = 13.0;
  const double w = seqks::anomaly_weight(lambda0, lambda_s);
  Density mixed = seqks::mix_densities(f0, fa, w);
  std::vector<double> super(6);
  for (std::size_t j = 0; j < 6; ++j) {
    super[j] = lambda0 * f0.values()[j] + lambda_s * fa.values()[j];
  }
  Density direct(super);
  for (std::size_t j = 0; j < 6; ++j) {
    REQUIRE_THAT(mixed.values()[j], WithinRel(direct.values()[j], 1e-12));
  }
}

// ---------------------------------------------------------------------------
// Scenario streams

Scenario switch_scenario() {
  Scenario s;
  s.pre = Density(std::vector<double>{0.0 + 1e-300, 1.0});
  s.post = Density(std::vector<double>{1.0, 1e-300});
  s.changepoint = 3;
  s.mu = 5.0;
  s.fixed_counts = true;
  s.horizon = 6;
  return s;
}

TEST_CASE("scenario stream is deterministic in its seed", "[simulation]") {
  Scenario s;
  s.pre = Density(std::vector<double>{1.0, 2.0, 3.0});
  s.post = s.pre;
  s.mu = 20.0;
  s.horizon = 10;
  ScenarioStream a(s, seqks::Rng(91));
  ScenarioStream b(s, seqks::Rng(91));
  for (int t = 0; t < 10; ++t) {
    StreamStep sa = a.next();
    StreamStep sb = b.next();
    REQUIRE(sa.t == sb.t);
    REQUIRE(to_vec(sa.counts.values()) == to_vec(sb.counts.values()));
  }
}

TEST_CASE("scenario stream switches density after the changepoint",
          "[simulation]") {
  Scenario s = switch_scenario();
  ScenarioStream stream(s, seqks::Rng(92));
  REQUIRE(stream.changepoint() == 3);
  for (int t = 1; t <= 6; ++t) {
    StreamStep step = stream.next();
    REQUIRE(step.counts.total() == 5);  // fixed_counts pins N_t
    if (t <= 3) {
      REQUIRE(step.counts.values()[1] == 5);
    } else {
      REQUIRE(step.counts.values()[0] == 5);
    }
  }
}

TEST_CASE("scenario stream resolves the changepoint range upfront",
          "[simulation]") {
  Scenario s = switch_scenario();
  s.changepoint.reset();
  s.changepoint_range = std::pair<std::int64_t, std::int64_t>{2, 4};
  std::set<std::int64_t> seen;
  for (int seed = 0; seed < 60; ++seed) {
    ScenarioStream stream(s, seqks::Rng(seed));
    const std::int64_t v = stream.changepoint();
    REQUIRE(v >= 2);
    REQUIRE(v <= 4);
    seen.insert(v);
    ScenarioStream again(s, seqks::Rng(seed));
    REQUIRE(again.changepoint() == v);
  }
  REQUIRE(seen.size() == 3);
}

TEST_CASE("no-change scenarios never switch", "[simulation]") {
  Scenario s = switch_scenario();
  s.changepoint.reset();
  ScenarioStream stream(s, seqks::Rng(93));
  REQUIRE(stream.changepoint() == std::numeric_limits<std::int64_t>::max());
  for (int t = 1; t <= 6; ++t) {
    REQUIRE(stream.next().counts.values()[1] == 5);
  }
}

TEST_CASE("pre-change draws do not depend on the changepoint location",
          "[simulation]") {
  Scenario early = switch_scenario();
  early.changepoint = 2;
  early.fixed_counts = false;
  Scenario late = switch_scenario();
  late.changepoint = 5;
  late.fixed_counts = false;
  ScenarioStream a(early, seqks::Rng(94));
  ScenarioStream b(late, seqks::Rng(94));
  for (int t = 1; t <= 2; ++t) {
    REQUIRE(to_vec(a.next().counts.values()) == to_vec(b.next().counts.values()));
  }
}

TEST_CASE("scenario validation rejects inconsistent setups", "[simulation]") {
  Scenario s = switch_scenario();
  s.changepoint = 6;  // not before the horizon
  REQUIRE_THROWS_AS(s.validate(), seqks::ConfigError);
  s = switch_scenario();
  s.mu = 0.0;
  REQUIRE_THROWS_AS(s.validate(), seqks::ConfigError);
  s = switch_scenario();
  s.post = Density(std::vector<double>{1.0, 1.0, 1.0});
  REQUIRE_THROWS_AS(s.validate(), seqks::ConfigError);
  s = switch_scenario();
  s.mode = seqks::StreamMode::kRaw;  // no generators configured
  REQUIRE_THROWS_AS(s.validate(), seqks::ConfigError);
  s = switch_scenario();
  s.changepoint.reset();
  s.changepoint_range = std::pair<std::int64_t, std::int64_t>{4, 6};
  REQUIRE_THROWS_AS(s.validate(), seqks::ConfigError);
}

TEST_CASE("raw mode bins its own samples consistently", "[simulation]") {
  GaussianMixture mix = two_bump();
  const std::size_t bins = 32;
  const double lo = -8.0;
  const double hi = 8.0;
  Scenario s;
  s.pre = seqks::gaussian_mixture_density(mix, bins, lo, hi);
  s.post = s.pre;
  s.mode = seqks::StreamMode::kRaw;
  s.pre_raw = mix;
  s.post_raw = mix;
  s.support_lo = lo;
  s.support_hi = hi;
  s.mu = 1e6;
  s.fixed_counts = true;
  s.horizon = 1;
  ScenarioStream stream(s, seqks::Rng(95));
  StreamStep step = stream.next();
  REQUIRE(step.raw.size() == 1000000);
  REQUIRE(step.counts.total() == 1000000);
  REQUIRE(step.mean_obs.n == 1000000);
  const double want_mean = 0.6 * -1.5 + 0.4 * 2.0;
  REQUIRE_THAT(step.mean_obs.mean,
               WithinAbs(want_mean, 4.0 * 2.3 / std::sqrt(1e6)));
  // The binned view of the raw draws follows the analytic binning.
  const double p = seqks::test::chi_square_gof_pvalue(
      step.counts.values(), s.pre.values());
  REQUIRE(p > 0.01);
}

// ---------------------------------------------------------------------------
// Scenario runner and delay summaries

TEST_CASE("run_scenario detects an instant total-variation-one change",
          "[simulation]") {
  Scenario s = switch_scenario();
  s.mu = 200.0;
  seqks::SpectrumCdf cdf0(s.pre);
  seqks::DetectorConfig cfg;
  cfg.window = 2;
  cfg.threshold = 1.0;
  seqks::KsWindowDetector det(cdf0, cfg);
  std::vector<seqks::DetectorHandle> handles;
  handles.push_back(
      {"ks", [&](const StreamStep& step) { return det.step(step.counts); }});
  auto records = seqks::run_scenario(s, handles, 96);
  REQUIRE(records.size() == 1);
  REQUIRE(records[0].detector == "ks");
  REQUIRE(records[0].changepoint == 3);
  REQUIRE(records[0].detection_time.has_value());
  REQUIRE(*records[0].detection_time == 4);
  REQUIRE(records[0].delay == 1);
  REQUIRE(records[0].false_alarms == 0);
  REQUIRE_FALSE(records[0].censored);
}

TEST_CASE("run_scenario censors at the horizon", "[simulation]") {
  Scenario s = switch_scenario();
  seqks::SpectrumCdf cdf0(s.pre);
  seqks::DetectorConfig cfg;
  cfg.window = 2;
  cfg.threshold = 1e300;
  seqks::KsWindowDetector det(cdf0, cfg);
  std::vector<seqks::DetectorHandle> handles;
  handles.push_back(
      {"ks", [&](const StreamStep& step) { return det.step(step.counts); }});
  auto records = seqks::run_scenario(s, handles, 97, 12);
  REQUIRE(records[0].replicate == 12);
  REQUIRE(records[0].censored);
  REQUIRE_FALSE(records[0].detection_time.has_value());
  REQUIRE(records[0].delay == s.horizon - 3);

  std::vector<seqks::DetectorHandle> none;
  REQUIRE_THROWS_AS(seqks::run_scenario(s, none, 97), seqks::ConfigError);
}

TEST_CASE("run_scenario is deterministic in its seed", "[simulation]") {
  Scenario s = switch_scenario();
  s.fixed_counts = false;
  s.mu = 30.0;
  seqks::SpectrumCdf cdf0(s.pre);
  auto run_once = [&]() {
    seqks::DetectorConfig cfg;
    cfg.window = 3;
    cfg.threshold = 2.0;
    seqks::KsWindowDetector det(cdf0, cfg);
    std::vector<seqks::DetectorHandle> handles;
    handles.push_back(
        {"ks", [&](const StreamStep& step) { return det.step(step.counts); }});
    return seqks::run_scenario(s, handles, 98);
  };
  auto a = run_once();
  auto b = run_once();
  REQUIRE(a[0].detection_time == b[0].detection_time);
  REQUIRE(a[0].false_alarms == b[0].false_alarms);
  REQUIRE(a[0].delay == b[0].delay);
}

DelayRecord make_record(std::int64_t delay, bool censored,
                        std::int64_t false_alarms) {
  DelayRecord r;
  r.detector = "ks";
  r.changepoint = 10;
  r.horizon = 20;
  r.delay = delay;
  r.censored = censored;
  if (!censored) r.detection_time = 10 + delay;
  r.false_alarms = false_alarms;
  return r;
}

TEST_CASE("average_detection_delay follows the censoring policy",
          "[simulation]") {
  std::vector<DelayRecord> records = {make_record(2, false, 0),
                                      make_record(4, false, 1),
                                      make_record(10, true, 2)};
  auto keep = seqks::average_detection_delay(records,
                                             CensorPolicy::kCensorAtHorizon);
  REQUIRE(keep.reps == 3);
  REQUIRE(keep.censored == 1);
  REQUIRE_THAT(keep.mean_delay, WithinRel(16.0 / 3.0, 1e-15));
  REQUIRE_THAT(keep.detection_fraction, WithinRel(2.0 / 3.0, 1e-15));
  REQUIRE_THAT(keep.mean_false_alarms, WithinRel(1.0, 1e-15));
  REQUIRE(keep.policy == CensorPolicy::kCensorAtHorizon);

  auto drop = seqks::average_detection_delay(records,
                                             CensorPolicy::kExcludeCensored);
  REQUIRE_THAT(drop.mean_delay, WithinRel(3.0, 1e-15));
  REQUIRE(drop.censored == 1);

  std::vector<DelayRecord> all_censored = {make_record(10, true, 0)};
  auto nan_summary = seqks::average_detection_delay(
      all_censored, CensorPolicy::kExcludeCensored);
  REQUIRE(std::isnan(nan_summary.mean_delay));

  REQUIRE_THROWS_AS(seqks::average_detection_delay({}, CensorPolicy::kCensorAtHorizon),
                    seqks::DomainError);
  std::vector<DelayRecord> mixed = records;
  mixed[1].detector = "other";
  REQUIRE_THROWS_AS(seqks::average_detection_delay(mixed,
                                                   CensorPolicy::kCensorAtHorizon),
                    seqks::DomainError);
}

TEST_CASE("censor policy names", "[simulation]") {
  REQUIRE(seqks::censor_policy_name(CensorPolicy::kCensorAtHorizon) ==
          "censor-at-horizon");
  REQUIRE(seqks::censor_policy_name(CensorPolicy::kExcludeCensored) ==
          "exclude-censored");
}

}  // namespace

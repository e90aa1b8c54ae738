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

#ifndef SEQKS_EXPERIMENT_HPP_
#define SEQKS_EXPERIMENT_HPP_

#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqks/baselines.hpp"
#include "seqks/calibration.hpp"
#include "seqks/detector.hpp"
#include "seqks/error.hpp"
#include "seqks/io.hpp"
#include "seqks/parallel.hpp"
#include "seqks/rng.hpp"
#include "seqks/simulation.hpp"

namespace seqks {

// ---------------------------------------------------------------------------
// Configuration schema

enum class DetectorType {
  kKs,
  kPooledKs,
  kEfPoisson,
  kGlrPoisson,
  kEfGaussian,
  kGlrGaussian,
};

inline DetectorType detector_type_from_string(const std::string& s) {
  if (s == "ks") return DetectorType::kKs;
  if (s == "pooled-ks") return DetectorType::kPooledKs;
  if (s == "ef-poisson") return DetectorType::kEfPoisson;
  if (s == "glr-poisson") return DetectorType::kGlrPoisson;
  if (s == "ef-gaussian") return DetectorType::kEfGaussian;
  if (s == "glr-gaussian") return DetectorType::kGlrGaussian;
  throw ConfigError("type", "unknown detector type '" + s + "'");
}

inline std::string_view detector_type_name(DetectorType t) {
  switch (t) {
    case DetectorType::kKs: return "ks";
    case DetectorType::kPooledKs: return "pooled-ks";
    case DetectorType::kEfPoisson: return "ef-poisson";
    case DetectorType::kGlrPoisson: return "glr-poisson";
    case DetectorType::kEfGaussian: return "ef-gaussian";
    case DetectorType::kGlrGaussian: return "glr-gaussian";
  }
  return "unknown";
}

struct DetectorSpec {
  std::string id;
  DetectorType type = DetectorType::kKs;
  std::size_t window = 1;                 // L; unused by pooled-ks
  double tau = 1.0;                       // EF prior sd
  std::optional<double> sigma;            // Gaussian rules
  bool estimate_variance = false;         // glr-gaussian variant
  std::optional<double> threshold;        // explicit threshold, skips calibration
  std::optional<std::string> calib_method;  // per-detector override: "bound"
  std::optional<double> alpha;            // bound alpha override

  bool is_gaussian() const {
    return type == DetectorType::kEfGaussian ||
           type == DetectorType::kGlrGaussian;
  }

  void validate(StreamMode mode) const {
    if (id.empty()) throw ConfigError("detectors.id", "must not be empty");
    if (type != DetectorType::kPooledKs && window < 1) {
      throw ConfigError("detectors.window", "must be at least 1");
    }
    if (is_gaussian()) {
      if (mode != StreamMode::kRaw) {
        throw ConfigError("detectors.type",
                          "gaussian rules need a raw-mode scenario");
      }
      if (!sigma || !(*sigma > 0.0)) {
        throw ConfigError("detectors.sigma", "must be set and positive");
      }
    }
    if (!(tau > 0.0)) throw ConfigError("detectors.tau", "must be positive");
    if (calib_method && *calib_method != "bound") {
      throw ConfigError("detectors.calibration.method",
                        "per-detector override supports only 'bound'");
    }
    if (calib_method && type != DetectorType::kKs) {
      throw ConfigError("detectors.calibration.method",
                        "the analytic bound applies to the ks detector only");
    }
  }
};

struct CalibrationSpec {
  std::string method = "monte-carlo";  // or "bound"
  std::int64_t horizon = 1000;         // T
  double target = 1.0;                 // tolerated false alarms over T
  std::int64_t reps = 50;

  void validate() const {
    if (method != "monte-carlo" && method != "bound") {
      throw ConfigError("calibration.method", "must be monte-carlo or bound");
    }
    if (horizon < 1) throw ConfigError("calibration.horizon", "must be positive");
    if (!(target > 0.0)) throw ConfigError("calibration.target", "must be positive");
    if (reps < 1) throw ConfigError("calibration.reps", "must be at least 1");
  }
};

struct ExperimentConfig {
  std::string scenario_id = "scenario";
  Scenario scenario;
  std::vector<DetectorSpec> detectors;
  CalibrationSpec calibration;
  std::int64_t replicates = 1;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  unsigned threads = 0;

  void validate() const {
    scenario.validate();
    calibration.validate();
    if (detectors.empty()) throw ConfigError("detectors", "none configured");
    for (const auto& d : detectors) d.validate(scenario.mode);
    for (std::size_t i = 0; i < detectors.size(); ++i) {
      for (std::size_t k = i + 1; k < detectors.size(); ++k) {
        if (detectors[i].id == detectors[k].id) {
          throw ConfigError("detectors.id", "duplicate id " + detectors[i].id);
        }
      }
    }
    if (replicates < 1) throw ConfigError("replicates", "must be at least 1");
    if (!seed) throw ConfigError("seed", "required for reproducibility");
  }

  /// The scenario with the change removed, for null calibration runs.
  Scenario null_scenario() const {
    Scenario s = scenario;
    s.changepoint.reset();
    s.changepoint_range.reset();
    return s;
  }

  static ExperimentConfig from_json(const nlohmann::json& j,
                                    const std::string& base_dir);
  static ExperimentConfig load_file(const std::string& path);
};

// ---------------------------------------------------------------------------
// JSON parsing

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j,
                                           const std::string& field) {
  auto it = j.find(field);
  if (it == j.end()) throw ConfigError(field, "missing");
  return *it;
}

template <typename T>
T get_as(const nlohmann::json& j, const std::string& field) {
  try {
    return require_field(j, field).get<T>();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(field, e.what());
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const std::string& field, T fallback) {
  auto it = j.find(field);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const std::exception& e) {
    throw ConfigError(field, e.what());
  }
}

inline std::string join_path(const std::string& base, const std::string& rel) {
  if (rel.empty()) return rel;
  if (rel.front() == '/' || base.empty()) return rel;
  return base.back() == '/' ? base + rel : base + "/" + rel;
}

inline GaussianMixture parse_mixture(const nlohmann::json& j,
                                     const std::string& field) {
  const auto& comps = require_field(j, "components");
  if (!comps.is_array() || comps.empty()) {
    throw ConfigError(field + ".components", "must be a non-empty array");
  }
  std::vector<GaussianComponent> list;
  for (const auto& c : comps) {
    GaussianComponent g;
    g.weight = get_as<double>(c, "weight");
    g.mean = get_as<double>(c, "mean");
    g.sd = get_as<double>(c, "sd");
    list.push_back(g);
  }
  return GaussianMixture(std::move(list));
}

struct ParsedDensity {
  Density density;
  std::optional<GaussianMixture> mixture;
};

inline ParsedDensity parse_density_block(const nlohmann::json& j,
                                         const std::string& field,
                                         const std::string& base_dir,
                                         std::optional<std::size_t> bins,
                                         std::optional<double> lo,
                                         std::optional<double> hi) {
  ParsedDensity out;
  if (j.contains("weights")) {
    auto w = get_as<std::vector<double>>(j, "weights");
    out.density = Density(std::move(w));
  } else if (j.contains("spectrum_file")) {
    auto rel = get_as<std::string>(j, "spectrum_file");
    std::optional<std::size_t> winsorize;
    if (j.contains("winsorize_at")) {
      winsorize = get_as<std::size_t>(j, "winsorize_at");
    }
    out.density = load_spectrum_file(join_path(base_dir, rel), winsorize).density;
  } else if (j.contains("mixture")) {
    if (!bins) throw ConfigError("scenario.bins", "required for mixture densities");
    if (!lo || !hi) {
      throw ConfigError("scenario.support", "required for mixture densities");
    }
    out.mixture = parse_mixture(require_field(j, "mixture"), field + ".mixture");
    out.density = gaussian_mixture_density(*out.mixture, *bins, *lo, *hi);
  } else {
    throw ConfigError(field, "needs weights, spectrum_file, or mixture");
  }
  return out;
}

/// w·f0 + (1−w)·fa as an analytic mixture: the component lists concatenate
/// with rescaled weights.
inline GaussianMixture mix_gaussian(const GaussianMixture& f0,
                                    const GaussianMixture& fa, double w) {
  std::vector<GaussianComponent> comps;
  for (auto c : f0.components()) {
    c.weight *= w;
    if (c.weight > 0.0) comps.push_back(c);
  }
  for (auto c : fa.components()) {
    c.weight *= 1.0 - w;
    if (c.weight > 0.0) comps.push_back(c);
  }
  return GaussianMixture(std::move(comps));
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j,
                                                    const std::string& base_dir) {
  ExperimentConfig cfg;
  const auto& sc = detail::require_field(j, "scenario");
  cfg.scenario_id = detail::get_or<std::string>(sc, "id", "scenario");

  std::string mode = detail::get_or<std::string>(sc, "mode", "binned");
  if (mode != "binned" && mode != "raw") {
    throw ConfigError("scenario.mode", "must be binned or raw");
  }
  cfg.scenario.mode = mode == "raw" ? StreamMode::kRaw : StreamMode::kBinned;

  std::optional<std::size_t> bins;
  if (sc.contains("bins")) bins = detail::get_as<std::size_t>(sc, "bins");
  std::optional<double> lo;
  std::optional<double> hi;
  if (sc.contains("support")) {
    auto sup = detail::get_as<std::vector<double>>(sc, "support");
    if (sup.size() != 2 || !(sup[1] > sup[0])) {
      throw ConfigError("scenario.support", "must be [lo, hi] with hi > lo");
    }
    lo = sup[0];
    hi = sup[1];
  }

  auto pre = detail::parse_density_block(detail::require_field(sc, "background"),
                                         "scenario.background", base_dir, bins,
                                         lo, hi);
  if (bins && pre.density.dim() != *bins) {
    throw ConfigError("scenario.bins", "background density has different size");
  }
  cfg.scenario.pre = pre.density;
  cfg.scenario.pre_raw = pre.mixture;

  if (sc.contains("anomaly")) {
    auto fa = detail::parse_density_block(detail::require_field(sc, "anomaly"),
                                          "scenario.anomaly", base_dir, bins,
                                          lo, hi);
    if (fa.density.dim() != pre.density.dim()) {
      throw ConfigError("scenario.anomaly", "dimension differs from background");
    }
    double w = 0.0;
    bool have_weight = sc.contains("anomaly_weight");
    bool have_source = sc.contains("source");
    if (have_weight == have_source) {
      throw ConfigError("scenario.anomaly_weight",
                        "set exactly one of anomaly_weight or source");
    }
    if (have_weight) {
      w = detail::get_as<double>(sc, "anomaly_weight");
      if (!(w >= 0.0 && w <= 1.0)) {
        throw ConfigError("scenario.anomaly_weight", "must lie in [0, 1]");
      }
    } else {
      const auto& src = detail::require_field(sc, "source");
      double mci = detail::get_as<double>(src, "strength_mci");
      double dist = detail::get_as<double>(src, "distance_m");
      double lambda0 = detail::get_or<double>(
          src, "background_rate", detail::get_as<double>(sc, "mu"));
      w = anomaly_weight(lambda0, source_rate(mci, dist));
    }
    if (w >= 1.0) {
      cfg.scenario.post = cfg.scenario.pre;
      cfg.scenario.post_raw = cfg.scenario.pre_raw;
    } else if (w <= 0.0) {
      cfg.scenario.post = fa.density;
      cfg.scenario.post_raw = fa.mixture;
    } else {
      cfg.scenario.post = mix_densities(cfg.scenario.pre, fa.density, w);
      if (pre.mixture && fa.mixture) {
        cfg.scenario.post_raw = detail::mix_gaussian(*pre.mixture, *fa.mixture, w);
      }
    }
  } else {
    cfg.scenario.post = cfg.scenario.pre;
    cfg.scenario.post_raw = cfg.scenario.pre_raw;
  }

  cfg.scenario.mu = detail::get_as<double>(sc, "mu");
  cfg.scenario.fixed_counts = detail::get_or<bool>(sc, "fixed_counts", false);
  cfg.scenario.horizon = detail::get_as<std::int64_t>(sc, "horizon");
  if (sc.contains("changepoint")) {
    cfg.scenario.changepoint = detail::get_as<std::int64_t>(sc, "changepoint");
  }
  if (sc.contains("changepoint_range")) {
    auto r = detail::get_as<std::vector<std::int64_t>>(sc, "changepoint_range");
    if (r.size() != 2) {
      throw ConfigError("scenario.changepoint_range", "must be [lo, hi]");
    }
    cfg.scenario.changepoint_range = std::make_pair(r[0], r[1]);
  }
  if (cfg.scenario.mode == StreamMode::kRaw) {
    if (!lo || !hi) throw ConfigError("scenario.support", "required in raw mode");
    cfg.scenario.support_lo = *lo;
    cfg.scenario.support_hi = *hi;
  }

  const auto& dets = detail::require_field(j, "detectors");
  if (!dets.is_array() || dets.empty()) {
    throw ConfigError("detectors", "must be a non-empty array");
  }
  for (const auto& d : dets) {
    DetectorSpec spec;
    spec.type = detector_type_from_string(detail::get_as<std::string>(d, "type"));
    spec.id = detail::get_or<std::string>(
        d, "id", std::string(detector_type_name(spec.type)));
    spec.window = detail::get_or<std::size_t>(d, "window", 1);
    spec.tau = detail::get_or<double>(d, "tau", 1.0);
    if (d.contains("sigma")) spec.sigma = detail::get_as<double>(d, "sigma");
    spec.estimate_variance = detail::get_or<bool>(d, "estimate_variance", false);
    if (d.contains("threshold")) {
      spec.threshold = detail::get_as<double>(d, "threshold");
    }
    if (d.contains("calibration")) {
      const auto& c = d.at("calibration");
      spec.calib_method = detail::get_as<std::string>(c, "method");
      if (c.contains("alpha")) spec.alpha = detail::get_as<double>(c, "alpha");
    }
    cfg.detectors.push_back(std::move(spec));
  }

  if (j.contains("calibration")) {
    const auto& c = j.at("calibration");
    cfg.calibration.method =
        detail::get_or<std::string>(c, "method", "monte-carlo");
    cfg.calibration.horizon = detail::get_or<std::int64_t>(
        c, "horizon", cfg.scenario.horizon);
    cfg.calibration.target = detail::get_or<double>(c, "target", 1.0);
    cfg.calibration.reps = detail::get_or<std::int64_t>(c, "reps", 50);
  } else {
    cfg.calibration.horizon = cfg.scenario.horizon;
  }

  cfg.replicates = detail::get_or<std::int64_t>(j, "replicates", 1);
  if (j.contains("seed")) cfg.seed = detail::get_as<std::uint64_t>(j, "seed");
  cfg.out_path = detail::get_or<std::string>(j, "out", "");
  cfg.threads = detail::get_or<unsigned>(j, "threads", 0);
  return cfg;
}

inline ExperimentConfig ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  std::string base_dir;
  auto slash = path.find_last_of('/');
  if (slash != std::string::npos) base_dir = path.substr(0, slash);
  return from_json(j, base_dir);
}

// ---------------------------------------------------------------------------
// Detector construction

/// Builds a fresh stateful detector bound to the scenario's reference
/// distribution. The threshold is the alarm threshold to bake in.
inline DetectorHandle make_detector(const DetectorSpec& spec,
                                    const ExperimentConfig& cfg,
                                    double threshold) {
  const Scenario& scn = cfg.scenario;
  DetectorHandle h;
  h.name = spec.id;
  switch (spec.type) {
    case DetectorType::kKs: {
      DetectorConfig dc{spec.window, threshold, DetectorMode::kBinned};
      if (scn.mode == StreamMode::kRaw) {
        dc.mode = DetectorMode::kRawSample;
        const GaussianMixture mix = *scn.pre_raw;
        auto det = std::make_shared<RawKsWindowDetector>(
            [mix](double y) { return mix.cdf(y); }, dc);
        h.step = [det](const StreamStep& s) { return det->step(s.raw); };
      } else {
        auto det = std::make_shared<KsWindowDetector>(SpectrumCdf(scn.pre), dc);
        h.step = [det](const StreamStep& s) { return det->step(s.counts); };
      }
      break;
    }
    case DetectorType::kPooledKs: {
      auto det =
          std::make_shared<PooledKsDetector>(SpectrumCdf(scn.pre), threshold);
      h.step = [det](const StreamStep& s) { return det->step(s.counts); };
      break;
    }
    case DetectorType::kEfPoisson:
    case DetectorType::kGlrPoisson: {
      std::vector<double> rates(scn.pre.dim());
      for (std::size_t j = 0; j < rates.size(); ++j) {
        rates[j] = scn.mu * scn.pre.pmf(j);
      }
      PoissonNull null(std::move(rates));
      if (spec.type == DetectorType::kEfPoisson) {
        auto det = std::make_shared<EfPoissonDetector>(std::move(null),
                                                       spec.window, threshold);
        h.step = [det](const StreamStep& s) { return det->step(s.counts); };
      } else {
        auto det = std::make_shared<GlrPoissonDetector>(std::move(null),
                                                        spec.window, threshold);
        h.step = [det](const StreamStep& s) { return det->step(s.counts); };
      }
      break;
    }
    case DetectorType::kEfGaussian:
    case DetectorType::kGlrGaussian: {
      GaussianNull null;
      null.sigma = spec.sigma.value_or(1.0);
      null.tau = spec.tau;
      null.n_per_step = std::max<std::int64_t>(1, std::llround(scn.mu));
      if (spec.type == DetectorType::kEfGaussian) {
        auto det = std::make_shared<EfGaussianDetector>(null, spec.window,
                                                        threshold);
        h.step = [det](const StreamStep& s) { return det->step(s.mean_obs); };
      } else {
        auto det = std::make_shared<GlrGaussianDetector>(
            null, spec.window, threshold, spec.estimate_variance);
        h.step = [det](const StreamStep& s) { return det->step(s.mean_obs); };
      }
      break;
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Calibration and benchmark runners

struct CalibrationEntry {
  std::string detector;
  std::string method;  // "bound", "monte-carlo", or "explicit"
  double threshold = 0.0;
  bool conservative = false;  // analytic-bound thresholds
  double target = 0.0;
  std::int64_t reps = 0;
};

struct CalibrationReport {
  std::vector<CalibrationEntry> entries;
  std::uint64_t seed = 0;

  double threshold_for(const std::string& id) const {
    for (const auto& e : entries) {
      if (e.detector == id) return e.threshold;
    }
    throw Error("no calibration entry for detector " + id);
  }
};

/// Statistics are collected with an unreachable threshold; the per-detector
/// alarm convention only enters the final selection.
inline CalibrationReport run_calibration(const ExperimentConfig& cfg) {
  cfg.validate();
  CalibrationReport report;
  report.seed = *cfg.seed;
  const std::uint64_t calib_seed = derive_seed(*cfg.seed, 1);
  const Scenario null_scn = cfg.null_scenario();
  for (const auto& spec : cfg.detectors) {
    CalibrationEntry e;
    e.detector = spec.id;
    e.target = spec.alpha.value_or(cfg.calibration.target);
    if (spec.threshold) {
      e.method = "explicit";
      e.threshold = *spec.threshold;
      report.entries.push_back(std::move(e));
      continue;
    }
    std::string method = spec.calib_method.value_or(cfg.calibration.method);
    if (method == "bound") {
      if (spec.type != DetectorType::kKs) {
        throw ConfigError("calibration.method",
                          "the analytic bound applies to the ks detector only");
      }
      FalseAlarmBudget budget{cfg.calibration.horizon, spec.window, e.target};
      e.method = "bound";
      e.threshold = threshold_from_bound(budget);
      e.conservative = true;
    } else {
      e.method = "monte-carlo";
      e.reps = cfg.calibration.reps;
      auto factory = [&](std::size_t) {
        auto h = make_detector(spec, cfg, 1e300);
        return h.step;
      };
      AlarmComparison cmp = spec.type == DetectorType::kPooledKs
                                ? AlarmComparison::kGt
                                : AlarmComparison::kGeq;
      e.threshold = calibrate_monte_carlo(
          null_scn, cfg.calibration.horizon, cfg.calibration.target,
          cfg.calibration.reps, calib_seed, factory, cmp, cfg.threads);
    }
    report.entries.push_back(std::move(e));
  }
  return report;
}

inline nlohmann::json calibration_to_json(const CalibrationReport& report) {
  nlohmann::json j;
  j["seed"] = report.seed;
  j["thresholds"] = nlohmann::json::array();
  for (const auto& e : report.entries) {
    nlohmann::json row;
    row["detector"] = e.detector;
    row["method"] = e.method;
    row["threshold"] = e.threshold;
    row["target"] = e.target;
    if (e.reps > 0) row["reps"] = e.reps;
    if (e.conservative) row["conservative"] = true;
    j["thresholds"].push_back(std::move(row));
  }
  return j;
}

inline std::string format_calibration_console(const CalibrationReport& report) {
  std::ostringstream os;
  os << "detector thresholds (seed " << report.seed << ")\n";
  for (const auto& e : report.entries) {
    os << "  " << e.detector << ": " << format_double(e.threshold) << "  ["
       << e.method;
    if (e.reps > 0) os << ", reps=" << e.reps;
    os << ", target=" << format_double(e.target);
    if (e.conservative) os << ", conservative bound";
    os << "]\n";
  }
  return os.str();
}

struct BenchmarkResult {
  CalibrationReport calibration;
  std::vector<DelayRecord> records;  // replicate-major, then detector order
  ResultsTable table;
};

inline BenchmarkResult run_benchmark(const ExperimentConfig& cfg) {
  cfg.validate();
  BenchmarkResult result;
  result.calibration = run_calibration(cfg);
  const std::uint64_t bench_seed = derive_seed(*cfg.seed, 2);
  const auto reps = static_cast<std::size_t>(cfg.replicates);
  const std::size_t ndet = cfg.detectors.size();
  result.records.resize(reps * ndet);
  parallel_for(
      reps,
      [&](std::size_t rep) {
        std::vector<DetectorHandle> handles;
        handles.reserve(ndet);
        for (const auto& spec : cfg.detectors) {
          handles.push_back(make_detector(
              spec, cfg, result.calibration.threshold_for(spec.id)));
        }
        auto recs = run_scenario(cfg.scenario, handles,
                                 derive_seed(bench_seed, rep),
                                 static_cast<std::int64_t>(rep));
        for (std::size_t i = 0; i < ndet; ++i) {
          result.records[rep * ndet + i] = std::move(recs[i]);
        }
      },
      cfg.threads);
  for (std::size_t i = 0; i < ndet; ++i) {
    std::vector<DelayRecord> per_det;
    per_det.reserve(reps);
    for (std::size_t rep = 0; rep < reps; ++rep) {
      per_det.push_back(result.records[rep * ndet + i]);
    }
    DelaySummary summary = average_detection_delay(per_det);
    ResultsRow row;
    row.scenario = cfg.scenario_id;
    row.detector = cfg.detectors[i].id;
    row.mean_delay = summary.mean_delay;
    row.detection_fraction = summary.detection_fraction;
    row.mean_false_alarms = summary.mean_false_alarms;
    row.threshold = result.calibration.threshold_for(cfg.detectors[i].id);
    row.reps = cfg.replicates;
    row.seed = *cfg.seed;
    result.table.rows.push_back(std::move(row));
  }
  return result;
}

}  // namespace seqks

#endif  // SEQKS_EXPERIMENT_HPP_

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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "seqks/seqks.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitAlarm = 3;

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
};

seqks::ExperimentConfig load_config(const CommonOpts& opts) {
  if (opts.config_path.empty()) {
    throw seqks::ConfigError("config", "--config is required");
  }
  auto cfg = seqks::ExperimentConfig::load_file(opts.config_path);
  if (opts.seed) cfg.seed = opts.seed;
  if (!opts.out_path.empty()) cfg.out_path = opts.out_path;
  return cfg;
}

int run_calibrate(const CommonOpts& opts) {
  auto cfg = load_config(opts);
  auto report = seqks::run_calibration(cfg);
  std::cout << seqks::format_calibration_console(report);
  if (!cfg.out_path.empty()) {
    std::ofstream out(cfg.out_path);
    if (!out) throw seqks::Error("cannot open output file: " + cfg.out_path);
    out << seqks::calibration_to_json(report).dump(2) << '\n';
  }
  return kExitOk;
}

int run_benchmark(const CommonOpts& opts) {
  auto cfg = load_config(opts);
  auto result = seqks::run_benchmark(cfg);
  std::cout << seqks::format_calibration_console(result.calibration) << '\n';
  std::cout << seqks::format_results_console(result.table);
  if (!cfg.out_path.empty()) {
    std::ofstream out(cfg.out_path);
    if (!out) throw seqks::Error("cannot open output file: " + cfg.out_path);
    seqks::write_results_csv(out, result.table);
  }
  return kExitOk;
}

struct MonitorOpts {
  std::string spectrum_path;
  std::optional<std::size_t> winsorize_at;
  std::size_t window = 50;
  std::optional<double> threshold;
  std::int64_t horizon = 1000;
  double alpha = 1.0;
  bool halt_on_alarm = false;
  std::string input_path;
  std::string out_path;
};

int run_monitor(const MonitorOpts& opts) {
  auto spectrum = seqks::load_spectrum_file(opts.spectrum_path, opts.winsorize_at);
  const std::size_t dim = spectrum.density.dim();
  double threshold =
      opts.threshold.value_or(seqks::threshold_from_bound(
          {opts.horizon, opts.window, opts.alpha}));
  seqks::KsWindowDetector detector(
      spectrum.cdf(),
      seqks::DetectorConfig{opts.window, threshold, seqks::DetectorMode::kBinned});

  std::ifstream file_in;
  if (!opts.input_path.empty() && opts.input_path != "-") {
    file_in.open(opts.input_path);
    if (!file_in) {
      throw seqks::ConfigError("input", "cannot open " + opts.input_path);
    }
  }
  std::istream& in = file_in.is_open() ? file_in : std::cin;

  std::ofstream file_out;
  if (!opts.out_path.empty() && opts.out_path != "-") {
    file_out.open(opts.out_path);
    if (!file_out) throw seqks::Error("cannot open output file: " + opts.out_path);
  }
  std::ostream& out = file_out.is_open() ? file_out : std::cout;

  std::string line;
  std::size_t line_no = 0;
  std::int64_t ingested = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    seqks::StreamRow row;
    try {
      row = seqks::parse_stream_row(line, line_no);
    } catch (const seqks::ParseError& e) {
      std::cerr << "error: " << e.what() << " (row skipped)\n";
      continue;
    }
    if (row.counts.size() != dim) {
      std::cerr << "fatal: line " << line_no << " carries " << row.counts.size()
                << " bins, spectrum has " << dim << '\n';
      return kExitRuntime;
    }
    ++ingested;
    seqks::StepOutcome outcome =
        detector.step(seqks::CountVector(std::move(row.counts)));
    // Report in the stream's own clock; rows are treated as consecutive.
    outcome.argmax_start += row.t - ingested;
    outcome.t = row.t;
    out << seqks::format_monitor_line(outcome) << '\n';
    if (outcome.alarm && opts.halt_on_alarm) {
      out.flush();
      return kExitAlarm;
    }
  }
  return kExitOk;
}

struct IngestOpts {
  std::string spectrum_path;
  std::optional<std::size_t> winsorize_at;
};

int run_ingest_check(const IngestOpts& opts) {
  auto spectrum = seqks::load_spectrum_file(opts.spectrum_path, opts.winsorize_at);
  seqks::SpectrumCdf cdf = spectrum.cdf();
  std::cout << "ok: " << spectrum.density.dim() << " bins";
  if (spectrum.original_bins != spectrum.density.dim()) {
    std::cout << " (winsorized from " << spectrum.original_bins << ")";
  }
  std::cout << ", column " << spectrum.value_column << ", cdf top "
            << seqks::format_double(cdf.cdf(cdf.dim() - 1)) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming change-in-distribution monitor over binned count data"};
  app.require_subcommand(1);

  CommonOpts calibrate_opts;
  auto* calibrate = app.add_subcommand(
      "calibrate", "Compute detector thresholds for a configured experiment");
  calibrate->add_option("--config", calibrate_opts.config_path, "Experiment config (JSON)");
  calibrate->add_option("--seed", calibrate_opts.seed, "Override the config seed");
  calibrate->add_option("--out", calibrate_opts.out_path, "Write a JSON report here");

  CommonOpts bench_opts;
  auto* benchmark = app.add_subcommand(
      "benchmark", "Run a replicated detection experiment and tabulate delays");
  benchmark->add_option("--config", bench_opts.config_path, "Experiment config (JSON)");
  benchmark->add_option("--seed", bench_opts.seed, "Override the config seed");
  benchmark->add_option("--out", bench_opts.out_path, "Write the results CSV here");

  MonitorOpts monitor_opts;
  auto* monitor = app.add_subcommand(
      "monitor", "Watch a count stream and emit JSON alarm events");
  monitor->add_option("--spectrum", monitor_opts.spectrum_path,
                      "Reference spectrum CSV (bin,weight or bin,count)")
      ->required();
  monitor->add_option("--winsorize-at", monitor_opts.winsorize_at,
                      "Fold bins above this one into it");
  monitor->add_option("--window", monitor_opts.window, "Window size L");
  monitor->add_option("--threshold", monitor_opts.threshold,
                      "Alarm threshold; default derives from the bound");
  monitor->add_option("--horizon", monitor_opts.horizon,
                      "Horizon T for the bound-derived threshold");
  monitor->add_option("--alpha", monitor_opts.alpha,
                      "Tolerated expected false alarms for the bound");
  monitor->add_flag("--halt-on-alarm", monitor_opts.halt_on_alarm,
                    "Exit with code 3 on the first alarm");
  monitor->add_option("--input", monitor_opts.input_path,
                      "Stream CSV (t,x_1,...,x_D); default stdin");
  monitor->add_option("--out", monitor_opts.out_path,
                      "Write JSON lines here; default stdout");

  IngestOpts ingest_opts;
  auto* ingest = app.add_subcommand(
      "ingest-check", "Validate a spectrum file and report its shape");
  ingest->add_option("--spectrum", ingest_opts.spectrum_path,
                     "Spectrum CSV to validate")
      ->required();
  ingest->add_option("--winsorize-at", ingest_opts.winsorize_at,
                     "Fold bins above this one into it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (calibrate->parsed()) return run_calibrate(calibrate_opts);
    if (benchmark->parsed()) return run_benchmark(bench_opts);
    if (monitor->parsed()) return run_monitor(monitor_opts);
    if (ingest->parsed()) return run_ingest_check(ingest_opts);
    std::cerr << "error: no subcommand\n";
    return kExitConfig;
  } catch (const seqks::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const seqks::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

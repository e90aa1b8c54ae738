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

#ifndef SEQKS_IO_HPP_
#define SEQKS_IO_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "seqks/detector.hpp"
#include "seqks/error.hpp"
#include "seqks/spectrum.hpp"

namespace seqks {

// ---------------------------------------------------------------------------
// Number round-tripping

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw Error("double formatting failed");
  return std::string(buf, ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline double parse_double_field(std::string_view s, std::size_t line_no) {
  s = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError(line_no, "expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

inline std::int64_t parse_int_field(std::string_view s, std::size_t line_no) {
  s = trim(s);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError(line_no, "expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

inline std::uint64_t parse_uint_field(std::string_view s, std::size_t line_no) {
  s = trim(s);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError(line_no,
                     "expected an unsigned integer, got '" + std::string(s) + "'");
  }
  return v;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Spectrum files: CSV with header `bin,weight` or `bin,count`

struct LoadedSpectrum {
  Density density;
  std::string value_column;     // "weight" or "count"
  std::size_t original_bins = 0;  // before winsorization

  SpectrumCdf cdf() const { return SpectrumCdf(density); }
};

inline LoadedSpectrum load_spectrum_csv(
    std::istream& in, std::optional<std::size_t> winsorize_at = std::nullopt) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty spectrum file");
  ++line_no;
  auto header = detail::split_csv(detail::trim(line));
  if (header.size() != 2 || detail::trim(header[0]) != "bin" ||
      (detail::trim(header[1]) != "weight" && detail::trim(header[1]) != "count")) {
    throw ParseError(line_no, "header must be 'bin,weight' or 'bin,count'");
  }
  std::string value_column(detail::trim(header[1]));
  std::vector<double> weights;
  std::optional<std::int64_t> prev_bin;
  while (std::getline(in, line)) {
    ++line_no;
    auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    auto fields = detail::split_csv(trimmed);
    if (fields.size() != 2) {
      throw ParseError(line_no, "expected 2 fields, got " +
                                    std::to_string(fields.size()));
    }
    std::int64_t bin = detail::parse_int_field(fields[0], line_no);
    if (prev_bin && bin <= *prev_bin) {
      throw ParseError(line_no, "bin indices must be strictly increasing");
    }
    prev_bin = bin;
    double w = detail::parse_double_field(fields[1], line_no);
    if (!(w >= 0.0)) throw ParseError(line_no, "negative weight");
    if (!std::isfinite(w)) throw ParseError(line_no, "non-finite weight");
    weights.push_back(w);
  }
  if (weights.empty()) throw ParseError(line_no, "no spectrum rows");
  LoadedSpectrum out;
  out.original_bins = weights.size();
  if (winsorize_at && *winsorize_at >= 1 && *winsorize_at < weights.size()) {
    // Fold every bin above the cutoff into the last kept bin.
    double tail = 0.0;
    for (std::size_t j = *winsorize_at; j < weights.size(); ++j) {
      tail += weights[j];
    }
    weights.resize(*winsorize_at);
    weights.back() += tail;
  }
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw ParseError(line_no, "spectrum has zero total mass");
  out.density = Density(std::move(weights));
  out.value_column = std::move(value_column);
  return out;
}

inline LoadedSpectrum load_spectrum_file(
    const std::string& path,
    std::optional<std::size_t> winsorize_at = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open spectrum file: " + path);
  return load_spectrum_csv(in, winsorize_at);
}

inline void write_spectrum_csv(std::ostream& out, const Density& d) {
  out << "bin,weight\n";
  for (std::size_t j = 0; j < d.dim(); ++j) {
    out << (j + 1) << ',' << format_double(d.pmf(j)) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Stream rows: `t,x_1,...,x_D`

struct StreamRow {
  std::int64_t t = 0;
  std::vector<std::int64_t> counts;
};

inline StreamRow parse_stream_row(std::string_view line, std::size_t line_no) {
  auto fields = detail::split_csv(detail::trim(line));
  if (fields.size() < 2) {
    throw ParseError(line_no, "expected 't,x_1,...,x_D'");
  }
  StreamRow row;
  row.t = detail::parse_int_field(fields[0], line_no);
  row.counts.reserve(fields.size() - 1);
  for (std::size_t i = 1; i < fields.size(); ++i) {
    std::int64_t c = detail::parse_int_field(fields[i], line_no);
    if (c < 0) throw ParseError(line_no, "negative count");
    row.counts.push_back(c);
  }
  return row;
}

/// One line-delimited JSON alarm event for the monitor output stream.
inline std::string format_monitor_line(const StepOutcome& out) {
  std::string s = "{\"t\":" + std::to_string(out.t);
  s += ",\"w_stat\":" + format_double(out.w_stat);
  s += out.alarm ? ",\"alarm\":true" : ",\"alarm\":false";
  s += ",\"argmax_start\":" + std::to_string(out.argmax_start);
  if (out.skipped) s += ",\"skipped\":true";
  s += "}";
  return s;
}

// ---------------------------------------------------------------------------
// Results tables

struct ResultsRow {
  std::string scenario;
  std::string detector;
  double mean_delay = 0.0;
  double detection_fraction = 0.0;
  double mean_false_alarms = 0.0;
  double threshold = 0.0;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
};

struct ResultsTable {
  std::vector<ResultsRow> rows;
};

namespace detail {

inline void check_csv_id(const std::string& s) {
  if (s.empty()) throw Error("empty identifier in results table");
  for (char c : s) {
    if (c == ',' || c == '\n' || c == '\r') {
      throw Error("identifier contains CSV delimiters: " + s);
    }
  }
}

}  // namespace detail

inline constexpr std::string_view kResultsHeader =
    "scenario,detector,mean_delay,detection_fraction,mean_false_alarms,"
    "threshold,reps,seed";

inline void write_results_csv(std::ostream& out, const ResultsTable& table) {
  out << kResultsHeader << '\n';
  for (const auto& r : table.rows) {
    detail::check_csv_id(r.scenario);
    detail::check_csv_id(r.detector);
    out << r.scenario << ',' << r.detector << ',' << format_double(r.mean_delay)
        << ',' << format_double(r.detection_fraction) << ','
        << format_double(r.mean_false_alarms) << ','
        << format_double(r.threshold) << ',' << r.reps << ',' << r.seed << '\n';
  }
}

inline ResultsTable read_results_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty results file");
  ++line_no;
  if (detail::trim(line) != kResultsHeader) {
    throw ParseError(line_no, "unexpected results header");
  }
  ResultsTable table;
  while (std::getline(in, line)) {
    ++line_no;
    auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    auto f = detail::split_csv(trimmed);
    if (f.size() != 8) {
      throw ParseError(line_no,
                       "expected 8 fields, got " + std::to_string(f.size()));
    }
    ResultsRow r;
    r.scenario = std::string(detail::trim(f[0]));
    r.detector = std::string(detail::trim(f[1]));
    r.mean_delay = detail::parse_double_field(f[2], line_no);
    r.detection_fraction = detail::parse_double_field(f[3], line_no);
    r.mean_false_alarms = detail::parse_double_field(f[4], line_no);
    r.threshold = detail::parse_double_field(f[5], line_no);
    r.reps = detail::parse_int_field(f[6], line_no);
    r.seed = detail::parse_uint_field(f[7], line_no);
    table.rows.push_back(std::move(r));
  }
  return table;
}

/// Compact console view: scenarios as rows, detectors as columns, mean delay
/// in each cell.
inline std::string format_results_console(const ResultsTable& table) {
  std::vector<std::string> scenarios;
  std::vector<std::string> detectors;
  for (const auto& r : table.rows) {
    if (std::find(scenarios.begin(), scenarios.end(), r.scenario) ==
        scenarios.end()) {
      scenarios.push_back(r.scenario);
    }
    if (std::find(detectors.begin(), detectors.end(), r.detector) ==
        detectors.end()) {
      detectors.push_back(r.detector);
    }
  }
  auto cell = [&](const std::string& sc, const std::string& det) -> std::string {
    for (const auto& r : table.rows) {
      if (r.scenario == sc && r.detector == det) {
        std::ostringstream os;
        os << std::fixed << std::setprecision(1) << r.mean_delay;
        if (r.detection_fraction < 1.0) os << '*';
        return os.str();
      }
    }
    return "-";
  };
  std::size_t first_col = std::string("scenario").size();
  for (const auto& sc : scenarios) first_col = std::max(first_col, sc.size());
  std::vector<std::size_t> widths;
  for (const auto& det : detectors) {
    std::size_t w = det.size();
    for (const auto& sc : scenarios) w = std::max(w, cell(sc, det).size());
    widths.push_back(w);
  }
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(first_col)) << "scenario";
  for (std::size_t i = 0; i < detectors.size(); ++i) {
    os << "  " << std::setw(static_cast<int>(widths[i])) << detectors[i];
  }
  os << '\n';
  for (const auto& sc : scenarios) {
    os << std::left << std::setw(static_cast<int>(first_col)) << sc;
    for (std::size_t i = 0; i < detectors.size(); ++i) {
      os << "  " << std::setw(static_cast<int>(widths[i])) << cell(sc, detectors[i]);
    }
    os << '\n';
  }
  os << "(* = some replicates censored; mean delay in steps)\n";
  return os.str();
}

}  // namespace seqks

#endif  // SEQKS_IO_HPP_

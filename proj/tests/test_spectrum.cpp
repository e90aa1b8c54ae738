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
#include <vector>

#include "seqks/error.hpp"
#include "seqks/rng.hpp"
#include "seqks/spectrum.hpp"

namespace {

using Catch::Matchers::WithinAbs;
using seqks::CountVector;
using seqks::Density;
using seqks::SpectrumCdf;

TEST_CASE("Density normalizes arbitrary positive weights", "[spectrum]") {
  Density d({2.0, 6.0, 2.0});
  REQUIRE(d.dim() == 3);
  REQUIRE_THAT(d.pmf(0), WithinAbs(0.2, 1e-15));
  REQUIRE_THAT(d.pmf(1), WithinAbs(0.6, 1e-15));
  REQUIRE_THAT(d.pmf(2), WithinAbs(0.2, 1e-15));
  double sum = 0.0;
  for (std::size_t j = 0; j < d.dim(); ++j) sum += d.pmf(j);
  REQUIRE_THAT(sum, WithinAbs(1.0, 1e-14));
}

TEST_CASE("Density rejects degenerate input", "[spectrum]") {
  REQUIRE_THROWS_AS(Density(std::vector<double>{}), seqks::DomainError);
  REQUIRE_THROWS_AS(Density({1.0, -0.5}), seqks::DomainError);
  REQUIRE_THROWS_AS(Density({0.0, 0.0}), seqks::DomainError);
  REQUIRE_THROWS_AS(Density({1.0, std::nan("")}), seqks::DomainError);
  REQUIRE_THROWS_AS(Density({std::numeric_limits<double>::infinity()}),
                    seqks::DomainError);
}

TEST_CASE("mix_densities is a convex combination", "[spectrum]") {
  Density f0({0.5, 0.5, 0.0});
  Density fa({0.0, 0.0, 1.0});
  Density half = seqks::mix_densities(f0, fa, 0.5);
  REQUIRE_THAT(half.pmf(0), WithinAbs(0.25, 1e-15));
  REQUIRE_THAT(half.pmf(2), WithinAbs(0.5, 1e-15));

  Density all0 = seqks::mix_densities(f0, fa, 1.0);
  for (std::size_t j = 0; j < f0.dim(); ++j) {
    REQUIRE(all0.pmf(j) == f0.pmf(j));
  }
  Density alla = seqks::mix_densities(f0, fa, 0.0);
  for (std::size_t j = 0; j < fa.dim(); ++j) {
    REQUIRE(alla.pmf(j) == fa.pmf(j));
  }
}

TEST_CASE("mix_densities validates arguments", "[spectrum]") {
  Density f0({0.5, 0.5});
  Density f3({0.2, 0.3, 0.5});
  REQUIRE_THROWS_AS(seqks::mix_densities(f0, f3, 0.5), seqks::DimensionError);
  REQUIRE_THROWS_AS(seqks::mix_densities(f0, f0, 1.5), seqks::DomainError);
  REQUIRE_THROWS_AS(seqks::mix_densities(f0, f0, -0.1), seqks::DomainError);
}

TEST_CASE("SpectrumCdf caps the top at exactly one", "[spectrum]") {
  seqks::Rng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> w(1 + rng.next_below(64));
    for (double& x : w) x = rng.next_double() + 1e-6;
    SpectrumCdf cdf((Density(w)));
    REQUIRE(cdf.cdf(cdf.dim() - 1) == 1.0);
    double prev = 0.0;
    for (std::size_t j = 0; j < cdf.dim(); ++j) {
      REQUIRE(cdf.cdf(j) >= prev);
      REQUIRE(cdf.cdf(j) <= 1.0);
      prev = cdf.cdf(j);
    }
  }
}

TEST_CASE("SpectrumCdf cdf increments match the pmf", "[spectrum]") {
  SpectrumCdf cdf(std::vector<double>{1.0, 3.0, 4.0, 2.0});
  REQUIRE_THAT(cdf.cdf(0), WithinAbs(0.1, 1e-14));
  REQUIRE_THAT(cdf.cdf(1), WithinAbs(0.4, 1e-14));
  REQUIRE_THAT(cdf.cdf(2), WithinAbs(0.8, 1e-14));
  REQUIRE(cdf.cdf(3) == 1.0);
  for (std::size_t j = 1; j < cdf.dim(); ++j) {
    REQUIRE_THAT(cdf.cdf(j) - cdf.cdf(j - 1), WithinAbs(cdf.pmf(j), 1e-12));
  }
  Density back = cdf.density();
  REQUIRE(back.dim() == 4);
  REQUIRE_THAT(back.pmf(1), WithinAbs(0.3, 1e-14));
}

TEST_CASE("CountVector totals and validation", "[spectrum]") {
  CountVector x({3, 0, 7});
  REQUIRE(x.dim() == 3);
  REQUIRE(x.total() == 10);
  REQUIRE(x[2] == 7);
  REQUIRE_THROWS_AS(CountVector({1, -2}), seqks::DomainError);
  CountVector z = CountVector::zeros(5);
  REQUIRE(z.dim() == 5);
  REQUIRE(z.total() == 0);
}

TEST_CASE("RawSampleBatch reports its size", "[spectrum]") {
  seqks::RawSampleBatch batch;
  REQUIRE(batch.size() == 0);
  batch.values = {0.5, -1.0, 2.5};
  REQUIRE(batch.size() == 3);
}

}  // namespace

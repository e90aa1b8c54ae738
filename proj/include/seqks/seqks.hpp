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

#ifndef SEQKS_SEQKS_HPP_
#define SEQKS_SEQKS_HPP_

#include "seqks/baselines.hpp"
#include "seqks/calibration.hpp"
#include "seqks/detector.hpp"
#include "seqks/error.hpp"
#include "seqks/experiment.hpp"
#include "seqks/io.hpp"
#include "seqks/ks.hpp"
#include "seqks/numerics.hpp"
#include "seqks/parallel.hpp"
#include "seqks/rng.hpp"
#include "seqks/simulation.hpp"
#include "seqks/spectrum.hpp"

#endif  // SEQKS_SEQKS_HPP_

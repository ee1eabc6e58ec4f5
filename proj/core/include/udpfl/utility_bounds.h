/*
 * Copyright 2026 The UDP-FL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef UDPFL_UTILITY_BOUNDS_H_
#define UDPFL_UTILITY_BOUNDS_H_

#include <cstdint>

#include "udpfl/mechanisms.h"

namespace udpfl {

// Expected l1 perturbation of an m-coordinate model after T noisy rounds.
struct BoundQuery {
  MechanismParams mechanism;
  std::int64_t loss_length = 1;  // m
  std::int64_t rounds = 1;       // T
};

enum class BoundMode {
  // Literal published closed form (kept for comparison).
  kAsPublished,
  // m * T * E|X| from the implemented density.
  kNumeric,
};

// m T sigma sqrt(2/pi). kAsPublished yields sqrt(2 m^2 sigma^2 T^2 / pi),
// which is the same number.
double L1BoundGaussian(const BoundQuery& query);
// m T b.
double L1BoundLaplace(const BoundQuery& query);
double L1BoundStaircase(const BoundQuery& query, BoundMode mode);

// Dispatches on the mechanism kind; kAsPublished only changes the
// staircase result.
double L1Bound(const BoundQuery& query, BoundMode mode = BoundMode::kNumeric);

struct OptimalNuResult {
  double nu;
  // Minimal E|X| divided by the sensitivity: e^{lambda/2} / (e^lambda - 1).
  double min_amplitude_per_sensitivity;
};

// Amplitude-minimizing staircase shape for a given lambda:
// nu = 1 / (1 + e^{lambda/2}). For very large lambda nu is clamped to the
// smallest normal double so the resulting mechanism stays valid.
OptimalNuResult OptimalNu(double lambda);

}  // namespace udpfl

#endif  // UDPFL_UTILITY_BOUNDS_H_

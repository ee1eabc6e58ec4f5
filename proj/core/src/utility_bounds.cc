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

#include "udpfl/utility_bounds.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "udpfl/errors.h"

namespace udpfl {
namespace {

void CheckQuery(const BoundQuery& query, MechanismKind expected) {
  query.mechanism.Validate();
  if (query.mechanism.kind != expected) {
    throw MismatchError("bound expects a " +
                        std::string(MechanismName(expected)) +
                        " mechanism, got " +
                        std::string(MechanismName(query.mechanism.kind)));
  }
  if (query.loss_length < 1 || query.rounds < 1) {
    throw DomainError("loss length and rounds must be positive");
  }
}

double Multiplier(const BoundQuery& query) {
  return static_cast<double>(query.loss_length) *
         static_cast<double>(query.rounds);
}

}  // namespace

double L1BoundGaussian(const BoundQuery& query) {
  CheckQuery(query, MechanismKind::kGaussian);
  return Multiplier(query) * query.mechanism.scale *
         std::sqrt(2.0 / std::numbers::pi);
}

double L1BoundLaplace(const BoundQuery& query) {
  CheckQuery(query, MechanismKind::kLaplace);
  return Multiplier(query) * query.mechanism.scale;
}

double L1BoundStaircase(const BoundQuery& query, BoundMode mode) {
  CheckQuery(query, MechanismKind::kStaircase);
  if (mode == BoundMode::kNumeric) {
    return Multiplier(query) * ExpectedAbsNoise(query.mechanism);
  }
  const double nu = query.mechanism.nu;
  const double d = query.mechanism.sensitivity;
  const double r = std::exp(-query.mechanism.scale);
  return Multiplier(query) / (1.0 - r) *
         (nu * nu * d * d + r * d * d - r * nu * nu * d * d + d * r);
}

double L1Bound(const BoundQuery& query, BoundMode mode) {
  switch (query.mechanism.kind) {
    case MechanismKind::kGaussian:
      return L1BoundGaussian(query);
    case MechanismKind::kLaplace:
      return L1BoundLaplace(query);
    case MechanismKind::kStaircase:
      return L1BoundStaircase(query, mode);
  }
  return 0.0;
}

OptimalNuResult OptimalNu(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("lambda must be a finite positive real");
  }
  const double half = std::exp(-0.5 * lambda);
  double nu = half / (1.0 + half);
  nu = std::max(nu, std::numeric_limits<double>::min());
  // e^{lambda/2} / (e^lambda - 1) = e^{-lambda/2} / (1 - e^{-lambda}).
  const double amplitude = half / -std::expm1(-lambda);
  return {nu, amplitude};
}

}  // namespace udpfl

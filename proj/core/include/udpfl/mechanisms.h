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

#ifndef UDPFL_MECHANISMS_H_
#define UDPFL_MECHANISMS_H_

#include <optional>
#include <string>
#include <string_view>

#include "udpfl/noise_stream.h"

namespace udpfl {

enum class MechanismKind { kGaussian, kLaplace, kStaircase };

inline constexpr MechanismKind kAllMechanismKinds[] = {
    MechanismKind::kGaussian, MechanismKind::kLaplace,
    MechanismKind::kStaircase};

// "gaussian", "laplace", "staircase".
std::string_view MechanismName(MechanismKind kind);
std::optional<MechanismKind> ParseMechanismKind(std::string_view name);

// One additive noise mechanism.
//
// `scale` is sigma for Gaussian, b for Laplace and the per-release pure-DP
// level lambda for Staircase. `nu` is the inner sub-band fraction of the
// staircase and is ignored by the other two kinds.
struct MechanismParams {
  MechanismKind kind = MechanismKind::kGaussian;
  double sensitivity = 1.0;
  double scale = 1.0;
  double nu = 0.5;

  static MechanismParams Gaussian(double sensitivity, double sigma);
  static MechanismParams Laplace(double sensitivity, double b);
  static MechanismParams Staircase(double sensitivity, double lambda,
                                   double nu);

  // Throws DomainError when a field is outside its range.
  void Validate() const;

  friend bool operator==(const MechanismParams&,
                         const MechanismParams&) = default;
};

std::string DebugString(const MechanismParams& params);

// Probability density of the zero-centred noise at x.
double Density(const MechanismParams& params, double x);

// One draw from Density(params, .).
double SampleNoise(const MechanismParams& params, NoiseStream& stream);

// Renyi divergence of order alpha between the noise density and the same
// density shifted by the sensitivity. Exact for all three kinds; the
// staircase value is a finite sum over the constant pieces of the two
// densities on [0, sensitivity] plus the two geometric tails.
double Rdp(const MechanismParams& params, double alpha);

// Pure-DP level of one release: lambda (Staircase), sensitivity / b
// (Laplace), +infinity for Gaussian.
double PureDpEpsilon(const MechanismParams& params);

// E|X| for X drawn from the mechanism.
double ExpectedAbsNoise(const MechanismParams& params);

// Normalizing constant of the staircase density (value on the innermost
// band).
double StaircaseNormalizer(double sensitivity, double lambda, double nu);

// Literal closed forms as printed in the source publication. They disagree
// with the exact quantities above (missing square on the Gaussian
// sensitivity, e^{-1} in place of e^{-lambda} in the staircase normalizer)
// and exist for side-by-side reporting only. Nothing in the accountant
// consumes them.
namespace published {

double GaussianRdp(double sensitivity, double sigma, double alpha);
double StaircaseNormalizer(double sensitivity, double lambda, double nu);
double StaircaseDensity(const MechanismParams& params, double x);
double StaircaseRdp(double lambda, double nu, double alpha);

}  // namespace published

}  // namespace udpfl

#endif  // UDPFL_MECHANISMS_H_

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

#include "udpfl/mechanisms.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "udpfl/errors.h"

namespace udpfl {
namespace {

// log(exp(a) + exp(b) + ...), stable for large arguments.
template <std::size_t N>
double LogSumExp(const std::array<double, N>& terms, std::size_t count) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) top = std::max(top, terms[i]);
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (std::size_t i = 0; i < count; ++i) sum += std::exp(terms[i] - top);
  return top + std::log(sum);
}

void CheckAlpha(double alpha) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw DomainError("Renyi order alpha must be a finite real > 1");
  }
}

// Band index and position within the band of |x| on the staircase.
double StaircaseDensityWithNormalizer(const MechanismParams& p, double x,
                                      double normalizer) {
  const double t = std::abs(x) / p.sensitivity;
  const double band = std::floor(t);
  const double frac = t - band;
  const double exponent = frac < p.nu ? band : band + 1.0;
  return std::exp(-exponent * p.scale) * normalizer;
}

double LaplaceLogMoment(double sensitivity, double b, double alpha) {
  const double ratio = sensitivity / b;
  const std::array<double, 2> terms = {
      std::log(alpha / (2.0 * alpha - 1.0)) + ratio * (alpha - 1.0),
      std::log((alpha - 1.0) / (2.0 * alpha - 1.0)) - ratio * alpha};
  return LogSumExp(terms, 2);
}

double StaircaseLogMoment(const MechanismParams& p, double alpha) {
  const double lambda = p.scale;
  const double delta = p.sensitivity;
  const double nu = p.nu;
  // Left tail (x < 0): Q = e^{-lambda} P, contributes 1/2 e^{(alpha-1)lambda}.
  // Right tail (x > delta): Q = e^{lambda} P, contributes 1/2 e^{-alpha lambda}.
  std::array<double, 5> terms{};
  std::size_t n = 0;
  terms[n++] = std::log(0.5) + (alpha - 1.0) * lambda;
  terms[n++] = std::log(0.5) - alpha * lambda;

  // On [0, delta], P(x) = f(x) and Q(x) = f(delta - x); both are piecewise
  // constant with breakpoints at nu*delta and (1-nu)*delta.
  const double log_y = std::log(StaircaseNormalizer(delta, lambda, nu));
  std::array<double, 4> cuts = {0.0, nu * delta, (1.0 - nu) * delta, delta};
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double width = cuts[i + 1] - cuts[i];
    if (width <= 0.0) continue;
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const double log_p = mid < nu * delta ? log_y : log_y - lambda;
    const double log_q = (delta - mid) < nu * delta ? log_y : log_y - lambda;
    terms[n++] = std::log(width) + alpha * log_p + (1.0 - alpha) * log_q;
  }
  return LogSumExp(terms, n);
}

}  // namespace

std::string_view MechanismName(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kGaussian:
      return "gaussian";
    case MechanismKind::kLaplace:
      return "laplace";
    case MechanismKind::kStaircase:
      return "staircase";
  }
  return "unknown";
}

std::optional<MechanismKind> ParseMechanismKind(std::string_view name) {
  for (MechanismKind kind : kAllMechanismKinds) {
    if (MechanismName(kind) == name) return kind;
  }
  return std::nullopt;
}

MechanismParams MechanismParams::Gaussian(double sensitivity, double sigma) {
  return {MechanismKind::kGaussian, sensitivity, sigma, 0.5};
}

MechanismParams MechanismParams::Laplace(double sensitivity, double b) {
  return {MechanismKind::kLaplace, sensitivity, b, 0.5};
}

MechanismParams MechanismParams::Staircase(double sensitivity, double lambda,
                                           double nu) {
  return {MechanismKind::kStaircase, sensitivity, lambda, nu};
}

void MechanismParams::Validate() const {
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    throw DomainError("mechanism sensitivity must be a finite positive real");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("mechanism scale must be a finite positive real");
  }
  if (kind == MechanismKind::kStaircase && !(nu > 0.0 && nu < 1.0)) {
    throw DomainError("staircase nu must lie in (0, 1)");
  }
}

std::string DebugString(const MechanismParams& params) {
  std::ostringstream out;
  out << MechanismName(params.kind) << "(sensitivity=" << params.sensitivity
      << ", scale=" << params.scale;
  if (params.kind == MechanismKind::kStaircase) out << ", nu=" << params.nu;
  out << ")";
  return out.str();
}

double StaircaseNormalizer(double sensitivity, double lambda, double nu) {
  const double r = std::exp(-lambda);
  return -std::expm1(-lambda) / (2.0 * sensitivity * (nu + r * (1.0 - nu)));
}

double Density(const MechanismParams& params, double x) {
  params.Validate();
  if (!std::isfinite(x)) throw DomainError("density argument must be finite");
  switch (params.kind) {
    case MechanismKind::kGaussian: {
      const double z = x / params.scale;
      return std::exp(-0.5 * z * z) /
             (params.scale * std::sqrt(2.0 * std::numbers::pi));
    }
    case MechanismKind::kLaplace:
      return std::exp(-std::abs(x) / params.scale) / (2.0 * params.scale);
    case MechanismKind::kStaircase:
      return StaircaseDensityWithNormalizer(
          params, x,
          StaircaseNormalizer(params.sensitivity, params.scale, params.nu));
  }
  return 0.0;
}

double SampleNoise(const MechanismParams& params, NoiseStream& stream) {
  params.Validate();
  switch (params.kind) {
    case MechanismKind::kGaussian:
      return params.scale * stream.StandardNormal();
    case MechanismKind::kLaplace: {
      const double sign = stream.Uniform() < 0.5 ? -1.0 : 1.0;
      return sign * params.scale * -std::log(stream.UniformOpen());
    }
    case MechanismKind::kStaircase: {
      const double lambda = params.scale;
      const double nu = params.nu;
      const double delta = params.sensitivity;
      const double sign = stream.Uniform() < 0.5 ? -1.0 : 1.0;
      // P(band >= i) = e^{-i lambda}.
      const double band =
          std::floor(-std::log(stream.UniformOpen()) / lambda);
      const double r = std::exp(-lambda);
      const double p_inner = nu / (nu + r * (1.0 - nu));
      const double u = stream.Uniform();
      double offset;
      if (stream.Uniform() < p_inner) {
        offset = u * nu;
      } else {
        offset = nu + u * (1.0 - nu);
      }
      return sign * (band + offset) * delta;
    }
  }
  return 0.0;
}

double Rdp(const MechanismParams& params, double alpha) {
  params.Validate();
  CheckAlpha(alpha);
  switch (params.kind) {
    case MechanismKind::kGaussian: {
      const double ratio = params.sensitivity / params.scale;
      return 0.5 * alpha * ratio * ratio;
    }
    case MechanismKind::kLaplace:
      return std::max(0.0, LaplaceLogMoment(params.sensitivity, params.scale,
                                            alpha) /
                               (alpha - 1.0));
    case MechanismKind::kStaircase:
      return std::max(0.0, StaircaseLogMoment(params, alpha) / (alpha - 1.0));
  }
  return 0.0;
}

double PureDpEpsilon(const MechanismParams& params) {
  params.Validate();
  switch (params.kind) {
    case MechanismKind::kGaussian:
      return std::numeric_limits<double>::infinity();
    case MechanismKind::kLaplace:
      return params.sensitivity / params.scale;
    case MechanismKind::kStaircase:
      return params.scale;
  }
  return std::numeric_limits<double>::infinity();
}

double ExpectedAbsNoise(const MechanismParams& params) {
  params.Validate();
  switch (params.kind) {
    case MechanismKind::kGaussian:
      return params.scale * std::sqrt(2.0 / std::numbers::pi);
    case MechanismKind::kLaplace:
      return params.scale;
    case MechanismKind::kStaircase: {
      // Band rho contributes y e^{-rho lambda} delta^2 / 2 *
      //   [2 rho (nu + r(1-nu)) + nu^2 + r(1-nu^2)]; the geometric sums over
      // rho are taken in closed form.
      const double nu = params.nu;
      const double r = std::exp(-params.scale);
      const double one_minus_r = -std::expm1(-params.scale);
      return params.sensitivity *
             (r / one_minus_r +
              (nu * nu + r * (1.0 - nu * nu)) / (2.0 * (nu + r * (1.0 - nu))));
    }
  }
  return 0.0;
}

namespace published {

double GaussianRdp(double sensitivity, double sigma, double alpha) {
  CheckAlpha(alpha);
  return alpha * sensitivity / (2.0 * sigma * sigma);
}

double StaircaseNormalizer(double sensitivity, double lambda, double nu) {
  return (1.0 - std::exp(-1.0)) /
         (2.0 * sensitivity * (nu + std::exp(-lambda) * (1.0 - nu)));
}

double StaircaseDensity(const MechanismParams& params, double x) {
  params.Validate();
  if (params.kind != MechanismKind::kStaircase) {
    throw DomainError("published staircase density needs a staircase");
  }
  return StaircaseDensityWithNormalizer(
      params, x,
      StaircaseNormalizer(params.sensitivity, params.scale, params.nu));
}

double StaircaseRdp(double lambda, double nu, double alpha) {
  CheckAlpha(alpha);
  const double up = std::exp((alpha - 1.0) * lambda);
  const double down = std::exp(-alpha * lambda);
  // sgn(1/2 - nu) is defined as 0 for nu < 1/2 and 1 otherwise.
  const double sgn = nu < 0.5 ? 0.0 : 1.0;
  const double bracket = (up + down) * (1.0 - nu) +
                         std::abs(2.0 * nu - 1.0) * std::exp(-sgn * lambda);
  return 0.5 * up + 0.5 * down +
         bracket * (1.0 - std::exp(-1.0)) /
             (2.0 * (nu + std::exp(-lambda) * (1.0 - nu)));
}

}  // namespace published
}  // namespace udpfl

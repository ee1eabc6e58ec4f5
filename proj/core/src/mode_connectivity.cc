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

#include "udpfl/mode_connectivity.h"

#include <cmath>
#include <vector>

#include "udpfl/errors.h"

namespace udpfl {
namespace {

void CheckUnitInterval(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError(std::string(what) + " must lie in [0, 1]");
  }
}

}  // namespace

std::string_view CurveKindName(CurveKind kind) {
  return kind == CurveKind::kPolygonalChain ? "polygonal" : "bezier";
}

CurveSpec CurveSpec::WithMidpoint(CurveKind kind, ModelVector w1,
                                  ModelVector w2) {
  ModelVector theta = 0.5 * (w1 + w2);
  return {kind, std::move(w1), std::move(w2), std::move(theta)};
}

void CurveSpec::Validate() const {
  CheckSameDimension(w1, w2);
  CheckSameDimension(w1, theta);
}

ModelVector CurvePoint(const CurveSpec& spec, double p) {
  CheckUnitInterval(p, "curve parameter p");
  spec.Validate();
  if (p == 0.0) return spec.w1;
  if (p == 1.0) return spec.w2;
  ModelVector out(spec.w1.size());
  if (spec.kind == CurveKind::kPolygonalChain) {
    if (p <= 0.5) {
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = 2.0 * (p * spec.theta[i] + (0.5 - p) * spec.w1[i]);
      }
    } else {
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = 2.0 * ((p - 0.5) * spec.w2[i] + (1.0 - p) * spec.theta[i]);
      }
    }
  } else {
    const double a = (1.0 - p) * (1.0 - p);
    const double b = 2.0 * p * (1.0 - p);
    const double c = p * p;
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = a * spec.w1[i] + b * spec.theta[i] + c * spec.w2[i];
    }
  }
  return out;
}

double CurveBendWeight(CurveKind kind, double p) {
  CheckUnitInterval(p, "curve parameter p");
  if (kind == CurveKind::kPolygonalChain) {
    return p <= 0.5 ? 2.0 * p : 2.0 * (1.0 - p);
  }
  return 2.0 * p * (1.0 - p);
}

ModelVector TrainCurve(const CurveSpec& spec, const CurveTrainConfig& cfg,
                       NoiseStream& stream) {
  spec.Validate();
  if (cfg.steps < 0) throw DomainError("curve training steps must be >= 0");
  if (cfg.steps > 0 && (cfg.loss == nullptr || cfg.shard == nullptr)) {
    throw DomainError("curve training needs a loss oracle and a shard");
  }
  CurveSpec current = spec;
  for (int step = 0; step < cfg.steps; ++step) {
    const double p = stream.Uniform();
    const double weight = CurveBendWeight(current.kind, p);
    if (weight == 0.0) continue;
    const ModelVector point = CurvePoint(current, p);
    const ModelVector grad = cfg.loss->FullGradient(point, *cfg.shard);
    current.theta.Axpy(-cfg.learning_rate * weight, grad);
  }
  return current.theta;
}

double ExpectedCurveLoss(const CurveSpec& spec, const LossModel& loss,
                         const DatasetShard& shard, int samples,
                         NoiseStream& stream) {
  if (samples < 1) throw DomainError("need at least one sample");
  double total = 0.0;
  for (int i = 0; i < samples; ++i) {
    total += loss.Loss(CurvePoint(spec, stream.Uniform()), shard);
  }
  return total / samples;
}

ModelVector ThetaStar(double smoothness, const ModelVector& w_bar,
                      const ModelVector& v_bar) {
  if (!(smoothness > 0.0) || !std::isfinite(smoothness)) {
    throw DomainError("smoothness constant L must be a finite positive real");
  }
  CheckSameDimension(w_bar, v_bar);
  ModelVector out(w_bar.size());
  const double shift = 1.2 / smoothness;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = shift + 1.1 * w_bar[i] - 0.1 * v_bar[i];
  }
  return out;
}

ModelVector BezierFedAvgUpdate(const ModelVector& v, const ModelVector& theta,
                               const ModelVector& w, double r) {
  CheckUnitInterval(r, "Bezier parameter r");
  CheckSameDimension(v, theta);
  CheckSameDimension(v, w);
  const double a = (1.0 - r) * (1.0 - r);
  const double b = 2.0 * (r - r * r);
  const double c = r * r;
  ModelVector out(v.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = a * v[i] + b * theta[i] + c * w[i];
  }
  return out;
}

ModelVector ModeConnectAggregate(std::span<const ModelVector> models,
                                 const CurveTrainConfig& cfg,
                                 NoiseStream& stream) {
  if (models.empty()) throw DomainError("need at least one model to merge");
  std::vector<ModelVector> level(models.begin(), models.end());
  for (const ModelVector& m : level) CheckSameDimension(level.front(), m);
  while (level.size() > 1) {
    std::vector<ModelVector> next;
    next.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
      CurveSpec spec =
          CurveSpec::WithMidpoint(cfg.kind, level[i], level[i + 1]);
      next.push_back(cfg.steps > 0 ? TrainCurve(spec, cfg, stream)
                                   : std::move(spec.theta));
    }
    if (level.size() % 2 == 1) next.push_back(std::move(level.back()));
    level = std::move(next);
  }
  return level.front();
}

double ExtraRoundsBound(double sensitivity, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (!(sensitivity > 0.0)) throw DomainError("sensitivity must be positive");
  // e^eps / (e^eps - 1)^2 = e^{-eps} / (1 - e^{-eps})^2.
  const double em = std::exp(-epsilon);
  const double denom = -std::expm1(-epsilon);
  return sensitivity * sensitivity * em / (denom * denom);
}

}  // namespace udpfl

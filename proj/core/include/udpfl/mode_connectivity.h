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

#ifndef UDPFL_MODE_CONNECTIVITY_H_
#define UDPFL_MODE_CONNECTIVITY_H_

#include <span>
#include <string_view>

#include "udpfl/dataset.h"
#include "udpfl/loss_model.h"
#include "udpfl/model_vector.h"
#include "udpfl/noise_stream.h"

namespace udpfl {

enum class CurveKind { kPolygonalChain, kQuadraticBezier };

std::string_view CurveKindName(CurveKind kind);

// Curve phi_theta(p), p in [0, 1], from w1 to w2 bent through theta.
struct CurveSpec {
  CurveKind kind = CurveKind::kPolygonalChain;
  ModelVector w1;
  ModelVector w2;
  ModelVector theta;

  // theta = (w1 + w2) / 2.
  static CurveSpec WithMidpoint(CurveKind kind, ModelVector w1, ModelVector w2);

  void Validate() const;
};

// Polygonal chain:
//   2 (p theta + (0.5 - p) w1)         for p <= 0.5
//   2 ((p - 0.5) w2 + (1 - p) theta)   for p >  0.5
// Quadratic Bezier: (1-p)^2 w1 + 2p(1-p) theta + p^2 w2.
ModelVector CurvePoint(const CurveSpec& spec, double p);

// d phi_theta(p) / d theta, a scalar multiple of the identity.
double CurveBendWeight(CurveKind kind, double p);

struct CurveTrainConfig {
  int steps = 100;
  double learning_rate = 0.01;
  // Loss oracle; both must be set when steps > 0.
  const LossModel* loss = nullptr;
  const DatasetShard* shard = nullptr;
  CurveKind kind = CurveKind::kPolygonalChain;
};

// Stochastic minimization of E_{p ~ U(0,1)} loss(phi_theta(p)) over theta.
// Each step samples one p and moves theta along
// -lr * CurveBendWeight(p) * grad loss(phi_theta(p)). Endpoints are fixed.
// Returns the trained theta.
ModelVector TrainCurve(const CurveSpec& spec, const CurveTrainConfig& cfg,
                       NoiseStream& stream);

// Monte-Carlo estimate of E_p loss(phi_theta(p)) with `samples` draws.
double ExpectedCurveLoss(const CurveSpec& spec, const LossModel& loss,
                         const DatasetShard& shard, int samples,
                         NoiseStream& stream);

// Closed-form averaged Bezier bend for an L-smooth loss:
//   theta* = 1.2 / L + 1.1 w_bar - 0.1 v_bar,
// with 1.2 / L added to every coordinate.
ModelVector ThetaStar(double smoothness, const ModelVector& w_bar,
                      const ModelVector& v_bar);

// (1-r)^2 v + 2(r - r^2) theta + r^2 w.
ModelVector BezierFedAvgUpdate(const ModelVector& v, const ModelVector& theta,
                               const ModelVector& w, double r);

// Merge tree over `models` (already in ascending client-id order): adjacent
// pairs are replaced by their trained bend, an odd leftover carries to the
// next level, until one model remains. With cfg.steps == 0 every merge is
// the plain midpoint.
ModelVector ModeConnectAggregate(std::span<const ModelVector> models,
                                 const CurveTrainConfig& cfg,
                                 NoiseStream& stream);

// Delta^2 e^eps / (e^eps - 1)^2: order of the extra rounds staircase noise
// adds before the curve bend reaches a minimum.
double ExtraRoundsBound(double sensitivity, double epsilon);

}  // namespace udpfl

#endif  // UDPFL_MODE_CONNECTIVITY_H_

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
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "support/quadratic_loss.h"
#include "udpfl/errors.h"
#include "udpfl/noise_stream.h"

namespace udpfl {
namespace {

using udpfl::testing::DummyShard;
using udpfl::testing::QuadraticLoss;

constexpr CurveKind kKinds[] = {CurveKind::kPolygonalChain,
                                CurveKind::kQuadraticBezier};

ModelVector RandomVector(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 3.0);
  ModelVector v(d);
  for (double& x : v) x = n(rng);
  return v;
}

NoiseStream Stream(std::uint64_t seed) {
  return NoiseStream(seed, 0, 0, StreamPurpose::kTesting);
}

double CurveLoss(const CurveSpec& spec, std::uint64_t seed) {
  QuadraticLoss bowl(ModelVector(spec.w1.size()));
  NoiseStream s = Stream(seed);
  return ExpectedCurveLoss(spec, bowl, DummyShard(), 10000, s);
}

// --- curve_point -----------------------------------------------------------

TEST(CurvePointTest, EndpointsExact) {
  std::mt19937_64 rng(1);
  for (CurveKind kind : kKinds) {
    for (int trial = 0; trial < 50; ++trial) {
      CurveSpec spec{kind, RandomVector(7, rng), RandomVector(7, rng),
                     RandomVector(7, rng)};
      EXPECT_EQ(CurvePoint(spec, 0.0), spec.w1);
      EXPECT_EQ(CurvePoint(spec, 1.0), spec.w2);
    }
  }
}

TEST(CurvePointTest, PolygonalSpotValues) {
  const CurveSpec spec{CurveKind::kPolygonalChain, {1.0, 2.0}, {5.0, -4.0},
                       {0.5, 0.25}};
  EXPECT_EQ(CurvePoint(spec, 0.5), spec.theta);
  const ModelVector q = CurvePoint(spec, 0.75);
  EXPECT_DOUBLE_EQ(q[0], 0.5 * 5.0 + 0.5 * 0.5);
  EXPECT_DOUBLE_EQ(q[1], 0.5 * -4.0 + 0.5 * 0.25);
}

TEST(CurvePointTest, BezierFormula) {
  const CurveSpec spec{CurveKind::kQuadraticBezier, {1.0}, {3.0}, {-2.0}};
  const double p = 0.3;
  EXPECT_NEAR(CurvePoint(spec, p)[0],
              0.49 * 1.0 + 2 * 0.3 * 0.7 * -2.0 + 0.09 * 3.0, 1e-15);
}

TEST(CurvePointTest, PolygonalContinuousAtHalf) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    CurveSpec spec{CurveKind::kPolygonalChain, RandomVector(5, rng),
                   RandomVector(5, rng), RandomVector(5, rng)};
    const ModelVector left = CurvePoint(spec, 0.5);
    const ModelVector right = CurvePoint(spec, std::nextafter(0.5, 1.0));
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_DOUBLE_EQ(left[i], spec.theta[i]);
      EXPECT_NEAR(right[i], spec.theta[i], 1e-12 * (1 + std::abs(spec.w2[i])));
    }
  }
}

TEST(CurvePointTest, Errors) {
  const CurveSpec spec{CurveKind::kPolygonalChain, {0.0}, {1.0}, {0.5}};
  EXPECT_THROW(CurvePoint(spec, -0.1), DomainError);
  EXPECT_THROW(CurvePoint(spec, 1.1), DomainError);
  const CurveSpec bad{CurveKind::kPolygonalChain, {0.0}, {1.0, 2.0}, {0.5}};
  EXPECT_THROW(CurvePoint(bad, 0.5), MismatchError);
}

// --- train_curve -----------------------------------------------------------

TEST(TrainCurveTest, DescendsFromSuppliedBend) {
  QuadraticLoss bowl(ModelVector{0.0, 0.0});
  const DatasetShard shard = DummyShard();
  for (CurveKind kind : kKinds) {
    CurveSpec spec{kind, {1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}};
    const double before = CurveLoss(spec, 7);
    NoiseStream s = Stream(3);
    const CurveTrainConfig cfg{500, 0.01, &bowl, &shard, kind};
    CurveSpec trained = spec;
    trained.theta = TrainCurve(spec, cfg, s);
    EXPECT_LT(trained.theta.Norm(), spec.theta.Norm());
    EXPECT_LT(CurveLoss(trained, 7), before) << CurveKindName(kind);
    EXPECT_EQ(CurvePoint(trained, 0.0), spec.w1);
    EXPECT_EQ(CurvePoint(trained, 1.0), spec.w2);
  }
}

TEST(TrainCurveTest, DescendsFromMidpointInit) {
  QuadraticLoss bowl(ModelVector{0.0, 0.0});
  const DatasetShard shard = DummyShard();
  for (CurveKind kind : kKinds) {
    const CurveSpec spec = CurveSpec::WithMidpoint(kind, {1.0, 0.0}, {0.0, 1.0});
    NoiseStream s = Stream(4);
    CurveSpec trained = spec;
    trained.theta = TrainCurve(spec, {500, 0.01, &bowl, &shard, kind}, s);
    EXPECT_LT(CurveLoss(trained, 8), CurveLoss(spec, 8)) << CurveKindName(kind);
  }
}

TEST(TrainCurveTest, ZeroLearningRateKeepsTheta) {
  QuadraticLoss bowl(ModelVector{0.0, 0.0});
  const DatasetShard shard = DummyShard();
  const CurveSpec spec{CurveKind::kPolygonalChain, {1.0, 2.0}, {3.0, 4.0},
                       {-1.0, 5.0}};
  NoiseStream s = Stream(5);
  EXPECT_EQ(TrainCurve(spec, {100, 0.0, &bowl, &shard, spec.kind}, s),
            spec.theta);
}

TEST(TrainCurveTest, StationaryWhenCollapsedAtMinimum) {
  QuadraticLoss bowl(ModelVector{0.5, -1.5});
  const DatasetShard shard = DummyShard();
  const ModelVector w{0.5, -1.5};
  for (CurveKind kind : kKinds) {
    const CurveSpec spec{kind, w, w, w};
    NoiseStream s = Stream(6);
    EXPECT_EQ(TrainCurve(spec, {200, 0.1, &bowl, &shard, kind}, s), w);
  }
}

TEST(TrainCurveTest, NeedsOracle) {
  const CurveSpec spec{CurveKind::kPolygonalChain, {1.0}, {3.0}, {2.0}};
  NoiseStream s = Stream(1);
  EXPECT_THROW(TrainCurve(spec, {10, 0.1, nullptr, nullptr, spec.kind}, s),
               DomainError);
  EXPECT_EQ(TrainCurve(spec, {0, 0.1, nullptr, nullptr, spec.kind}, s),
            spec.theta);
}

// --- theta_star ------------------------------------------------------------

TEST(ThetaStarTest, PlugIn) {
  const ModelVector t = ThetaStar(1.0, ModelVector(4), ModelVector(4));
  for (double v : t) EXPECT_DOUBLE_EQ(v, 1.2);
}

TEST(ThetaStarTest, ResidualVanishes) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> l(0.1, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double smooth = l(rng);
    const ModelVector w = RandomVector(6, rng);
    const ModelVector v = RandomVector(6, rng);
    const ModelVector t = ThetaStar(smooth, w, v);
    for (std::size_t i = 0; i < 6; ++i) {
      const double residual = -1.0 / smooth + (5.0 / 6.0) * t[i] +
                              (1.0 / 12.0) * v[i] - (11.0 / 12.0) * w[i];
      EXPECT_LT(std::abs(residual), 1e-12);
    }
  }
}

TEST(ThetaStarTest, EqualInputs) {
  const ModelVector w{1.0, -2.0, 3.5};
  const ModelVector t = ThetaStar(4.0, w, w);
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_NEAR(t[i], 0.3 + w[i], 1e-15);
  }
}

TEST(ThetaStarTest, RejectsNonPositiveSmoothness) {
  EXPECT_THROW(ThetaStar(0.0, {1.0}, {1.0}), DomainError);
  EXPECT_THROW(ThetaStar(-1.0, {1.0}, {1.0}), DomainError);
}

// --- bezier_fedavg_update --------------------------------------------------

TEST(BezierFedAvgUpdateTest, SpotValues) {
  const ModelVector v{1.0, 2.0};
  const ModelVector theta{3.0, -1.0};
  const ModelVector w{-4.0, 8.0};
  EXPECT_EQ(BezierFedAvgUpdate(v, theta, w, 0.0), v);
  EXPECT_EQ(BezierFedAvgUpdate(v, theta, w, 1.0), w);
  const ModelVector mid = BezierFedAvgUpdate(v, theta, w, 0.5);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_DOUBLE_EQ(mid[i], 0.25 * v[i] + 0.5 * theta[i] + 0.25 * w[i]);
  }
}

TEST(BezierFedAvgUpdateTest, AffineCombination) {
  // Coefficients sum to 1: constant inputs reproduce the constant.
  for (double r = 0.0; r <= 1.0; r += 0.01) {
    const ModelVector c{2.5};
    EXPECT_NEAR(BezierFedAvgUpdate(c, c, c, r)[0], 2.5, 1e-15);
  }
  EXPECT_THROW(BezierFedAvgUpdate({1.0}, {1.0}, {1.0}, 1.5), DomainError);
}

// --- mode_connect_aggregate ------------------------------------------------

TEST(ModeConnectAggregateTest, SingleModel) {
  const ModelVector m{1.0, 2.0};
  NoiseStream s = Stream(1);
  EXPECT_EQ(ModeConnectAggregate(std::vector<ModelVector>{m}, {}, s), m);
}

TEST(ModeConnectAggregateTest, ZeroStepsGiveDyadicAverage) {
  const std::vector<ModelVector> models = {{1.0}, {2.0}, {4.0}, {8.0}, {16.0}};
  NoiseStream s = Stream(1);
  CurveTrainConfig cfg;
  cfg.steps = 0;
  // ((1+2)/2 + (4+8)/2)/2 = 3.75, then (3.75 + 16)/2.
  EXPECT_DOUBLE_EQ(ModeConnectAggregate(models, cfg, s)[0], (3.75 + 16.0) / 2);
}

TEST(ModeConnectAggregateTest, IdenticalModelsAreFixed) {
  // Bowl centred on the shared model: the collapsed curve sits at a point
  // with zero gradient.
  const ModelVector m{1.5, -2.0};
  QuadraticLoss bowl(m);
  const DatasetShard shard = DummyShard();
  const std::vector<ModelVector> models(2, m);
  NoiseStream s = Stream(2);
  EXPECT_EQ(ModeConnectAggregate(
                models, {50, 0.1, &bowl, &shard, CurveKind::kPolygonalChain}, s),
            m);
}

TEST(ModeConnectAggregateTest, Errors) {
  NoiseStream s = Stream(1);
  EXPECT_THROW(ModeConnectAggregate(std::vector<ModelVector>{}, {}, s),
               DomainError);
  CurveTrainConfig cfg;
  cfg.steps = 0;
  EXPECT_THROW(ModeConnectAggregate(std::vector<ModelVector>{{1.0}, {1.0, 2.0}},
                                    cfg, s),
               MismatchError);
}

// --- extra_rounds_bound ----------------------------------------------------

TEST(ExtraRoundsBoundTest, Values) {
  const double e = std::exp(1.0);
  EXPECT_NEAR(ExtraRoundsBound(1.0, 1.0), e / ((e - 1) * (e - 1)), 1e-14);
  EXPECT_NEAR(ExtraRoundsBound(1.0, 1.0), 0.92067, 1e-5);
  EXPECT_LT(ExtraRoundsBound(1.0, 50.0), 1e-20);
  EXPECT_NEAR(ExtraRoundsBound(2.0, 0.7), 4.0 * ExtraRoundsBound(1.0, 0.7),
              1e-12);
  EXPECT_THROW(ExtraRoundsBound(1.0, 0.0), DomainError);
  EXPECT_THROW(ExtraRoundsBound(1.0, -2.0), DomainError);
}

}  // namespace
}  // namespace udpfl
